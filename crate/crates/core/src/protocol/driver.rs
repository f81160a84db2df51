use super::{FailureReason, Phase, ProtocolError, ProtocolKind, Role, SessionContext, StepOutput};
use crate::crypto::Digest;
use crate::transport::{Channel, MessageMeta, TransportError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartyOutcome {
    Established { key_digest: Digest },
    Failed(FailureReason),
    /// Still waiting when the exchange stopped.
    Incomplete,
}

impl PartyOutcome {
    fn of(ctx: &SessionContext) -> Self {
        match (ctx.phase(), ctx.session_keys()) {
            (Phase::Established, Some(k)) => PartyOutcome::Established { key_digest: k.digest() },
            (Phase::Failed(r), _) => PartyOutcome::Failed(r.clone()),
            _ => PartyOutcome::Incomplete,
        }
    }

    pub fn key_digest(&self) -> Option<Digest> {
        match self {
            PartyOutcome::Established { key_digest } => Some(*key_digest),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandshakeReport {
    pub kind: ProtocolKind,
    pub initiator: PartyOutcome,
    pub responder: PartyOutcome,
    pub messages: usize,
    pub app_bytes: usize,
}

impl HandshakeReport {
    /// Both sides established with the same session key.
    pub fn agreed(&self) -> bool {
        match (self.initiator.key_digest(), self.responder.key_digest()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// First failure reported by either side.
    pub fn failure(&self) -> Option<&FailureReason> {
        [&self.initiator, &self.responder].into_iter().find_map(|o| match o {
            PartyOutcome::Failed(r) => Some(r),
            _ => None,
        })
    }
}

/// Runs a handshake between two fresh contexts over `channel`.
///
/// Messages travel as raw bytes; the receiver parses them against the step
/// it expects. A message that fails to reassemble is delivered as a
/// malformation failure to its receiver.
pub fn run_handshake(
    initiator: &mut SessionContext,
    responder: &mut SessionContext,
    channel: &mut Channel,
) -> Result<HandshakeReport, ProtocolError> {
    let kind = initiator.kind();
    let mut messages = 0;
    let mut app_bytes = 0;
    let mut sender = Role::Initiator;
    let mut out: StepOutput = initiator.step(None);
    while let Some(msg) = out.outgoing.take() {
        let bytes = msg.encode();
        let spans = msg.spans();
        let meta = MessageMeta {
            label: msg.step.name(),
            fields: &spans,
        };
        messages += 1;
        app_bytes += bytes.len();
        let receiver = sender.peer();
        let ctx = match receiver {
            Role::Initiator => &mut *initiator,
            Role::Responder => &mut *responder,
        };
        out = match channel.send(msg.step.direction(), &meta, &bytes) {
            Ok(delivery) => ctx.receive(&delivery.payload),
            Err(TransportError::Reassembly(e)) => ctx.abort(FailureReason::Malformed(e.to_string())),
            Err(e) => return Err(e.into()),
        };
        sender = receiver;
    }
    Ok(HandshakeReport {
        kind,
        initiator: PartyOutcome::of(initiator),
        responder: PartyOutcome::of(responder),
        messages,
        app_bytes,
    })
}

use super::keys::{derive_session_keys, SessionKeys};
use super::message::{ProtocolMessage, StepLabel, Transcript, NONCE_LEN};
use super::{AuthFailure, Event, FailureReason, FieldTag, Phase, ProtocolKind, Role, StepOutput};
use crate::crypto::metrics::{record, Primitive};
use crate::crypto::{
    ecdh, ecdsa_sign, ecdsa_verify, NonceMode, Point, Scalar, Signature, SymmetricKey,
    IV_LEN, SIGNATURE_LEN,
};
use crate::ecqv::{derive_public_key, CertifiedIdentity, DeviceId, ImplicitCertificate};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Everything a device brings to a handshake.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub kind: ProtocolKind,
    pub role: Role,
    pub identity: CertifiedIdentity,
    pub ca_public: Point,
    pub ca_id: DeviceId,
    /// If set, any other claimed peer identity is rejected.
    pub peer: Option<DeviceId>,
    /// Pairwise pre-shared MAC keys, by peer identity.
    pub psks: Vec<(DeviceId, SymmetricKey)>,
    /// Clock value for certificate validity checks.
    pub now: u32,
    pub nonce_mode: NonceMode,
    /// Seed of the session's randomness tape.
    pub seed: [u8; 32],
}

/// Per-handshake state of one party.
pub struct SessionContext {
    pub(super) kind: ProtocolKind,
    pub(super) role: Role,
    pub(super) identity: CertifiedIdentity,
    pub(super) ca_public: Point,
    pub(super) ca_id: DeviceId,
    pub(super) expected_peer: Option<DeviceId>,
    pub(super) psks: Vec<(DeviceId, SymmetricKey)>,
    pub(super) now: u32,
    pub(super) nonce_mode: NonceMode,
    pub(super) rng: ChaCha20Rng,
    pub(super) phase: Phase,
    pub(super) transcript: Transcript,

    pub(super) ephemeral: Option<Scalar>,
    pub(super) xg_self: Option<Point>,
    pub(super) xg_peer: Option<Point>,
    pub(super) nonce_self: Option<[u8; NONCE_LEN]>,
    pub(super) nonce_peer: Option<[u8; NONCE_LEN]>,
    pub(super) hello_self: Option<[u8; NONCE_LEN]>,
    pub(super) hello_peer: Option<[u8; NONCE_LEN]>,
    pub(super) peer_id: Option<DeviceId>,
    pub(super) peer_cert: Option<ImplicitCertificate>,
    pub(super) peer_public: Option<Point>,
    pub(super) psk: Option<SymmetricKey>,
    pub(super) keys: Option<SessionKeys>,
    pub(super) ivs: Option<([u8; IV_LEN], [u8; IV_LEN])>,
}

pub(super) enum Next {
    Await(StepLabel),
    Done,
}

pub(super) struct Transition {
    pub outgoing: Option<ProtocolMessage>,
    pub next: Next,
}

impl Transition {
    pub fn send(msg: ProtocolMessage, next: StepLabel) -> Self {
        Transition {
            outgoing: Some(msg),
            next: Next::Await(next),
        }
    }

    pub fn send_and_finish(msg: ProtocolMessage) -> Self {
        Transition {
            outgoing: Some(msg),
            next: Next::Done,
        }
    }

    pub fn finish() -> Self {
        Transition {
            outgoing: None,
            next: Next::Done,
        }
    }
}

pub(super) type StepResult = Result<Transition, FailureReason>;

impl SessionContext {
    pub fn new(config: SessionConfig) -> Self {
        SessionContext {
            kind: config.kind,
            role: config.role,
            identity: config.identity,
            ca_public: config.ca_public,
            ca_id: config.ca_id,
            expected_peer: config.peer,
            psks: config.psks,
            now: config.now,
            nonce_mode: config.nonce_mode,
            rng: ChaCha20Rng::from_seed(config.seed),
            phase: Phase::Start,
            transcript: Transcript::default(),
            ephemeral: None,
            xg_self: None,
            xg_peer: None,
            nonce_self: None,
            nonce_peer: None,
            hello_self: None,
            hello_peer: None,
            peer_id: None,
            peer_cert: None,
            peer_public: None,
            psk: None,
            keys: None,
            ivs: None,
        }
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn is_established(&self) -> bool {
        self.phase == Phase::Established
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn identity(&self) -> &CertifiedIdentity {
        &self.identity
    }

    pub fn peer_id(&self) -> Option<DeviceId> {
        self.peer_id
    }

    /// Session keys; only available once established.
    pub fn session_keys(&self) -> Option<&SessionKeys> {
        match self.phase {
            Phase::Established => self.keys.as_ref(),
            _ => None,
        }
    }

    /// Own ephemeral public point (STS only).
    pub fn ephemeral_public(&self) -> Option<Point> {
        self.xg_self
    }

    /// True when no usable ephemeral secret is held.
    pub fn ephemeral_erased(&self) -> bool {
        self.ephemeral.as_ref().map_or(true, Scalar::is_zero)
    }

    /// Key buffers as held, regardless of phase; lets tests confirm that
    /// failure wiped them.
    #[doc(hidden)]
    pub fn retained_keys(&self) -> Option<&SessionKeys> {
        self.keys.as_ref()
    }

    /// The step this context will accept next, if any.
    pub fn expected_step(&self) -> Option<StepLabel> {
        match (&self.phase, self.role) {
            (Phase::Start, Role::Responder) => Some(StepLabel::A1),
            (Phase::Awaiting(s), _) => Some(*s),
            _ => None,
        }
    }

    /// Advances the state machine.
    ///
    /// The initiator is started with `None`; every other call passes the
    /// peer's next message. Once the session is terminal, further input is
    /// answered with an out-of-order failure event and the state is left as
    /// is.
    pub fn step(&mut self, incoming: Option<&ProtocolMessage>) -> StepOutput {
        if self.phase.is_terminal() {
            return StepOutput {
                outgoing: None,
                event: Event::Failed(FailureReason::OutOfOrder {
                    expected: None,
                    got: incoming.map(|m| m.step),
                }),
            };
        }
        let result = match (&self.phase, incoming) {
            (Phase::Start, None) if self.role == Role::Initiator => self.dispatch(None),
            (_, Some(msg)) if Some(msg.step) == self.expected_step() => match msg.check(self.kind) {
                Ok(()) => {
                    self.transcript.push(msg.clone());
                    self.dispatch(Some(msg))
                }
                Err(e) => Err(FailureReason::Malformed(e.to_string())),
            },
            (_, msg) => Err(FailureReason::OutOfOrder {
                expected: self.expected_step(),
                got: msg.map(|m| m.step),
            }),
        };
        match result {
            Ok(t) => {
                if let Some(out) = &t.outgoing {
                    self.transcript.push(out.clone());
                }
                let event = match t.next {
                    Next::Await(s) => {
                        self.phase = Phase::Awaiting(s);
                        Event::None
                    }
                    Next::Done => {
                        self.phase = Phase::Established;
                        Event::Established
                    }
                };
                StepOutput {
                    outgoing: t.outgoing,
                    event,
                }
            }
            Err(reason) => self.abort(reason),
        }
    }

    /// Parses raw bytes as the expected next step and advances.
    pub fn receive(&mut self, bytes: &[u8]) -> StepOutput {
        let Some(step) = self.expected_step() else {
            return self.step(None);
        };
        match ProtocolMessage::parse(self.kind, step, bytes) {
            Ok(msg) => self.step(Some(&msg)),
            Err(e) => self.abort(FailureReason::Malformed(e.to_string())),
        }
    }

    /// Fails the session, erasing all derived key material.
    pub fn abort(&mut self, reason: FailureReason) -> StepOutput {
        if let Some(k) = self.keys.as_mut() {
            k.erase();
        }
        if let Some(x) = self.ephemeral.as_mut() {
            x.erase();
        }
        self.ivs = None;
        if !self.phase.is_terminal() {
            self.phase = Phase::Failed(reason.clone());
        }
        StepOutput {
            outgoing: None,
            event: Event::Failed(reason),
        }
    }

    fn dispatch(&mut self, incoming: Option<&ProtocolMessage>) -> StepResult {
        match self.kind {
            ProtocolKind::Sts | ProtocolKind::StsOpt1 | ProtocolKind::StsOpt2 => self.sts_step(incoming),
            ProtocolKind::SEcdsa | ProtocolKind::SEcdsaExt => self.secdsa_step(incoming),
            ProtocolKind::Scianc => self.scianc_step(incoming),
            ProtocolKind::Poramb => self.poramb_step(incoming),
        }
    }

    // ---- helpers shared by the protocol modules ----

    pub(super) fn random32(&mut self) -> [u8; NONCE_LEN] {
        record(Primitive::Random);
        let mut out = [0u8; NONCE_LEN];
        self.rng.fill_bytes(&mut out);
        out
    }

    pub(super) fn own_id(&self) -> [u8; 16] {
        self.identity.id().0
    }

    pub(super) fn own_cert(&self) -> [u8; crate::ecqv::CERT_LEN] {
        self.identity.certificate().encode()
    }

    pub(super) fn build(&self, step: StepLabel, parts: &[(FieldTag, &[u8])]) -> Result<ProtocolMessage, FailureReason> {
        ProtocolMessage::build(self.kind, step, parts).map_err(|e| FailureReason::Internal(e.to_string()))
    }

    /// Records the peer's claimed identity.
    pub(super) fn accept_peer_id(&mut self, bytes: &[u8]) -> Result<DeviceId, FailureReason> {
        let id = DeviceId::from_slice(bytes).map_err(|e| FailureReason::Malformed(e.to_string()))?;
        if self.expected_peer.is_some_and(|p| p != id) || id == self.identity.id() {
            return Err(FailureReason::Authentication(AuthFailure::UnexpectedPeer));
        }
        self.peer_id = Some(id);
        Ok(id)
    }

    /// Decodes and vets the peer certificate and derives the peer's public
    /// key from it. The subject must match the identity claimed earlier.
    pub(super) fn accept_peer_cert(&mut self, bytes: &[u8]) -> Result<Point, FailureReason> {
        let cert = ImplicitCertificate::decode(bytes).map_err(|e| FailureReason::Malformed(e.to_string()))?;
        let rejected = FailureReason::Authentication(AuthFailure::CertificateRejected);
        if cert.issuer_id != self.ca_id || Some(cert.subject_id) != self.peer_id || !cert.is_valid_at(self.now) {
            return Err(rejected);
        }
        let public = derive_public_key(&cert, &self.ca_public).map_err(|_| rejected)?;
        self.peer_cert = Some(cert);
        self.peer_public = Some(public);
        Ok(public)
    }

    pub(super) fn peer_public(&self) -> Result<Point, FailureReason> {
        self.peer_public
            .ok_or_else(|| FailureReason::Internal("peer key not yet known".into()))
    }

    pub(super) fn parse_ephemeral(bytes: &[u8]) -> Result<Point, FailureReason> {
        Point::from_raw(bytes).map_err(|_| FailureReason::Authentication(AuthFailure::InvalidEphemeral))
    }

    pub(super) fn parse_nonce(bytes: &[u8]) -> Result<[u8; NONCE_LEN], FailureReason> {
        bytes
            .try_into()
            .map_err(|_| FailureReason::Malformed("nonce length".into()))
    }

    /// Static premaster `x(d_self · Q_peer)`.
    pub(super) fn static_premaster(&self) -> Result<[u8; 32], FailureReason> {
        let shared = ecdh(self.identity.private_key(), &self.peer_public()?)?;
        Ok(shared.x_bytes())
    }

    pub(super) fn install_keys(&mut self, premaster: &[u8; 32], salt: &[u8]) -> Result<(), FailureReason> {
        self.keys = Some(derive_session_keys(premaster, salt, self.kind.kdf_label())?);
        Ok(())
    }

    pub(super) fn keys(&self) -> Result<&SessionKeys, FailureReason> {
        self.keys
            .as_ref()
            .ok_or_else(|| FailureReason::Internal("session keys not yet derived".into()))
    }

    pub(super) fn sign(&mut self, message: &[u8]) -> Result<Signature, FailureReason> {
        let key = self.identity.private_key().clone();
        Ok(ecdsa_sign(&key, message, self.nonce_mode, &mut self.rng)?)
    }

    pub(super) fn verify_peer(&self, message: &[u8], sig: &[u8]) -> Result<(), FailureReason> {
        let bad = FailureReason::Authentication(AuthFailure::BadSignature);
        let sig: [u8; SIGNATURE_LEN] = sig.try_into().map_err(|_| bad.clone())?;
        if ecdsa_verify(&self.peer_public()?, message, &Signature::from_bytes(sig)) {
            Ok(())
        } else {
            Err(bad)
        }
    }

    /// `(initiator value, responder value)` for a per-role quantity.
    pub(super) fn ordered<T: Copy>(&self, own: T, peer: T) -> (T, T) {
        match self.role {
            Role::Initiator => (own, peer),
            Role::Responder => (peer, own),
        }
    }

    pub(super) fn nonces(&self) -> Result<([u8; NONCE_LEN], [u8; NONCE_LEN]), FailureReason> {
        match (self.nonce_self, self.nonce_peer) {
            (Some(a), Some(b)) => Ok(self.ordered(a, b)),
            _ => Err(FailureReason::Internal("nonces missing".into())),
        }
    }

    pub(super) fn ack(&self, bytes: &[u8]) -> Result<(), FailureReason> {
        match bytes {
            [super::ACK_OK] => Ok(()),
            [0x00] => Err(FailureReason::Authentication(AuthFailure::Nack)),
            _ => Err(FailureReason::Malformed("unknown status byte".into())),
        }
    }
}

impl std::fmt::Debug for SessionContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SessionContext")
            .field("kind", &self.kind)
            .field("role", &self.role)
            .field("phase", &self.phase)
            .field("messages", &self.transcript.len())
            .finish_non_exhaustive()
    }
}

/// Field bytes of a message already checked against its layout.
pub(super) fn field(msg: &ProtocolMessage, tag: FieldTag) -> Result<&[u8], FailureReason> {
    msg.field(tag)
        .ok_or_else(|| FailureReason::Malformed(format!("{} lacks {}", msg.step, tag)))
}

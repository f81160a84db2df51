//! Key-derivation handshakes as message-driven state machines.
//!
//! Every protocol is driven through [`SessionContext::step`]: the initiator
//! is started with `None`, and each side is then fed the peer's messages in
//! order. Messages carry no framing of their own; the step label and the
//! per-step field layout are implied by the protocol position.

mod driver;
mod keys;
mod message;
mod poramb;
mod schedule;
mod scianc;
mod secdsa;
mod session;
mod sts;
mod testbed;

pub use driver::{run_handshake, HandshakeReport, PartyOutcome};
pub use keys::{derive_session_keys, sts_ivs, SessionKeys, ENC_KEY_LEN, MAC_KEY_LEN};
pub use message::{
    layout, Field, FieldTag, MessageError, ProtocolMessage, StepLabel, Transcript,
    TranscriptError, ACK_OK, FINISH_TYPE, NONCE_LEN, ROLE_INITIATOR, ROLE_RESPONDER,
};
pub use poramb::{finish_tag, poramb_mac};
pub use schedule::{opt_schedule, Device, OpNode, Schedule};
pub use scianc::auth_mac;
pub use secdsa::ext_fin;
pub use session::{SessionConfig, SessionContext};
pub use testbed::Testbed;

use crate::crypto::CryptoError;
use crate::ecqv::EcqvError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProtocolKind {
    #[serde(rename = "sts")]
    Sts,
    #[serde(rename = "sts-opt1")]
    StsOpt1,
    #[serde(rename = "sts-opt2")]
    StsOpt2,
    #[serde(rename = "s-ecdsa")]
    SEcdsa,
    #[serde(rename = "s-ecdsa-ext")]
    SEcdsaExt,
    #[serde(rename = "scianc")]
    Scianc,
    #[serde(rename = "poramb")]
    Poramb,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 7] = [
        ProtocolKind::Sts,
        ProtocolKind::StsOpt1,
        ProtocolKind::StsOpt2,
        ProtocolKind::SEcdsa,
        ProtocolKind::SEcdsaExt,
        ProtocolKind::Scianc,
        ProtocolKind::Poramb,
    ];

    /// Short lowercase name used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Sts => "sts",
            ProtocolKind::StsOpt1 => "sts-opt1",
            ProtocolKind::StsOpt2 => "sts-opt2",
            ProtocolKind::SEcdsa => "s-ecdsa",
            ProtocolKind::SEcdsaExt => "s-ecdsa-ext",
            ProtocolKind::Scianc => "scianc",
            ProtocolKind::Poramb => "poramb",
        }
    }

    pub fn is_sts(self) -> bool {
        matches!(self, ProtocolKind::Sts | ProtocolKind::StsOpt1 | ProtocolKind::StsOpt2)
    }

    /// Dynamic key derivation: a fresh premaster per session.
    pub fn is_dynamic(self) -> bool {
        self.is_sts()
    }

    pub fn steps(self) -> &'static [StepLabel] {
        use StepLabel::*;
        match self {
            ProtocolKind::SEcdsaExt => &[A1, B1, A2, B2, A3],
            ProtocolKind::Poramb => &[A1, B1, A2, B2, A3, B3],
            _ => &[A1, B1, A2, B2],
        }
    }

    /// `info` input of the session-key derivation.
    pub fn kdf_label(self) -> &'static [u8] {
        match self {
            ProtocolKind::Sts | ProtocolKind::StsOpt1 | ProtocolKind::StsOpt2 => b"sts-ecqv-v1",
            ProtocolKind::SEcdsa | ProtocolKind::SEcdsaExt => b"secdsa-v1",
            ProtocolKind::Scianc => b"scianc-v1",
            ProtocolKind::Poramb => b"poramb-v1",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown protocol `{0}`")]
pub struct UnknownProtocol(pub String);

impl FromStr for ProtocolKind {
    type Err = UnknownProtocol;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let norm = norm.as_str();
        Ok(match norm {
            "sts" => ProtocolKind::Sts,
            "sts-opt1" | "sts-opt-1" | "sts-opti" => ProtocolKind::StsOpt1,
            "sts-opt2" | "sts-opt-2" | "sts-optii" => ProtocolKind::StsOpt2,
            "s-ecdsa" | "secdsa" => ProtocolKind::SEcdsa,
            "s-ecdsa-ext" | "secdsa-ext" | "s-ecdsa+ext" => ProtocolKind::SEcdsaExt,
            "scianc" => ProtocolKind::Scianc,
            "poramb" => ProtocolKind::Poramb,
            _ => return Err(UnknownProtocol(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Initiator,
    Responder,
}

impl Role {
    pub fn peer(self) -> Role {
        match self {
            Role::Initiator => Role::Responder,
            Role::Responder => Role::Initiator,
        }
    }

    pub fn byte(self) -> u8 {
        match self {
            Role::Initiator => ROLE_INITIATOR,
            Role::Responder => ROLE_RESPONDER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuthFailure {
    /// Peer ephemeral is off-curve or yields the identity.
    InvalidEphemeral,
    BadSignature,
    BadMac,
    CertificateRejected,
    UnexpectedPeer,
    BadFinish,
    /// Peer reported failure in its status byte.
    Nack,
}

impl fmt::Display for AuthFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AuthFailure::InvalidEphemeral => "invalid ephemeral point",
            AuthFailure::BadSignature => "signature rejected",
            AuthFailure::BadMac => "MAC rejected",
            AuthFailure::CertificateRejected => "certificate rejected",
            AuthFailure::UnexpectedPeer => "unexpected peer identity",
            AuthFailure::BadFinish => "finished message rejected",
            AuthFailure::Nack => "peer reported failure",
        })
    }
}

/// Why a session failed. Transport-level malformation and authentication
/// failure are kept apart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureReason {
    OutOfOrder {
        expected: Option<StepLabel>,
        got: Option<StepLabel>,
    },
    Malformed(String),
    Authentication(AuthFailure),
    Provisioning(String),
    Internal(String),
}

impl FailureReason {
    pub fn is_authentication(&self) -> bool {
        matches!(self, FailureReason::Authentication(_))
    }

    /// Single-word category for reports and exit messages.
    pub fn category(&self) -> &'static str {
        match self {
            FailureReason::OutOfOrder { .. } => "out-of-order",
            FailureReason::Malformed(_) => "malformed",
            FailureReason::Authentication(_) => "authentication",
            FailureReason::Provisioning(_) => "provisioning",
            FailureReason::Internal(_) => "internal",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::OutOfOrder { expected, got } => {
                let show = |s: &Option<StepLabel>| s.map_or("nothing".to_string(), |s| s.to_string());
                write!(f, "out-of-order: expected {}, got {}", show(expected), show(got))
            }
            FailureReason::Malformed(m) => write!(f, "malformed: {m}"),
            FailureReason::Authentication(a) => write!(f, "authentication: {a}"),
            FailureReason::Provisioning(m) => write!(f, "provisioning: {m}"),
            FailureReason::Internal(m) => write!(f, "internal: {m}"),
        }
    }
}

impl From<CryptoError> for FailureReason {
    fn from(e: CryptoError) -> Self {
        FailureReason::Internal(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phase {
    Start,
    Awaiting(StepLabel),
    Established,
    Failed(FailureReason),
}

impl Phase {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Phase::Established | Phase::Failed(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    None,
    Established,
    Failed(FailureReason),
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub outgoing: Option<ProtocolMessage>,
    pub event: Event,
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("{0} has no STS operation schedule")]
    NotSts(ProtocolKind),
    #[error(transparent)]
    Ecqv(#[from] EcqvError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("transport: {0}")]
    Transport(#[from] crate::transport::TransportError),
}

//! Simulated CAN-FD link with ISO-TP segmentation.
//!
//! A [`Channel`] carries application payloads between two endpoints in
//! virtual time, records every frame, keeps a [`ByteLedger`] and lets an
//! optional [`Adversary`] observe or rewrite frames before delivery.

mod adversary;
mod channel;
mod isotp;
mod ledger;

pub use adversary::{Adversary, CapturedMessage, FieldSpan, MessageMeta, Observer, Replacer, Tamperer};
pub use channel::{Channel, ChannelConfig, Delivery, Direction, LoggedFrame};
pub use isotp::{
    fragment, locate, reassemble, CanId, Frame, FrameKind, ReassemblyError, CANFD_MAX_DATA,
    CF_DATA, FF_DATA, ISOTP_MAX_PAYLOAD, PADDING_BYTE, SF_MAX,
};
pub use ledger::{ByteLedger, DirectionTotals, StepRecord};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("payload of {0} bytes exceeds the ISO-TP limit of {ISOTP_MAX_PAYLOAD}")]
    Oversize(usize),
    #[error("empty payload")]
    Empty,
    #[error("reassembly failed: {0}")]
    Reassembly(#[from] ReassemblyError),
    #[error("channel closed")]
    Closed,
}

//! ISO 15765-2 segmentation for CAN-FD (64-byte frames).
//!
//! PCI layouts:
//!
//! | frame       | PCI bytes | encoding                                  | data |
//! |-------------|-----------|-------------------------------------------|------|
//! | single      | 1         | `0x0L`, L = 1..=7                         | ≤ 7  |
//! | single      | 2         | `0x00, L`, L = 8..=62                     | ≤ 62 |
//! | first       | 2         | `0x1H, LL`, 12-bit total length           | 62   |
//! | consecutive | 1         | `0x2S`, S = sequence number mod 16        | ≤ 63 |
//!
//! Flow control is not generated: the simulated receiver never throttles.
//! Frames shorter than 64 bytes are padded to the next valid CAN-FD data
//! length with [`PADDING_BYTE`].

use super::TransportError;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const CANFD_MAX_DATA: usize = 64;
pub const ISOTP_MAX_PAYLOAD: usize = 4095;
/// Largest payload that fits a single frame.
pub const SF_MAX: usize = 62;
/// Payload bytes carried by a first frame.
pub const FF_DATA: usize = 62;
/// Payload bytes carried by a full consecutive frame.
pub const CF_DATA: usize = 63;
pub const PADDING_BYTE: u8 = 0xCC;

const CANFD_DLC_LENGTHS: [usize; 16] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 12, 16, 20, 24, 32, 48, 64];

/// 11-bit standard CAN identifier.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanId(u16);

impl CanId {
    pub const fn new(id: u16) -> Option<Self> {
        if id <= 0x7FF {
            Some(CanId(id))
        } else {
            None
        }
    }

    pub fn raw(self) -> u16 {
        self.0
    }
}

impl fmt::Debug for CanId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanId({:03X})", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Single,
    First,
    Consecutive,
    FlowControl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub can_id: CanId,
    pub data: Vec<u8>,
}

impl Frame {
    pub fn kind(&self) -> Option<FrameKind> {
        match self.data.first()? >> 4 {
            0 => Some(FrameKind::Single),
            1 => Some(FrameKind::First),
            2 => Some(FrameKind::Consecutive),
            3 => Some(FrameKind::FlowControl),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReassemblyError {
    #[error("no frames")]
    NoFrames,
    #[error("frame {index} exceeds {CANFD_MAX_DATA} bytes")]
    FrameTooLong { index: usize },
    #[error("frame {index} has an invalid protocol control byte")]
    BadPci { index: usize },
    #[error("frame {index}: unexpected {kind:?} frame")]
    UnexpectedFrame { index: usize, kind: FrameKind },
    #[error("frame {index}: sequence number {got}, expected {expected}")]
    SequenceGap { index: usize, expected: u8, got: u8 },
    #[error("announced length {announced}, received {received}")]
    LengthMismatch { announced: usize, received: usize },
    #[error("{0} frame(s) after the message was complete")]
    TrailingFrames(usize),
}

fn padded(mut data: Vec<u8>) -> Vec<u8> {
    let target = CANFD_DLC_LENGTHS
        .iter()
        .copied()
        .find(|&l| l >= data.len())
        .unwrap_or(CANFD_MAX_DATA);
    data.resize(target, PADDING_BYTE);
    data
}

pub fn fragment(can_id: CanId, payload: &[u8]) -> Result<Vec<Frame>, TransportError> {
    let len = payload.len();
    if len == 0 {
        return Err(TransportError::Empty);
    }
    if len > ISOTP_MAX_PAYLOAD {
        return Err(TransportError::Oversize(len));
    }
    let frame = |data: Vec<u8>| Frame {
        can_id,
        data: padded(data),
    };
    if len <= 7 {
        let mut data = vec![len as u8];
        data.extend_from_slice(payload);
        return Ok(vec![frame(data)]);
    }
    if len <= SF_MAX {
        let mut data = vec![0x00, len as u8];
        data.extend_from_slice(payload);
        return Ok(vec![frame(data)]);
    }
    let mut frames = Vec::with_capacity(1 + (len - FF_DATA).div_ceil(CF_DATA));
    let mut first = vec![0x10 | (len >> 8) as u8, len as u8];
    first.extend_from_slice(&payload[..FF_DATA]);
    frames.push(frame(first));
    for (i, chunk) in payload[FF_DATA..].chunks(CF_DATA).enumerate() {
        let seq = ((i + 1) % 16) as u8;
        let mut data = vec![0x20 | seq];
        data.extend_from_slice(chunk);
        frames.push(frame(data));
    }
    Ok(frames)
}

pub fn reassemble(frames: &[Frame]) -> Result<Vec<u8>, ReassemblyError> {
    let first = frames.first().ok_or(ReassemblyError::NoFrames)?;
    if let Some(index) = frames.iter().position(|f| f.data.len() > CANFD_MAX_DATA) {
        return Err(ReassemblyError::FrameTooLong { index });
    }
    let kind = first.kind().ok_or(ReassemblyError::BadPci { index: 0 })?;
    let d = &first.data;
    match kind {
        FrameKind::Single => {
            let (len, start) = match d[0] & 0x0F {
                0 => {
                    let len = *d.get(1).ok_or(ReassemblyError::BadPci { index: 0 })? as usize;
                    if !(8..=SF_MAX).contains(&len) {
                        return Err(ReassemblyError::BadPci { index: 0 });
                    }
                    (len, 2)
                }
                l => (l as usize, 1),
            };
            if d.len() < start + len {
                return Err(ReassemblyError::LengthMismatch {
                    announced: len,
                    received: d.len() - start,
                });
            }
            if frames.len() > 1 {
                return Err(ReassemblyError::TrailingFrames(frames.len() - 1));
            }
            Ok(d[start..start + len].to_vec())
        }
        FrameKind::First => {
            if d.len() < 2 {
                return Err(ReassemblyError::BadPci { index: 0 });
            }
            let announced = (((d[0] & 0x0F) as usize) << 8) | d[1] as usize;
            if announced <= SF_MAX {
                return Err(ReassemblyError::BadPci { index: 0 });
            }
            let mut out = Vec::with_capacity(announced);
            out.extend_from_slice(&d[2..(2 + FF_DATA).min(d.len())]);
            if out.len() != FF_DATA {
                return Err(ReassemblyError::LengthMismatch {
                    announced,
                    received: out.len(),
                });
            }
            let mut expected = 1u8;
            let mut consumed = 1;
            for (index, f) in frames.iter().enumerate().skip(1) {
                if out.len() == announced {
                    break;
                }
                match f.kind() {
                    Some(FrameKind::Consecutive) => {}
                    Some(kind) => return Err(ReassemblyError::UnexpectedFrame { index, kind }),
                    None => return Err(ReassemblyError::BadPci { index }),
                }
                let got = f.data[0] & 0x0F;
                if got != expected {
                    return Err(ReassemblyError::SequenceGap {
                        index,
                        expected,
                        got,
                    });
                }
                let take = (announced - out.len()).min(CF_DATA);
                if f.data.len() < 1 + take {
                    return Err(ReassemblyError::LengthMismatch {
                        announced,
                        received: out.len() + f.data.len() - 1,
                    });
                }
                out.extend_from_slice(&f.data[1..1 + take]);
                expected = (expected + 1) % 16;
                consumed += 1;
            }
            if out.len() != announced {
                return Err(ReassemblyError::LengthMismatch {
                    announced,
                    received: out.len(),
                });
            }
            if consumed < frames.len() {
                return Err(ReassemblyError::TrailingFrames(frames.len() - consumed));
            }
            Ok(out)
        }
        other => Err(ReassemblyError::UnexpectedFrame {
            index: 0,
            kind: other,
        }),
    }
}

/// Maps a payload byte offset to `(frame index, byte index within frame)`
/// for a payload of `payload_len` bytes.
pub fn locate(payload_len: usize, offset: usize) -> Option<(usize, usize)> {
    if offset >= payload_len || payload_len == 0 || payload_len > ISOTP_MAX_PAYLOAD {
        return None;
    }
    if payload_len <= 7 {
        return Some((0, 1 + offset));
    }
    if payload_len <= SF_MAX {
        return Some((0, 2 + offset));
    }
    if offset < FF_DATA {
        return Some((0, 2 + offset));
    }
    let rest = offset - FF_DATA;
    Some((1 + rest / CF_DATA, 1 + rest % CF_DATA))
}

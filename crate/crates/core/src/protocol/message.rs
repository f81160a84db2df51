use super::{ProtocolKind, Role};
use crate::crypto::{CMAC_TAG_LEN, HMAC_TAG_LEN, RAW_POINT_LEN, SIGNATURE_LEN};
use crate::ecqv::{CERT_LEN, ID_LEN};
use crate::transport::{Direction, FieldSpan};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fmt::Write as _;
use thiserror::Error;

pub const NONCE_LEN: usize = 32;
pub const ROLE_INITIATOR: u8 = 0x01;
pub const ROLE_RESPONDER: u8 = 0x02;
pub const ACK_OK: u8 = 0x01;
pub const FINISH_TYPE: u8 = 0x14;

const EXT_FIN_LEN: usize = 96;
const FINISH_LEN: usize = 197;
const PORAMB_MAC_LEN: usize = 2 * CMAC_TAG_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StepLabel {
    A1,
    B1,
    A2,
    B2,
    A3,
    B3,
}

impl StepLabel {
    pub const ALL: [StepLabel; 6] = [
        StepLabel::A1,
        StepLabel::B1,
        StepLabel::A2,
        StepLabel::B2,
        StepLabel::A3,
        StepLabel::B3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StepLabel::A1 => "A1",
            StepLabel::B1 => "B1",
            StepLabel::A2 => "A2",
            StepLabel::B2 => "B2",
            StepLabel::A3 => "A3",
            StepLabel::B3 => "B3",
        }
    }

    pub fn sender(self) -> Role {
        match self {
            StepLabel::A1 | StepLabel::A2 | StepLabel::A3 => Role::Initiator,
            _ => Role::Responder,
        }
    }

    pub fn direction(self) -> Direction {
        match self.sender() {
            Role::Initiator => Direction::AtoB,
            Role::Responder => Direction::BtoA,
        }
    }

    fn code(self) -> u8 {
        self as u8
    }

    fn from_code(c: u8) -> Option<Self> {
        Self::ALL.get(c as usize).copied()
    }
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldTag {
    Id,
    Nonce,
    Cert,
    Sign,
    Xg,
    Resp,
    Ack,
    ExtFin,
    AuthMac,
    Hello,
    Mac,
    Finish,
}

impl FieldTag {
    pub fn name(self) -> &'static str {
        match self {
            FieldTag::Id => "ID",
            FieldTag::Nonce => "Nonce",
            FieldTag::Cert => "Cert",
            FieldTag::Sign => "Sign",
            FieldTag::Xg => "XG",
            FieldTag::Resp => "Resp",
            FieldTag::Ack => "ACK",
            FieldTag::ExtFin => "Ext_Fin",
            FieldTag::AuthMac => "Auth_MAC",
            FieldTag::Hello => "Hello",
            FieldTag::Mac => "MAC",
            FieldTag::Finish => "Finish",
        }
    }

    pub fn len(self) -> usize {
        match self {
            FieldTag::Id => ID_LEN,
            FieldTag::Nonce | FieldTag::Hello => NONCE_LEN,
            FieldTag::Cert => CERT_LEN,
            FieldTag::Sign | FieldTag::Resp => SIGNATURE_LEN,
            FieldTag::Xg => RAW_POINT_LEN,
            FieldTag::Ack => 1,
            FieldTag::ExtFin => EXT_FIN_LEN,
            FieldTag::AuthMac => HMAC_TAG_LEN,
            FieldTag::Mac => PORAMB_MAC_LEN,
            FieldTag::Finish => FINISH_LEN,
        }
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Field order of each step, or `None` if the protocol has no such step.
pub fn layout(kind: ProtocolKind, step: StepLabel) -> Option<&'static [FieldTag]> {
    use FieldTag::*;
    use ProtocolKind as K;
    use StepLabel::*;
    Some(match (kind, step) {
        (K::Sts, A1) => &[Id, Xg],
        (K::Sts, B1) | (K::StsOpt1, B1) | (K::StsOpt2, B1) => &[Id, Cert, Xg, Resp],
        (K::Sts, A2) => &[Cert, Resp],
        (K::StsOpt1, A1) | (K::StsOpt2, A1) => &[Id, Xg, Cert],
        (K::StsOpt1, A2) | (K::StsOpt2, A2) => &[Resp],
        (K::Sts, B2) | (K::StsOpt1, B2) | (K::StsOpt2, B2) | (K::SEcdsa, B2) => &[Ack],

        (K::SEcdsa, A1) | (K::SEcdsaExt, A1) => &[Id, Nonce],
        (K::SEcdsa, B1) | (K::SEcdsaExt, B1) => &[Id, Cert, Sign, Nonce],
        (K::SEcdsa, A2) | (K::SEcdsaExt, A2) => &[Cert, Sign],
        (K::SEcdsaExt, B2) => &[Ack, ExtFin],
        (K::SEcdsaExt, A3) => &[ExtFin],

        (K::Scianc, A1) | (K::Scianc, B1) => &[Id, Nonce, Cert],
        (K::Scianc, A2) | (K::Scianc, B2) => &[AuthMac],

        (K::Poramb, A1) | (K::Poramb, B1) => &[Hello, Id],
        (K::Poramb, A2) | (K::Poramb, B2) => &[Cert, Nonce, Mac],
        (K::Poramb, A3) | (K::Poramb, B3) => &[Finish],
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MessageError {
    #[error("{kind} has no step {step}")]
    NoSuchStep { kind: ProtocolKind, step: StepLabel },
    #[error("{step} must be {expected} bytes, got {got}")]
    Length {
        step: StepLabel,
        expected: usize,
        got: usize,
    },
    #[error("{step} field layout does not match {kind}")]
    Layout { kind: ProtocolKind, step: StepLabel },
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Field {
    pub tag: FieldTag,
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.tag, self.bytes.len())
    }
}

/// A handshake message: its step and ordered fields. The wire form is the
/// plain concatenation of the field bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolMessage {
    pub step: StepLabel,
    pub fields: Vec<Field>,
}

impl ProtocolMessage {
    /// Builds a message, checking tags and lengths against the layout.
    pub fn build(
        kind: ProtocolKind,
        step: StepLabel,
        parts: &[(FieldTag, &[u8])],
    ) -> Result<Self, MessageError> {
        let msg = ProtocolMessage {
            step,
            fields: parts
                .iter()
                .map(|(tag, bytes)| Field {
                    tag: *tag,
                    bytes: bytes.to_vec(),
                })
                .collect(),
        };
        msg.check(kind)?;
        Ok(msg)
    }

    pub fn parse(kind: ProtocolKind, step: StepLabel, bytes: &[u8]) -> Result<Self, MessageError> {
        let tags = layout(kind, step).ok_or(MessageError::NoSuchStep { kind, step })?;
        let expected: usize = tags.iter().map(|t| t.len()).sum();
        if bytes.len() != expected {
            return Err(MessageError::Length {
                step,
                expected,
                got: bytes.len(),
            });
        }
        let mut offset = 0;
        let fields = tags
            .iter()
            .map(|&tag| {
                let f = Field {
                    tag,
                    bytes: bytes[offset..offset + tag.len()].to_vec(),
                };
                offset += tag.len();
                f
            })
            .collect();
        Ok(ProtocolMessage { step, fields })
    }

    /// Checks that the fields match the layout of `kind` exactly.
    pub fn check(&self, kind: ProtocolKind) -> Result<(), MessageError> {
        let step = self.step;
        let tags = layout(kind, step).ok_or(MessageError::NoSuchStep { kind, step })?;
        if tags.len() != self.fields.len() || tags.iter().zip(&self.fields).any(|(t, f)| *t != f.tag) {
            return Err(MessageError::Layout { kind, step });
        }
        let expected: usize = tags.iter().map(|t| t.len()).sum();
        if self.len() != expected || self.fields.iter().any(|f| f.bytes.len() != f.tag.len()) {
            return Err(MessageError::Length {
                step,
                expected,
                got: self.len(),
            });
        }
        Ok(())
    }

    pub fn encode(&self) -> Vec<u8> {
        self.fields.iter().flat_map(|f| f.bytes.iter().copied()).collect()
    }

    pub fn len(&self) -> usize {
        self.fields.iter().map(|f| f.bytes.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bytes of the first field with `tag`.
    pub fn field(&self, tag: FieldTag) -> Option<&[u8]> {
        self.fields.iter().find(|f| f.tag == tag).map(|f| f.bytes.as_slice())
    }

    pub fn field_mut(&mut self, tag: FieldTag) -> Option<&mut Vec<u8>> {
        self.fields.iter_mut().find(|f| f.tag == tag).map(|f| &mut f.bytes)
    }

    /// Byte spans of every field within the encoding.
    pub fn spans(&self) -> Vec<FieldSpan> {
        let mut offset = 0;
        self.fields
            .iter()
            .map(|f| {
                let span = FieldSpan {
                    name: f.tag.name(),
                    offset,
                    len: f.bytes.len(),
                };
                offset += f.bytes.len();
                span
            })
            .collect()
    }

    /// `ID(16), XG(64)`
    pub fn breakdown(&self) -> String {
        self.fields
            .iter()
            .map(|f| format!("{}({})", f.tag, f.bytes.len()))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("truncated transcript at byte {0}")]
    Truncated(usize),
    #[error("unknown step code {0:#04x}")]
    StepCode(u8),
    #[error(transparent)]
    Message(#[from] MessageError),
}

/// Ordered record of every message a session sent or received.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    messages: Vec<ProtocolMessage>,
}

impl Transcript {
    pub fn push(&mut self, msg: ProtocolMessage) {
        self.messages.push(msg);
    }

    pub fn messages(&self) -> &[ProtocolMessage] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn get(&self, step: StepLabel) -> Option<&ProtocolMessage> {
        self.messages.iter().find(|m| m.step == step)
    }

    pub fn total_bytes(&self) -> usize {
        self.messages.iter().map(|m| m.len()).sum()
    }

    /// Concatenated encodings of all messages preceding `step`.
    pub fn bytes_before(&self, step: StepLabel) -> Vec<u8> {
        self.messages
            .iter()
            .take_while(|m| m.step != step)
            .flat_map(|m| m.encode())
            .collect()
    }

    /// Length-prefixed binary form: per message `step(1) ‖ len(2, BE) ‖ bytes`.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.total_bytes() + 3 * self.len());
        for m in &self.messages {
            let enc = m.encode();
            out.push(m.step.code());
            out.extend_from_slice(&(enc.len() as u16).to_be_bytes());
            out.extend_from_slice(&enc);
        }
        out
    }

    pub fn from_binary(kind: ProtocolKind, bytes: &[u8]) -> Result<Self, TranscriptError> {
        let mut messages = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            if bytes.len() - i < 3 {
                return Err(TranscriptError::Truncated(i));
            }
            let step = StepLabel::from_code(bytes[i]).ok_or(TranscriptError::StepCode(bytes[i]))?;
            let len = u16::from_be_bytes([bytes[i + 1], bytes[i + 2]]) as usize;
            let body = bytes
                .get(i + 3..i + 3 + len)
                .ok_or(TranscriptError::Truncated(i))?;
            messages.push(ProtocolMessage::parse(kind, step, body)?);
            i += 3 + len;
        }
        Ok(Transcript { messages })
    }

    /// One line per message: `step len hex`.
    pub fn to_hex_dump(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            let _ = writeln!(out, "{} {} {}", m.step, m.len(), hex::encode(m.encode()));
        }
        out
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

use super::{fragment, locate, reassemble, Direction, Frame};

/// Location of a named field inside an application payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpan {
    pub name: &'static str,
    pub offset: usize,
    pub len: usize,
}

/// What the link layer knows about a message in flight.
#[derive(Debug, Clone, Copy)]
pub struct MessageMeta<'a> {
    pub label: &'a str,
    pub fields: &'a [FieldSpan],
}

impl MessageMeta<'_> {
    pub fn payload_len(&self) -> usize {
        self.fields.iter().map(|f| f.len).sum()
    }

    pub fn field(&self, name: &str) -> Option<&FieldSpan> {
        self.fields.iter().find(|f| f.name.eq_ignore_ascii_case(name))
    }
}

/// Man-in-the-middle hook, run synchronously on every message before
/// delivery. It may inspect and rewrite the frame list in place.
pub trait Adversary {
    fn intercept(&mut self, direction: Direction, meta: &MessageMeta<'_>, frames: &mut Vec<Frame>);
}

impl<F> Adversary for F
where
    F: FnMut(Direction, &MessageMeta<'_>, &mut Vec<Frame>),
{
    fn intercept(&mut self, direction: Direction, meta: &MessageMeta<'_>, frames: &mut Vec<Frame>) {
        self(direction, meta, frames)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapturedMessage {
    pub direction: Direction,
    pub label: String,
    pub frames: Vec<Frame>,
    /// `None` when the captured frames do not reassemble.
    pub payload: Option<Vec<u8>>,
}

/// Passive eavesdropper: records everything, changes nothing.
#[derive(Debug, Default)]
pub struct Observer {
    pub captured: Vec<CapturedMessage>,
}

impl Adversary for Observer {
    fn intercept(&mut self, direction: Direction, meta: &MessageMeta<'_>, frames: &mut Vec<Frame>) {
        self.captured.push(CapturedMessage {
            direction,
            label: meta.label.to_string(),
            frames: frames.clone(),
            payload: reassemble(frames).ok(),
        });
    }
}

/// XORs `mask` into one byte of a named field, at the frame level.
///
/// With `step` unset, the first message carrying the field is hit; only one
/// message is ever modified.
#[derive(Debug, Clone)]
pub struct Tamperer {
    pub step: Option<String>,
    pub field: String,
    pub offset: usize,
    pub mask: u8,
    pub hits: usize,
}

impl Tamperer {
    pub fn new(field: &str, offset: usize) -> Self {
        Tamperer {
            step: None,
            field: field.to_string(),
            offset,
            mask: 0x01,
            hits: 0,
        }
    }

    pub fn in_step(mut self, step: &str) -> Self {
        self.step = Some(step.to_string());
        self
    }

    pub fn with_mask(mut self, mask: u8) -> Self {
        self.mask = mask;
        self
    }
}

impl Adversary for Tamperer {
    fn intercept(&mut self, _: Direction, meta: &MessageMeta<'_>, frames: &mut Vec<Frame>) {
        if self.hits > 0 {
            return;
        }
        if let Some(step) = &self.step {
            if !step.eq_ignore_ascii_case(meta.label) {
                return;
            }
        }
        let Some(span) = meta.field(&self.field) else {
            return;
        };
        if self.offset >= span.len {
            return;
        }
        if let Some((fi, bi)) = locate(meta.payload_len(), span.offset + self.offset) {
            frames[fi].data[bi] ^= self.mask;
            self.hits += 1;
        }
    }
}

/// Substitutes the whole payload of one step.
#[derive(Debug, Clone)]
pub struct Replacer {
    pub step: String,
    pub payload: Vec<u8>,
    pub hits: usize,
}

impl Adversary for Replacer {
    fn intercept(&mut self, _: Direction, meta: &MessageMeta<'_>, frames: &mut Vec<Frame>) {
        if !self.step.eq_ignore_ascii_case(meta.label) || frames.is_empty() {
            return;
        }
        if let Ok(f) = fragment(frames[0].can_id, &self.payload) {
            *frames = f;
            self.hits += 1;
        }
    }
}

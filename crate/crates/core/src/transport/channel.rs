use super::adversary::{Adversary, MessageMeta};
use super::isotp::{fragment, reassemble, CanId, Frame};
use super::ledger::{ByteLedger, StepRecord};
use super::TransportError;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Initiator to responder.
    AtoB,
    /// Responder to initiator.
    BtoA,
}

impl Direction {
    pub fn can_id(self) -> CanId {
        match self {
            Direction::AtoB => CanId::new(0x7E0).unwrap(),
            Direction::BtoA => CanId::new(0x7E8).unwrap(),
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Direction::AtoB => "A>B",
            Direction::BtoA => "B>A",
        }
    }
}

/// CAN-FD timing parameters.
///
/// Per frame, `arbitration_bits` are clocked at the nominal rate (SOF,
/// identifier and control bits up to BRS, then CRC delimiter, ACK, EOF and
/// intermission) and `data_overhead_bits` plus the data field at the data
/// rate (ESI, DLC, stuff count, CRC). Dynamic bit stuffing is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub nominal_bitrate: u32,
    pub data_bitrate: u32,
    pub arbitration_bits: u32,
    pub data_overhead_bits: u32,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            nominal_bitrate: 500_000,
            data_bitrate: 2_000_000,
            arbitration_bits: 30,
            data_overhead_bits: 37,
        }
    }
}

impl ChannelConfig {
    /// Virtual on-wire time of one frame, in nanoseconds (rounded up).
    pub fn frame_time_ns(&self, data_len: usize) -> u64 {
        let ns = |bits: u64, rate: u32| (bits * 1_000_000_000).div_ceil(rate.max(1) as u64);
        ns(self.arbitration_bits as u64, self.nominal_bitrate)
            + ns(
                self.data_overhead_bits as u64 + 8 * data_len as u64,
                self.data_bitrate,
            )
    }

    pub fn frames_time_ns(&self, frames: &[Frame]) -> u64 {
        frames.iter().map(|f| self.frame_time_ns(f.data.len())).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoggedFrame {
    pub direction: Direction,
    pub time_ns: u64,
    pub frame: Frame,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub payload: Vec<u8>,
    pub arrival_ns: u64,
    pub latency_ns: u64,
}

/// Duplex in-memory link between an initiator (A) and a responder (B).
pub struct Channel {
    config: ChannelConfig,
    ledger: ByteLedger,
    log: Vec<LoggedFrame>,
    clock_ns: u64,
    adversary: Option<Box<dyn Adversary + Send>>,
    open: bool,
}

impl Channel {
    pub fn new(config: ChannelConfig) -> Self {
        Channel {
            config,
            ledger: ByteLedger::default(),
            log: Vec::new(),
            clock_ns: 0,
            adversary: None,
            open: true,
        }
    }

    pub fn with_adversary(mut self, adversary: Box<dyn Adversary + Send>) -> Self {
        self.adversary = Some(adversary);
        self
    }

    pub fn set_adversary(&mut self, adversary: Option<Box<dyn Adversary + Send>>) {
        self.adversary = adversary;
    }

    pub fn take_adversary(&mut self) -> Option<Box<dyn Adversary + Send>> {
        self.adversary.take()
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.config
    }

    pub fn close(&mut self) {
        self.open = false;
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn now_ns(&self) -> u64 {
        self.clock_ns
    }

    pub fn ledger(&self) -> &ByteLedger {
        &self.ledger
    }

    pub fn frame_log(&self) -> &[LoggedFrame] {
        &self.log
    }

    /// Fragments `payload`, lets the adversary act, advances virtual time by
    /// the on-wire duration and reassembles at the far end.
    ///
    /// The ledger records the sender's application bytes and the frames that
    /// actually crossed the link. A reassembly failure is reported after the
    /// frames have been accounted for.
    pub fn send(
        &mut self,
        direction: Direction,
        meta: &MessageMeta<'_>,
        payload: &[u8],
    ) -> Result<Delivery, TransportError> {
        if !self.open {
            return Err(TransportError::Closed);
        }
        let mut frames = fragment(direction.can_id(), payload)?;
        if let Some(adv) = self.adversary.as_mut() {
            adv.intercept(direction, meta, &mut frames);
        }
        let start = self.clock_ns;
        for f in &frames {
            self.clock_ns += self.config.frame_time_ns(f.data.len());
            self.log.push(LoggedFrame {
                direction,
                time_ns: self.clock_ns,
                frame: f.clone(),
            });
        }
        let latency_ns = self.clock_ns - start;
        self.ledger.push(StepRecord {
            label: meta.label.to_string(),
            direction,
            app_bytes: payload.len(),
            frame_count: frames.len(),
            frame_bytes: frames.iter().map(|f| f.data.len()).sum(),
            latency_ns,
        });
        let payload = reassemble(&frames)?;
        Ok(Delivery {
            payload,
            arrival_ns: self.clock_ns,
            latency_ns,
        })
    }

    /// Frame log as text, one frame per line: `dir can_id len payload_hex`.
    pub fn export_frame_log(&self) -> String {
        let mut out = String::new();
        for f in &self.log {
            let _ = writeln!(
                out,
                "{} {:03X} {} {}",
                f.direction.arrow(),
                f.frame.can_id.raw(),
                f.frame.data.len(),
                hex::encode(&f.frame.data)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::{FieldSpan, Observer, Tamperer};
    use super::*;

    fn meta_for(len: usize) -> Vec<FieldSpan> {
        vec![FieldSpan {
            name: "Data",
            offset: 0,
            len,
        }]
    }

    #[test]
    fn observer_sees_but_does_not_change() {
        let observer = Box::new(Observer::default());
        let mut ch = Channel::new(ChannelConfig::default()).with_adversary(observer);
        let spans = meta_for(200);
        let meta = MessageMeta { label: "B1", fields: &spans };
        let payload: Vec<u8> = (0..200).map(|i| i as u8).collect();
        let d = ch.send(Direction::BtoA, &meta, &payload).unwrap();
        assert_eq!(d.payload, payload);
        assert_eq!(ch.ledger().total_app_bytes(), 200);
        assert_eq!(ch.frame_log().len(), 4);
    }

    #[test]
    fn tamperer_flips_one_payload_byte() {
        let spans = vec![
            FieldSpan { name: "ID", offset: 0, len: 16 },
            FieldSpan { name: "Resp", offset: 16, len: 64 },
        ];
        let meta = MessageMeta { label: "A2", fields: &spans };
        let mut ch = Channel::new(ChannelConfig::default())
            .with_adversary(Box::new(Tamperer::new("resp", 63).with_mask(0x80)));
        let payload = vec![0u8; 80];
        let d = ch.send(Direction::AtoB, &meta, &payload).unwrap();
        let mut expected = payload.clone();
        expected[79] = 0x80;
        assert_eq!(d.payload, expected);
        // single shot
        let d = ch.send(Direction::AtoB, &meta, &payload).unwrap();
        assert_eq!(d.payload, payload);
    }

    #[test]
    fn closed_channel_refuses() {
        let mut ch = Channel::new(ChannelConfig::default());
        ch.close();
        let spans = meta_for(1);
        let meta = MessageMeta { label: "B2", fields: &spans };
        assert_eq!(ch.send(Direction::BtoA, &meta, &[1]), Err(TransportError::Closed));
    }

    #[test]
    fn frame_log_format() {
        let mut ch = Channel::new(ChannelConfig::default());
        let spans = meta_for(1);
        let meta = MessageMeta { label: "B2", fields: &spans };
        ch.send(Direction::BtoA, &meta, &[1]).unwrap();
        assert_eq!(ch.export_frame_log(), "B>A 7E8 2 0101\n");
    }

    #[test]
    fn single_frame_is_well_under_a_millisecond() {
        let cfg = ChannelConfig::default();
        assert!(cfg.frame_time_ns(64) < 1_000_000);
        // 30 bits at 0.5 Mbit/s + (37 + 512) bits at 2 Mbit/s
        assert_eq!(cfg.frame_time_ns(64), 60_000 + 274_500);
    }

    #[test]
    fn latency_is_monotone_in_payload_size() {
        let cfg = ChannelConfig::default();
        let mut prev = 0;
        for len in 1..=4095 {
            let frames = fragment(Direction::AtoB.can_id(), &vec![0; len]).unwrap();
            let t = cfg.frames_time_ns(&frames);
            assert!(t >= prev, "len {len}");
            prev = t;
        }
    }
}

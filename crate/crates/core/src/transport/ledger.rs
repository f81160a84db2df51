use super::Direction;
use serde::{Deserialize, Serialize};

/// One transmitted application message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub label: String,
    pub direction: Direction,
    /// Application bytes handed to the transport by the sender.
    pub app_bytes: usize,
    pub frame_count: usize,
    /// Bytes in the CAN-FD data fields, including PCI and padding.
    pub frame_bytes: usize,
    pub latency_ns: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionTotals {
    pub messages: usize,
    pub app_bytes: usize,
    pub frame_count: usize,
    pub frame_bytes: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByteLedger {
    records: Vec<StepRecord>,
}

impl ByteLedger {
    pub fn push(&mut self, record: StepRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn steps(&self) -> usize {
        self.records.len()
    }

    pub fn totals(&self, direction: Direction) -> DirectionTotals {
        self.records
            .iter()
            .filter(|r| r.direction == direction)
            .fold(DirectionTotals::default(), |mut t, r| {
                t.messages += 1;
                t.app_bytes += r.app_bytes;
                t.frame_count += r.frame_count;
                t.frame_bytes += r.frame_bytes;
                t
            })
    }

    pub fn total_app_bytes(&self) -> usize {
        self.records.iter().map(|r| r.app_bytes).sum()
    }

    pub fn total_frames(&self) -> usize {
        self.records.iter().map(|r| r.frame_count).sum()
    }

    pub fn total_latency_ns(&self) -> u64 {
        self.records.iter().map(|r| r.latency_ns).sum()
    }

    /// Aligned plain-text rendering, one line per step plus totals.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<6} {:<4} {:>9} {:>7} {:>11} {:>12}\n",
            "step", "dir", "app_bytes", "frames", "frame_bytes", "latency_us"
        );
        for r in &self.records {
            out.push_str(&format!(
                "{:<6} {:<4} {:>9} {:>7} {:>11} {:>12.3}\n",
                r.label,
                r.direction.arrow(),
                r.app_bytes,
                r.frame_count,
                r.frame_bytes,
                r.latency_ns as f64 / 1e3
            ));
        }
        out.push_str(&format!(
            "{:<6} {:<4} {:>9} {:>7} {:>11} {:>12.3}\n",
            "total",
            "",
            self.total_app_bytes(),
            self.total_frames(),
            self.records.iter().map(|r| r.frame_bytes).sum::<usize>(),
            self.total_latency_ns() as f64 / 1e3
        ));
        out
    }
}

use super::AnalysisError;
use crate::protocol::{run_handshake, ProtocolKind, StepLabel, Testbed};
use crate::transport::{Channel, ChannelConfig, Direction};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOverhead {
    pub step: StepLabel,
    pub direction: Direction,
    /// `(field name, bytes)` in wire order.
    pub fields: Vec<(String, usize)>,
    pub bytes: usize,
    pub frames: usize,
    pub frame_bytes: usize,
}

impl StepOverhead {
    pub fn breakdown(&self) -> String {
        self.fields
            .iter()
            .map(|(n, l)| format!("{n}({l})"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverheadReport {
    pub kind: ProtocolKind,
    pub steps: Vec<StepOverhead>,
    pub step_count: usize,
    pub total_bytes: usize,
    pub total_frames: usize,
    pub wire_time_ns: u64,
}

/// Per-step byte accounting of one honest handshake, taken from the live
/// encodings and the transport ledger.
pub fn overhead_report(kind: ProtocolKind) -> Result<OverheadReport, AnalysisError> {
    let tb = Testbed::provision(0)?;
    let (mut a, mut b) = tb.pair(kind, 0);
    let mut channel = Channel::new(ChannelConfig::default());
    let report = run_handshake(&mut a, &mut b, &mut channel)?;
    if !report.agreed() {
        return Err(AnalysisError::Handshake(format!("{kind}: {:?}", report.failure())));
    }
    let ledger = channel.ledger();
    let steps: Vec<StepOverhead> = a
        .transcript()
        .messages()
        .iter()
        .zip(ledger.records())
        .map(|(m, r)| StepOverhead {
            step: m.step,
            direction: r.direction,
            fields: m.fields.iter().map(|f| (f.tag.name().to_string(), f.bytes.len())).collect(),
            bytes: m.len(),
            frames: r.frame_count,
            frame_bytes: r.frame_bytes,
        })
        .collect();
    Ok(OverheadReport {
        kind,
        step_count: steps.len(),
        total_bytes: steps.iter().map(|s| s.bytes).sum(),
        total_frames: ledger.total_frames(),
        wire_time_ns: ledger.total_latency_ns(),
        steps,
    })
}

/// Summary row: steps and bytes, with the extension delta where one exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub protocol: String,
    pub steps: usize,
    pub bytes: usize,
    pub ext_steps: Option<usize>,
    pub ext_bytes: Option<usize>,
}

impl TableRow {
    /// `4(+1): 427(+192) B`
    pub fn summary(&self) -> String {
        match (self.ext_steps, self.ext_bytes) {
            (Some(s), Some(b)) => format!("{}(+{}): {}(+{}) B", self.steps, s, self.bytes, b),
            _ => format!("{}: {} B", self.steps, self.bytes),
        }
    }
}

/// Rows for S-ECDSA(+ext), STS, SCIANC and PORAMB. The STS optimization
/// variants send the same bytes as STS and are not listed separately.
pub fn overhead_table(reports: &[OverheadReport]) -> Vec<TableRow> {
    let find = |k: ProtocolKind| reports.iter().find(|r| r.kind == k);
    let mut rows = Vec::new();
    if let Some(base) = find(ProtocolKind::SEcdsa) {
        let ext = find(ProtocolKind::SEcdsaExt);
        rows.push(TableRow {
            protocol: "S-ECDSA(+ext.)".into(),
            steps: base.step_count,
            bytes: base.total_bytes,
            ext_steps: ext.map(|e| e.step_count - base.step_count),
            ext_bytes: ext.map(|e| e.total_bytes - base.total_bytes),
        });
    }
    for (kind, name) in [
        (ProtocolKind::Sts, "STS"),
        (ProtocolKind::Scianc, "SCIANC"),
        (ProtocolKind::Poramb, "PORAMB"),
    ] {
        if let Some(r) = find(kind) {
            rows.push(TableRow {
                protocol: name.into(),
                steps: r.step_count,
                bytes: r.total_bytes,
                ext_steps: None,
                ext_bytes: None,
            });
        }
    }
    rows
}

pub fn render_overhead_table(reports: &[OverheadReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "{}", r.kind);
        for s in &r.steps {
            let _ = writeln!(
                out,
                "  {:<3} {:<4} {:>4} B  {:>2} frames  {}",
                s.step,
                s.direction.arrow(),
                s.bytes,
                s.frames,
                s.breakdown()
            );
        }
        let _ = writeln!(
            out,
            "  total {} steps, {} B, {} frames, {:.3} ms on the wire",
            r.step_count,
            r.total_bytes,
            r.total_frames,
            r.wire_time_ns as f64 / 1e6
        );
    }
    let _ = writeln!(out, "\n{:<16} total", "protocol");
    for row in overhead_table(reports) {
        let _ = writeln!(out, "{:<16} {}", row.protocol, row.summary());
    }
    out
}

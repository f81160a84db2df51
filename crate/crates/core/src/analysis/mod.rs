//! Timing models, overhead accounting and adversarial oracles.

mod bench;
mod oracle;
mod overhead;
mod reuse;
mod threats;
mod timing;

pub use bench::{
    bench_protocols, measure_primitive_costs, measure_sts_ops, PrimitiveCosts, ProtocolBench,
};
pub use oracle::{forward_secrecy_oracle, CompromiseScenario, Leak, Recovery};
pub use overhead::{overhead_report, overhead_table, render_overhead_table, OverheadReport, StepOverhead, TableRow};
pub use reuse::{key_reuse_probe, ReuseReport};
pub use threats::{collect_evidence, threat_matrix, Basis, Cell, Rating, ThreatEvidence, ThreatMatrix, Threat};
pub use timing::{
    overlap_adjustment, simulate_schedule, total_time, total_time_opt, total_time_serial, OpTiming,
    TimingModel, Variant,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("operation graph has a cycle")]
    Cycle,
    #[error("operation index {0} out of range")]
    OpIndex(u8),
    #[error("overlap is only defined for Op2 and Op3, not Op{0}")]
    NotOverlappable(u8),
    #[error(transparent)]
    Protocol(#[from] crate::protocol::ProtocolError),
    #[error(transparent)]
    Crypto(#[from] crate::crypto::CryptoError),
    #[error("honest handshake did not complete: {0}")]
    Handshake(String),
}

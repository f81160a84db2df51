use super::AnalysisError;
use crate::protocol::{run_handshake, ProtocolKind, Testbed};
use crate::transport::{Channel, ChannelConfig};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReuseReport {
    pub kind: ProtocolKind,
    pub runs: usize,
    pub distinct_premasters: usize,
    pub distinct_session_keys: usize,
}

/// Runs `runs` honest sessions between the same two certificates and counts
/// distinct premasters and session keys.
pub fn key_reuse_probe(tb: &Testbed, kind: ProtocolKind, runs: usize) -> Result<ReuseReport, AnalysisError> {
    let mut premasters = HashSet::new();
    let mut session_keys = HashSet::new();
    for run in 0..runs {
        let (mut a, mut b) = tb.pair(kind, run as u64);
        let report = run_handshake(&mut a, &mut b, &mut Channel::new(ChannelConfig::default()))?;
        let keys = match (report.agreed(), a.session_keys()) {
            (true, Some(k)) => k,
            _ => return Err(AnalysisError::Handshake(format!("{kind} run {run}"))),
        };
        premasters.insert(keys.premaster_digest());
        session_keys.insert(keys.digest());
    }
    Ok(ReuseReport {
        kind,
        runs,
        distinct_premasters: premasters.len(),
        distinct_session_keys: session_keys.len(),
    })
}

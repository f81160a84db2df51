use super::oracle::{forward_secrecy_oracle, CompromiseScenario, Leak};
use super::reuse::{key_reuse_probe, ReuseReport};
use super::AnalysisError;
use crate::protocol::{derive_session_keys, layout, run_handshake, ProtocolKind, Testbed};
use crate::transport::{Channel, ChannelConfig, Tamperer};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Threat {
    DataExposure,
    NodeCapturing,
    KeyDataReuse,
    KeyDerivationExploit,
    AuthProcedure,
}

impl Threat {
    pub const ALL: [Threat; 5] = [
        Threat::DataExposure,
        Threat::NodeCapturing,
        Threat::KeyDataReuse,
        Threat::KeyDerivationExploit,
        Threat::AuthProcedure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Threat::DataExposure => "Data exposure",
            Threat::NodeCapturing => "Node capturing",
            Threat::KeyDataReuse => "Key data reuse",
            Threat::KeyDerivationExploit => "Key der. exploit",
            Threat::AuthProcedure => "Auth. procedure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rating {
    /// Weak or no countermeasure.
    Weak,
    Partial,
    Full,
}

impl Rating {
    pub fn symbol(self) -> &'static str {
        match self {
            Rating::Weak => "X",
            Rating::Partial => "Δ",
            Rating::Full => "✓",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Rating derived from an executed check.
    Oracle { finding: String },
    /// Reference rating that cannot be mechanized; `note` records what was
    /// checked alongside, if anything.
    Annotated { note: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub threat: Threat,
    pub protocol: ProtocolKind,
    pub rating: Rating,
    /// Reference rating for the cell.
    pub expected: Rating,
    pub basis: Basis,
}

impl Cell {
    pub fn is_oracle(&self) -> bool {
        matches!(self.basis, Basis::Oracle { .. })
    }

    pub fn agrees(&self) -> bool {
        self.rating == self.expected
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatMatrix {
    pub cells: Vec<Cell>,
}

pub const COLUMNS: [ProtocolKind; 4] = [
    ProtocolKind::SEcdsa,
    ProtocolKind::Sts,
    ProtocolKind::Scianc,
    ProtocolKind::Poramb,
];

fn reference(threat: Threat, protocol: ProtocolKind) -> Rating {
    use Rating::*;
    let row = match threat {
        Threat::DataExposure => [Weak, Full, Weak, Weak],
        Threat::NodeCapturing => [Partial, Partial, Weak, Weak],
        Threat::KeyDataReuse => [Weak, Full, Partial, Weak],
        Threat::KeyDerivationExploit => [Partial, Full, Partial, Partial],
        Threat::AuthProcedure => [Full, Full, Partial, Partial],
    };
    let i = COLUMNS.iter().position(|c| *c == protocol).expect("matrix column");
    row[i]
}

impl ThreatMatrix {
    pub fn cell(&self, threat: Threat, protocol: ProtocolKind) -> Option<&Cell> {
        self.cells.iter().find(|c| c.threat == threat && c.protocol == protocol)
    }

    /// Every oracle-backed cell agrees with its reference rating.
    pub fn oracles_agree(&self) -> bool {
        self.cells.iter().filter(|c| c.is_oracle()).all(Cell::agrees)
    }

    /// Grid of symbols; oracle-backed cells are marked `*`, annotations `~`.
    pub fn render(&self) -> String {
        let mut out = format!("{:<18}", "");
        for c in COLUMNS {
            let _ = write!(out, "{:<10}", c.name());
        }
        out.push('\n');
        for t in Threat::ALL {
            let _ = write!(out, "{:<18}", t.name());
            for p in COLUMNS {
                let cell = self.cell(t, p).expect("complete matrix");
                let mark = if cell.is_oracle() { '*' } else { '~' };
                let flag = if cell.agrees() { "" } else { "!" };
                let _ = write!(out, "{:<10}", format!("{}{}{}", cell.rating.symbol(), mark, flag));
            }
            out.push('\n');
        }
        out.push_str("* oracle-backed   ~ annotated   ! disagrees with reference\n\n");
        for c in &self.cells {
            let text = match &c.basis {
                Basis::Oracle { finding } => finding,
                Basis::Annotated { note } => note,
            };
            let _ = writeln!(out, "{} / {}: {}", c.threat.name(), c.protocol, text);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExposureResult {
    pub protocol: ProtocolKind,
    pub scenarios: usize,
    /// Scenarios where the oracle produced exactly the honest session key.
    pub recovered: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamperResult {
    pub protocol: ProtocolKind,
    pub attempts: usize,
    /// Attempts after which at least one side refused to establish.
    pub detected: usize,
    /// Attempts after which both sides still established.
    pub undetected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatEvidence {
    pub exposure: Vec<ExposureResult>,
    pub reuse: Vec<ReuseReport>,
    /// Same premaster and salt under every protocol label gives pairwise
    /// distinct session keys.
    pub domain_separated: bool,
    pub tamper: Vec<TamperResult>,
}

/// Runs the compromise oracle, the reuse probe, a label-separation check and
/// a one-byte tamper sweep over every field of every message.
pub fn collect_evidence(seed: u64, scenarios: usize, runs: usize) -> Result<ThreatEvidence, AnalysisError> {
    let mut exposure = Vec::new();
    for protocol in COLUMNS {
        let mut recovered = 0;
        for i in 0..scenarios {
            let tb = Testbed::provision(seed.wrapping_add(i as u64))?;
            let (mut a, mut b) = tb.pair(protocol, 0);
            let report = run_handshake(&mut a, &mut b, &mut Channel::new(ChannelConfig::default()))?;
            let honest = match (report.agreed(), a.session_keys()) {
                (true, Some(k)) => k.digest(),
                _ => return Err(AnalysisError::Handshake(format!("{protocol} scenario {i}"))),
            };
            let scenario = CompromiseScenario {
                kind: protocol,
                transcript: a.transcript().clone(),
                ca_public: *tb.ca.public_key(),
                leak: Leak {
                    private_keys: vec![tb.a.private_key().clone(), tb.b.private_key().clone()],
                    psks: vec![tb.psk.clone()],
                },
            };
            if forward_secrecy_oracle(&scenario).keys().is_some_and(|k| k.digest() == honest) {
                recovered += 1;
            }
        }
        exposure.push(ExposureResult {
            protocol,
            scenarios,
            recovered,
        });
    }

    let tb = Testbed::provision(seed)?;
    let reuse = COLUMNS
        .iter()
        .map(|&k| key_reuse_probe(&tb, k, runs))
        .collect::<Result<Vec<_>, _>>()?;

    let labels: HashSet<&[u8]> = ProtocolKind::ALL.iter().map(|k| k.kdf_label()).collect();
    let mut digests = HashSet::new();
    for label in &labels {
        digests.insert(derive_session_keys(&[0x5a; 32], &[0xa5; 64], label)?.digest());
    }
    let domain_separated = digests.len() == labels.len() && labels.len() == 4;

    let tamper = COLUMNS
        .iter()
        .map(|&k| tamper_sweep(&tb, k))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ThreatEvidence {
        exposure,
        reuse,
        domain_separated,
        tamper,
    })
}

fn tamper_sweep(tb: &Testbed, protocol: ProtocolKind) -> Result<TamperResult, AnalysisError> {
    let mut attempts = 0;
    let mut detected = 0;
    let mut undetected = Vec::new();
    for &step in protocol.steps() {
        for tag in layout(protocol, step).unwrap_or_default() {
            attempts += 1;
            let (mut a, mut b) = tb.pair(protocol, 0);
            let t = Tamperer::new(tag.name(), 0).in_step(step.name()).with_mask(0x80);
            let mut channel = Channel::new(ChannelConfig::default()).with_adversary(Box::new(t));
            run_handshake(&mut a, &mut b, &mut channel)?;
            if a.is_established() && b.is_established() {
                undetected.push(format!("{step}.{tag}"));
            } else {
                detected += 1;
            }
        }
    }
    Ok(TamperResult {
        protocol,
        attempts,
        detected,
        undetected,
    })
}

/// Builds the five-row matrix for S-ECDSA, STS, SCIANC and PORAMB.
///
/// Data exposure and key data reuse follow from the oracles (SCIANC's
/// partial reuse rating excepted, which rests on nonce diversification
/// rather than on anything the probe can decide). The remaining rows are
/// reference ratings, annotated with the related checks.
pub fn threat_matrix(ev: &ThreatEvidence) -> ThreatMatrix {
    let mut cells = Vec::new();
    for threat in Threat::ALL {
        for protocol in COLUMNS {
            let expected = reference(threat, protocol);
            let (rating, basis) = match threat {
                Threat::DataExposure => exposure_cell(ev, protocol, expected),
                Threat::KeyDataReuse => reuse_cell(ev, protocol, expected),
                Threat::NodeCapturing => (
                    expected,
                    Basis::Annotated {
                        note: match protocol {
                            ProtocolKind::Sts => "past sessions stay protected after capture; future sessions of the captured node do not".into(),
                            ProtocolKind::SEcdsa => "captured key exposes all sessions of the node; signatures still bind identities".into(),
                            _ => "captured static and pre-shared keys expose every past and future session".into(),
                        },
                    },
                ),
                Threat::KeyDerivationExploit => (
                    expected,
                    Basis::Annotated {
                        note: format!(
                            "domain-separated labels {}; rating reflects static versus ephemeral premaster",
                            if ev.domain_separated { "verified" } else { "NOT verified" }
                        ),
                    },
                ),
                Threat::AuthProcedure => (expected, Basis::Annotated { note: tamper_note(ev, protocol) }),
            };
            cells.push(Cell {
                threat,
                protocol,
                rating,
                expected,
                basis,
            });
        }
    }
    ThreatMatrix { cells }
}

fn exposure_cell(ev: &ThreatEvidence, protocol: ProtocolKind, expected: Rating) -> (Rating, Basis) {
    let Some(r) = ev.exposure.iter().find(|r| r.protocol == protocol) else {
        return (expected, Basis::Annotated { note: "oracle not run".into() });
    };
    let rating = if r.recovered == 0 {
        Rating::Full
    } else if r.recovered == r.scenarios {
        Rating::Weak
    } else {
        Rating::Partial
    };
    let finding = format!(
        "session key recovered from transcript + leaked long-term keys in {}/{} scenarios",
        r.recovered, r.scenarios
    );
    (rating, Basis::Oracle { finding })
}

fn reuse_cell(ev: &ThreatEvidence, protocol: ProtocolKind, expected: Rating) -> (Rating, Basis) {
    let Some(r) = ev.reuse.iter().find(|r| r.kind == protocol) else {
        return (expected, Basis::Annotated { note: "probe not run".into() });
    };
    let finding = format!(
        "{} distinct premasters, {} distinct session keys over {} runs",
        r.distinct_premasters, r.distinct_session_keys, r.runs
    );
    if protocol == ProtocolKind::Scianc {
        return (
            expected,
            Basis::Annotated {
                note: format!("{finding}; nonces diversify the session key over a static premaster"),
            },
        );
    }
    let rating = if r.distinct_premasters == r.runs {
        Rating::Full
    } else if r.distinct_premasters == 1 {
        Rating::Weak
    } else {
        Rating::Partial
    };
    (rating, Basis::Oracle { finding })
}

fn tamper_note(ev: &ThreatEvidence, protocol: ProtocolKind) -> String {
    let Some(t) = ev.tamper.iter().find(|t| t.protocol == protocol) else {
        return "tamper sweep not run".into();
    };
    let mut note = format!("single-byte tampering detected in {}/{} fields", t.detected, t.attempts);
    if !t.undetected.is_empty() {
        let _ = write!(note, " (undetected: {})", t.undetected.join(", "));
    }
    note.push_str(match protocol {
        ProtocolKind::Sts | ProtocolKind::SEcdsa => "; mutual signature-based authentication",
        _ => "; symmetric MAC authentication only",
    });
    note
}

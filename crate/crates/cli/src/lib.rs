//! Command implementations behind the `ecqv-kd` binary.
//!
//! Every command returns a [`Run`]: a typed record that is printed either as
//! aligned text or as JSON, the files to drop into the output directory, and
//! whether the command's expectation held (which decides the exit status).

use ecqv_kd::analysis::{
    bench_protocols, collect_evidence, forward_secrecy_oracle, measure_primitive_costs, measure_sts_ops,
    overhead_report, overhead_table, render_overhead_table, simulate_schedule, total_time,
    CompromiseScenario, Leak, OpTiming, OverheadReport, Recovery, TableRow, ThreatMatrix, TimingModel, Variant,
};
use ecqv_kd::protocol::{layout, opt_schedule, run_handshake, ProtocolKind, Testbed};
use ecqv_kd::transport::{Channel, ChannelConfig, StepRecord, Tamperer};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

pub type CliResult<T> = Result<T, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeakKind {
    /// Both devices' long-term ECQV private keys.
    Longterm,
    /// Only the pairwise pre-shared key.
    Psk,
}

/// `FIELD:BYTE`, optionally `STEP.FIELD:BYTE`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamperSpec {
    pub step: Option<String>,
    pub field: String,
    pub offset: usize,
}

impl std::str::FromStr for TamperSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (target, offset) = s
            .rsplit_once(':')
            .ok_or_else(|| format!("expected FIELD:BYTE, got {s:?}"))?;
        let offset = offset.parse().map_err(|_| format!("bad byte offset {offset:?}"))?;
        let (step, field) = match target.split_once('.') {
            Some((step, field)) => (Some(step.to_ascii_uppercase()), field),
            None => (None, target),
        };
        if field.is_empty() {
            return Err("empty field name".into());
        }
        Ok(TamperSpec {
            step,
            field: field.to_string(),
            offset,
        })
    }
}

impl TamperSpec {
    fn adversary(&self, kind: ProtocolKind) -> CliResult<Tamperer> {
        let hit = kind.steps().iter().any(|&s| {
            self.step.as_deref().map_or(true, |st| st == s.name())
                && layout(kind, s)
                    .unwrap_or_default()
                    .iter()
                    .any(|t| t.name().eq_ignore_ascii_case(&self.field) && self.offset < t.len())
        });
        if !hit {
            return Err(format!("{kind} has no field byte {}:{}", self.field, self.offset));
        }
        let t = Tamperer::new(&self.field, self.offset);
        Ok(match &self.step {
            Some(s) => t.in_step(s),
            None => t,
        })
    }
}

/// User-supplied Op1..Op4 durations in microseconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingFile {
    pub a: [u64; 4],
    pub b: [u64; 4],
}

impl TimingFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

pub struct Run<T> {
    pub record: T,
    pub text: String,
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub ok: bool,
}

fn micros(d: Duration) -> f64 {
    d.as_secs_f64() * 1e6
}

// ---------------------------------------------------------------- handshake

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyRecord {
    pub role: String,
    pub status: String,
    /// SHA-256 of the established session keys; never the keys themselves.
    pub key_digest: Option<String>,
    pub failure_category: Option<String>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandshakeRecord {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub tamper: Option<TamperSpec>,
    pub agreed: bool,
    pub steps: usize,
    pub app_bytes: usize,
    pub frames: usize,
    pub wire_time_ns: u64,
    pub ledger: Vec<StepRecord>,
    pub parties: Vec<PartyRecord>,
}

pub fn handshake(kind: ProtocolKind, seed: u64, tamper: Option<TamperSpec>) -> CliResult<Run<HandshakeRecord>> {
    let tb = Testbed::provision(seed).map_err(|e| e.to_string())?;
    let (mut a, mut b) = tb.pair(kind, 0);
    let mut channel = Channel::new(ChannelConfig::default());
    if let Some(t) = &tamper {
        channel.set_adversary(Some(Box::new(t.adversary(kind)?)));
    }
    let report = run_handshake(&mut a, &mut b, &mut channel).map_err(|e| e.to_string())?;

    let parties: Vec<PartyRecord> = [("initiator", &a), ("responder", &b)]
        .into_iter()
        .map(|(role, ctx)| {
            let failure = match ctx.phase() {
                ecqv_kd::protocol::Phase::Failed(r) => Some(r.clone()),
                _ => None,
            };
            PartyRecord {
                role: role.into(),
                status: match (&failure, ctx.is_established()) {
                    (Some(_), _) => "failed",
                    (None, true) => "established",
                    (None, false) => "incomplete",
                }
                .into(),
                key_digest: ctx.session_keys().map(|k| k.digest().to_hex()),
                failure_category: failure.as_ref().map(|r| r.category().into()),
                failure: failure.map(|r| r.to_string()),
            }
        })
        .collect();

    let ledger = channel.ledger();
    let record = HandshakeRecord {
        protocol: kind,
        seed,
        tamper,
        agreed: report.agreed(),
        steps: ledger.steps(),
        app_bytes: ledger.total_app_bytes(),
        frames: ledger.total_frames(),
        wire_time_ns: ledger.total_latency_ns(),
        ledger: ledger.records().to_vec(),
        parties,
    };

    let mut text = format!("{kind} handshake, seed {seed}\n\n{}\n", ledger.render());
    for p in &record.parties {
        let _ = write!(text, "{:<9} {}", p.role, p.status);
        if let Some(d) = &p.key_digest {
            let _ = write!(text, "  key digest {d}");
        }
        if let Some(f) = &p.failure {
            let _ = write!(text, "  ({f})");
        }
        text.push('\n');
    }
    let _ = writeln!(
        text,
        "\n{} steps, {} B, {} frames, {:.3} ms on the wire: {}",
        record.steps,
        record.app_bytes,
        record.frames,
        record.wire_time_ns as f64 / 1e6,
        if record.agreed { "keys agreed" } else { "NO AGREEMENT" }
    );

    let transcript = a.transcript();
    let digests: Vec<String> = record
        .parties
        .iter()
        .map(|p| format!("{} {}\n", p.role, p.key_digest.as_deref().unwrap_or("-")))
        .collect();
    let artifacts = vec![
        ("transcript.bin".into(), transcript.to_binary()),
        ("transcript.hex".into(), transcript.to_hex_dump().into_bytes()),
        ("frames.log".into(), channel.export_frame_log().into_bytes()),
        ("ledger.txt".into(), ledger.render().into_bytes()),
        ("key_digests.txt".into(), digests.concat().into_bytes()),
    ];
    let ok = record.agreed;
    Ok(Run {
        record,
        text,
        artifacts,
        ok,
    })
}

// ---------------------------------------------------------------- bench

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub protocol: ProtocolKind,
    pub runs: usize,
    pub mean_us: f64,
    pub sd_us: f64,
    pub median_us: f64,
    /// Primitive invocation counts times median primitive cost.
    pub compute_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub variant: Variant,
    pub closed_form_us: f64,
    pub simulated_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub seed: u64,
    pub runs: usize,
    pub rows: Vec<BenchRow>,
    /// "measured" or "file".
    pub timing_source: String,
    pub op_a_us: [f64; 4],
    pub op_b_us: [f64; 4],
    pub projections: Vec<Projection>,
}

pub fn bench(kinds: &[ProtocolKind], runs: usize, seed: u64, timing: Option<TimingFile>) -> CliResult<Run<BenchRecord>> {
    let err = |e: ecqv_kd::analysis::AnalysisError| e.to_string();
    let costs = measure_primitive_costs(200, seed).map_err(err)?;
    let benches = bench_protocols(kinds, runs, seed).map_err(err)?;
    let rows: Vec<BenchRow> = benches
        .iter()
        .map(|b| BenchRow {
            protocol: b.kind,
            runs: b.runs(),
            mean_us: micros(b.mean()),
            sd_us: micros(b.sd()),
            median_us: micros(b.median()),
            compute_us: micros(b.compute(&costs)),
        })
        .collect();

    let (source, a, b) = match timing {
        Some(t) => ("file", OpTiming::from_micros("A", t.a), OpTiming::from_micros("B", t.b)),
        None => {
            let tb = Testbed::provision(seed).map_err(|e| e.to_string())?;
            let (a, b) = measure_sts_ops(&tb, runs.max(1)).map_err(err)?;
            ("measured", a, b)
        }
    };
    let model = TimingModel::new(a.clone(), b.clone(), Variant::Serial);
    let mut projections = Vec::new();
    for (variant, kind) in [
        (Variant::Serial, ProtocolKind::Sts),
        (Variant::Opt1, ProtocolKind::StsOpt1),
        (Variant::Opt2, ProtocolKind::StsOpt2),
    ] {
        let m = model.with_variant(variant);
        let schedule = opt_schedule(kind).map_err(|e| e.to_string())?;
        let simulated = simulate_schedule(&m, &schedule).map_err(err)?;
        projections.push(Projection {
            variant,
            closed_form_us: micros(total_time(&m)),
            simulated_us: micros(simulated),
        });
    }

    let record = BenchRecord {
        seed,
        runs,
        rows,
        timing_source: source.into(),
        op_a_us: a.ops.map(micros),
        op_b_us: b.ops.map(micros),
        projections,
    };

    let mut text = format!("{runs} runs per protocol (in-process, both parties, host CPU)\n\n");
    let _ = writeln!(
        text,
        "{:<12} {:>12} {:>10} {:>12} {:>12}",
        "protocol", "mean us", "sd us", "median us", "compute us"
    );
    let mut sorted = record.rows.clone();
    sorted.sort_by(|x, y| x.compute_us.total_cmp(&y.compute_us));
    for r in &sorted {
        let _ = writeln!(
            text,
            "{:<12} {:>12.1} {:>10.1} {:>12.1} {:>12.1}",
            r.protocol.to_string(),
            r.mean_us,
            r.sd_us,
            r.median_us,
            r.compute_us
        );
    }
    let _ = writeln!(text, "\nSTS operation times ({source}), us:");
    for (dev, ops) in [("A", record.op_a_us), ("B", record.op_b_us)] {
        let _ = writeln!(
            text,
            "  {dev}: Op1 {:.1}  Op2 {:.1}  Op3 {:.1}  Op4 {:.1}",
            ops[0], ops[1], ops[2], ops[3]
        );
    }
    let _ = writeln!(text, "\nmodel projection, us:");
    for p in &record.projections {
        let _ = writeln!(
            text,
            "  {:<7} {:>10.1} (schedule makespan {:.1})",
            format!("{:?}", p.variant).to_lowercase(),
            p.closed_form_us,
            p.simulated_us
        );
    }
    let ok = record
        .projections
        .iter()
        .all(|p| (p.closed_form_us - p.simulated_us).abs() < 1e-3);
    Ok(Run {
        record,
        text,
        artifacts: Vec::new(),
        ok,
    })
}

// ---------------------------------------------------------------- report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub seed: u64,
    pub overhead: Vec<OverheadReport>,
    pub table: Vec<TableRow>,
    pub threats: ThreatMatrix,
    pub oracles_agree: bool,
}

pub fn report(seed: u64, scenarios: usize, runs: usize) -> CliResult<Run<ReportRecord>> {
    let overhead: Vec<OverheadReport> = ProtocolKind::ALL
        .iter()
        .map(|&k| overhead_report(k))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let evidence = collect_evidence(seed, scenarios, runs).map_err(|e| e.to_string())?;
    let threats = ecqv_kd::analysis::threat_matrix(&evidence);
    let record = ReportRecord {
        seed,
        table: overhead_table(&overhead),
        oracles_agree: threats.oracles_agree(),
        overhead,
        threats,
    };
    let text = format!(
        "{}\n{}\n{}\n",
        render_overhead_table(&record.overhead),
        record.threats.render(),
        if record.oracles_agree {
            "all oracle-backed cells agree with the reference ratings"
        } else {
            "ORACLE DISAGREEMENT: see cells marked above"
        }
    );
    let ok = record.oracles_agree;
    Ok(Run {
        record,
        text,
        artifacts: Vec::new(),
        ok,
    })
}

// ---------------------------------------------------------------- attack

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRecord {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub leak: LeakKind,
    pub recovered: bool,
    /// Whether the recovered key could be checked against transcript material.
    pub confirmed: bool,
    pub detail: String,
    /// What the protocol's design predicts for this leak.
    pub expected_recovery: bool,
}

pub fn attack(kind: ProtocolKind, seed: u64, leak: LeakKind) -> CliResult<Run<AttackRecord>> {
    let tb = Testbed::provision(seed).map_err(|e| e.to_string())?;
    let (mut a, mut b) = tb.pair(kind, 0);
    let report = run_handshake(&mut a, &mut b, &mut Channel::new(ChannelConfig::default())).map_err(|e| e.to_string())?;
    let honest = match (report.agreed(), a.session_keys()) {
        (true, Some(k)) => k.digest(),
        _ => return Err(format!("honest {kind} handshake did not complete")),
    };
    let scenario = CompromiseScenario {
        kind,
        transcript: a.transcript().clone(),
        ca_public: *tb.ca.public_key(),
        leak: match leak {
            LeakKind::Longterm => Leak {
                private_keys: vec![tb.a.private_key().clone(), tb.b.private_key().clone()],
                psks: Vec::new(),
            },
            LeakKind::Psk => Leak {
                private_keys: Vec::new(),
                psks: vec![tb.psk.clone()],
            },
        },
    };
    let outcome = forward_secrecy_oracle(&scenario);
    let (recovered, confirmed, detail) = match &outcome {
        Recovery::Recovered { keys, confirmed } if keys.digest() == honest => {
            (true, *confirmed, format!("session key recovered (digest {})", honest.to_hex()))
        }
        Recovery::Recovered { .. } => (false, false, "candidate key does not match the session".into()),
        Recovery::Failed(why) => (false, false, why.clone()),
    };
    let expected_recovery = leak == LeakKind::Longterm && !kind.is_sts();
    let record = AttackRecord {
        protocol: kind,
        seed,
        leak,
        recovered,
        confirmed,
        detail,
        expected_recovery,
    };
    let text = format!(
        "{kind}: passive attacker with recorded transcript and leaked {}\n{}: {}{}\nexpected: {}\n",
        match leak {
            LeakKind::Longterm => "long-term private keys",
            LeakKind::Psk => "pre-shared key",
        },
        if recovered { "RECOVERED" } else { "not recovered" },
        record.detail,
        if recovered && !confirmed { " (unconfirmed: unique candidate)" } else { "" },
        if expected_recovery { "recovery" } else { "no recovery" }
    );
    let ok = recovered == expected_recovery;
    Ok(Run {
        record,
        text,
        artifacts: Vec::new(),
        ok,
    })
}

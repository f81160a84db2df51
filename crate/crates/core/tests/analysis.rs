use ecqv_kd::analysis::*;
use ecqv_kd::crypto::metrics::Primitive;
use ecqv_kd::protocol::{opt_schedule, run_handshake, ProtocolKind, Schedule, Testbed};
use ecqv_kd::transport::{Channel, ChannelConfig};
use proptest::prelude::*;
use std::time::Duration;

fn model(a: [u64; 4], b: [u64; 4], variant: Variant) -> TimingModel {
    TimingModel::new(OpTiming::from_micros("A", a), OpTiming::from_micros("B", b), variant)
}

fn variant_of(kind: ProtocolKind) -> Variant {
    match kind {
        ProtocolKind::StsOpt1 => Variant::Opt1,
        ProtocolKind::StsOpt2 => Variant::Opt2,
        _ => Variant::Serial,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn schedules_match_closed_forms(t in prop::array::uniform4(0u64..1_000_000_000)) {
        let m = model(t, t, Variant::Serial);
        let us = Duration::from_micros;
        let serial = us(2 * (t[0] + t[1] + t[2] + t[3]));
        let opt1 = us(2 * t[0] + t[1] + 2 * t[2] + 2 * t[3]);
        let opt2 = us(2 * t[0] + t[1] + t[2] + 2 * t[3]);
        for (kind, closed) in [(ProtocolKind::Sts, serial), (ProtocolKind::StsOpt1, opt1), (ProtocolKind::StsOpt2, opt2)] {
            let m = m.with_variant(variant_of(kind));
            prop_assert_eq!(total_time(&m), closed);
            prop_assert_eq!(simulate_schedule(&m, &opt_schedule(kind).unwrap()).unwrap(), closed);
        }
        prop_assert_eq!(serial - opt1, us(t[1]));
        prop_assert_eq!(serial - opt2, us(t[1] + t[2]));
        prop_assert_eq!(overlap_adjustment(&m, 2).unwrap(), Duration::ZERO);
    }

    #[test]
    fn variants_are_ordered_for_any_devices(
        a in prop::array::uniform4(0u64..1_000_000_000),
        b in prop::array::uniform4(0u64..1_000_000_000),
    ) {
        let m = model(a, b, Variant::Serial);
        let serial = total_time(&m);
        let opt1 = total_time(&m.with_variant(Variant::Opt1));
        let opt2 = total_time(&m.with_variant(Variant::Opt2));
        prop_assert!(opt2 <= opt1 && opt1 <= serial);
        for (kind, closed) in [(ProtocolKind::Sts, serial), (ProtocolKind::StsOpt1, opt1), (ProtocolKind::StsOpt2, opt2)] {
            prop_assert_eq!(simulate_schedule(&m, &opt_schedule(kind).unwrap()).unwrap(), closed);
        }
        // an overlapped step costs the slower device's time: min credit plus |A−B| residual
        let min2 = Duration::from_micros(a[1].min(b[1]));
        prop_assert_eq!(min2 * 2 + overlap_adjustment(&m, 2).unwrap(), Duration::from_micros(a[1] + b[1]));
    }
}

#[test]
fn overlap_only_for_ops_two_and_three() {
    let m = model([1, 2, 3, 4], [1, 5, 3, 4], Variant::Opt2);
    assert_eq!(overlap_adjustment(&m, 2).unwrap(), Duration::from_micros(3));
    assert!(matches!(overlap_adjustment(&m, 1), Err(AnalysisError::NotOverlappable(1))));
    assert!(matches!(overlap_adjustment(&m, 4), Err(AnalysisError::NotOverlappable(4))));
}

#[test]
fn non_sts_kinds_have_no_schedule() {
    assert!(opt_schedule(ProtocolKind::Scianc).is_err());
    let nodes = Schedule::nodes();
    assert_eq!(nodes.len(), 8);
}

#[test]
fn overhead_totals_and_table() {
    let reports: Vec<_> = ProtocolKind::ALL.iter().map(|&k| overhead_report(k).unwrap()).collect();
    let total = |k: ProtocolKind| {
        let r = reports.iter().find(|r| r.kind == k).unwrap();
        (r.step_count, r.total_bytes)
    };
    assert_eq!(total(ProtocolKind::SEcdsa), (4, 427));
    assert_eq!(total(ProtocolKind::SEcdsaExt), (5, 619));
    assert_eq!(total(ProtocolKind::Sts), (4, 491));
    assert_eq!(total(ProtocolKind::StsOpt1), (4, 491));
    assert_eq!(total(ProtocolKind::StsOpt2), (4, 491));
    assert_eq!(total(ProtocolKind::Scianc), (4, 362));
    assert_eq!(total(ProtocolKind::Poramb), (6, 820));

    let rows = overhead_table(&reports);
    let summaries: Vec<_> = rows.iter().map(|r| (r.protocol.as_str(), r.summary())).collect();
    assert!(summaries.contains(&("S-ECDSA(+ext.)", "4(+1): 427(+192) B".into())), "{summaries:?}");
    assert!(summaries.contains(&("STS", "4: 491 B".into())));
    assert!(summaries.contains(&("SCIANC", "4: 362 B".into())));
    assert!(summaries.contains(&("PORAMB", "6: 820 B".into())));

    let sts = reports.iter().find(|r| r.kind == ProtocolKind::Sts).unwrap();
    assert_eq!(sts.steps.iter().map(|s| s.bytes).collect::<Vec<_>>(), [80, 245, 165, 1]);
    assert_eq!(sts.steps[1].breakdown(), "ID(16), Cert(101), XG(64), Resp(64)");
    // each frame is well below a millisecond; the whole exchange stays in the low milliseconds
    assert!(sts.wire_time_ns < 3_000_000, "{}", sts.wire_time_ns);
    assert!(sts.wire_time_ns > 1_960_000);
}

fn scenario(kind: ProtocolKind, seed: u64, leak: Leak) -> (CompromiseScenario, ecqv_kd::crypto::Digest) {
    let tb = Testbed::provision(seed).unwrap();
    let (mut a, mut b) = tb.pair(kind, 0);
    let report = run_handshake(&mut a, &mut b, &mut Channel::new(ChannelConfig::default())).unwrap();
    assert!(report.agreed());
    let digest = a.session_keys().unwrap().digest();
    let leak = Leak {
        private_keys: if leak.private_keys.is_empty() && leak.psks.is_empty() {
            vec![tb.a.private_key().clone(), tb.b.private_key().clone()]
        } else {
            leak.private_keys
        },
        psks: leak.psks,
    };
    let s = CompromiseScenario {
        kind,
        transcript: a.transcript().clone(),
        ca_public: *tb.ca.public_key(),
        leak,
    };
    (s, digest)
}

#[test]
fn compromise_oracle_dichotomy() {
    for seed in 0..5 {
        for kind in ProtocolKind::ALL {
            let (s, honest) = scenario(kind, seed, Leak::default());
            let rec = forward_secrecy_oracle(&s);
            if kind.is_sts() {
                assert!(rec.keys().is_none(), "{kind} seed {seed}");
            } else {
                assert_eq!(rec.keys().map(|k| k.digest()), Some(honest), "{kind} seed {seed}");
                let confirmed = matches!(rec, Recovery::Recovered { confirmed: true, .. });
                assert_eq!(confirmed, kind != ProtocolKind::SEcdsa, "{kind}");
            }
        }
    }
}

#[test]
fn compromise_oracle_needs_a_private_key() {
    let tb = Testbed::provision(9).unwrap();
    let (s, _) = scenario(ProtocolKind::Poramb, 9, Leak { private_keys: vec![], psks: vec![tb.psk.clone()] });
    assert!(forward_secrecy_oracle(&s).keys().is_none());
    // one side's key is enough for static premasters
    let (s, honest) = scenario(ProtocolKind::Scianc, 9, Leak { private_keys: vec![tb.b.private_key().clone()], psks: vec![] });
    assert_eq!(forward_secrecy_oracle(&s).keys().map(|k| k.digest()), Some(honest));
}

#[test]
fn reuse_probe_separates_ephemeral_from_static() {
    let tb = Testbed::provision(11).unwrap();
    for kind in ProtocolKind::ALL {
        let r = key_reuse_probe(&tb, kind, 12).unwrap();
        if kind.is_sts() {
            assert_eq!((r.distinct_premasters, r.distinct_session_keys), (12, 12), "{kind}");
        } else {
            assert_eq!(r.distinct_premasters, 1, "{kind}");
            assert_eq!(r.distinct_session_keys, 12, "{kind}: nonces still diversify K_S");
        }
    }
}

#[test]
fn threat_matrix_oracle_cells_agree_with_reference() {
    let ev = collect_evidence(21, 3, 5).unwrap();
    assert!(ev.domain_separated);
    for t in &ev.tamper {
        assert!(t.undetected.is_empty(), "{:?}", t);
        assert_eq!(t.detected, t.attempts);
    }
    let m = threat_matrix(&ev);
    assert_eq!(m.cells.len(), 20);
    assert!(m.oracles_agree());
    let sts = m.cell(Threat::DataExposure, ProtocolKind::Sts).unwrap();
    assert!(sts.is_oracle());
    assert_eq!(sts.rating, Rating::Full);
    for k in [ProtocolKind::SEcdsa, ProtocolKind::Scianc, ProtocolKind::Poramb] {
        assert_eq!(m.cell(Threat::DataExposure, k).unwrap().rating, Rating::Weak);
    }
    assert!(!m.cell(Threat::NodeCapturing, ProtocolKind::Sts).unwrap().is_oracle());
    let text = m.render();
    assert!(text.contains("Data exposure"), "{text}");
    assert!(text.contains('✓') && text.contains('Δ'));
}

#[test]
fn primitive_counts_order_the_protocols() {
    let benches = bench_protocols(&ProtocolKind::ALL, 2, 5).unwrap();
    let counts = |k: ProtocolKind| benches.iter().find(|b| b.kind == k).unwrap().counts;
    assert!(counts(ProtocolKind::Poramb).dominates(&counts(ProtocolKind::Scianc)));
    assert_eq!(counts(ProtocolKind::SEcdsa).get(Primitive::Sign), 2);
    assert_eq!(counts(ProtocolKind::Poramb).get(Primitive::Sign), 0);
    assert!(counts(ProtocolKind::Sts).dominates(&counts(ProtocolKind::SEcdsa)));
    assert_eq!(counts(ProtocolKind::Sts), counts(ProtocolKind::StsOpt2));
    assert_eq!(counts(ProtocolKind::Sts).get(Primitive::Sign), 2);
    assert_eq!(counts(ProtocolKind::Sts).get(Primitive::Verify), 2);
    assert_eq!(counts(ProtocolKind::Scianc).get(Primitive::Sign), 0);
    for b in &benches {
        assert_eq!(b.runs(), 2);
        assert!(b.mean() > Duration::ZERO);
    }
}

#[test]
fn cost_estimate_is_linear_in_counts() {
    let costs = measure_primitive_costs(3, 1).unwrap();
    assert_eq!(costs.samples, 3);
    assert!(costs.get(Primitive::VarMul) > costs.get(Primitive::Hash));
    let benches = bench_protocols(&[ProtocolKind::Sts], 1, 1).unwrap();
    let b = &benches[0];
    let manual: Duration = b.counts.iter().map(|(p, n)| costs.get(p) * n as u32).sum();
    assert_eq!(b.compute(&costs), manual);
}

#[test]
fn measured_sts_ops_feed_the_model() {
    let tb = Testbed::provision(2).unwrap();
    let (a, b) = measure_sts_ops(&tb, 2).unwrap();
    for t in [&a, &b] {
        assert!(t.ops.iter().all(|d| *d > Duration::ZERO), "{t:?}");
    }
    let m = TimingModel::new(a.clone(), b.clone(), Variant::Opt2);
    let serial = total_time(&m.with_variant(Variant::Serial));
    assert_eq!(serial, a.sum() + b.sum());
    assert_eq!(
        total_time(&m),
        serial - a.ops[1].min(b.ops[1]) - a.ops[2].min(b.ops[2])
    );
}

#[test]
fn reports_survive_serde_round_trip() {
    let overhead = overhead_report(ProtocolKind::Poramb).unwrap();
    let json = serde_json::to_string(&overhead).unwrap();
    assert_eq!(serde_json::from_str::<OverheadReport>(&json).unwrap(), overhead);

    let m = threat_matrix(&collect_evidence(4, 1, 2).unwrap());
    let json = serde_json::to_string(&m).unwrap();
    assert_eq!(serde_json::from_str::<ThreatMatrix>(&json).unwrap(), m);

    let tb = Testbed::provision(4).unwrap();
    let (mut a, mut b) = tb.pair(ProtocolKind::Sts, 0);
    run_handshake(&mut a, &mut b, &mut Channel::new(ChannelConfig::default())).unwrap();
    let json = serde_json::to_string(a.transcript()).unwrap();
    assert!(json.contains(&hex_of_first_field(&a)));
    assert_eq!(&serde_json::from_str::<ecqv_kd::protocol::Transcript>(&json).unwrap(), a.transcript());
}

fn hex_of_first_field(ctx: &ecqv_kd::protocol::SessionContext) -> String {
    let m = &ctx.transcript().messages()[0];
    m.fields[0].bytes.iter().map(|b| format!("{b:02x}")).collect()
}

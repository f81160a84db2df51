//! Wall-clock measurements on the host.
//!
//! Absolute numbers depend on the machine; only orderings and ratios are
//! meaningful. Besides the end-to-end handshake time, each protocol's
//! compute time is estimated as the number of primitive invocations (counted
//! by the instrumented crypto layer) times the measured median cost of each
//! primitive, which is far less noisy than timing whole handshakes.

use super::timing::OpTiming;
use super::AnalysisError;
use crate::crypto::metrics::{self, OpCounts, Primitive};
use crate::crypto::{
    ecdh, ecdsa_sign, ecdsa_verify, generate_keypair, hash, kdf, mac_cmac, mac_hmac, sym_decrypt,
    sym_encrypt, KeyRole, NonceMode, Point, Scalar, SymmetricKey,
};
use crate::ecqv::derive_public_key;
use crate::protocol::{derive_session_keys, run_handshake, sts_ivs, ProtocolKind, Role, Testbed};
use crate::transport::{Channel, ChannelConfig};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::hint::black_box;
use std::time::{Duration, Instant};

fn median(mut v: Vec<Duration>) -> Duration {
    if v.is_empty() {
        return Duration::ZERO;
    }
    v.sort();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Median cost of one invocation of each primitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveCosts {
    pub costs: BTreeMap<Primitive, Duration>,
    pub samples: usize,
}

impl PrimitiveCosts {
    pub fn get(&self, p: Primitive) -> Duration {
        self.costs.get(&p).copied().unwrap_or_default()
    }

    /// `Σ count(p) · cost(p)`
    pub fn estimate(&self, counts: &OpCounts) -> Duration {
        counts
            .iter()
            .map(|(p, n)| self.get(p) * u32::try_from(n).unwrap_or(u32::MAX))
            .sum()
    }
}

/// Times every primitive `samples` times on inputs shaped like the
/// handshake's (101-byte certificates, 64-byte responses, a few hundred
/// bytes of MAC input).
pub fn measure_primitive_costs(samples: usize, seed: u64) -> Result<PrimitiveCosts, AnalysisError> {
    let samples = samples.max(1);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (k, pk) = generate_keypair(&mut rng)?;
    let (k2, _) = generate_keypair(&mut rng)?;
    let compressed = pk.to_compressed();
    let raw = pk.to_raw();
    let msg = [0x42u8; 128];
    let mac_input = [0x17u8; 320];
    let hmac_key = SymmetricKey::new(KeyRole::Mac, &[7; 32])?;
    let cmac_key = SymmetricKey::new(KeyRole::Mac, &[7; 16])?;
    let enc_key = SymmetricKey::new(KeyRole::Encryption, &[9; 16])?;
    let sig = ecdsa_sign(&k, &msg, NonceMode::Randomized, &mut rng)?;

    let mut costs = BTreeMap::new();
    for p in Primitive::ALL {
        let mut times = Vec::with_capacity(samples);
        for _ in 0..samples {
            let t = match p {
                Primitive::BaseMul => timed(|| black_box(Point::mul_base(black_box(&k2)))).1,
                Primitive::VarMul => timed(|| black_box(pk.mul(black_box(&k2)))).1,
                Primitive::Decompress => timed(|| black_box(Point::from_compressed(black_box(&compressed)))).1,
                Primitive::Validate => timed(|| black_box(Point::from_raw(black_box(&raw)))).1,
                Primitive::Sign => timed(|| black_box(ecdsa_sign(&k, black_box(&msg), NonceMode::Randomized, &mut rng))).1,
                Primitive::Verify => timed(|| black_box(ecdsa_verify(&pk, black_box(&msg), &sig))).1,
                Primitive::Hash => timed(|| black_box(hash(black_box(&msg[..101])))).1,
                Primitive::Kdf => timed(|| black_box(kdf(black_box(&msg[..32]), &msg[..64], b"label", 48))).1,
                Primitive::Hmac => timed(|| black_box(mac_hmac(&hmac_key, black_box(&mac_input)))).1,
                Primitive::Cmac => timed(|| black_box(mac_cmac(&cmac_key, black_box(&mac_input[..200])))).1,
                Primitive::Cipher => timed(|| black_box(sym_encrypt(&enc_key, &[0; 16], black_box(&msg[..64])))).1,
                Primitive::Random => timed(|| {
                    let mut b = [0u8; 32];
                    rng.fill_bytes(&mut b);
                    black_box(b)
                })
                .1,
            };
            times.push(t);
        }
        costs.insert(p, median(times));
    }
    Ok(PrimitiveCosts { costs, samples })
}

/// Median Op1..Op4 durations of both STS parties over `runs` sessions.
///
/// Op1 creates the ephemeral; Op2 derives the peer key from its certificate
/// plus the premaster and session keys; Op3 signs and encrypts; Op4
/// decrypts and verifies.
pub fn measure_sts_ops(tb: &Testbed, runs: usize) -> Result<(OpTiming, OpTiming), AnalysisError> {
    let runs = runs.max(1);
    let mut rng = ChaCha20Rng::seed_from_u64(tb.seed() ^ 0x5354_5f4f_5053);
    let ca = *tb.ca.public_key();
    let label = ProtocolKind::Sts.kdf_label();
    let mut samples: [[Vec<Duration>; 4]; 2] = Default::default();

    for _ in 0..runs {
        let mut eph: Vec<(Scalar, Point)> = Vec::new();
        for side in samples.iter_mut() {
            let (kp, t) = timed(|| generate_keypair(&mut rng));
            eph.push(kp?);
            side[0].push(t);
        }
        let xg = [eph[0].1.to_raw(), eph[1].1.to_raw()];
        let mut keys = Vec::new();
        let mut peers = Vec::new();
        for (i, role) in [Role::Initiator, Role::Responder].into_iter().enumerate() {
            let peer_cert = tb.identity(role.peer()).certificate();
            let (out, t) = timed(|| -> Result<_, AnalysisError> {
                let q = derive_public_key(peer_cert, &ca).map_err(crate::protocol::ProtocolError::from)?;
                let pm = ecdh(&eph[i].0, &eph[1 - i].1)?.x_bytes();
                let salt = [xg[0], xg[1]].concat();
                let k = derive_session_keys(&pm, &salt, label)?;
                let ivs = sts_ivs(&pm, &xg[0], &xg[1])?;
                Ok((q, k, ivs))
            });
            let (q, k, ivs) = out?;
            samples[i][1].push(t);
            peers.push(q);
            keys.push((k, ivs));
        }
        let mut resps = Vec::new();
        for (i, role) in [Role::Initiator, Role::Responder].into_iter().enumerate() {
            let d = tb.identity(role).private_key();
            let (k, (iv_a, iv_b)) = &keys[i];
            let iv = if i == 0 { iv_a } else { iv_b };
            let input = [xg[i], xg[1 - i]].concat();
            let (out, t) = timed(|| -> Result<_, AnalysisError> {
                let sig = ecdsa_sign(d, &input, NonceMode::Randomized, &mut rng)?;
                Ok(sym_encrypt(k.enc(), iv, &sig.to_bytes())?)
            });
            resps.push(out?);
            samples[i][2].push(t);
        }
        for i in 0..2 {
            let (k, (iv_a, iv_b)) = &keys[i];
            let peer_iv = if i == 0 { iv_b } else { iv_a };
            let input = [xg[1 - i], xg[i]].concat();
            let (ok, t) = timed(|| -> Result<bool, AnalysisError> {
                let sig = sym_decrypt(k.enc(), peer_iv, &resps[1 - i])?;
                let sig = crate::crypto::Signature::from_bytes(sig.try_into().unwrap_or([0; 64]));
                Ok(ecdsa_verify(&peers[i], &input, &sig))
            });
            if !ok? {
                return Err(AnalysisError::Handshake("STS operation replay failed to verify".into()));
            }
            samples[i][3].push(t);
        }
    }
    let timing = |name: &str, s: &[Vec<Duration>; 4]| {
        OpTiming::new(name, [0, 1, 2, 3].map(|i| median(s[i].clone())))
    };
    Ok((timing("A", &samples[0]), timing("B", &samples[1])))
}

/// End-to-end measurements of one protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolBench {
    pub kind: ProtocolKind,
    /// Wall-clock time of each complete handshake (both parties, in process).
    pub samples: Vec<Duration>,
    /// Primitive invocations of one handshake, both parties.
    pub counts: OpCounts,
}

impl ProtocolBench {
    pub fn runs(&self) -> usize {
        self.samples.len()
    }

    pub fn mean(&self) -> Duration {
        if self.samples.is_empty() {
            return Duration::ZERO;
        }
        self.samples.iter().sum::<Duration>() / self.samples.len() as u32
    }

    /// Sample standard deviation.
    pub fn sd(&self) -> Duration {
        let n = self.samples.len();
        if n < 2 {
            return Duration::ZERO;
        }
        let mean = self.mean().as_secs_f64();
        let var = self
            .samples
            .iter()
            .map(|s| (s.as_secs_f64() - mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        Duration::from_secs_f64(var.sqrt())
    }

    pub fn median(&self) -> Duration {
        median(self.samples.clone())
    }

    pub fn compute(&self, costs: &super::PrimitiveCosts) -> Duration {
        costs.estimate(&self.counts)
    }
}

/// Runs `runs` honest handshakes of every kind, interleaving the kinds so
/// that drift in machine load spreads evenly.
pub fn bench_protocols(kinds: &[ProtocolKind], runs: usize, seed: u64) -> Result<Vec<ProtocolBench>, AnalysisError> {
    let tb = Testbed::provision(seed)?;
    let mut out: Vec<ProtocolBench> = kinds
        .iter()
        .map(|&kind| ProtocolBench {
            kind,
            samples: Vec::with_capacity(runs),
            counts: OpCounts::default(),
        })
        .collect();
    for run in 0..runs {
        for bench in out.iter_mut() {
            let (mut a, mut b) = tb.pair(bench.kind, run as u64);
            let mut channel = Channel::new(ChannelConfig::default());
            let start = Instant::now();
            let (report, counts) = metrics::count(|| run_handshake(&mut a, &mut b, &mut channel));
            let elapsed = start.elapsed();
            let report = report?;
            if !report.agreed() {
                return Err(AnalysisError::Handshake(format!("{} run {run}", bench.kind)));
            }
            bench.samples.push(elapsed);
            bench.counts = counts;
        }
    }
    Ok(out)
}

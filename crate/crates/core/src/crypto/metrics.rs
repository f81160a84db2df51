//! Per-thread primitive invocation counters.
//!
//! Every primitive in this module records one tick when it runs. The
//! benchmark layer multiplies these counts by measured per-primitive costs
//! to obtain a low-noise compute profile for a whole handshake.

use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Primitive {
    /// Fixed-base scalar multiplication (key generation).
    BaseMul,
    /// Variable-base scalar multiplication (ECDH, implicit key derivation).
    VarMul,
    /// Compressed point decoding (square root in the base field).
    Decompress,
    /// Raw point decoding with curve-equation check.
    Validate,
    Sign,
    Verify,
    Hash,
    Kdf,
    Hmac,
    Cmac,
    Cipher,
    Random,
}

impl Primitive {
    pub const ALL: [Primitive; 12] = [
        Primitive::BaseMul,
        Primitive::VarMul,
        Primitive::Decompress,
        Primitive::Validate,
        Primitive::Sign,
        Primitive::Verify,
        Primitive::Hash,
        Primitive::Kdf,
        Primitive::Hmac,
        Primitive::Cmac,
        Primitive::Cipher,
        Primitive::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::BaseMul => "base_mul",
            Primitive::VarMul => "var_mul",
            Primitive::Decompress => "decompress",
            Primitive::Validate => "validate",
            Primitive::Sign => "ecdsa_sign",
            Primitive::Verify => "ecdsa_verify",
            Primitive::Hash => "sha256",
            Primitive::Kdf => "kdf",
            Primitive::Hmac => "hmac",
            Primitive::Cmac => "cmac",
            Primitive::Cipher => "aes_ctr",
            Primitive::Random => "random",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const N: usize = Primitive::ALL.len();

thread_local! {
    static COUNTERS: Cell<[u64; N]> = const { Cell::new([0; N]) };
}

pub(crate) fn record(p: Primitive) {
    COUNTERS.with(|c| {
        let mut v = c.get();
        v[p.index()] += 1;
        c.set(v);
    });
}

/// Clears this thread's counters.
pub fn reset() {
    COUNTERS.with(|c| c.set([0; N]));
}

pub fn snapshot() -> OpCounts {
    OpCounts(COUNTERS.with(|c| c.get()))
}

/// Runs `f` with freshly reset counters and returns its result together with
/// the primitives it invoked. The previous counter state is restored.
pub fn count<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    let saved = COUNTERS.with(|c| c.replace([0; N]));
    let out = f();
    let counts = snapshot();
    COUNTERS.with(|c| {
        let mut merged = saved;
        for (m, x) in merged.iter_mut().zip(counts.0.iter()) {
            *m += x;
        }
        c.set(merged);
    });
    (out, counts)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts([u64; N]);

impl OpCounts {
    pub fn get(&self, p: Primitive) -> u64 {
        self.0[p.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Primitive, u64)> + '_ {
        Primitive::ALL.iter().map(move |&p| (p, self.get(p)))
    }

    /// True when every count in `self` is at least the matching count in `other`.
    pub fn dominates(&self, other: &OpCounts) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a >= b)
    }
}

use super::metrics::{record, Primitive};
use super::{CryptoError, Point, Scalar};
use p256::ecdsa::signature::{RandomizedSigner, Signer, Verifier};
use p256::ecdsa::{SigningKey, VerifyingKey};
use p256::NonZeroScalar;
use rand_core::CryptoRngCore;
use std::fmt;

pub const SIGNATURE_LEN: usize = 64;

/// ECDSA signature in raw `r ‖ s` form.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Signature([u8; SIGNATURE_LEN]);

impl Signature {
    pub fn from_bytes(bytes: [u8; SIGNATURE_LEN]) -> Self {
        Signature(bytes)
    }

    pub fn to_bytes(&self) -> [u8; SIGNATURE_LEN] {
        self.0
    }

    pub fn r(&self) -> &[u8] {
        &self.0[..32]
    }

    pub fn s(&self) -> &[u8] {
        &self.0[32..]
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({})", hex::encode(self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonceMode {
    /// RFC 6979 nonce derived from key and message; reproducible.
    Deterministic,
    /// RFC 6979 nonce mixed with fresh randomness.
    #[default]
    Randomized,
}

/// Signs SHA-256(`message`). `rng` is only consulted in randomized mode.
pub fn ecdsa_sign<R: CryptoRngCore + ?Sized>(
    key: &Scalar,
    message: &[u8],
    mode: NonceMode,
    rng: &mut R,
) -> Result<Signature, CryptoError> {
    let nz = Option::<NonZeroScalar>::from(NonZeroScalar::new(*key.inner()))
        .ok_or(CryptoError::InvalidScalar)?;
    let sk = SigningKey::from(nz);
    record(Primitive::Sign);
    let sig: p256::ecdsa::Signature = match mode {
        NonceMode::Deterministic => sk.sign(message),
        NonceMode::Randomized => sk
            .try_sign_with_rng(&mut RngAdapter(rng), message)
            .map_err(|e| CryptoError::Entropy(e.to_string()))?,
    };
    let mut out = [0u8; SIGNATURE_LEN];
    out.copy_from_slice(&sig.to_bytes());
    Ok(Signature(out))
}

/// Accepts iff `sig` is a valid signature on `message` under `public`.
/// Out-of-range `r` or `s` is a plain rejection.
pub fn ecdsa_verify(public: &Point, message: &[u8], sig: &Signature) -> bool {
    record(Primitive::Verify);
    let Ok(sig) = p256::ecdsa::Signature::from_slice(&sig.0) else {
        return false;
    };
    let Ok(vk) = VerifyingKey::from_affine(*public.affine()) else {
        return false;
    };
    vk.verify(message, &sig).is_ok()
}

// `try_sign_with_rng` wants a sized `CryptoRngCore`.
struct RngAdapter<'a, R: ?Sized>(&'a mut R);

impl<R: CryptoRngCore + ?Sized> rand_core::RngCore for RngAdapter<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand_core::Error> {
        self.0.try_fill_bytes(dest)
    }
}

impl<R: CryptoRngCore + ?Sized> rand_core::CryptoRng for RngAdapter<'_, R> {}

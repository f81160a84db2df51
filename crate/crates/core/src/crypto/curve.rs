use super::metrics::{record, Primitive};
use super::CryptoError;
use p256::elliptic_curve::Group as _;
use p256::elliptic_curve::ops::Reduce;
use p256::elliptic_curve::point::AffineCoordinates;
use p256::elliptic_curve::sec1::{FromEncodedPoint, ToEncodedPoint};
use p256::elliptic_curve::{Field, PrimeField};
use p256::{AffinePoint, EncodedPoint, FieldBytes, ProjectivePoint, U256};
use rand_core::CryptoRngCore;
use std::fmt;
use subtle::ConstantTimeEq;
use zeroize::Zeroize;

pub const SCALAR_LEN: usize = 32;
/// `x ‖ y` without the SEC1 prefix byte.
pub const RAW_POINT_LEN: usize = 64;
pub const COMPRESSED_POINT_LEN: usize = 33;

/// An integer modulo the P-256 group order `n`.
///
/// Secret scalars are wiped on drop; [`Scalar::erase`] wipes earlier.
#[derive(Clone)]
pub struct Scalar(p256::Scalar);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(p256::Scalar::ZERO)
    }

    pub fn one() -> Self {
        Scalar(p256::Scalar::ONE)
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(p256::Scalar::from(v))
    }

    /// Canonical decoding: rejects encodings of values `>= n`.
    pub fn from_be_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != SCALAR_LEN {
            return Err(CryptoError::InvalidScalar);
        }
        let repr = FieldBytes::clone_from_slice(bytes);
        Option::<p256::Scalar>::from(p256::Scalar::from_repr(repr))
            .map(Scalar)
            .ok_or(CryptoError::InvalidScalar)
    }

    /// Interprets 32 bytes as a big-endian integer and reduces it mod `n`.
    pub fn from_be_bytes_reduced(bytes: &[u8; SCALAR_LEN]) -> Self {
        let repr = FieldBytes::clone_from_slice(bytes);
        Scalar(<p256::Scalar as Reduce<U256>>::reduce_bytes(&repr))
    }

    pub fn to_be_bytes(&self) -> [u8; SCALAR_LEN] {
        self.0.to_repr().into()
    }

    /// Uniform in `[1, n-1]` by rejection sampling.
    pub fn random_nonzero<R: CryptoRngCore + ?Sized>(rng: &mut R) -> Result<Self, CryptoError> {
        record(Primitive::Random);
        let mut buf = [0u8; SCALAR_LEN];
        loop {
            rng.try_fill_bytes(&mut buf)
                .map_err(|e| CryptoError::Entropy(e.to_string()))?;
            let candidate = Scalar::from_be_bytes(&buf);
            buf.zeroize();
            if let Ok(s) = candidate {
                if !s.is_zero() {
                    return Ok(s);
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        bool::from(self.0.is_zero())
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 + other.0)
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        Scalar(self.0 * other.0)
    }

    pub fn negate(&self) -> Scalar {
        Scalar(-self.0)
    }

    /// Overwrites the value with zero.
    pub fn erase(&mut self) {
        self.0.zeroize();
    }

    pub(crate) fn inner(&self) -> &p256::Scalar {
        &self.0
    }
}

impl Drop for Scalar {
    fn drop(&mut self) {
        self.0.zeroize();
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        bool::from(self.0.ct_eq(&other.0))
    }
}

impl Eq for Scalar {}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Scalar(..)")
    }
}

/// A point on P-256 other than the point at infinity.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Point(AffinePoint);

impl Point {
    pub fn generator() -> Self {
        Point(AffinePoint::GENERATOR)
    }

    fn from_projective(p: ProjectivePoint) -> Result<Self, CryptoError> {
        if bool::from(p.is_identity()) {
            return Err(CryptoError::IdentityPoint);
        }
        Ok(Point(p.to_affine()))
    }

    /// `k·G`
    pub fn mul_base(k: &Scalar) -> Result<Self, CryptoError> {
        record(Primitive::BaseMul);
        Self::from_projective(ProjectivePoint::GENERATOR * k.inner())
    }

    /// `k·self`
    pub fn mul(&self, k: &Scalar) -> Result<Self, CryptoError> {
        record(Primitive::VarMul);
        Self::from_projective(ProjectivePoint::from(self.0) * k.inner())
    }

    /// `k·self + addend`
    pub fn mul_add(&self, k: &Scalar, addend: &Point) -> Result<Self, CryptoError> {
        record(Primitive::VarMul);
        Self::from_projective(ProjectivePoint::from(self.0) * k.inner() + addend.0)
    }

    pub fn add(&self, other: &Point) -> Result<Self, CryptoError> {
        Self::from_projective(ProjectivePoint::from(self.0) + other.0)
    }

    pub fn negate(&self) -> Point {
        Point(-self.0)
    }

    pub fn x_bytes(&self) -> [u8; 32] {
        self.0.x().into()
    }

    pub fn y_bytes(&self) -> [u8; 32] {
        let enc = self.0.to_encoded_point(false);
        let mut out = [0u8; 32];
        out.copy_from_slice(enc.y().expect("uncompressed encoding carries y"));
        out
    }

    pub fn to_raw(&self) -> [u8; RAW_POINT_LEN] {
        let enc = self.0.to_encoded_point(false);
        let mut out = [0u8; RAW_POINT_LEN];
        out.copy_from_slice(&enc.as_bytes()[1..]);
        out
    }

    /// Decodes `x ‖ y` and checks the curve equation.
    pub fn from_raw(bytes: &[u8]) -> Result<Self, CryptoError> {
        record(Primitive::Validate);
        if bytes.len() != RAW_POINT_LEN {
            return Err(CryptoError::InvalidPoint);
        }
        let mut sec1 = [0u8; RAW_POINT_LEN + 1];
        sec1[0] = 0x04;
        sec1[1..].copy_from_slice(bytes);
        Self::from_sec1(&sec1)
    }

    pub fn to_compressed(&self) -> [u8; COMPRESSED_POINT_LEN] {
        let enc = self.0.to_encoded_point(true);
        let mut out = [0u8; COMPRESSED_POINT_LEN];
        out.copy_from_slice(enc.as_bytes());
        out
    }

    pub fn from_compressed(bytes: &[u8]) -> Result<Self, CryptoError> {
        record(Primitive::Decompress);
        if bytes.len() != COMPRESSED_POINT_LEN || !matches!(bytes[0], 0x02 | 0x03) {
            return Err(CryptoError::InvalidPoint);
        }
        Self::from_sec1(bytes)
    }

    fn from_sec1(bytes: &[u8]) -> Result<Self, CryptoError> {
        let enc = EncodedPoint::from_bytes(bytes).map_err(|_| CryptoError::InvalidPoint)?;
        let p = Option::<AffinePoint>::from(AffinePoint::from_encoded_point(&enc))
            .ok_or(CryptoError::InvalidPoint)?;
        if bool::from(p.is_identity()) {
            return Err(CryptoError::IdentityPoint);
        }
        Ok(Point(p))
    }

    pub(crate) fn affine(&self) -> &AffinePoint {
        &self.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point({})", hex::encode(self.to_compressed()))
    }
}

/// Fresh key pair `(x, x·G)` with `x` uniform in `[1, n-1]`.
pub fn generate_keypair<R: CryptoRngCore + ?Sized>(
    rng: &mut R,
) -> Result<(Scalar, Point), CryptoError> {
    let x = Scalar::random_nonzero(rng)?;
    let xg = Point::mul_base(&x)?;
    Ok((x, xg))
}

/// Diffie-Hellman: `secret·peer`.
///
/// `peer` is on the curve and finite by construction of [`Point`]; a zero
/// secret is rejected because it would produce the identity.
pub fn ecdh(secret: &Scalar, peer: &Point) -> Result<Point, CryptoError> {
    if secret.is_zero() {
        return Err(CryptoError::InvalidScalar);
    }
    peer.mul(secret)
}

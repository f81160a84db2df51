use super::EcqvError;
use crate::crypto::{hash, Point, Scalar, COMPRESSED_POINT_LEN};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const ID_LEN: usize = 16;
pub const EXTENSIONS_LEN: usize = 22;
/// Encoded certificate size.
pub const CERT_LEN: usize = 101;
/// TLS named-curve code point for secp256r1.
pub const CURVE_P256: u8 = 0x17;
pub const KEY_USAGE_KEY_AGREEMENT: u8 = 0x03;

const OFF_ISSUER: usize = ID_LEN;
const OFF_SERIAL: usize = OFF_ISSUER + ID_LEN;
const OFF_FROM: usize = OFF_SERIAL + 4;
const OFF_TO: usize = OFF_FROM + 4;
const OFF_CURVE: usize = OFF_TO + 4;
const OFF_USAGE: usize = OFF_CURVE + 1;
const OFF_POINT: usize = OFF_USAGE + 1;
const OFF_EXT: usize = OFF_POINT + COMPRESSED_POINT_LEN;
const _: () = assert!(OFF_EXT + EXTENSIONS_LEN == CERT_LEN);

/// 16-byte device identity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeviceId(pub [u8; ID_LEN]);

impl DeviceId {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, EcqvError> {
        bytes
            .try_into()
            .map(DeviceId)
            .map_err(|_| EcqvError::IdentityLength(bytes.len()))
    }

    /// Left-aligned ASCII label, zero padded; longer labels are truncated.
    pub fn from_label(label: &str) -> Self {
        let mut id = [0u8; ID_LEN];
        let n = label.len().min(ID_LEN);
        id[..n].copy_from_slice(&label.as_bytes()[..n]);
        DeviceId(id)
    }

    pub fn as_bytes(&self) -> &[u8; ID_LEN] {
        &self.0
    }
}

impl fmt::Debug for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let printable = self
            .0
            .iter()
            .all(|&b| b == 0 || b.is_ascii_graphic() || b == b' ');
        if printable {
            let s: String = self.0.iter().take_while(|&&b| b != 0).map(|&b| b as char).collect();
            write!(f, "DeviceId({s:?})")
        } else {
            write!(f, "DeviceId({})", hex::encode(self.0))
        }
    }
}

/// Half-open validity window `[from, to)` in epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validity {
    pub from: u32,
    pub to: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertDecodeError {
    #[error("certificate must be {CERT_LEN} bytes, got {0}")]
    Length(usize),
    #[error("reconstruction point does not decode to a curve point")]
    Point,
    #[error("validity window is empty")]
    Validity,
    #[error("unsupported curve id {0:#04x}")]
    Curve(u8),
}

/// Minimal 101-byte implicit certificate.
///
/// Layout: `subject(16) ‖ issuer(16) ‖ serial(4) ‖ valid_from(4) ‖ valid_to(4)
/// ‖ curve(1) ‖ key_usage(1) ‖ P_U compressed(33) ‖ extensions(22)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicitCertificate {
    pub subject_id: DeviceId,
    pub issuer_id: DeviceId,
    pub serial: u32,
    pub validity: Validity,
    pub curve_id: u8,
    pub key_usage: u8,
    pub reconstruction_point: Point,
    pub extensions: [u8; EXTENSIONS_LEN],
}

impl ImplicitCertificate {
    pub fn encode(&self) -> [u8; CERT_LEN] {
        let mut out = [0u8; CERT_LEN];
        out[..OFF_ISSUER].copy_from_slice(&self.subject_id.0);
        out[OFF_ISSUER..OFF_SERIAL].copy_from_slice(&self.issuer_id.0);
        out[OFF_SERIAL..OFF_FROM].copy_from_slice(&self.serial.to_be_bytes());
        out[OFF_FROM..OFF_TO].copy_from_slice(&self.validity.from.to_be_bytes());
        out[OFF_TO..OFF_CURVE].copy_from_slice(&self.validity.to.to_be_bytes());
        out[OFF_CURVE] = self.curve_id;
        out[OFF_USAGE] = self.key_usage;
        out[OFF_POINT..OFF_EXT].copy_from_slice(&self.reconstruction_point.to_compressed());
        out[OFF_EXT..].copy_from_slice(&self.extensions);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CertDecodeError> {
        if bytes.len() != CERT_LEN {
            return Err(CertDecodeError::Length(bytes.len()));
        }
        let u32_at = |off: usize| u32::from_be_bytes(bytes[off..off + 4].try_into().unwrap());
        let id_at = |off: usize| DeviceId(bytes[off..off + ID_LEN].try_into().unwrap());
        let validity = Validity {
            from: u32_at(OFF_FROM),
            to: u32_at(OFF_TO),
        };
        if validity.from >= validity.to {
            return Err(CertDecodeError::Validity);
        }
        let curve_id = bytes[OFF_CURVE];
        if curve_id != CURVE_P256 {
            return Err(CertDecodeError::Curve(curve_id));
        }
        let reconstruction_point =
            Point::from_compressed(&bytes[OFF_POINT..OFF_EXT]).map_err(|_| CertDecodeError::Point)?;
        Ok(ImplicitCertificate {
            subject_id: id_at(0),
            issuer_id: id_at(OFF_ISSUER),
            serial: u32_at(OFF_SERIAL),
            validity,
            curve_id,
            key_usage: bytes[OFF_USAGE],
            reconstruction_point,
            extensions: bytes[OFF_EXT..].try_into().unwrap(),
        })
    }

    /// `e = SHA-256(encoded certificate)` reduced mod `n`.
    pub fn hash_scalar(&self) -> Scalar {
        Scalar::from_be_bytes_reduced(hash(&self.encode()).as_bytes())
    }

    pub fn is_valid_at(&self, now: u32) -> bool {
        self.validity.from <= now && now < self.validity.to
    }
}

/// Implicit public key `Q = e·P_U + Q_CA`.
pub fn derive_public_key(cert: &ImplicitCertificate, ca_public: &Point) -> Result<Point, EcqvError> {
    let e = cert.hash_scalar();
    Ok(cert.reconstruction_point.mul_add(&e, ca_public)?)
}

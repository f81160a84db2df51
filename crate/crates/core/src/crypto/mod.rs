//! Primitive layer shared by every handshake.
//!
//! Everything here is fixed to one parameter set: NIST P-256 for curve
//! arithmetic and ECDSA, SHA-256 for hashing, an HMAC-SHA256
//! extract-and-expand KDF, AES-128 in counter mode, HMAC-SHA256 and
//! AES-CMAC. Integers are encoded big-endian throughout.

mod cipher;
mod curve;
mod ecdsa;
mod hash;
mod kdf;
mod mac;
pub mod metrics;
mod symmetric;

pub use cipher::{sym_decrypt, sym_encrypt, IV_LEN};
pub use curve::{
    ecdh, generate_keypair, Point, Scalar, COMPRESSED_POINT_LEN, RAW_POINT_LEN, SCALAR_LEN,
};
pub use ecdsa::{ecdsa_sign, ecdsa_verify, NonceMode, Signature, SIGNATURE_LEN};
pub use hash::{hash, hash_parts, Digest, DIGEST_LEN};
pub use kdf::{kdf, KDF_MAX_OUTPUT};
pub use mac::{mac_cmac, mac_hmac, tags_equal, CMAC_TAG_LEN, HMAC_TAG_LEN};
pub use symmetric::{KeyRole, SymmetricKey};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("entropy source failure: {0}")]
    Entropy(String),
    #[error("scalar out of range")]
    InvalidScalar,
    #[error("invalid point encoding or point not on curve")]
    InvalidPoint,
    #[error("point at infinity")]
    IdentityPoint,
    #[error("kdf output of {requested} bytes exceeds the {max}-byte limit")]
    OutputTooLong { requested: usize, max: usize },
    #[error("key role mismatch: expected {expected:?}, got {actual:?}")]
    KeyRole { expected: KeyRole, actual: KeyRole },
    #[error("invalid key length {len} for {role:?} key")]
    KeyLength { role: KeyRole, len: usize },
}

//! ECQV implicit certificates.
//!
//! Issuance follows the standard Qu-Vanstone construction:
//!
//! * requester: `k_U` random, `R_U = k_U·G`
//! * CA: `k_CA` random, `P_U = R_U + k_CA·G`, `e = H(Cert) mod n`,
//!   `r = e·k_CA + d_CA`
//! * requester: `d_U = e·k_U + r`, `Q_U = e·P_U + Q_CA`, and `Q_U = d_U·G`
//!   must hold
//!
//! Anyone holding the certificate and `Q_CA` recomputes `Q_U` without a CA
//! signature; a certificate not issued by the CA yields a public key nobody
//! holds the private key for.

mod ca;
mod cert;

pub use ca::{ca_issue, cert_receive, cert_request, CaState, CertificateRequest, IssuanceRecord};
pub use cert::{
    derive_public_key, CertDecodeError, DeviceId, ImplicitCertificate, Validity, CERT_LEN,
    CURVE_P256, EXTENSIONS_LEN, ID_LEN, KEY_USAGE_KEY_AGREEMENT,
};

use crate::crypto::{CryptoError, Point, Scalar};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EcqvError {
    #[error("identity must be {ID_LEN} bytes, got {0}")]
    IdentityLength(usize),
    #[error("empty validity window")]
    EmptyValidity,
    #[error("malformed certificate: {0}")]
    Malformed(#[from] CertDecodeError),
    #[error("reconstructed key pair is inconsistent: certificate or r corrupted in transit")]
    IssuanceCorrupted,
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// A device's certificate together with the key pair it reconstructed.
///
/// Invariant: `public = private·G = derive_public_key(certificate, Q_CA)`.
#[derive(Debug, Clone)]
pub struct CertifiedIdentity {
    certificate: ImplicitCertificate,
    private: Scalar,
    public: Point,
}

impl CertifiedIdentity {
    /// Pairs a certificate with an arbitrary private key, skipping the ECQV
    /// consistency check. Only useful to model a forger.
    pub fn from_parts_unchecked(certificate: ImplicitCertificate, private: Scalar) -> Result<Self, CryptoError> {
        let public = Point::mul_base(&private)?;
        Ok(CertifiedIdentity {
            certificate,
            private,
            public,
        })
    }

    pub fn certificate(&self) -> &ImplicitCertificate {
        &self.certificate
    }

    pub fn id(&self) -> DeviceId {
        self.certificate.subject_id
    }

    pub fn private_key(&self) -> &Scalar {
        &self.private
    }

    pub fn public_key(&self) -> &Point {
        &self.public
    }
}

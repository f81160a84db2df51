use super::cert::{
    DeviceId, ImplicitCertificate, Validity, CURVE_P256, EXTENSIONS_LEN, KEY_USAGE_KEY_AGREEMENT,
};
use super::{derive_public_key, CertifiedIdentity, EcqvError};
use crate::crypto::{generate_keypair, CryptoError, Point, Scalar};
use rand_core::CryptoRngCore;

/// Request sent to the CA. The commitment secret `k_U` stays with the
/// requester and is never part of the wire form.
#[derive(Debug)]
pub struct CertificateRequest {
    identity: DeviceId,
    commitment: Point,
    secret: Scalar,
}

impl CertificateRequest {
    pub fn identity(&self) -> DeviceId {
        self.identity
    }

    /// `R_U = k_U·G`
    pub fn commitment(&self) -> &Point {
        &self.commitment
    }

    /// `k_U`, needed again in [`cert_receive`].
    pub fn secret(&self) -> &Scalar {
        &self.secret
    }
}

pub fn cert_request<R: CryptoRngCore + ?Sized>(
    identity: &[u8],
    rng: &mut R,
) -> Result<CertificateRequest, EcqvError> {
    let identity = DeviceId::from_slice(identity)?;
    let (secret, commitment) = generate_keypair(rng)?;
    Ok(CertificateRequest {
        identity,
        commitment,
        secret,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IssuanceRecord {
    pub identity: DeviceId,
    pub serial: u32,
}

/// Certificate authority: key pair, serial counter and an append-only log.
#[derive(Debug)]
pub struct CaState {
    id: DeviceId,
    secret: Scalar,
    public: Point,
    next_serial: u32,
    log: Vec<IssuanceRecord>,
}

impl CaState {
    pub fn new<R: CryptoRngCore + ?Sized>(id: DeviceId, rng: &mut R) -> Result<Self, CryptoError> {
        let (secret, public) = generate_keypair(rng)?;
        Ok(CaState {
            id,
            secret,
            public,
            next_serial: 1,
            log: Vec::new(),
        })
    }

    pub fn id(&self) -> DeviceId {
        self.id
    }

    /// `Q_CA`
    pub fn public_key(&self) -> &Point {
        &self.public
    }

    pub fn issued(&self) -> &[IssuanceRecord] {
        &self.log
    }

    pub fn next_serial(&self) -> u32 {
        self.next_serial
    }
}

/// Issues an implicit certificate for `request` and returns it with the
/// private-key reconstruction value `r`.
///
/// Reissuing to an identity that already holds a certificate is allowed;
/// it simply receives the next serial.
pub fn ca_issue<R: CryptoRngCore + ?Sized>(
    ca: &mut CaState,
    request: &CertificateRequest,
    validity: Validity,
    rng: &mut R,
) -> Result<(ImplicitCertificate, Scalar), EcqvError> {
    if validity.from >= validity.to {
        return Err(EcqvError::EmptyValidity);
    }
    let serial = ca.next_serial;
    loop {
        let (k_ca, k_ca_g) = generate_keypair(rng)?;
        let reconstruction_point = match request.commitment.add(&k_ca_g) {
            Ok(p) => p,
            Err(CryptoError::IdentityPoint) => continue,
            Err(e) => return Err(e.into()),
        };
        let cert = ImplicitCertificate {
            subject_id: request.identity,
            issuer_id: ca.id,
            serial,
            validity,
            curve_id: CURVE_P256,
            key_usage: KEY_USAGE_KEY_AGREEMENT,
            reconstruction_point,
            extensions: [0u8; EXTENSIONS_LEN],
        };
        let e = cert.hash_scalar();
        if e.is_zero() {
            continue;
        }
        let r = e.mul(&k_ca).add(&ca.secret);
        ca.next_serial += 1;
        ca.log.push(IssuanceRecord {
            identity: request.identity,
            serial,
        });
        return Ok((cert, r));
    }
}

/// Reconstructs the requester's key pair and checks `Q_U = d_U·G`.
pub fn cert_receive(
    secret: &Scalar,
    cert: &ImplicitCertificate,
    r: &Scalar,
    ca_public: &Point,
) -> Result<CertifiedIdentity, EcqvError> {
    let e = cert.hash_scalar();
    let private = e.mul(secret).add(r);
    if private.is_zero() {
        return Err(EcqvError::IssuanceCorrupted);
    }
    let public = derive_public_key(cert, ca_public).map_err(|_| EcqvError::IssuanceCorrupted)?;
    if Point::mul_base(&private)? != public {
        return Err(EcqvError::IssuanceCorrupted);
    }
    Ok(CertifiedIdentity {
        certificate: cert.clone(),
        private,
        public,
    })
}

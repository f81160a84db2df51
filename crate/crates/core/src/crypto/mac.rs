use super::metrics::{record, Primitive};
use super::{CryptoError, KeyRole, SymmetricKey};
use aes::Aes128;
use cmac::Cmac;
use hmac::{Hmac, Mac};
use sha2::Sha256;
use subtle::ConstantTimeEq;

pub const HMAC_TAG_LEN: usize = 32;
pub const CMAC_TAG_LEN: usize = 16;

pub fn mac_hmac(key: &SymmetricKey, message: &[u8]) -> Result<[u8; HMAC_TAG_LEN], CryptoError> {
    key.expect_role(KeyRole::Mac)?;
    record(Primitive::Hmac);
    let mut m = Hmac::<Sha256>::new_from_slice(key.expose()).expect("hmac accepts any key length");
    m.update(message);
    Ok(m.finalize().into_bytes().into())
}

/// AES-128-CMAC; the key must be a 16-byte MAC key.
pub fn mac_cmac(key: &SymmetricKey, message: &[u8]) -> Result<[u8; CMAC_TAG_LEN], CryptoError> {
    key.expect_role(KeyRole::Mac)?;
    if key.len() != 16 {
        return Err(CryptoError::KeyLength {
            role: KeyRole::Mac,
            len: key.len(),
        });
    }
    record(Primitive::Cmac);
    let mut m = <Cmac<Aes128> as Mac>::new_from_slice(key.expose()).expect("16-byte key");
    m.update(message);
    Ok(m.finalize().into_bytes().into())
}

/// Constant-time equality; differing lengths compare unequal.
pub fn tags_equal(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && bool::from(a.ct_eq(b))
}

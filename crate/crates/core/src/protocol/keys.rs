use crate::crypto::{hash_parts, kdf, CryptoError, Digest, KeyRole, SymmetricKey, IV_LEN};
use zeroize::Zeroize;

pub const ENC_KEY_LEN: usize = 16;
pub const MAC_KEY_LEN: usize = 32;

/// Premaster secret and the session keys expanded from it.
#[derive(Clone)]
pub struct SessionKeys {
    premaster: [u8; 32],
    enc: SymmetricKey,
    mac: SymmetricKey,
}

/// `K_S = KDF(K_PM, salt, label)`, 48 bytes split into an AES key and an
/// HMAC key.
pub fn derive_session_keys(
    premaster: &[u8; 32],
    salt: &[u8],
    label: &[u8],
) -> Result<SessionKeys, CryptoError> {
    let okm = kdf(premaster, salt, label, ENC_KEY_LEN + MAC_KEY_LEN)?;
    Ok(SessionKeys {
        premaster: *premaster,
        enc: SymmetricKey::new(KeyRole::Encryption, &okm[..ENC_KEY_LEN])?,
        mac: SymmetricKey::new(KeyRole::Mac, &okm[ENC_KEY_LEN..])?,
    })
}

/// Counter-mode IVs for the two STS responses, `(initiator, responder)`.
///
/// Both are derived from the premaster and never sent; using one IV per
/// direction keeps the two responses from sharing keystream.
pub fn sts_ivs(
    premaster: &[u8; 32],
    xg_a: &[u8],
    xg_b: &[u8],
) -> Result<([u8; IV_LEN], [u8; IV_LEN]), CryptoError> {
    let salt = [xg_a, xg_b].concat();
    let okm = kdf(premaster, &salt, b"sts-iv", 2 * IV_LEN)?;
    let mut a = [0u8; IV_LEN];
    let mut b = [0u8; IV_LEN];
    a.copy_from_slice(&okm[..IV_LEN]);
    b.copy_from_slice(&okm[IV_LEN..]);
    Ok((a, b))
}

impl SessionKeys {
    /// `K_PM`: x-coordinate of the shared point.
    pub fn premaster(&self) -> &[u8; 32] {
        &self.premaster
    }

    pub fn enc(&self) -> &SymmetricKey {
        &self.enc
    }

    pub fn mac(&self) -> &SymmetricKey {
        &self.mac
    }

    /// SHA-256 over `enc ‖ mac`; safe to print and compare.
    pub fn digest(&self) -> Digest {
        hash_parts(&[self.enc.expose(), self.mac.expose()])
    }

    pub fn premaster_digest(&self) -> Digest {
        hash_parts(&[&self.premaster])
    }

    pub fn erase(&mut self) {
        self.premaster.zeroize();
        self.enc.erase();
        self.mac.erase();
    }

    pub fn is_erased(&self) -> bool {
        self.premaster.iter().all(|&b| b == 0) && self.enc.is_erased() && self.mac.is_erased()
    }
}

impl Drop for SessionKeys {
    fn drop(&mut self) {
        self.premaster.zeroize();
    }
}

impl std::fmt::Debug for SessionKeys {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SessionKeys(digest={})", self.digest())
    }
}

use super::CryptoError;
use serde::{Deserialize, Serialize};
use std::fmt;
use zeroize::Zeroize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeyRole {
    Encryption,
    Mac,
}

/// Symmetric key material tagged with its role.
///
/// Encryption keys are 16 bytes (AES-128). MAC keys are 16 bytes (CMAC) or
/// 32 bytes (HMAC). The buffer is overwritten with zeros by [`erase`] and on
/// drop; its length is kept so the wipe can be inspected.
///
/// [`erase`]: SymmetricKey::erase
#[derive(Clone, PartialEq, Eq)]
pub struct SymmetricKey {
    role: KeyRole,
    bytes: Vec<u8>,
    erased: bool,
}

impl SymmetricKey {
    pub fn new(role: KeyRole, bytes: &[u8]) -> Result<Self, CryptoError> {
        let ok = match role {
            KeyRole::Encryption => bytes.len() == 16,
            KeyRole::Mac => bytes.len() == 16 || bytes.len() == 32,
        };
        if !ok {
            return Err(CryptoError::KeyLength {
                role,
                len: bytes.len(),
            });
        }
        Ok(SymmetricKey {
            role,
            bytes: bytes.to_vec(),
            erased: false,
        })
    }

    pub fn role(&self) -> KeyRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn expose(&self) -> &[u8] {
        &self.bytes
    }

    pub(crate) fn expect_role(&self, role: KeyRole) -> Result<(), CryptoError> {
        if self.role != role {
            return Err(CryptoError::KeyRole {
                expected: role,
                actual: self.role,
            });
        }
        Ok(())
    }

    pub fn erase(&mut self) {
        self.bytes.zeroize_in_place();
        self.erased = true;
    }

    pub fn is_erased(&self) -> bool {
        self.erased
    }

    /// Raw view of the backing buffer, including after [`SymmetricKey::erase`].
    #[doc(hidden)]
    pub fn debug_buffer(&self) -> &[u8] {
        &self.bytes
    }
}

trait ZeroizeInPlace {
    fn zeroize_in_place(&mut self);
}

impl ZeroizeInPlace for Vec<u8> {
    // `Vec::zeroize` would also truncate; keep the length for inspection.
    fn zeroize_in_place(&mut self) {
        self.as_mut_slice().zeroize();
    }
}

impl Drop for SymmetricKey {
    fn drop(&mut self) {
        self.bytes.zeroize();
    }
}

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymmetricKey({:?}, {} bytes)", self.role, self.bytes.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_are_checked_per_role() {
        assert!(SymmetricKey::new(KeyRole::Encryption, &[1; 16]).is_ok());
        assert!(SymmetricKey::new(KeyRole::Encryption, &[1; 32]).is_err());
        assert!(SymmetricKey::new(KeyRole::Mac, &[1; 16]).is_ok());
        assert!(SymmetricKey::new(KeyRole::Mac, &[1; 32]).is_ok());
        assert!(SymmetricKey::new(KeyRole::Mac, &[1; 20]).is_err());
    }

    #[test]
    fn erase_overwrites_buffer() {
        let mut k = SymmetricKey::new(KeyRole::Mac, &[0xA5; 32]).unwrap();
        k.erase();
        assert!(k.is_erased());
        assert_eq!(k.debug_buffer().len(), 32);
        assert!(k.debug_buffer().iter().all(|&b| b == 0));
    }
}

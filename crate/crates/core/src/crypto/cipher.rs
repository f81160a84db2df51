use super::metrics::{record, Primitive};
use super::{CryptoError, KeyRole, SymmetricKey};
use aes::cipher::{BlockEncrypt, KeyInit};
use aes::{Aes128, Block};

pub const IV_LEN: usize = 16;

/// AES-128 in counter mode. The IV is the initial 128-bit big-endian counter
/// block, incremented modulo 2^128 per block. Output length equals input
/// length; no IV or tag is prepended.
pub fn sym_encrypt(
    key: &SymmetricKey,
    iv: &[u8; IV_LEN],
    plaintext: &[u8],
) -> Result<Vec<u8>, CryptoError> {
    key.expect_role(KeyRole::Encryption)?;
    record(Primitive::Cipher);
    let cipher = Aes128::new_from_slice(key.expose()).map_err(|_| CryptoError::KeyLength {
        role: KeyRole::Encryption,
        len: key.len(),
    })?;
    let mut counter = u128::from_be_bytes(*iv);
    let mut out = Vec::with_capacity(plaintext.len());
    for chunk in plaintext.chunks(16) {
        let mut block = Block::from(counter.to_be_bytes());
        cipher.encrypt_block(&mut block);
        out.extend(chunk.iter().zip(block.iter()).map(|(p, k)| p ^ k));
        counter = counter.wrapping_add(1);
    }
    Ok(out)
}

pub fn sym_decrypt(
    key: &SymmetricKey,
    iv: &[u8; IV_LEN],
    ciphertext: &[u8],
) -> Result<Vec<u8>, CryptoError> {
    sym_encrypt(key, iv, ciphertext)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key() -> SymmetricKey {
        SymmetricKey::new(
            KeyRole::Encryption,
            &hex::decode("2b7e151628aed2a6abf7158809cf4f3c").unwrap(),
        )
        .unwrap()
    }

    const PT: &str = "6bc1bee22e409f96e93d7e117393172aae2d8a571e03ac9c9eb76fac45af8e51\
                      30c81c46a35ce411e5fbc1191a0a52eff69f2445df4f9b17ad2b417be66c3710";

    #[test]
    fn sp800_38a_f51() {
        let iv: [u8; 16] = hex::decode("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff")
            .unwrap()
            .try_into()
            .unwrap();
        let ct = sym_encrypt(&key(), &iv, &hex::decode(PT).unwrap()).unwrap();
        assert_eq!(
            hex::encode(ct),
            "874d6191b620e3261bef6864990db6ce9806f66b7970fdff8617187bb9fffdff\
             5ae4df3edbd5d35e5b4f09020db03eab1e031dda2fbe03d1792170a0f3009cee"
        );
    }

    #[test]
    fn counter_wraps() {
        // Python `cryptography` AES-CTR with an all-ones initial counter.
        let ct = sym_encrypt(&key(), &[0xff; 16], &hex::decode(PT).unwrap()[..40]).unwrap();
        assert_eq!(
            hex::encode(ct),
            "e13338e36cb71962e00d020b4cedbd86d3dae15b04bb352fa0f59febfcb4da3e67da610697ed5aae"
        );
    }

    #[test]
    fn signature_sized_round_trip() {
        let sig = [0x5a; 64];
        let ct = sym_encrypt(&key(), &[1; 16], &sig).unwrap();
        assert_ne!(ct[..], sig[..]);
        assert_eq!(sym_decrypt(&key(), &[1; 16], &ct).unwrap(), sig);
    }

    #[test]
    fn length_preserving() {
        for len in 1..=256 {
            assert_eq!(sym_encrypt(&key(), &[0; 16], &vec![0; len]).unwrap().len(), len);
        }
    }

    #[test]
    fn mac_key_rejected() {
        let k = SymmetricKey::new(KeyRole::Mac, &[0; 16]).unwrap();
        assert!(sym_encrypt(&k, &[0; 16], b"x").is_err());
    }

    proptest! {
        #[test]
        fn decrypt_inverts_encrypt(data in proptest::collection::vec(any::<u8>(), 0..=1024), iv in any::<[u8; 16]>()) {
            let ct = sym_encrypt(&key(), &iv, &data).unwrap();
            prop_assert_eq!(sym_decrypt(&key(), &iv, &ct).unwrap(), data);
        }
    }
}

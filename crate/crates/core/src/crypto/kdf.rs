use super::metrics::{record, Primitive};
use super::CryptoError;
use hmac::{Hmac, Mac};
use sha2::Sha256;
use zeroize::Zeroizing;

type HmacSha256 = Hmac<Sha256>;

pub const KDF_MAX_OUTPUT: usize = 255 * 32;

/// HMAC-SHA256 extract-then-expand.
///
/// `PRK = HMAC(salt, ikm)`, then `T(i) = HMAC(PRK, T(i-1) ‖ info ‖ i)` for
/// `i = 1..`, truncated to `out_len` bytes. An empty salt is replaced by 32
/// zero bytes.
pub fn kdf(
    ikm: &[u8],
    salt: &[u8],
    info: &[u8],
    out_len: usize,
) -> Result<Zeroizing<Vec<u8>>, CryptoError> {
    if out_len > KDF_MAX_OUTPUT {
        return Err(CryptoError::OutputTooLong {
            requested: out_len,
            max: KDF_MAX_OUTPUT,
        });
    }
    record(Primitive::Kdf);
    let zero_salt = [0u8; 32];
    let salt = if salt.is_empty() { &zero_salt[..] } else { salt };

    let mut extract = HmacSha256::new_from_slice(salt).expect("hmac accepts any key length");
    extract.update(ikm);
    let prk = Zeroizing::new(extract.finalize().into_bytes());

    let mut out = Zeroizing::new(Vec::with_capacity(out_len));
    let mut block = Zeroizing::new(Vec::<u8>::new());
    let mut counter = 1u8;
    while out.len() < out_len {
        let mut m = HmacSha256::new_from_slice(&prk).expect("hmac accepts any key length");
        m.update(&block);
        m.update(info);
        m.update(&[counter]);
        *block = m.finalize().into_bytes().to_vec();
        let take = (out_len - out.len()).min(block.len());
        out.extend_from_slice(&block[..take]);
        counter = counter.wrapping_add(1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = kdf(b"ikm", b"salt", b"info", 48).unwrap();
        let b = kdf(b"ikm", b"salt", b"info", 48).unwrap();
        assert_eq!(*a, *b);
        assert_eq!(a.len(), 48);
    }

    #[test]
    fn salt_changes_output() {
        for ikm in [&b"a"[..], &[0u8; 32][..], b"premaster"] {
            let x = kdf(ikm, b"salt-1", b"", 32).unwrap();
            let y = kdf(ikm, b"salt-2", b"", 32).unwrap();
            assert_ne!(*x, *y);
        }
    }

    #[test]
    fn limits() {
        assert_eq!(kdf(b"k", b"s", b"", KDF_MAX_OUTPUT).unwrap().len(), 8160);
        assert!(matches!(
            kdf(b"k", b"s", b"", KDF_MAX_OUTPUT + 1),
            Err(CryptoError::OutputTooLong { requested: 8161, .. })
        ));
        assert!(kdf(b"k", b"s", b"", 0).unwrap().is_empty());
    }

    #[test]
    fn rfc5869_case_1() {
        let okm = kdf(
            &[0x0b; 22],
            &hex::decode("000102030405060708090a0b0c").unwrap(),
            &hex::decode("f0f1f2f3f4f5f6f7f8f9").unwrap(),
            42,
        )
        .unwrap();
        assert_eq!(
            hex::encode(&*okm),
            "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf34007208d5b887185865"
        );
    }
}

//! Static ECDSA key derivation, optionally with authenticated completion.
//!
//! ```text
//! A1  ID_A ‖ n_A
//! B1  ID_B ‖ Cert_B ‖ Sign_B ‖ n_B
//! A2  Cert_A ‖ Sign_A
//! B2  ACK                             (ext: ACK ‖ Ext_Fin_B)
//! A3                                  (ext: Ext_Fin_A)
//! ```
//!
//! `Sign_X = sign(d_X, n_A ‖ n_B ‖ ID_X)`; `K_PM = x(d_self·Q_peer)` is the
//! same in every session between the two certificates.

use super::message::{StepLabel, ACK_OK};
use super::session::{field, StepResult, Transition};
use super::{AuthFailure, FailureReason, FieldTag, ProtocolKind, ProtocolMessage, Role, SessionContext};
use crate::crypto::{hash, mac_hmac, tags_equal, CryptoError, SymmetricKey};

/// `HMAC(K_mac, role ‖ transcript) ‖ SHA-256(peer cert) ‖ peer nonce`.
pub fn ext_fin(
    mac_key: &SymmetricKey,
    role_byte: u8,
    transcript: &[u8],
    peer_cert: &[u8],
    peer_nonce: &[u8; 32],
) -> Result<[u8; 96], CryptoError> {
    let tag = mac_hmac(mac_key, &[&[role_byte][..], transcript].concat())?;
    let mut out = [0u8; 96];
    out[..32].copy_from_slice(&tag);
    out[32..64].copy_from_slice(hash(peer_cert).as_bytes());
    out[64..].copy_from_slice(peer_nonce);
    Ok(out)
}

impl SessionContext {
    pub(super) fn secdsa_step(&mut self, incoming: Option<&ProtocolMessage>) -> StepResult {
        let ext = self.kind == ProtocolKind::SEcdsaExt;
        let Some(msg) = incoming else {
            let nonce = self.random32();
            self.nonce_self = Some(nonce);
            let id = self.own_id();
            let a1 = self.build(StepLabel::A1, &[(FieldTag::Id, &id), (FieldTag::Nonce, &nonce)])?;
            return Ok(Transition::send(a1, StepLabel::B1));
        };
        match (self.role, msg.step) {
            (Role::Responder, StepLabel::A1) => {
                self.accept_peer_id(field(msg, FieldTag::Id)?)?;
                self.nonce_peer = Some(Self::parse_nonce(field(msg, FieldTag::Nonce)?)?);
                let nonce = self.random32();
                self.nonce_self = Some(nonce);
                let sig = self.sign(&self.secdsa_sign_input(Role::Responder)?)?.to_bytes();
                let (id, cert) = (self.own_id(), self.own_cert());
                let b1 = self.build(
                    StepLabel::B1,
                    &[(FieldTag::Id, &id), (FieldTag::Cert, &cert), (FieldTag::Sign, &sig), (FieldTag::Nonce, &nonce)],
                )?;
                Ok(Transition::send(b1, StepLabel::A2))
            }
            (Role::Initiator, StepLabel::B1) => {
                self.accept_peer_id(field(msg, FieldTag::Id)?)?;
                self.accept_peer_cert(field(msg, FieldTag::Cert)?)?;
                self.nonce_peer = Some(Self::parse_nonce(field(msg, FieldTag::Nonce)?)?);
                self.verify_peer(&self.secdsa_sign_input(Role::Responder)?, field(msg, FieldTag::Sign)?)?;
                self.secdsa_derive()?;
                let sig = self.sign(&self.secdsa_sign_input(Role::Initiator)?)?.to_bytes();
                let cert = self.own_cert();
                let a2 = self.build(StepLabel::A2, &[(FieldTag::Cert, &cert), (FieldTag::Sign, &sig)])?;
                Ok(Transition::send(a2, StepLabel::B2))
            }
            (Role::Responder, StepLabel::A2) => {
                self.accept_peer_cert(field(msg, FieldTag::Cert)?)?;
                self.verify_peer(&self.secdsa_sign_input(Role::Initiator)?, field(msg, FieldTag::Sign)?)?;
                self.secdsa_derive()?;
                if ext {
                    let fin = self.own_ext_fin(StepLabel::B2)?;
                    let b2 = self.build(StepLabel::B2, &[(FieldTag::Ack, &[ACK_OK]), (FieldTag::ExtFin, &fin)])?;
                    Ok(Transition::send(b2, StepLabel::A3))
                } else {
                    let b2 = self.build(StepLabel::B2, &[(FieldTag::Ack, &[ACK_OK])])?;
                    Ok(Transition::send_and_finish(b2))
                }
            }
            (Role::Initiator, StepLabel::B2) => {
                self.ack(field(msg, FieldTag::Ack)?)?;
                if !ext {
                    return Ok(Transition::finish());
                }
                self.check_ext_fin(StepLabel::B2, field(msg, FieldTag::ExtFin)?)?;
                let fin = self.own_ext_fin(StepLabel::A3)?;
                let a3 = self.build(StepLabel::A3, &[(FieldTag::ExtFin, &fin)])?;
                Ok(Transition::send_and_finish(a3))
            }
            (Role::Responder, StepLabel::A3) => {
                self.check_ext_fin(StepLabel::A3, field(msg, FieldTag::ExtFin)?)?;
                Ok(Transition::finish())
            }
            (_, step) => Err(FailureReason::OutOfOrder {
                expected: self.expected_step(),
                got: Some(step),
            }),
        }
    }

    /// `n_A ‖ n_B ‖ ID_signer`
    fn secdsa_sign_input(&self, signer: Role) -> Result<Vec<u8>, FailureReason> {
        let (na, nb) = self.nonces()?;
        let id = if signer == self.role {
            self.own_id()
        } else {
            self.peer_id
                .ok_or_else(|| FailureReason::Internal("peer id missing".into()))?
                .0
        };
        Ok([&na[..], &nb[..], &id[..]].concat())
    }

    fn secdsa_derive(&mut self) -> Result<(), FailureReason> {
        let premaster = self.static_premaster()?;
        let (na, nb) = self.nonces()?;
        self.install_keys(&premaster, &[na, nb].concat())
    }

    fn own_ext_fin(&self, step: StepLabel) -> Result<[u8; 96], FailureReason> {
        let peer_cert = self
            .peer_cert
            .as_ref()
            .ok_or_else(|| FailureReason::Internal("peer certificate missing".into()))?
            .encode();
        let peer_nonce = self.nonce_peer.ok_or_else(|| FailureReason::Internal("nonce missing".into()))?;
        Ok(ext_fin(
            self.keys()?.mac(),
            self.role.byte(),
            &self.transcript.bytes_before(step),
            &peer_cert,
            &peer_nonce,
        )?)
    }

    fn check_ext_fin(&self, step: StepLabel, got: &[u8]) -> Result<(), FailureReason> {
        let own_nonce = self.nonce_self.ok_or_else(|| FailureReason::Internal("nonce missing".into()))?;
        let expected = ext_fin(
            self.keys()?.mac(),
            self.role.peer().byte(),
            &self.transcript.bytes_before(step),
            &self.own_cert(),
            &own_nonce,
        )?;
        if tags_equal(&expected, got) {
            Ok(())
        } else {
            Err(FailureReason::Authentication(AuthFailure::BadFinish))
        }
    }
}

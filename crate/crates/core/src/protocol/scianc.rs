//! Static key derivation diversified by nonces, with MAC confirmation.
//!
//! ```text
//! A1  ID_A ‖ n_A ‖ Cert_A
//! B1  ID_B ‖ n_B ‖ Cert_B
//! A2  HMAC(K_mac, A1 ‖ B1 ‖ 0x01)
//! B2  HMAC(K_mac, A1 ‖ B1 ‖ A2 ‖ 0x02)
//! ```

use super::message::StepLabel;
use super::session::{field, StepResult, Transition};
use super::{AuthFailure, FailureReason, FieldTag, ProtocolMessage, Role, SessionContext};
use crate::crypto::{mac_hmac, tags_equal, CryptoError, SymmetricKey, HMAC_TAG_LEN};

/// `HMAC(K_mac, transcript ‖ role)`
pub fn auth_mac(mac_key: &SymmetricKey, transcript: &[u8], role_byte: u8) -> Result<[u8; HMAC_TAG_LEN], CryptoError> {
    mac_hmac(mac_key, &[transcript, &[role_byte][..]].concat())
}

impl SessionContext {
    pub(super) fn scianc_step(&mut self, incoming: Option<&ProtocolMessage>) -> StepResult {
        let Some(msg) = incoming else {
            let a1 = self.scianc_hello(StepLabel::A1)?;
            return Ok(Transition::send(a1, StepLabel::B1));
        };
        match (self.role, msg.step) {
            (Role::Responder, StepLabel::A1) => {
                self.scianc_absorb(msg)?;
                let b1 = self.scianc_hello(StepLabel::B1)?;
                self.scianc_derive()?;
                Ok(Transition::send(b1, StepLabel::A2))
            }
            (Role::Initiator, StepLabel::B1) => {
                self.scianc_absorb(msg)?;
                self.scianc_derive()?;
                let tag = self.scianc_tag(StepLabel::A2, Role::Initiator)?;
                let a2 = self.build(StepLabel::A2, &[(FieldTag::AuthMac, &tag)])?;
                Ok(Transition::send(a2, StepLabel::B2))
            }
            (Role::Responder, StepLabel::A2) => {
                self.scianc_verify(msg, Role::Initiator)?;
                let tag = self.scianc_tag(StepLabel::B2, Role::Responder)?;
                let b2 = self.build(StepLabel::B2, &[(FieldTag::AuthMac, &tag)])?;
                Ok(Transition::send_and_finish(b2))
            }
            (Role::Initiator, StepLabel::B2) => {
                self.scianc_verify(msg, Role::Responder)?;
                Ok(Transition::finish())
            }
            (_, step) => Err(FailureReason::OutOfOrder {
                expected: self.expected_step(),
                got: Some(step),
            }),
        }
    }

    fn scianc_hello(&mut self, step: StepLabel) -> Result<ProtocolMessage, FailureReason> {
        let nonce = self.random32();
        self.nonce_self = Some(nonce);
        let (id, cert) = (self.own_id(), self.own_cert());
        self.build(step, &[(FieldTag::Id, &id), (FieldTag::Nonce, &nonce), (FieldTag::Cert, &cert)])
    }

    fn scianc_absorb(&mut self, msg: &ProtocolMessage) -> Result<(), FailureReason> {
        self.accept_peer_id(field(msg, FieldTag::Id)?)?;
        self.nonce_peer = Some(Self::parse_nonce(field(msg, FieldTag::Nonce)?)?);
        self.accept_peer_cert(field(msg, FieldTag::Cert)?)?;
        Ok(())
    }

    fn scianc_derive(&mut self) -> Result<(), FailureReason> {
        let premaster = self.static_premaster()?;
        let (na, nb) = self.nonces()?;
        self.install_keys(&premaster, &[na, nb].concat())
    }

    fn scianc_tag(&self, step: StepLabel, sender: Role) -> Result<[u8; HMAC_TAG_LEN], FailureReason> {
        Ok(auth_mac(self.keys()?.mac(), &self.transcript.bytes_before(step), sender.byte())?)
    }

    fn scianc_verify(&self, msg: &ProtocolMessage, sender: Role) -> Result<(), FailureReason> {
        let expected = self.scianc_tag(msg.step, sender)?;
        if tags_equal(&expected, field(msg, FieldTag::AuthMac)?) {
            Ok(())
        } else {
            Err(FailureReason::Authentication(AuthFailure::BadMac))
        }
    }
}

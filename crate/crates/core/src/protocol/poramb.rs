//! Pre-shared-key MAC handshake with finished messages.
//!
//! ```text
//! A1  Hello_A ‖ ID_A
//! B1  Hello_B ‖ ID_B
//! A2  Cert_A ‖ n_A ‖ MAC_A
//! B2  Cert_B ‖ n_B ‖ MAC_B
//! A3  Finish_A
//! B3  Finish_B
//! ```
//!
//! `MAC_X` is two CMAC tags under the pairwise key, over the hello values,
//! certificate and nonce. `Finish = 0x14 ‖ HMAC(K_mac, role ‖ transcript) ‖
//! 0^164`.

use super::message::{StepLabel, FINISH_TYPE};
use super::session::{field, StepResult, Transition};
use super::{AuthFailure, FailureReason, FieldTag, ProtocolMessage, Role, SessionContext};
use crate::crypto::{mac_cmac, mac_hmac, tags_equal, CryptoError, SymmetricKey, HMAC_TAG_LEN};

const FINISH_LEN: usize = 197;

/// `CMAC(psk, 0x01 ‖ data) ‖ CMAC(psk, 0x02 ‖ data)` with
/// `data = role ‖ Hello_A ‖ Hello_B ‖ cert ‖ nonce`.
pub fn poramb_mac(
    psk: &SymmetricKey,
    role_byte: u8,
    hello_a: &[u8; 32],
    hello_b: &[u8; 32],
    cert: &[u8],
    nonce: &[u8; 32],
) -> Result<[u8; 32], CryptoError> {
    let data = [&[role_byte][..], hello_a, hello_b, cert, nonce].concat();
    let mut out = [0u8; 32];
    out[..16].copy_from_slice(&mac_cmac(psk, &[&[0x01][..], &data].concat())?);
    out[16..].copy_from_slice(&mac_cmac(psk, &[&[0x02][..], &data].concat())?);
    Ok(out)
}

/// `HMAC(K_mac, role ‖ transcript)`
pub fn finish_tag(mac_key: &SymmetricKey, role_byte: u8, transcript: &[u8]) -> Result<[u8; HMAC_TAG_LEN], CryptoError> {
    mac_hmac(mac_key, &[&[role_byte][..], transcript].concat())
}

impl SessionContext {
    pub(super) fn poramb_step(&mut self, incoming: Option<&ProtocolMessage>) -> StepResult {
        let Some(msg) = incoming else {
            let a1 = self.poramb_hello(StepLabel::A1)?;
            return Ok(Transition::send(a1, StepLabel::B1));
        };
        match (self.role, msg.step) {
            (Role::Responder, StepLabel::A1) => {
                self.poramb_absorb_hello(msg)?;
                let b1 = self.poramb_hello(StepLabel::B1)?;
                Ok(Transition::send(b1, StepLabel::A2))
            }
            (Role::Initiator, StepLabel::B1) => {
                self.poramb_absorb_hello(msg)?;
                let a2 = self.poramb_credentials(StepLabel::A2)?;
                Ok(Transition::send(a2, StepLabel::B2))
            }
            (Role::Responder, StepLabel::A2) => {
                self.poramb_absorb_credentials(msg)?;
                let b2 = self.poramb_credentials(StepLabel::B2)?;
                self.poramb_derive()?;
                Ok(Transition::send(b2, StepLabel::A3))
            }
            (Role::Initiator, StepLabel::B2) => {
                self.poramb_absorb_credentials(msg)?;
                self.poramb_derive()?;
                let a3 = self.poramb_finish(StepLabel::A3)?;
                Ok(Transition::send(a3, StepLabel::B3))
            }
            (Role::Responder, StepLabel::A3) => {
                self.poramb_check_finish(msg)?;
                let b3 = self.poramb_finish(StepLabel::B3)?;
                Ok(Transition::send_and_finish(b3))
            }
            (Role::Initiator, StepLabel::B3) => {
                self.poramb_check_finish(msg)?;
                Ok(Transition::finish())
            }
            (_, step) => Err(FailureReason::OutOfOrder {
                expected: self.expected_step(),
                got: Some(step),
            }),
        }
    }

    fn poramb_hello(&mut self, step: StepLabel) -> Result<ProtocolMessage, FailureReason> {
        let hello = self.random32();
        self.hello_self = Some(hello);
        let id = self.own_id();
        self.build(step, &[(FieldTag::Hello, &hello), (FieldTag::Id, &id)])
    }

    fn poramb_absorb_hello(&mut self, msg: &ProtocolMessage) -> Result<(), FailureReason> {
        self.hello_peer = Some(Self::parse_nonce(field(msg, FieldTag::Hello)?)?);
        let peer = self.accept_peer_id(field(msg, FieldTag::Id)?)?;
        let psk = self
            .psks
            .iter()
            .find(|(id, _)| *id == peer)
            .map(|(_, k)| k.clone())
            .ok_or_else(|| FailureReason::Provisioning(format!("no pre-shared key for {}", hex::encode(peer.0))))?;
        self.psk = Some(psk);
        Ok(())
    }

    fn hellos(&self) -> Result<([u8; 32], [u8; 32]), FailureReason> {
        match (self.hello_self, self.hello_peer) {
            (Some(own), Some(peer)) => Ok(self.ordered(own, peer)),
            _ => Err(FailureReason::Internal("hello values missing".into())),
        }
    }

    fn psk(&self) -> Result<&SymmetricKey, FailureReason> {
        self.psk
            .as_ref()
            .ok_or_else(|| FailureReason::Provisioning("pre-shared key not selected".into()))
    }

    fn poramb_credentials(&mut self, step: StepLabel) -> Result<ProtocolMessage, FailureReason> {
        let nonce = self.random32();
        self.nonce_self = Some(nonce);
        let cert = self.own_cert();
        let (ha, hb) = self.hellos()?;
        let mac = poramb_mac(self.psk()?, self.role.byte(), &ha, &hb, &cert, &nonce)
            .map_err(|e| FailureReason::Provisioning(e.to_string()))?;
        self.build(step, &[(FieldTag::Cert, &cert), (FieldTag::Nonce, &nonce), (FieldTag::Mac, &mac)])
    }

    fn poramb_absorb_credentials(&mut self, msg: &ProtocolMessage) -> Result<(), FailureReason> {
        let cert = field(msg, FieldTag::Cert)?;
        let nonce = Self::parse_nonce(field(msg, FieldTag::Nonce)?)?;
        let (ha, hb) = self.hellos()?;
        let expected = poramb_mac(self.psk()?, self.role.peer().byte(), &ha, &hb, cert, &nonce)
            .map_err(|e| FailureReason::Provisioning(e.to_string()))?;
        if !tags_equal(&expected, field(msg, FieldTag::Mac)?) {
            return Err(FailureReason::Authentication(AuthFailure::BadMac));
        }
        self.accept_peer_cert(cert)?;
        self.nonce_peer = Some(nonce);
        Ok(())
    }

    fn poramb_derive(&mut self) -> Result<(), FailureReason> {
        let premaster = self.static_premaster()?;
        let (na, nb) = self.nonces()?;
        self.install_keys(&premaster, &[na, nb].concat())
    }

    fn poramb_finish(&self, step: StepLabel) -> Result<ProtocolMessage, FailureReason> {
        let tag = finish_tag(self.keys()?.mac(), self.role.byte(), &self.transcript.bytes_before(step))?;
        let mut body = [0u8; FINISH_LEN];
        body[0] = FINISH_TYPE;
        body[1..33].copy_from_slice(&tag);
        self.build(step, &[(FieldTag::Finish, &body)])
    }

    fn poramb_check_finish(&self, msg: &ProtocolMessage) -> Result<(), FailureReason> {
        let body = field(msg, FieldTag::Finish)?;
        if body[0] != FINISH_TYPE || body[33..].iter().any(|&b| b != 0) {
            return Err(FailureReason::Malformed("finished message framing".into()));
        }
        let expected = finish_tag(
            self.keys()?.mac(),
            self.role.peer().byte(),
            &self.transcript.bytes_before(msg.step),
        )?;
        if tags_equal(&expected, &body[1..33]) {
            Ok(())
        } else {
            Err(FailureReason::Authentication(AuthFailure::BadFinish))
        }
    }
}

//! Station-to-station over ECQV identities.
//!
//! ```text
//! A1  ID_A ‖ XG_A                     (opt: ID_A ‖ XG_A ‖ Cert_A)
//! B1  ID_B ‖ Cert_B ‖ XG_B ‖ Resp_B
//! A2  Cert_A ‖ Resp_A                 (opt: Resp_A)
//! B2  ACK
//! ```
//!
//! `Resp = Enc(K_S, sign(d, XG_self ‖ XG_peer))`, so each signature binds
//! both ephemerals in the signer's order.

use super::keys::sts_ivs;
use super::message::{StepLabel, ACK_OK};
use super::session::{field, StepResult, Transition};
use super::{AuthFailure, FailureReason, FieldTag, ProtocolKind, ProtocolMessage, Role, SessionContext};
use crate::crypto::{ecdh, generate_keypair, sym_decrypt, sym_encrypt, Point};

impl SessionContext {
    pub(super) fn sts_step(&mut self, incoming: Option<&ProtocolMessage>) -> StepResult {
        let early_cert = self.kind != ProtocolKind::Sts;
        let Some(msg) = incoming else {
            // Op1
            let xg = self.fresh_ephemeral()?.to_raw();
            let id = self.own_id();
            let a1 = if early_cert {
                let cert = self.own_cert();
                self.build(StepLabel::A1, &[(FieldTag::Id, &id), (FieldTag::Xg, &xg), (FieldTag::Cert, &cert)])?
            } else {
                self.build(StepLabel::A1, &[(FieldTag::Id, &id), (FieldTag::Xg, &xg)])?
            };
            return Ok(Transition::send(a1, StepLabel::B1));
        };
        match (self.role, msg.step) {
            (Role::Responder, StepLabel::A1) => {
                self.accept_peer_id(field(msg, FieldTag::Id)?)?;
                self.xg_peer = Some(Self::parse_ephemeral(field(msg, FieldTag::Xg)?)?);
                if early_cert {
                    self.accept_peer_cert(field(msg, FieldTag::Cert)?)?;
                }
                let xg = self.fresh_ephemeral()?.to_raw();
                self.sts_derive()?;
                let resp = self.sts_response()?;
                let (id, cert) = (self.own_id(), self.own_cert());
                let b1 = self.build(
                    StepLabel::B1,
                    &[(FieldTag::Id, &id), (FieldTag::Cert, &cert), (FieldTag::Xg, &xg), (FieldTag::Resp, &resp)],
                )?;
                Ok(Transition::send(b1, StepLabel::A2))
            }
            (Role::Initiator, StepLabel::B1) => {
                self.accept_peer_id(field(msg, FieldTag::Id)?)?;
                self.accept_peer_cert(field(msg, FieldTag::Cert)?)?;
                self.xg_peer = Some(Self::parse_ephemeral(field(msg, FieldTag::Xg)?)?);
                self.sts_derive()?;
                self.sts_check(field(msg, FieldTag::Resp)?)?;
                let resp = self.sts_response()?;
                self.erase_ephemeral();
                let a2 = if early_cert {
                    self.build(StepLabel::A2, &[(FieldTag::Resp, &resp)])?
                } else {
                    let cert = self.own_cert();
                    self.build(StepLabel::A2, &[(FieldTag::Cert, &cert), (FieldTag::Resp, &resp)])?
                };
                Ok(Transition::send(a2, StepLabel::B2))
            }
            (Role::Responder, StepLabel::A2) => {
                if !early_cert {
                    self.accept_peer_cert(field(msg, FieldTag::Cert)?)?;
                }
                self.sts_check(field(msg, FieldTag::Resp)?)?;
                self.erase_ephemeral();
                let b2 = self.build(StepLabel::B2, &[(FieldTag::Ack, &[ACK_OK])])?;
                Ok(Transition::send_and_finish(b2))
            }
            (Role::Initiator, StepLabel::B2) => {
                self.ack(field(msg, FieldTag::Ack)?)?;
                Ok(Transition::finish())
            }
            (_, step) => Err(FailureReason::OutOfOrder {
                expected: self.expected_step(),
                got: Some(step),
            }),
        }
    }

    fn fresh_ephemeral(&mut self) -> Result<Point, FailureReason> {
        let (x, xg) = generate_keypair(&mut self.rng)?;
        self.ephemeral = Some(x);
        self.xg_self = Some(xg);
        Ok(xg)
    }

    fn erase_ephemeral(&mut self) {
        if let Some(x) = self.ephemeral.as_mut() {
            x.erase();
        }
    }

    fn ephemerals(&self) -> Result<(Point, Point), FailureReason> {
        match (self.xg_self, self.xg_peer) {
            (Some(own), Some(peer)) => Ok((own, peer)),
            _ => Err(FailureReason::Internal("ephemerals missing".into())),
        }
    }

    /// Op2: `K_PM = x(X·XG_peer)`, `K_S = KDF(K_PM, XG_A ‖ XG_B)`.
    fn sts_derive(&mut self) -> Result<(), FailureReason> {
        let (own, peer) = self.ephemerals()?;
        let x = self
            .ephemeral
            .as_ref()
            .ok_or_else(|| FailureReason::Internal("ephemeral secret missing".into()))?;
        let premaster = ecdh(x, &peer)
            .map_err(|_| FailureReason::Authentication(AuthFailure::InvalidEphemeral))?
            .x_bytes();
        let (a, b) = self.ordered(own.to_raw(), peer.to_raw());
        self.install_keys(&premaster, &[a, b].concat())?;
        self.ivs = Some(sts_ivs(&premaster, &a, &b)?);
        Ok(())
    }

    fn iv(&self, role: Role) -> Result<[u8; 16], FailureReason> {
        let (a, b) = self.ivs.ok_or_else(|| FailureReason::Internal("IVs missing".into()))?;
        Ok(match role {
            Role::Initiator => a,
            Role::Responder => b,
        })
    }

    /// Op3: sign `XG_self ‖ XG_peer` and encrypt the signature.
    fn sts_response(&mut self) -> Result<Vec<u8>, FailureReason> {
        let (own, peer) = self.ephemerals()?;
        let sig = self.sign(&[own.to_raw(), peer.to_raw()].concat())?;
        let iv = self.iv(self.role)?;
        Ok(sym_encrypt(self.keys()?.enc(), &iv, &sig.to_bytes())?)
    }

    /// Op4: decrypt the peer response and verify it over `XG_peer ‖ XG_self`.
    fn sts_check(&self, resp: &[u8]) -> Result<(), FailureReason> {
        let (own, peer) = self.ephemerals()?;
        let iv = self.iv(self.role.peer())?;
        let sig = sym_decrypt(self.keys()?.enc(), &iv, resp)?;
        self.verify_peer(&[peer.to_raw(), own.to_raw()].concat(), &sig)
    }
}

use super::{ProtocolError, ProtocolKind, Role, SessionConfig, SessionContext};
use crate::crypto::{KeyRole, NonceMode, SymmetricKey};
use crate::ecqv::{ca_issue, cert_receive, cert_request, CaState, CertifiedIdentity, DeviceId, Validity};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Two-year certificate window starting 2024-01-01.
pub const DEFAULT_VALIDITY: Validity = Validity {
    from: 1_704_067_200,
    to: 1_767_225_600,
};

/// In-memory deployment: a CA, two certified devices and their pairwise
/// pre-shared key, all derived from one seed.
#[derive(Debug)]
pub struct Testbed {
    pub ca: CaState,
    pub a: CertifiedIdentity,
    pub b: CertifiedIdentity,
    pub psk: SymmetricKey,
    pub now: u32,
    pub nonce_mode: NonceMode,
    seed: u64,
}

impl Testbed {
    pub fn provision(seed: u64) -> Result<Self, ProtocolError> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut ca = CaState::new(DeviceId::from_label("root-ca"), &mut rng)?;
        let mut enroll = |label: &str, ca: &mut CaState| -> Result<CertifiedIdentity, ProtocolError> {
            let req = cert_request(DeviceId::from_label(label).as_bytes(), &mut rng)?;
            let (cert, r) = ca_issue(ca, &req, DEFAULT_VALIDITY, &mut rng)?;
            Ok(cert_receive(req.secret(), &cert, &r, ca.public_key())?)
        };
        let a = enroll("ecu-a", &mut ca)?;
        let b = enroll("ecu-b", &mut ca)?;
        let mut psk = [0u8; 16];
        rng.fill_bytes(&mut psk);
        Ok(Testbed {
            ca,
            a,
            b,
            psk: SymmetricKey::new(KeyRole::Mac, &psk)?,
            now: DEFAULT_VALIDITY.from + 86_400,
            nonce_mode: NonceMode::Randomized,
            seed,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn identity(&self, role: Role) -> &CertifiedIdentity {
        match role {
            Role::Initiator => &self.a,
            Role::Responder => &self.b,
        }
    }

    /// Session configuration for one side. `run` selects an independent
    /// randomness tape, so repeated sessions with the same certificates can
    /// be made.
    pub fn config(&self, kind: ProtocolKind, role: Role, run: u64) -> SessionConfig {
        let me = self.identity(role);
        let peer = self.identity(role.peer());
        let mut tape = ChaCha20Rng::seed_from_u64(self.seed);
        tape.set_stream(run.wrapping_mul(2) + matches!(role, Role::Responder) as u64 + 1);
        let mut seed = [0u8; 32];
        tape.fill_bytes(&mut seed);
        SessionConfig {
            kind,
            role,
            identity: me.clone(),
            ca_public: *self.ca.public_key(),
            ca_id: self.ca.id(),
            peer: Some(peer.id()),
            psks: vec![(peer.id(), self.psk.clone())],
            now: self.now,
            nonce_mode: self.nonce_mode,
            seed,
        }
    }

    pub fn pair(&self, kind: ProtocolKind, run: u64) -> (SessionContext, SessionContext) {
        (
            SessionContext::new(self.config(kind, Role::Initiator, run)),
            SessionContext::new(self.config(kind, Role::Responder, run)),
        )
    }
}

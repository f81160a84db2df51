//! Passive compromise oracle: what a recorded transcript plus leaked
//! long-term material reveals about a past session key.

use crate::crypto::{ecdh, ecdsa_verify, sym_decrypt, tags_equal, Point, Scalar, Signature, SymmetricKey};
use crate::ecqv::{derive_public_key, ImplicitCertificate};
use crate::protocol::{
    auth_mac, derive_session_keys, finish_tag, sts_ivs, FieldTag, ProtocolKind, SessionKeys, StepLabel,
    Transcript, ROLE_INITIATOR, ROLE_RESPONDER,
};

/// Long-term material in the attacker's hands.
#[derive(Debug, Clone, Default)]
pub struct Leak {
    pub private_keys: Vec<Scalar>,
    pub psks: Vec<SymmetricKey>,
}

#[derive(Debug, Clone)]
pub struct CompromiseScenario {
    pub kind: ProtocolKind,
    pub transcript: Transcript,
    pub ca_public: Point,
    pub leak: Leak,
}

#[derive(Debug)]
pub enum Recovery {
    /// `confirmed` is false when the transcript holds nothing keyed by the
    /// session key to check the candidate against.
    Recovered { keys: SessionKeys, confirmed: bool },
    Failed(String),
}

impl Recovery {
    pub fn keys(&self) -> Option<&SessionKeys> {
        match self {
            Recovery::Recovered { keys, .. } => Some(keys),
            Recovery::Failed(_) => None,
        }
    }
}

fn field(t: &Transcript, step: StepLabel, tag: FieldTag) -> Option<&[u8]> {
    t.get(step).and_then(|m| m.field(tag))
}

/// Generic attack: every leaked private key is combined with every public
/// point visible in the transcript (certificate-derived keys and, for STS,
/// the ephemerals). Each candidate premaster is run through the protocol's
/// key schedule and checked against key-dependent transcript material.
pub fn forward_secrecy_oracle(scenario: &CompromiseScenario) -> Recovery {
    let t = &scenario.transcript;
    let kind = scenario.kind;
    if scenario.leak.private_keys.is_empty() {
        return Recovery::Failed("no long-term private key leaked".into());
    }
    if kind.steps().iter().any(|s| t.get(*s).is_none()) {
        return Recovery::Failed("transcript is incomplete".into());
    }

    let mut certs = Vec::new();
    for m in t.messages() {
        if let Some(c) = m.field(FieldTag::Cert) {
            match ImplicitCertificate::decode(c) {
                Ok(cert) => certs.push(cert),
                Err(_) => return Recovery::Failed("undecodable certificate in transcript".into()),
            }
        }
    }
    let mut visible: Vec<Point> = certs
        .iter()
        .filter_map(|c| derive_public_key(c, &scenario.ca_public).ok())
        .collect();
    let xg_a = field(t, StepLabel::A1, FieldTag::Xg).and_then(|b| Point::from_raw(b).ok());
    let xg_b = field(t, StepLabel::B1, FieldTag::Xg).and_then(|b| Point::from_raw(b).ok());
    visible.extend(xg_a.iter().chain(xg_b.iter()).copied());

    let salt = match kind {
        k if k.is_sts() => match (xg_a, xg_b) {
            (Some(a), Some(b)) => [a.to_raw(), b.to_raw()].concat(),
            _ => return Recovery::Failed("ephemerals missing".into()),
        },
        ProtocolKind::Poramb => nonce_salt(t, StepLabel::A2, StepLabel::B2),
        _ => nonce_salt(t, StepLabel::A1, StepLabel::B1),
    };

    let mut candidates: Vec<[u8; 32]> = Vec::new();
    for d in &scenario.leak.private_keys {
        let own = Point::mul_base(d).ok();
        for q in &visible {
            if Some(*q) == own {
                continue;
            }
            if let Ok(p) = ecdh(d, q) {
                let x = p.x_bytes();
                if !candidates.contains(&x) {
                    candidates.push(x);
                }
            }
        }
    }

    let mut unconfirmed = Vec::new();
    for premaster in candidates {
        let Ok(keys) = derive_session_keys(&premaster, &salt, kind.kdf_label()) else {
            continue;
        };
        match confirm(kind, t, &keys, &scenario.ca_public) {
            Some(true) => return Recovery::Recovered { keys, confirmed: true },
            Some(false) => {}
            None => unconfirmed.push(keys),
        }
    }
    match unconfirmed.len() {
        1 => Recovery::Recovered {
            keys: unconfirmed.pop().expect("one candidate"),
            confirmed: false,
        },
        0 => Recovery::Failed("no candidate key matches the transcript".into()),
        n => Recovery::Failed(format!("{n} unconfirmable candidates")),
    }
}

fn nonce_salt(t: &Transcript, a: StepLabel, b: StepLabel) -> Vec<u8> {
    [field(t, a, FieldTag::Nonce).unwrap_or_default(), field(t, b, FieldTag::Nonce).unwrap_or_default()].concat()
}

/// Checks a candidate against key-dependent transcript material; `None`
/// when there is none.
fn confirm(kind: ProtocolKind, t: &Transcript, keys: &SessionKeys, ca: &Point) -> Option<bool> {
    match kind {
        ProtocolKind::Sts | ProtocolKind::StsOpt1 | ProtocolKind::StsOpt2 => {
            let xg_a = field(t, StepLabel::A1, FieldTag::Xg)?;
            let b1 = t.get(StepLabel::B1)?;
            let xg_b = b1.field(FieldTag::Xg)?;
            let cert = ImplicitCertificate::decode(b1.field(FieldTag::Cert)?).ok()?;
            let q_b = derive_public_key(&cert, ca).ok()?;
            let (_, iv_b) = sts_ivs(keys.premaster(), xg_a, xg_b).ok()?;
            let sig = sym_decrypt(keys.enc(), &iv_b, b1.field(FieldTag::Resp)?).ok()?;
            let sig = Signature::from_bytes(sig.try_into().ok()?);
            Some(ecdsa_verify(&q_b, &[xg_b, xg_a].concat(), &sig))
        }
        ProtocolKind::SEcdsa => None,
        ProtocolKind::SEcdsaExt => {
            let fin = field(t, StepLabel::B2, FieldTag::ExtFin)?;
            let mac = crate::crypto::mac_hmac(
                keys.mac(),
                &[&[ROLE_RESPONDER][..], &t.bytes_before(StepLabel::B2)].concat(),
            )
            .ok()?;
            Some(tags_equal(&mac, &fin[..32]))
        }
        ProtocolKind::Scianc => {
            let tag = auth_mac(keys.mac(), &t.bytes_before(StepLabel::A2), ROLE_INITIATOR).ok()?;
            Some(tags_equal(&tag, field(t, StepLabel::A2, FieldTag::AuthMac)?))
        }
        ProtocolKind::Poramb => {
            let fin = field(t, StepLabel::A3, FieldTag::Finish)?;
            let tag = finish_tag(keys.mac(), ROLE_INITIATOR, &t.bytes_before(StepLabel::A3)).ok()?;
            Some(tags_equal(&tag, &fin[1..33]))
        }
    }
}

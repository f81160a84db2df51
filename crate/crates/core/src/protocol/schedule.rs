//! Operation dependency graphs of the STS variants.
//!
//! Per device, Op1 creates the ephemeral, Op2 derives the peer key and
//! premaster, Op3 signs and encrypts, Op4 decrypts and verifies. In plain
//! STS the eight operations form one chain. Moving the initiator's
//! certificate into A1 lets both Op2 run side by side (variant I); also
//! releasing Op3 to run after both Op2 have finished overlaps the two Op3
//! as well (variant II).

use super::{ProtocolError, ProtocolKind};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Device {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpNode {
    pub device: Device,
    /// 1..=4
    pub op: u8,
}

impl OpNode {
    pub const fn new(device: Device, op: u8) -> Self {
        OpNode { device, op }
    }
}

impl fmt::Display for OpNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}.Op{}", self.device, self.op)
    }
}

/// Directed graph over the eight operations; an edge `(u, v)` means `v`
/// cannot start before `u` has finished.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub edges: Vec<(OpNode, OpNode)>,
}

const fn a(op: u8) -> OpNode {
    OpNode::new(Device::A, op)
}

const fn b(op: u8) -> OpNode {
    OpNode::new(Device::B, op)
}

impl Schedule {
    pub fn nodes() -> [OpNode; 8] {
        [a(1), a(2), a(3), a(4), b(1), b(2), b(3), b(4)]
    }

    fn chain(order: &[OpNode]) -> Vec<(OpNode, OpNode)> {
        order.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Predecessors of `node`.
    pub fn preds(&self, node: OpNode) -> impl Iterator<Item = OpNode> + '_ {
        self.edges.iter().filter(move |(_, v)| *v == node).map(|(u, _)| *u)
    }

    /// True when neither operation is reachable from the other.
    pub fn concurrent(&self, x: OpNode, y: OpNode) -> bool {
        !self.reaches(x, y) && !self.reaches(y, x)
    }

    fn reaches(&self, from: OpNode, to: OpNode) -> bool {
        let mut stack = vec![from];
        let mut seen = Vec::new();
        while let Some(n) = stack.pop() {
            if n == to && n != from {
                return true;
            }
            for (u, v) in &self.edges {
                if *u == n && !seen.contains(v) {
                    seen.push(*v);
                    if *v == to {
                        return true;
                    }
                    stack.push(*v);
                }
            }
        }
        false
    }
}

/// Dependency graph of an STS variant.
pub fn opt_schedule(kind: ProtocolKind) -> Result<Schedule, ProtocolError> {
    let edges = match kind {
        ProtocolKind::Sts => Schedule::chain(&[a(1), b(1), b(2), b(3), a(2), a(4), a(3), b(4)]),
        ProtocolKind::StsOpt1 => {
            let mut e = vec![(a(1), b(1)), (b(1), a(2)), (b(1), b(2)), (a(2), b(3)), (b(2), b(3))];
            e.extend(Schedule::chain(&[b(3), a(4), a(3), b(4)]));
            e
        }
        ProtocolKind::StsOpt2 => vec![
            (a(1), b(1)),
            (b(1), a(2)),
            (b(1), b(2)),
            (a(2), a(3)),
            (a(2), b(3)),
            (b(2), a(3)),
            (b(2), b(3)),
            (a(3), a(4)),
            (b(3), a(4)),
            (a(4), b(4)),
        ],
        other => return Err(ProtocolError::NotSts(other)),
    };
    Ok(Schedule { edges })
}

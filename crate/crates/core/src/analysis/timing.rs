use super::AnalysisError;
use crate::protocol::{Device, OpNode, Schedule};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::time::Duration;

/// Durations of Op1..Op4 on one device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTiming {
    pub device: String,
    pub ops: [Duration; 4],
}

impl OpTiming {
    pub fn new(device: &str, ops: [Duration; 4]) -> Self {
        OpTiming {
            device: device.to_string(),
            ops,
        }
    }

    pub fn from_micros(device: &str, us: [u64; 4]) -> Self {
        Self::new(device, us.map(Duration::from_micros))
    }

    /// `T_Op{index}`, index 1..=4.
    pub fn op(&self, index: u8) -> Result<Duration, AnalysisError> {
        match index {
            1..=4 => Ok(self.ops[index as usize - 1]),
            _ => Err(AnalysisError::OpIndex(index)),
        }
    }

    pub fn sum(&self) -> Duration {
        self.ops.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Serial,
    Opt1,
    Opt2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingModel {
    pub a: OpTiming,
    pub b: OpTiming,
    pub variant: Variant,
}

impl TimingModel {
    pub fn new(a: OpTiming, b: OpTiming, variant: Variant) -> Self {
        TimingModel { a, b, variant }
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        TimingModel {
            variant,
            ..self.clone()
        }
    }

    fn device(&self, d: Device) -> &OpTiming {
        match d {
            Device::A => &self.a,
            Device::B => &self.b,
        }
    }
}

/// Both devices run every operation back to back: `Σ T_OpA + Σ T_OpB`.
pub fn total_time_serial(model: &TimingModel) -> Duration {
    model.a.sum() + model.b.sum()
}

/// Residual serial cost of an overlapped operation, `|T_OpAx − T_OpBx|`;
/// zero for identical devices.
pub fn overlap_adjustment(model: &TimingModel, op_index: u8) -> Result<Duration, AnalysisError> {
    if !(2..=3).contains(&op_index) {
        return Err(AnalysisError::NotOverlappable(op_index));
    }
    let (a, b) = (model.a.op(op_index)?, model.b.op(op_index)?);
    Ok(a.max(b) - a.min(b))
}

/// Total time under the model's variant.
///
/// An overlapped operation costs `max(T_A, T_B)`, that is the serial sum
/// minus `min(T_A, T_B)`. For identical devices this is
/// `2T1 + T2 + 2T3 + 2T4` (variant I) and `2T1 + T2 + T3 + 2T4` (variant II).
pub fn total_time_opt(model: &TimingModel) -> Duration {
    let credit = |op: usize| model.a.ops[op].min(model.b.ops[op]);
    let serial = total_time_serial(model);
    match model.variant {
        Variant::Serial => serial,
        Variant::Opt1 => serial - credit(1),
        Variant::Opt2 => serial - credit(1) - credit(2),
    }
}

/// Alias dispatching on the variant.
pub fn total_time(model: &TimingModel) -> Duration {
    total_time_opt(model)
}

/// Makespan of the operation graph: the longest weighted path, with each
/// node weighted by its device's duration for that operation.
pub fn simulate_schedule(model: &TimingModel, schedule: &Schedule) -> Result<Duration, AnalysisError> {
    let nodes = Schedule::nodes();
    let weight = |n: &OpNode| model.device(n.device).op(n.op);
    for (u, v) in &schedule.edges {
        weight(u)?;
        weight(v)?;
    }
    let mut indegree: HashMap<OpNode, usize> = nodes.iter().map(|n| (*n, 0)).collect();
    for (u, v) in &schedule.edges {
        indegree.entry(*u).or_insert(0);
        *indegree.entry(*v).or_insert(0) += 1;
    }
    let mut finish: HashMap<OpNode, Duration> = HashMap::new();
    let mut ready: Vec<OpNode> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    ready.sort();
    let mut done = 0;
    while let Some(n) = ready.pop() {
        done += 1;
        let start = schedule.preds(n).map(|p| finish[&p]).max().unwrap_or_default();
        finish.insert(n, start + weight(&n)?);
        for (u, v) in &schedule.edges {
            if *u == n {
                let d = indegree.get_mut(v).expect("node registered");
                *d -= 1;
                if *d == 0 {
                    ready.push(*v);
                }
            }
        }
    }
    if done != indegree.len() {
        return Err(AnalysisError::Cycle);
    }
    Ok(finish.values().copied().max().unwrap_or_default())
}

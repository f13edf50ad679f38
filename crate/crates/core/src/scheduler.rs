//! Operator-to-container mapping.
//!
//! An operator's rank (its height in the plan tree) picks the layout level it
//! runs on. Within that level the containers are sorted by load (running plus
//! queued operators, id breaking ties) and the plan's operators are dealt out
//! round robin in that order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TreePlanProfile;

pub type ContainerId = u32;
pub type QueryId = u64;

/// How plan levels map onto layout levels when the plan is shorter than the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankPolicy {
    /// Spread plan levels over the whole layout: plan level `j` goes to
    /// `round(j * (layout_height - 1) / (plan_height - 1))`, so leaves stay on
    /// the data level and the root lands on the top level.
    #[default]
    Compress,
    /// Plan level `j` runs on layout level `j`; levels above the plan's root stay idle.
    Identity,
}

/// Layout level for the operators at `plan_level` of a plan `plan_height` levels tall.
pub fn rank(plan_level: usize, plan_height: usize, layout_height: usize, policy: RankPolicy) -> Result<usize> {
    if plan_height == 0 || plan_level >= plan_height {
        return Err(Error::Scheduling(format!(
            "plan level {plan_level} outside a plan of height {plan_height}"
        )));
    }
    if plan_height > layout_height {
        return Err(Error::Scheduling(format!(
            "plan of height {plan_height} does not fit a layout of height {layout_height}"
        )));
    }
    Ok(match policy {
        RankPolicy::Identity => plan_level,
        RankPolicy::Compress if plan_height == 1 => 0,
        RankPolicy::Compress => {
            let num = plan_level * (layout_height - 1);
            let den = plan_height - 1;
            // Round half up in integer arithmetic.
            (2 * num + den) / (2 * den)
        }
    })
}

/// Layout level of every plan level.
pub fn level_map(plan_height: usize, layout_height: usize, policy: RankPolicy) -> Result<Vec<usize>> {
    (0..plan_height)
        .map(|j| rank(j, plan_height, layout_height, policy))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerState {
    pub id: ContainerId,
    pub level: usize,
    /// Running plus queued operators.
    pub load: u32,
    /// End of the quantum already paid for.
    pub lease_end: f64,
    /// Marked for removal: keeps running what it has, receives nothing new.
    pub pending_delete: bool,
}

impl ContainerState {
    pub fn new(id: ContainerId, level: usize, lease_end: f64) -> Self {
        ContainerState {
            id,
            level,
            load: 0,
            lease_end,
            pending_delete: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelAssignment {
    pub plan_level: usize,
    pub layout_level: usize,
    /// Container of each operator at this plan level.
    pub containers: Vec<ContainerId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorAssignment {
    pub query: QueryId,
    pub levels: Vec<LevelAssignment>,
}

impl OperatorAssignment {
    pub fn operator_count(&self) -> usize {
        self.levels.iter().map(|l| l.containers.len()).sum()
    }
}

/// Assigns every operator of `plan` to a container and bumps the chosen containers' load.
///
/// Fails without touching any load if some required level has no container
/// that accepts new work.
pub fn schedule(
    query: QueryId,
    plan: &TreePlanProfile,
    containers: &mut [ContainerState],
    layout_height: usize,
    policy: RankPolicy,
) -> Result<OperatorAssignment> {
    let levels = level_map(plan.height(), layout_height, policy)?;

    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(levels.len());
    for &layout_level in &levels {
        let mut idx: Vec<usize> = containers
            .iter()
            .enumerate()
            .filter(|(_, c)| c.level == layout_level && !c.pending_delete)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            return Err(Error::Scheduling(format!(
                "no container available at layout level {layout_level}"
            )));
        }
        idx.sort_by_key(|&i| (containers[i].load, containers[i].id));
        candidates.push(idx);
    }

    let mut out = Vec::with_capacity(levels.len());
    for (plan_level, (layout_level, order)) in levels.into_iter().zip(candidates).enumerate() {
        let ops = plan.op_count[plan_level] as usize;
        let chosen: Vec<ContainerId> = (0..ops)
            .map(|k| {
                let c = &mut containers[order[k % order.len()]];
                c.load += 1;
                c.id
            })
            .collect();
        out.push(LevelAssignment {
            plan_level,
            layout_level,
            containers: chosen,
        });
    }
    Ok(OperatorAssignment { query, levels: out })
}

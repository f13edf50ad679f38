//! Deterministic discrete-event simulation of the elastic engine.
//!
//! Queries arrive from seeded arrival processes (or an explicit trace), are
//! mapped operator by operator onto a leased container fleet, and pay their
//! SLA price on completion. Time is cut into epochs; in elastic mode each
//! epoch boundary runs the profit forecaster on the recently completed
//! queries and moves the fleet to the chosen layout.
//!
//! Service model: a container runs up to `capacity` operators at once and
//! shares its single CPU equally among them; further operators wait in a
//! FIFO queue. An operator with `c` CPU seconds alone on a container finishes
//! after `c` seconds; `k` of them started together finish after `k * c`.

mod arrivals;
mod engine;
mod fleet;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::DEFAULT_ENUMERATION_CAP;
use crate::model::{CloudPricing, ContainerLayout, LayoutBounds, QueryClass};
use crate::placement::{SlotOrder, DEFAULT_ARC};
use crate::scheduler::RankPolicy;

pub use arrivals::{generate_arrivals, GapDistribution, GapStream};
pub use engine::run;
pub use fleet::{Fleet, LayoutChange, LeaseOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Re-optimize the layout at every epoch boundary.
    #[default]
    Elastic,
    /// Keep the initial layout for the whole run.
    Static,
}

/// Arrivals of one query class at mean gap `lambda` for `duration` seconds.
/// Phases run back to back from time zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub duration: f64,
    pub class: String,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceArrival {
    pub time: f64,
    pub class: String,
}

/// Generated phases and explicit arrivals; both may be given and are merged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    #[serde(default)]
    pub phases: Vec<Phase>,
    #[serde(default)]
    pub trace: Vec<TraceArrival>,
    #[serde(default)]
    pub gaps: GapDistribution,
}

/// Data-level partitioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementConfig {
    pub partitions: u32,
    pub replication: u32,
    pub arc: u32,
    /// Bytes of all partition replicas together.
    pub data_size: f64,
    #[serde(default = "hashed")]
    pub order: SlotOrder,
}

fn hashed() -> SlotOrder {
    SlotOrder::Hashed
}

impl Default for PlacementConfig {
    fn default() -> Self {
        PlacementConfig {
            partitions: 128,
            replication: 3,
            arc: DEFAULT_ARC,
            data_size: 8e9,
            order: SlotOrder::Hashed,
        }
    }
}

fn default_epoch() -> f64 {
    300.0
}

fn default_history() -> u32 {
    2
}

fn default_capacity() -> u32 {
    10
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Epoch (prediction window) length in seconds.
    #[serde(default = "default_epoch")]
    pub epoch: f64,
    /// Epochs of completed queries feeding each decision.
    #[serde(default = "default_history")]
    pub history_epochs: u32,
    /// Arrivals stop here; queries still running are drained afterwards.
    pub horizon: f64,
    #[serde(default)]
    pub pricing: CloudPricing,
    pub initial_layout: ContainerLayout,
    pub bounds: LayoutBounds,
    /// Operators a container runs at once.
    #[serde(default = "default_capacity")]
    pub capacity: u32,
    pub classes: Vec<QueryClass>,
    pub workload: Workload,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub rank_policy: RankPolicy,
    #[serde(default)]
    pub placement: PlacementConfig,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
}

impl SimConfig {
    pub fn epochs(&self) -> usize {
        (self.horizon / self.epoch).round() as usize
    }

    pub fn class_index(&self, id: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if !(self.epoch > 0.0 && self.epoch.is_finite()) {
            return cfg(format!("epoch must be > 0, got {}", self.epoch));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return cfg(format!("horizon must be > 0, got {}", self.horizon));
        }
        let ratio = self.horizon / self.epoch;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return cfg(format!(
                "horizon {} is not a whole number of {} s epochs",
                self.horizon, self.epoch
            ));
        }
        if self.history_epochs == 0 {
            return cfg("history_epochs must be >= 1".into());
        }
        if self.capacity == 0 {
            return cfg("capacity must be >= 1".into());
        }
        self.pricing.validate()?;
        ContainerLayout::new(self.initial_layout.levels().to_vec())?;
        let height = self.initial_layout.height();
        self.bounds.validate()?;
        if self.bounds.height() != height {
            return Err(Error::Bounds(format!(
                "bounds have {} levels, the initial layout {}",
                self.bounds.height(),
                height
            )));
        }
        if self.mode == Mode::Elastic && !self.bounds.contains(&self.initial_layout) {
            return Err(Error::Bounds(format!(
                "initial layout {} lies outside the bounds",
                self.initial_layout
            )));
        }

        if self.classes.is_empty() {
            return cfg("at least one query class is required".into());
        }
        let mut ids = BTreeSet::new();
        for class in &self.classes {
            if !ids.insert(class.id.as_str()) {
                return cfg(format!("duplicate query class {:?}", class.id));
            }
            class.sla.validate()?;
            class.plan.validate()?;
            if class.plan.height() > height {
                return cfg(format!(
                    "class {:?} has a {}-level plan but the layout only {} levels",
                    class.id,
                    class.plan.height(),
                    height
                ));
            }
        }
        for (i, p) in self.workload.phases.iter().enumerate() {
            if !(p.lambda > 0.0 && p.lambda.is_finite()) {
                return cfg(format!("phase {i}: lambda must be > 0, got {}", p.lambda));
            }
            if !(p.duration >= 0.0 && p.duration.is_finite()) {
                return cfg(format!("phase {i}: duration must be >= 0, got {}", p.duration));
            }
            if self.class_index(&p.class).is_none() {
                return cfg(format!("phase {i}: unknown query class {:?}", p.class));
            }
        }
        for (i, a) in self.workload.trace.iter().enumerate() {
            if !(a.time >= 0.0 && a.time < self.horizon) {
                return cfg(format!("trace arrival {i}: time {} outside [0, horizon)", a.time));
            }
            if self.class_index(&a.class).is_none() {
                return cfg(format!("trace arrival {i}: unknown query class {:?}", a.class));
            }
        }
        let p = &self.placement;
        if p.partitions == 0 || p.replication == 0 || p.arc == 0 {
            return cfg("placement needs partitions, replication and arc >= 1".into());
        }
        if !(p.data_size >= 0.0 && p.data_size.is_finite()) {
            return cfg(format!("data_size must be >= 0, got {}", p.data_size));
        }
        Ok(())
    }
}

/// One row of the per-epoch trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub start: f64,
    /// Active containers per level after the boundary decision.
    pub layout: ContainerLayout,
    /// Leased containers per level (active plus pending-delete) after the decision.
    pub leased: Vec<u32>,
    pub revenue: f64,
    pub cost: f64,
    pub profit: f64,
    pub queries_completed: u32,
    /// Mean execution time of the queries completed in this epoch.
    pub avg_exec_time: Option<f64>,
    /// Time needed to fetch the data moved by this epoch's data-level change.
    pub reorg_seconds: f64,
    pub moved_fraction: f64,
    /// Forecast profit of the chosen layout (elastic decisions only).
    pub predicted_profit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTrace {
    pub id: u64,
    pub class: String,
    pub arrival: f64,
    pub finish: f64,
    pub price: f64,
    /// Epoch the query completed in (and was paid in).
    pub epoch: usize,
}

impl QueryTrace {
    pub fn exec_time(&self) -> f64 {
        self.finish - self.arrival
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub epochs: usize,
    pub queries_arrived: u64,
    pub queries_completed: u64,
    pub revenue: f64,
    pub cost: f64,
    pub profit: f64,
    pub mean_exec_time: Option<f64>,
    pub quanta_leased: u64,
    pub fresh_containers: u64,
    pub reused_containers: u64,
    /// Most operators seen running on one container at once.
    pub peak_running_ops: u32,
    /// Time of the last event (end of the drain).
    pub finished_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub epochs: Vec<EpochReport>,
    pub queries: Vec<QueryTrace>,
    pub summary: Summary,
}

//! Named SLAs, static layouts, query profiles and ready-made scenarios.

use crate::forecast::{ForecastConfig, WindowStats, DEFAULT_ENUMERATION_CAP};
use crate::model::{CloudPricing, ContainerLayout, LayoutBounds, QueryClass, SlaSpec, TreePlanProfile};
use crate::placement::SlotOrder;
use crate::scheduler::RankPolicy;
use crate::sim::{Mode, Phase, PlacementConfig, SimConfig, TraceArrival, Workload};

pub const NORMAL: SlaSpec = SlaSpec { alpha: 10.0, gamma: 80.0 };
pub const HIGH: SlaSpec = SlaSpec { alpha: 20.0, gamma: 40.0 };
pub const CRITICAL: SlaSpec = SlaSpec { alpha: 100.0, gamma: 40.0 };
pub const BEST_EFFORT: SlaSpec = SlaSpec { alpha: 20.0, gamma: 500.0 };

pub const SLA_NAMES: [&str; 4] = ["normal", "high", "critical", "best-effort"];

pub fn sla(name: &str) -> Option<SlaSpec> {
    match name {
        "normal" => Some(NORMAL),
        "high" => Some(HIGH),
        "critical" => Some(CRITICAL),
        "best-effort" | "best_effort" => Some(BEST_EFFORT),
        _ => None,
    }
}

pub const LAYOUT_NAMES: [&str; 3] = ["small", "medium", "large"];

pub fn static_layout(name: &str) -> Option<ContainerLayout> {
    let levels = match name {
        "small" => vec![10, 4, 1],
        "medium" => vec![26, 8, 2],
        "large" => vec![42, 12, 3],
        _ => return None,
    };
    Some(ContainerLayout::new(levels).expect("preset layouts are valid"))
}

/// Scan-and-aggregate query: one leaf per partition, eight partial
/// aggregators and a root.
pub fn q1_plan() -> TreePlanProfile {
    TreePlanProfile::new(vec![128, 8, 1], vec![1.5, 0.2, 0.1], vec![64e3, 16e3, 0.0]).expect("valid plan")
}

/// Join-heavy query: twice the leaf work of [`q1_plan`] and larger intermediate results.
pub fn q3_plan() -> TreePlanProfile {
    TreePlanProfile::new(vec![128, 8, 1], vec![3.0, 0.4, 0.2], vec![256e3, 64e3, 0.0]).expect("valid plan")
}

pub fn plan(name: &str) -> Option<TreePlanProfile> {
    match name {
        "q1" => Some(q1_plan()),
        "q3" => Some(q3_plan()),
        _ => None,
    }
}

/// Two queries issued together on a four-level layout: a three-level plan
/// (8, 2, 1) and a four-level plan (8, 4, 2, 1), every operator taking one
/// second. Both pay `15 exp(-t / 20)` and each container costs $1 for the
/// single 300 s window.
pub fn two_query_scenario(layout: &ContainerLayout) -> SimConfig {
    let sla = SlaSpec { alpha: 15.0, gamma: 20.0 };
    let q1 = TreePlanProfile::uniform(vec![8, 2, 1], 1.0).expect("valid plan");
    let q2 = TreePlanProfile::uniform(vec![8, 4, 2, 1], 1.0).expect("valid plan");
    SimConfig {
        epoch: 300.0,
        history_epochs: 2,
        horizon: 300.0,
        pricing: CloudPricing {
            quantum: 300.0,
            quantum_cost: 1.0,
            net_speed: 1e9,
        },
        initial_layout: layout.clone(),
        bounds: LayoutBounds::fixed(layout),
        capacity: 10,
        classes: vec![
            QueryClass::new("q1", sla, q1).expect("valid class"),
            QueryClass::new("q2", sla, q2).expect("valid class"),
        ],
        workload: Workload {
            trace: vec![
                TraceArrival { time: 0.0, class: "q1".into() },
                TraceArrival { time: 0.0, class: "q2".into() },
            ],
            ..Default::default()
        },
        seed: 0,
        mode: Mode::Static,
        rank_policy: RankPolicy::Identity,
        placement: PlacementConfig {
            partitions: 16,
            replication: 1,
            arc: 4,
            data_size: 0.0,
            order: SlotOrder::Identity,
        },
        enumeration_cap: DEFAULT_ENUMERATION_CAP,
    }
}

/// Window statistics of the two-query scenario as observed on `l_h`:
/// 16/6/3/1 operator-seconds per level and two queries running together.
pub fn two_query_stats(l_h: ContainerLayout) -> WindowStats {
    WindowStats {
        q_h: vec![2.0],
        num_q: 2.0,
        cpu_h: vec![16.0, 6.0, 3.0, 1.0],
        net_h: vec![0.0; 4],
        conc: 2.0,
        l_h,
        w_h: 300.0,
    }
}

/// Forecast settings for the two-query scenario. Levels 2 and 3 are pinned
/// to 2 and 1 containers; levels 0 and 1 range over `1..=max0` and `1..=max1`.
pub fn two_query_forecast(max0: u32, max1: u32) -> ForecastConfig {
    ForecastConfig {
        w_p: 300.0,
        pricing: CloudPricing {
            quantum: 300.0,
            quantum_cost: 1.0,
            net_speed: 1e9,
        },
        arc: 4,
        data_size: 0.0,
        slas: vec![SlaSpec { alpha: 15.0, gamma: 20.0 }],
        bounds: LayoutBounds::new(vec![1, 1, 2, 1], vec![max0, max1, 2, 1]).expect("valid bounds"),
        enumeration_cap: DEFAULT_ENUMERATION_CAP,
    }
}

/// One hour of `q1` under the normal SLA in three 20-minute phases with mean
/// gaps of 60, 30 and 60 seconds.
pub fn three_phase_scenario(mode: Mode, initial_layout: ContainerLayout, seed: u64) -> SimConfig {
    let phase = |lambda| Phase {
        duration: 1200.0,
        class: "q1".into(),
        lambda,
    };
    SimConfig {
        epoch: 300.0,
        history_epochs: 2,
        horizon: 3600.0,
        pricing: CloudPricing::default(),
        initial_layout,
        bounds: elastic_bounds(),
        capacity: 10,
        classes: vec![QueryClass::new("q1", NORMAL, q1_plan()).expect("valid class")],
        workload: Workload {
            phases: vec![phase(60.0), phase(30.0), phase(60.0)],
            ..Default::default()
        },
        seed,
        mode,
        rank_policy: RankPolicy::Compress,
        placement: PlacementConfig::default(),
        enumeration_cap: DEFAULT_ENUMERATION_CAP,
    }
}

/// Bounds for three-level elastic runs: up to 64 data containers.
pub fn elastic_bounds() -> LayoutBounds {
    LayoutBounds::new(vec![1, 1, 1], vec![64, 16, 4]).expect("valid bounds")
}

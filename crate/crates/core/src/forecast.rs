//! Profit forecasting and layout selection.
//!
//! Statistics gathered over a trailing historical window predict, for any
//! candidate layout, the average query time in the next prediction window,
//! how long the data re-organization implied by a level-0 change will take,
//! and the resulting revenue, cost and profit. [`optimize_layout`] climbs that
//! profit surface from the current layout with a bounded quasi-Newton method
//! on the relaxed (real-valued) layout and rounds up. [`enumerate_optimal`]
//! is the exact search over the integer box, usable when the box is small.
//!
//! Predicted average query time for a candidate layout `L`:
//!
//! ```text
//! t_P = conc / numQ * ( CPU[0] / L[0]
//!                     + sum_{i >= 1} ( CPU[i] / L[i] + NET[i] / (net_speed * min(L[i-1], L[i])) ) )
//! ```
//!
//! where `NET[i]` is the traffic entering level `i` from level `i - 1`.
//! Re-organization time, from the current level-0 count `x` to `y`:
//!
//! ```text
//! t_d = size_d(x, y) / (|x - y| * arc * net_speed),   clamped to [0, W_P]
//! ```
//!
//! Queries are split between the re-organizing head of the window (charged
//! `t_d + t_P`) and the remainder (charged `t_P`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{relaxed_cost, CloudPricing, ContainerLayout, LayoutBounds, SlaSpec, TreePlanProfile};
use crate::optim::{minimize_box, BoxQnSettings};
use crate::placement::move_model_fraction;
use crate::scheduler::{level_map, RankPolicy};

/// Measurements of one completed query, already mapped onto layout levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub class: usize,
    pub arrival: f64,
    pub finish: f64,
    /// CPU seconds burnt per layout level.
    pub cpu_by_level: Vec<f64>,
    /// Bytes received per layout level from the level below.
    pub net_by_level: Vec<f64>,
}

impl QueryRecord {
    /// Record for a query of shape `plan` run on a layout `layout_height` levels tall.
    pub fn from_plan(
        class: usize,
        arrival: f64,
        finish: f64,
        plan: &TreePlanProfile,
        layout_height: usize,
        policy: RankPolicy,
    ) -> Result<Self> {
        let map = level_map(plan.height(), layout_height, policy)?;
        let mut cpu = vec![0.0; layout_height];
        let mut net = vec![0.0; layout_height];
        for (j, &level) in map.iter().enumerate() {
            cpu[level] += plan.level_cpu(j);
            if let Some(&parent) = map.get(j + 1) {
                net[parent] += plan.level_out_bytes(j);
            }
        }
        Ok(QueryRecord {
            class,
            arrival,
            finish,
            cpu_by_level: cpu,
            net_by_level: net,
        })
    }

    pub fn execution_time(&self) -> f64 {
        self.finish - self.arrival
    }
}

/// Aggregates over a historical window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowStats {
    /// Completed queries per SLA class.
    pub q_h: Vec<f64>,
    pub num_q: f64,
    /// CPU seconds per layout level.
    pub cpu_h: Vec<f64>,
    /// Bytes entering each layout level from the level below.
    pub net_h: Vec<f64>,
    /// Average number of queries running at once.
    pub conc: f64,
    /// Layout in force during the window.
    pub l_h: ContainerLayout,
    /// Window length in seconds.
    pub w_h: f64,
}

impl WindowStats {
    /// Stats of a window in which nothing completed.
    pub fn idle(num_classes: usize, layout: ContainerLayout, w_h: f64) -> Self {
        let h = layout.height();
        WindowStats {
            q_h: vec![0.0; num_classes],
            num_q: 0.0,
            cpu_h: vec![0.0; h],
            net_h: vec![0.0; h],
            conc: 0.0,
            l_h: layout,
            w_h,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.l_h.height();
        if self.cpu_h.len() != h || self.net_h.len() != h {
            return Err(Error::invalid(
                "window stats",
                format!("cpu_h/net_h must have {h} levels like l_h"),
            ));
        }
        let nonneg = |v: &f64| *v >= 0.0 && v.is_finite();
        if !(self.q_h.iter().all(nonneg)
            && self.cpu_h.iter().all(nonneg)
            && self.net_h.iter().all(nonneg)
            && nonneg(&self.conc)
            && nonneg(&self.num_q)
            && nonneg(&self.w_h))
        {
            return Err(Error::invalid("window stats", "all entries must be finite and >= 0"));
        }
        let sum: f64 = self.q_h.iter().sum();
        if (sum - self.num_q).abs() > 1e-9 * sum.max(1.0) {
            return Err(Error::invalid(
                "window stats",
                format!("num_q {} differs from the class total {sum}", self.num_q),
            ));
        }
        Ok(())
    }
}

/// Aggregates `records` (the queries that completed inside the window) into window statistics.
pub fn collect_stats(
    records: &[QueryRecord],
    layout: &ContainerLayout,
    w_h: f64,
    num_classes: usize,
) -> Result<WindowStats> {
    if !(w_h > 0.0) {
        return Err(Error::Domain(format!("historical window must be > 0, got {w_h}")));
    }
    let h = layout.height();
    let mut stats = WindowStats::idle(num_classes, layout.clone(), w_h);
    let mut busy = 0.0;
    for r in records {
        if r.class >= num_classes {
            return Err(Error::invalid("query record", format!("class {} out of range", r.class)));
        }
        if r.cpu_by_level.len() != h || r.net_by_level.len() != h {
            return Err(Error::invalid("query record", format!("expected {h} levels")));
        }
        stats.q_h[r.class] += 1.0;
        for i in 0..h {
            stats.cpu_h[i] += r.cpu_by_level[i];
            stats.net_h[i] += r.net_by_level[i];
        }
        busy += r.execution_time();
    }
    stats.num_q = records.len() as f64;
    stats.conc = busy / w_h;
    Ok(stats)
}

/// Settings of the layout forecaster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastConfig {
    /// Prediction window in seconds.
    pub w_p: f64,
    pub pricing: CloudPricing,
    pub arc: u32,
    /// Bytes of all partition replicas.
    pub data_size: f64,
    /// SLA of every query class, indexed like `WindowStats::q_h`.
    pub slas: Vec<SlaSpec>,
    pub bounds: LayoutBounds,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

impl ForecastConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_p > 0.0) {
            return Err(Error::Config(format!("prediction window must be > 0, got {}", self.w_p)));
        }
        if self.arc == 0 {
            return Err(Error::Config("arc must be >= 1".into()));
        }
        if !(self.data_size >= 0.0) {
            return Err(Error::Config("data size must be >= 0".into()));
        }
        self.pricing.validate()?;
        self.bounds.validate()?;
        for sla in &self.slas {
            sla.validate()?;
        }
        Ok(())
    }

    fn check_against(&self, stats: &WindowStats) -> Result<()> {
        self.validate()?;
        stats.validate()?;
        if stats.l_h.height() != self.bounds.height() {
            return Err(Error::Config(format!(
                "stats describe {} levels but bounds have {}",
                stats.l_h.height(),
                self.bounds.height()
            )));
        }
        if stats.q_h.len() != self.slas.len() {
            return Err(Error::Config(format!(
                "stats have {} classes but {} SLAs are configured",
                stats.q_h.len(),
                self.slas.len()
            )));
        }
        Ok(())
    }
}

/// Every term of the profit prediction for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitBreakdown {
    pub t_p: f64,
    pub t_d: f64,
    /// Revenue of queries arriving while data is re-organized.
    pub revenue_reorg: f64,
    /// Revenue of the rest of the window.
    pub revenue_steady: f64,
    pub revenue: f64,
    pub cost: f64,
    pub profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDecision {
    pub layout: ContainerLayout,
    pub predicted_profit: f64,
    pub predicted_t_p: f64,
    pub reorg_time: f64,
    pub breakdown: ProfitBreakdown,
}

fn relaxed_query_time(stats: &WindowStats, l: &[f64], net_speed: f64) -> f64 {
    if stats.num_q <= 0.0 {
        return 0.0;
    }
    let mut sum = stats.cpu_h[0] / l[0];
    for i in 1..l.len() {
        sum += stats.cpu_h[i] / l[i] + stats.net_h[i] / (net_speed * l[i - 1].min(l[i]));
    }
    stats.conc / stats.num_q * sum
}

fn relaxed_reorg_time(current: f64, target: f64, cfg: &ForecastConfig) -> f64 {
    let delta = (current - target).abs();
    if delta == 0.0 {
        return 0.0;
    }
    let bytes = move_model_fraction(current, target) * cfg.data_size;
    let t = bytes / (delta * f64::from(cfg.arc) * cfg.pricing.net_speed);
    t.clamp(0.0, cfg.w_p)
}

fn relaxed_breakdown(stats: &WindowStats, l: &[f64], cfg: &ForecastConfig) -> ProfitBreakdown {
    let t_p = relaxed_query_time(stats, l, cfg.pricing.net_speed);
    let t_d = relaxed_reorg_time(f64::from(stats.l_h.get(0)), l[0], cfg);
    let (mut rev_d, mut rev_p) = (0.0, 0.0);
    if stats.w_h > 0.0 {
        for (q, sla) in stats.q_h.iter().zip(&cfg.slas) {
            let q_reorg = q * t_d / stats.w_h;
            let q_steady = q * (cfg.w_p - t_d) / stats.w_h;
            rev_d += q_reorg * sla.price_unchecked(t_d + t_p);
            rev_p += q_steady * sla.price_unchecked(t_p);
        }
    }
    let revenue = rev_d + rev_p;
    let cost = relaxed_cost(l.iter().sum(), cfg.w_p, &cfg.pricing);
    ProfitBreakdown {
        t_p,
        t_d,
        revenue_reorg: rev_d,
        revenue_steady: rev_p,
        revenue,
        cost,
        profit: revenue - cost,
    }
}

/// Predicted average query time on `candidate`.
pub fn predict_query_time(stats: &WindowStats, candidate: &ContainerLayout, pricing: &CloudPricing) -> Result<f64> {
    stats.validate()?;
    if candidate.height() != stats.l_h.height() {
        return Err(Error::Domain("candidate height differs from the stats".into()));
    }
    Ok(relaxed_query_time(stats, &candidate.as_f64(), pricing.net_speed))
}

/// Seconds of the prediction window spent re-organizing data when the data
/// level goes from `l_h[0]` to `l_p[0]` containers.
pub fn reorg_time(l_h: &ContainerLayout, l_p: &ContainerLayout, cfg: &ForecastConfig) -> f64 {
    relaxed_reorg_time(f64::from(l_h.get(0)), f64::from(l_p.get(0)), cfg)
}

pub fn profit_breakdown(stats: &WindowStats, candidate: &ContainerLayout, cfg: &ForecastConfig) -> Result<ProfitBreakdown> {
    cfg.check_against(stats)?;
    if candidate.height() != stats.l_h.height() {
        return Err(Error::Domain("candidate height differs from the stats".into()));
    }
    Ok(relaxed_breakdown(stats, &candidate.as_f64(), cfg))
}

/// Predicted profit (revenue minus cost) over the next prediction window.
pub fn predict_profit(stats: &WindowStats, candidate: &ContainerLayout, cfg: &ForecastConfig) -> Result<f64> {
    profit_breakdown(stats, candidate, cfg).map(|b| b.profit)
}

fn decision(stats: &WindowStats, layout: ContainerLayout, cfg: &ForecastConfig) -> LayoutDecision {
    let breakdown = relaxed_breakdown(stats, &layout.as_f64(), cfg);
    LayoutDecision {
        layout,
        predicted_profit: breakdown.profit,
        predicted_t_p: breakdown.t_p,
        reorg_time: breakdown.t_d,
        breakdown,
    }
}

/// Picks the next layout by local search seeded at the current layout.
///
/// The relaxed profit is maximized inside the bounds from the current layout
/// and from a few fixed points of the box (its corners and two geometric
/// midpoints), which keeps the search off the flat region where every SLA
/// pays almost nothing. Every local optimum is rounded to its surrounding
/// integer layouts, clamped, and the best of all of them wins. If no search converges, or the winner is predicted to earn
/// less than keeping the current layout, the current layout (clamped to the
/// bounds) is returned.
pub fn optimize_layout(stats: &WindowStats, cfg: &ForecastConfig) -> Result<LayoutDecision> {
    optimize_layout_with(stats, cfg, &BoxQnSettings::default())
}

fn starting_points(seed: &[f64], lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let geometric = |s: f64| -> Vec<f64> {
        lo.iter()
            .zip(hi)
            .map(|(&a, &b)| (a.powf(1.0 - s) * b.powf(s)).round().clamp(a, b))
            .collect()
    };
    let mut starts = vec![seed.to_vec(), lo.to_vec(), hi.to_vec(), geometric(0.33), geometric(0.67)];
    let mut seen = Vec::new();
    starts.retain(|p| {
        let fresh = !seen.contains(p);
        if fresh {
            seen.push(p.clone());
        }
        fresh
    });
    starts
}

/// Above this height only the ceiling of a local optimum is tried.
const MAX_CORNER_HEIGHT: usize = 12;

/// The ceiling of `x` first, then every other floor/ceil combination.
fn integer_corners(x: &[f64]) -> Vec<Vec<u32>> {
    // Values a hair above an integer are that integer, not the next one.
    let ceil: Vec<u32> = x.iter().map(|&v| (v - 1e-6).ceil().max(1.0) as u32).collect();
    if x.len() > MAX_CORNER_HEIGHT {
        return vec![ceil];
    }
    let mut corners = vec![ceil.clone()];
    for mask in 1u32..(1 << x.len()) {
        let mut c = ceil.clone();
        let mut distinct = true;
        for (i, v) in c.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                let floor = (x[i] + 1e-6).floor().max(1.0) as u32;
                distinct &= floor != *v;
                *v = floor;
            }
        }
        if distinct {
            corners.push(c);
        }
    }
    corners
}

pub fn optimize_layout_with(stats: &WindowStats, cfg: &ForecastConfig, settings: &BoxQnSettings) -> Result<LayoutDecision> {
    cfg.check_against(stats)?;
    let seed = cfg.bounds.clamp(&stats.l_h);
    let lo: Vec<f64> = cfg.bounds.min.iter().map(|&v| f64::from(v)).collect();
    let hi: Vec<f64> = cfg.bounds.max.iter().map(|&v| f64::from(v)).collect();
    let stay = decision(stats, seed.clone(), cfg);

    let mut best: Option<LayoutDecision> = None;
    for x0 in starting_points(&seed.as_f64(), &lo, &hi) {
        let result = minimize_box(|x: &[f64]| -relaxed_breakdown(stats, x, cfg).profit, &x0, &lo, &hi, settings);
        if !result.converged() {
            log::debug!("layout search from {x0:?} stopped with {:?}", result.termination);
            continue;
        }
        for corner in integer_corners(&result.x) {
            let candidate = decision(stats, cfg.bounds.clamp(&ContainerLayout::new(corner)?), cfg);
            if best.as_ref().is_none_or(|b| candidate.predicted_profit > b.predicted_profit) {
                best = Some(candidate);
            }
        }
    }
    let Some(chosen) = best else {
        log::warn!("no layout search converged; keeping {seed}");
        return Ok(stay);
    };
    Ok(if chosen.predicted_profit >= stay.predicted_profit {
        chosen
    } else {
        stay
    })
}

/// Exact argmax of the predicted profit over every integer layout in the
/// bounds. Ties go to the lexicographically smallest layout.
pub fn enumerate_optimal(stats: &WindowStats, cfg: &ForecastConfig) -> Result<LayoutDecision> {
    cfg.check_against(stats)?;
    let size = cfg.bounds.volume();
    if size > u128::from(cfg.enumeration_cap) {
        return Err(Error::EnumerationCap {
            size,
            cap: cfg.enumeration_cap,
        });
    }
    let (lo, hi) = (&cfg.bounds.min, &cfg.bounds.max);
    let mut current: Vec<f64> = lo.iter().map(|&v| f64::from(v)).collect();
    let mut best = current.clone();
    let mut best_profit = relaxed_breakdown(stats, &current, cfg).profit;
    // Odometer over the box, last level fastest: visits layouts in lexicographic order.
    loop {
        let mut level = current.len();
        loop {
            if level == 0 {
                let layout = ContainerLayout::new(best.iter().map(|&v| v as u32).collect())?;
                return Ok(decision(stats, layout, cfg));
            }
            level -= 1;
            if current[level] < f64::from(hi[level]) {
                current[level] += 1.0;
                break;
            }
            current[level] = f64::from(lo[level]);
        }
        let p = relaxed_breakdown(stats, &current, cfg).profit;
        if p > best_profit {
            best_profit = p;
            best.clone_from(&current);
        }
    }
}

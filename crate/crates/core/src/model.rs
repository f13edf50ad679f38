//! Shared domain types: SLA price curves, tree plan profiles, container
//! layouts and cloud pricing, plus the revenue/cost/profit arithmetic.
//!
//! Money is carried as `f64` dollars and durations as `f64` seconds. Nothing
//! here rounds; reporting code rounds to cents.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponentially decaying price curve `alpha * exp(-t / gamma)`.
///
/// `alpha` is the most a user pays (a query answered instantly); `gamma` is the
/// decay constant in seconds. Small `gamma` marks a critical query, large
/// `gamma` a best-effort one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlaSpec {
    pub alpha: f64,
    pub gamma: f64,
}

impl SlaSpec {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        let sla = SlaSpec { alpha, gamma };
        sla.validate()?;
        Ok(sla)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("SLA", format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("SLA", format!("gamma must be > 0, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Price without the domain check, for hot loops where `t >= 0` is known.
    #[inline]
    pub(crate) fn price_unchecked(&self, t: f64) -> f64 {
        self.alpha * (-t / self.gamma).exp()
    }
}

/// Price charged for a query that ran for `t` seconds.
pub fn sla_price(sla: &SlaSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("execution time must be >= 0, got {t}")));
    }
    Ok(sla.price_unchecked(t))
}

/// Level-aggregated shape of a tree execution plan.
///
/// Index 0 is the leaf level (filters and joins next to the data); the last
/// index is the root. Each level records how many operators it has, the CPU
/// seconds each operator burns, and how many bytes each operator sends to its
/// parent level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreePlanProfile {
    pub op_count: Vec<u32>,
    pub op_cpu: Vec<f64>,
    pub op_out_bytes: Vec<f64>,
}

impl TreePlanProfile {
    pub fn new(op_count: Vec<u32>, op_cpu: Vec<f64>, op_out_bytes: Vec<f64>) -> Result<Self> {
        let plan = TreePlanProfile {
            op_count,
            op_cpu,
            op_out_bytes,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Plan whose operators all cost `cpu` seconds and emit nothing.
    pub fn uniform(op_count: Vec<u32>, cpu: f64) -> Result<Self> {
        let h = op_count.len();
        Self::new(op_count, vec![cpu; h], vec![0.0; h])
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.op_count.len();
        if h == 0 {
            return Err(Error::invalid("plan", "needs at least one level"));
        }
        if self.op_cpu.len() != h || self.op_out_bytes.len() != h {
            return Err(Error::invalid(
                "plan",
                format!(
                    "level vectors disagree in length: {} counts, {} cpu, {} out-bytes",
                    h,
                    self.op_cpu.len(),
                    self.op_out_bytes.len()
                ),
            ));
        }
        if self.op_count[h - 1] != 1 {
            return Err(Error::invalid("plan", "root level must have exactly one operator"));
        }
        if self.op_count.contains(&0) {
            return Err(Error::invalid("plan", "every level needs at least one operator"));
        }
        // Unary chains (a level with the same fan-out as its child) do occur,
        // so the counts only have to be non-increasing towards the root.
        if self.op_count.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("plan", "operator counts must not grow towards the root"));
        }
        let bad_cost = |v: &f64| !(*v >= 0.0 && v.is_finite());
        if self.op_cpu.iter().any(bad_cost) || self.op_out_bytes.iter().any(bad_cost) {
            return Err(Error::invalid("plan", "costs must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.op_count.len()
    }

    pub fn total_ops(&self) -> u32 {
        self.op_count.iter().sum()
    }

    /// CPU seconds summed over all operators of plan level `level`.
    pub fn level_cpu(&self, level: usize) -> f64 {
        f64::from(self.op_count[level]) * self.op_cpu[level]
    }

    /// Bytes sent upwards by all operators of plan level `level`.
    pub fn level_out_bytes(&self, level: usize) -> f64 {
        f64::from(self.op_count[level]) * self.op_out_bytes[level]
    }
}

/// A class of queries sharing one SLA and one plan shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryClass {
    pub id: String,
    pub sla: SlaSpec,
    pub plan: TreePlanProfile,
}

impl QueryClass {
    pub fn new(id: impl Into<String>, sla: SlaSpec, plan: TreePlanProfile) -> Result<Self> {
        sla.validate()?;
        plan.validate()?;
        Ok(QueryClass {
            id: id.into(),
            sla,
            plan,
        })
    }
}

/// Number of containers per layout level, index 0 being the data level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContainerLayout(Vec<u32>);

impl ContainerLayout {
    pub fn new(levels: Vec<u32>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("layout", "needs at least one level"));
        }
        if levels.contains(&0) {
            return Err(Error::invalid(
                "layout",
                format!("every level needs at least one container, got {levels:?}"),
            ));
        }
        Ok(ContainerLayout(levels))
    }

    pub fn height(&self) -> usize {
        self.0.len()
    }

    pub fn levels(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, level: usize) -> u32 {
        self.0[level]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| f64::from(c)).collect()
    }
}

impl fmt::Display for ContainerLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl TryFrom<Vec<u32>> for ContainerLayout {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        ContainerLayout::new(v)
    }
}

/// Inclusive per-level container count limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutBounds {
    pub min: Vec<u32>,
    pub max: Vec<u32>,
}

impl LayoutBounds {
    pub fn new(min: Vec<u32>, max: Vec<u32>) -> Result<Self> {
        let b = LayoutBounds { min, max };
        b.validate()?;
        Ok(b)
    }

    /// Same limits on every one of `height` levels.
    pub fn uniform(height: usize, min: u32, max: u32) -> Result<Self> {
        Self::new(vec![min; height], vec![max; height])
    }

    /// Degenerate box that only admits `layout`.
    pub fn fixed(layout: &ContainerLayout) -> Self {
        LayoutBounds {
            min: layout.levels().to_vec(),
            max: layout.levels().to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min.is_empty() || self.min.len() != self.max.len() {
            return Err(Error::Bounds(format!(
                "bounds need matching non-empty min/max vectors, got {} and {} levels",
                self.min.len(),
                self.max.len()
            )));
        }
        for (i, (&lo, &hi)) in self.min.iter().zip(&self.max).enumerate() {
            if lo < 1 {
                return Err(Error::Bounds(format!("level {i}: minimum must be >= 1")));
            }
            if lo > hi {
                return Err(Error::Bounds(format!("level {i}: minimum {lo} exceeds maximum {hi}")));
            }
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, layout: &ContainerLayout) -> bool {
        layout.height() == self.height()
            && layout
                .levels()
                .iter()
                .zip(self.min.iter().zip(&self.max))
                .all(|(&c, (&lo, &hi))| lo <= c && c <= hi)
    }

    pub fn clamp(&self, layout: &ContainerLayout) -> ContainerLayout {
        ContainerLayout(
            layout
                .levels()
                .iter()
                .zip(self.min.iter().zip(&self.max))
                .map(|(&c, (&lo, &hi))| c.clamp(lo, hi))
                .collect(),
        )
    }

    pub fn minimum(&self) -> ContainerLayout {
        ContainerLayout(self.min.clone())
    }

    /// Number of integer layouts inside the box.
    pub fn volume(&self) -> u128 {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(&lo, &hi)| u128::from(hi - lo + 1))
            .product()
    }
}

/// IaaS pricing: every container is billed `quantum_cost` dollars per
/// `quantum` seconds. `net_speed` is the per-container network throughput in
/// bytes per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudPricing {
    pub quantum: f64,
    pub quantum_cost: f64,
    pub net_speed: f64,
}

impl CloudPricing {
    pub fn new(quantum: f64, quantum_cost: f64, net_speed: f64) -> Result<Self> {
        let p = CloudPricing {
            quantum,
            quantum_cost,
            net_speed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("quantum", self.quantum),
            ("quantum_cost", self.quantum_cost),
            ("net_speed", self.net_speed),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid("pricing", format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for CloudPricing {
    /// 300 s quanta at $0.41 on a 150 Mbit/s network.
    fn default() -> Self {
        CloudPricing {
            quantum: 300.0,
            quantum_cost: 0.41,
            net_speed: 150e6 / 8.0,
        }
    }
}

/// Cost of keeping `layout` allocated for `period` seconds, billed pro rata
/// in quanta: `quantum_cost * period / quantum * total containers`.
pub fn operational_cost(layout: &ContainerLayout, period: f64, pricing: &CloudPricing) -> Result<f64> {
    if !(period >= 0.0 && period.is_finite()) {
        return Err(Error::Domain(format!("period must be >= 0, got {period}")));
    }
    Ok(relaxed_cost(f64::from(layout.total()), period, pricing))
}

#[inline]
pub(crate) fn relaxed_cost(total_containers: f64, period: f64, pricing: &CloudPricing) -> f64 {
    pricing.quantum_cost * (period / pricing.quantum) * total_containers
}

#[inline]
pub fn profit(revenue: f64, cost: f64) -> f64 {
    revenue - cost
}

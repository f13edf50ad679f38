//! One-shot layout forecast from a statistics file.
//!
//! ```toml
//! [stats]
//! q_h = [2.0]
//! num_q = 2.0
//! cpu_h = [16.0, 6.0, 3.0, 1.0]
//! net_h = [0.0, 0.0, 0.0, 0.0]
//! conc = 2.0
//! l_h = [2, 2, 2, 1]
//! w_h = 300.0
//!
//! [forecast]
//! slas = [{ alpha = 15.0, gamma = 20.0 }]
//! pricing = { quantum = 300.0, quantum_cost = 1.0, net_speed = 1e9 }
//! data_size = 0.0
//! bounds = { min = [1, 1, 2, 1], max = [20, 20, 2, 1] }
//! ```
//!
//! The `[forecast]` table may instead live in a separate file passed with
//! `--config`. JSON is accepted for files ending in `.json`.

use std::fmt::Write as _;
use std::path::Path;

use elastree::forecast::{enumerate_optimal, optimize_layout, ForecastConfig, LayoutDecision, WindowStats, DEFAULT_ENUMERATION_CAP};
use elastree::model::{CloudPricing, LayoutBounds};
use elastree::placement::DEFAULT_ARC;
use elastree::presets;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::scenario::{toml_error, SlaRef};
use crate::SchemaError;

fn default_w_p() -> f64 {
    300.0
}

fn default_arc() -> u32 {
    DEFAULT_ARC
}

fn default_data_size() -> f64 {
    8e9
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastEntry {
    #[serde(default = "default_w_p")]
    pub w_p: f64,
    #[serde(default)]
    pub pricing: CloudPricing,
    #[serde(default = "default_arc")]
    pub arc: u32,
    #[serde(default = "default_data_size")]
    pub data_size: f64,
    pub slas: Vec<SlaRef>,
    pub bounds: LayoutBounds,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
}

impl ForecastEntry {
    fn resolve(self) -> Result<ForecastConfig, SchemaError> {
        let slas = self
            .slas
            .into_iter()
            .map(|s| match s {
                SlaRef::Custom(s) => Ok(s),
                SlaRef::Named(n) => presets::sla(&n).ok_or_else(|| SchemaError(format!("unknown SLA {n:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ForecastConfig {
            w_p: self.w_p,
            pricing: self.pricing,
            arc: self.arc,
            data_size: self.data_size,
            slas,
            bounds: self.bounds,
            enumeration_cap: self.enumeration_cap,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsFile {
    stats: WindowStats,
    #[serde(default)]
    forecast: Option<ForecastEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    forecast: ForecastEntry,
}

fn read<T: DeserializeOwned>(path: &Path) -> Result<T, SchemaError> {
    let text = std::fs::read_to_string(path).map_err(|e| SchemaError(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)
            .map_err(|e| SchemaError(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
    } else {
        toml::from_str(&text).map_err(|e| toml_error(&path.display().to_string(), &text, &e))
    }
}

pub fn load(stats_path: &Path, config_path: Option<&Path>) -> Result<(WindowStats, ForecastConfig), SchemaError> {
    let file: StatsFile = read(stats_path)?;
    let entry = match config_path {
        Some(p) => read::<ConfigFile>(p)?.forecast,
        None => file.forecast.ok_or_else(|| {
            SchemaError(format!(
                "{}: no [forecast] table; add one or pass --config",
                stats_path.display()
            ))
        })?,
    };
    Ok((file.stats, entry.resolve()?))
}

fn layout_str(d: &LayoutDecision) -> String {
    d.layout.levels().iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

pub fn report(d: &LayoutDecision) -> String {
    let b = &d.breakdown;
    let mut s = String::new();
    let _ = writeln!(s, "layout          {}", layout_str(d));
    let _ = writeln!(s, "t_p             {:.6}", b.t_p);
    let _ = writeln!(s, "t_d             {:.6}", b.t_d);
    let _ = writeln!(s, "revenue_reorg   {:.6}", b.revenue_reorg);
    let _ = writeln!(s, "revenue_steady  {:.6}", b.revenue_steady);
    let _ = writeln!(s, "revenue         {:.6}", b.revenue);
    let _ = writeln!(s, "cost            {:.6}", b.cost);
    let _ = writeln!(s, "profit          {:.6}", b.profit);
    s
}

/// Optimizer result, then with `oracle` the enumeration argmax and the gap.
pub fn run(stats: &WindowStats, cfg: &ForecastConfig, oracle: bool) -> elastree::Result<String> {
    let chosen = optimize_layout(stats, cfg)?;
    let mut out = report(&chosen);
    if oracle {
        let best = enumerate_optimal(stats, cfg)?;
        let gap = if best.predicted_profit == chosen.predicted_profit {
            0.0
        } else {
            (best.predicted_profit - chosen.predicted_profit) / best.predicted_profit.abs()
        };
        let _ = writeln!(out, "oracle_layout   {}", layout_str(&best));
        let _ = writeln!(out, "oracle_profit   {:.6}", best.predicted_profit);
        let _ = writeln!(out, "gap             {:.6}", gap);
    }
    Ok(out)
}

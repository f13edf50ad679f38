//! Scenario files: a simulator configuration in TOML where SLAs, plans and
//! layouts may be given by preset name.
//!
//! ```toml
//! horizon = 3600
//! initial_layout = "small"
//! bounds = { min = [1, 1, 1], max = [64, 16, 4] }
//!
//! [[classes]]
//! id = "q1"
//! sla = "normal"
//! plan = "q1"
//!
//! [[workload.phases]]
//! duration = 3600
//! class = "q1"
//! lambda = 60
//! ```
//!
//! Extra presets may be declared in `[slas]` (name to `{ alpha, gamma }`)
//! and `[layouts]` (name to a level vector); they shadow the built-in ones.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use elastree::forecast::DEFAULT_ENUMERATION_CAP;
use elastree::model::{CloudPricing, ContainerLayout, LayoutBounds, QueryClass, SlaSpec, TreePlanProfile};
use elastree::presets;
use elastree::scheduler::RankPolicy;
use elastree::sim::{Mode, PlacementConfig, SimConfig, Workload};
use serde::Deserialize;
use toml::Spanned;

use crate::SchemaError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SlaRef {
    Named(String),
    Custom(SlaSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PlanRef {
    Named(String),
    Custom(TreePlanProfile),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LayoutRef {
    Named(String),
    Levels(Vec<u32>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassEntry {
    pub id: String,
    pub sla: Spanned<SlaRef>,
    pub plan: Spanned<PlanRef>,
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

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "default_epoch")]
    pub epoch: f64,
    #[serde(default = "default_history")]
    pub history_epochs: u32,
    pub horizon: f64,
    #[serde(default)]
    pub pricing: CloudPricing,
    pub initial_layout: Spanned<LayoutRef>,
    pub bounds: LayoutBounds,
    #[serde(default = "default_capacity")]
    pub capacity: u32,
    pub classes: Vec<ClassEntry>,
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
    #[serde(default)]
    pub slas: BTreeMap<String, SlaSpec>,
    #[serde(default)]
    pub layouts: BTreeMap<String, Vec<u32>>,
}

/// A resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub config: SimConfig,
    layouts: BTreeMap<String, Vec<u32>>,
}

/// `--mode` values: `elastic`, `static` (keep the scenario's initial layout)
/// or `static:<layout>` with a preset name or comma-separated levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModeArg {
    Elastic,
    Static(Option<String>),
}

impl std::str::FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "elastic" => Ok(ModeArg::Elastic),
            "static" => Ok(ModeArg::Static(None)),
            _ => match s.strip_prefix("static:") {
                Some(name) if !name.is_empty() => Ok(ModeArg::Static(Some(name.to_string()))),
                _ => Err(format!("expected elastic, static or static:<layout>, got {s:?}")),
            },
        }
    }
}

impl fmt::Display for ModeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeArg::Elastic => f.write_str("elastic"),
            ModeArg::Static(None) => f.write_str("static"),
            ModeArg::Static(Some(name)) => write!(f, "static:{name}"),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// A TOML parse error as `origin:line:col: message`.
pub fn toml_error(origin: &str, text: &str, e: &toml::de::Error) -> SchemaError {
    match e.span() {
        Some(span) => anchored(origin, text, span, e.message()),
        None => SchemaError(format!("{origin}: {}", e.message())),
    }
}

fn anchored(path: &str, text: &str, span: std::ops::Range<usize>, msg: impl fmt::Display) -> SchemaError {
    let (line, col) = line_col(text, span.start);
    SchemaError(format!("{path}:{line}:{col}: {msg}"))
}

fn parse_levels(s: &str) -> Option<Vec<u32>> {
    s.split(',').map(|v| v.trim().parse().ok()).collect()
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, SchemaError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SchemaError(format!("{}: cannot read scenario: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, SchemaError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| toml_error(origin, text, &e))?;

        let mut layouts: BTreeMap<String, Vec<u32>> = presets::LAYOUT_NAMES
            .iter()
            .map(|&n| (n.to_string(), presets::static_layout(n).expect("preset").levels().to_vec()))
            .collect();
        layouts.extend(file.layouts.clone());

        let mut classes = Vec::with_capacity(file.classes.len());
        for entry in &file.classes {
            let sla = match entry.sla.get_ref() {
                SlaRef::Custom(s) => *s,
                SlaRef::Named(n) => file
                    .slas
                    .get(n)
                    .copied()
                    .or_else(|| presets::sla(n))
                    .ok_or_else(|| anchored(origin, text, entry.sla.span(), format!("unknown SLA {n:?}")))?,
            };
            let plan = match entry.plan.get_ref() {
                PlanRef::Custom(p) => p.clone(),
                PlanRef::Named(n) => presets::plan(n)
                    .ok_or_else(|| anchored(origin, text, entry.plan.span(), format!("unknown plan {n:?}")))?,
            };
            let class = QueryClass::new(entry.id.clone(), sla, plan)
                .map_err(|e| anchored(origin, text, entry.sla.span(), format!("class {:?}: {e}", entry.id)))?;
            classes.push(class);
        }

        let levels = match file.initial_layout.get_ref() {
            LayoutRef::Levels(v) => v.clone(),
            LayoutRef::Named(n) => layouts
                .get(n)
                .cloned()
                .ok_or_else(|| anchored(origin, text, file.initial_layout.span(), format!("unknown layout {n:?}")))?,
        };
        let initial_layout = ContainerLayout::new(levels)
            .map_err(|e| anchored(origin, text, file.initial_layout.span(), e))?;

        let config = SimConfig {
            epoch: file.epoch,
            history_epochs: file.history_epochs,
            horizon: file.horizon,
            pricing: file.pricing,
            initial_layout,
            bounds: file.bounds,
            capacity: file.capacity,
            classes,
            workload: file.workload,
            seed: file.seed,
            mode: file.mode,
            rank_policy: file.rank_policy,
            placement: file.placement,
            enumeration_cap: file.enumeration_cap,
        };
        let name = file.name.unwrap_or_else(|| {
            Path::new(origin)
                .file_stem()
                .map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned())
        });
        Ok(Scenario { name, config, layouts })
    }

    /// The configuration with `--seed` and `--mode` applied.
    pub fn configure(&self, seed: Option<u64>, mode: Option<&ModeArg>) -> Result<SimConfig, SchemaError> {
        let mut cfg = self.config.clone();
        if let Some(seed) = seed {
            cfg.seed = seed;
        }
        match mode {
            None => {}
            Some(ModeArg::Elastic) => cfg.mode = Mode::Elastic,
            Some(ModeArg::Static(name)) => {
                cfg.mode = Mode::Static;
                if let Some(name) = name {
                    let levels = self
                        .layouts
                        .get(name)
                        .cloned()
                        .or_else(|| parse_levels(name))
                        .ok_or_else(|| {
                            let known: Vec<&str> = self.layout_names().collect();
                            SchemaError(format!(
                                "unknown layout {name:?} in --mode; known: {}, or levels like 10,4,1",
                                known.join(", ")
                            ))
                        })?;
                    cfg.initial_layout =
                        ContainerLayout::new(levels).map_err(|e| SchemaError(format!("--mode {name}: {e}")))?;
                }
            }
        }
        Ok(cfg)
    }

    /// Every layout name the scenario knows, presets included.
    pub fn layout_names(&self) -> impl Iterator<Item = &str> {
        self.layouts.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
horizon = 600
initial_layout = "small"
bounds = { min = [1, 1, 1], max = [64, 16, 4] }

[[classes]]
id = "q1"
sla = "normal"
plan = "q1"

[[workload.phases]]
duration = 600
class = "q1"
lambda = 60
"#;

    #[test]
    fn presets_resolve() {
        let s = Scenario::parse(MINIMAL, "minimal.toml").unwrap();
        assert_eq!(s.name, "minimal");
        assert_eq!(s.config.initial_layout.levels(), &[10, 4, 1]);
        assert_eq!(s.config.classes[0].sla, presets::NORMAL);
        assert_eq!(s.config.epoch, 300.0);
        s.config.validate().unwrap();
    }

    #[test]
    fn custom_values_and_local_presets() {
        let text = MINIMAL
            .replace("initial_layout = \"small\"", "initial_layout = \"tiny\"\nlayouts = { tiny = [2, 1, 1] }")
            .replace("sla = \"normal\"", "sla = { alpha = 5.0, gamma = 10.0 }");
        let s = Scenario::parse(&text, "x.toml").unwrap();
        assert_eq!(s.config.initial_layout.levels(), &[2, 1, 1]);
        assert_eq!(s.config.classes[0].sla, SlaSpec { alpha: 5.0, gamma: 10.0 });
        assert!(s.layout_names().any(|n| n == "tiny"));
    }

    #[test]
    fn errors_point_at_the_offending_line() {
        let err = Scenario::parse(&MINIMAL.replace("sla = \"normal\"", "sla = \"gold\""), "s.toml").unwrap_err();
        assert!(err.0.starts_with("s.toml:8:"), "{err}");
        assert!(err.0.contains("unknown SLA"));

        let err = Scenario::parse(&format!("{MINIMAL}\nbogus = 1\n"), "s.toml").unwrap_err();
        assert!(err.0.starts_with("s.toml:"), "{err}");
        assert!(err.0.contains("bogus"), "{err}");
    }

    #[test]
    fn mode_flag() {
        assert_eq!("elastic".parse::<ModeArg>().unwrap(), ModeArg::Elastic);
        assert_eq!("static".parse::<ModeArg>().unwrap(), ModeArg::Static(None));
        assert_eq!("static:large".parse::<ModeArg>().unwrap(), ModeArg::Static(Some("large".into())));
        assert!("static:".parse::<ModeArg>().is_err());
        assert!("auto".parse::<ModeArg>().is_err());

        let s = Scenario::parse(MINIMAL, "m.toml").unwrap();
        let cfg = s.configure(Some(7), Some(&"static:large".parse().unwrap())).unwrap();
        assert_eq!((cfg.seed, cfg.mode), (7, Mode::Static));
        assert_eq!(cfg.initial_layout.levels(), &[42, 12, 3]);
        let cfg = s.configure(None, Some(&"static:5,2,1".parse().unwrap())).unwrap();
        assert_eq!(cfg.initial_layout.levels(), &[5, 2, 1]);
        assert!(s.configure(None, Some(&"static:huge".parse().unwrap())).is_err());
    }

    #[test]
    fn guide_example_parses() {
        let guide = include_str!("../../../book/src/cli.md");
        let start = guide.find("```toml\n").unwrap() + "```toml\n".len();
        let block = &guide[start..start + guide[start..].find("```").unwrap()];
        let s = Scenario::parse(block, "guide.toml").unwrap();
        s.config.validate().unwrap();
        assert!(s.layout_names().any(|n| n == "tiny"));
        assert_eq!(s.configure(None, Some(&ModeArg::Static(Some("tiny".into())))).unwrap().initial_layout.levels(), &[2, 1, 1]);
    }

    #[test]
    fn shipped_scenarios_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
        for name in ["three_phase.toml", "two_query.toml"] {
            Scenario::load(&dir.join(name)).unwrap().config.validate().unwrap();
        }
    }

    #[test]
    fn line_and_column() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }
}

//! `elastree` command-line driver.
//!
//! Exit codes: 0 success, 1 I/O or other runtime failure, 2 invalid input
//! (scenario schema, stats file, flag values), 3 unsatisfiable layout bounds,
//! 4 enumeration cap exceeded under `optimize --oracle`.

mod optimize;
mod output;
mod scenario;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use elastree::placement::movement_samples;
use elastree::seed::{sub_seed, Stream};
use elastree::sim;
use rayon::prelude::*;

use crate::scenario::{ModeArg, Scenario};

/// Invalid user input; exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct SchemaError(pub String);

#[derive(Parser, Debug)]
#[command(name = "elastree", version, about = "Elastic container layouts for tree-shaped query plans: simulate, sweep, optimize and check placement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = "ELASTREE_OUT", default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario and write its traces.
    #[command(after_long_help = output::columns_help())]
    Run {
        /// Scenario file (TOML).
        scenario: PathBuf,
        /// Top-level seed; overrides the scenario's.
        #[arg(long)]
        seed: Option<u64>,
        /// elastic, static, or static:<layout> with a layout name or levels like 10,4,1.
        #[arg(long)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Simulate a scenario for several seeds and modes in parallel.
    #[command(after_long_help = output::columns_help())]
    Sweep {
        scenario: PathBuf,
        /// Seeds as a list (1,2,5) or an inclusive range (1..=5).
        #[arg(long, default_value = "1..=5")]
        seeds: String,
        /// Modes to compare; defaults to elastic plus every static layout preset.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<ModeArg>,
        /// Derive the per-run seeds from this seed instead of using the list directly.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Forecast the best layout for one window of statistics.
    Optimize {
        /// Statistics file (TOML, or JSON if it ends in .json).
        stats: PathBuf,
        /// Separate file holding the [forecast] table.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Cross-check against exhaustive enumeration.
        #[arg(long)]
        oracle: bool,
    },
    /// Compare simulated data movement on resizes with the movement model.
    #[command(after_long_help = output::heatmap_help())]
    ValidatePlacement {
        #[arg(long, default_value_t = 128)]
        partitions: u32,
        #[arg(long, default_value_t = 3)]
        replication: u32,
        #[arg(long, default_value_t = 4)]
        arc: u32,
        #[arg(long, default_value_t = 16)]
        grid_min: u32,
        /// Largest container count on the grid (at most 256).
        #[arg(long, default_value_t = 128)]
        grid_max: u32,
        #[arg(long, default_value_t = 16)]
        step: u32,
        /// Number of placement seeds to average over.
        #[arg(long, default_value_t = 1)]
        seeds: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutDir,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<SchemaError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<elastree::Error>() {
            return match e {
                elastree::Error::Bounds(_) => 3,
                elastree::Error::EnumerationCap { .. } => 4,
                elastree::Error::Config(_) | elastree::Error::Invalid { .. } | elastree::Error::Domain(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, SchemaError> {
    let bad = || SchemaError(format!("--seeds: expected a list like 1,2,3 or a range like 1..=5, got {s:?}"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..=") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..=b).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..b).collect()
    } else {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn cmd_run(path: &Path, seed: Option<u64>, mode: Option<ModeArg>, out: &Path) -> Result<()> {
    let scenario = Scenario::load(path)?;
    let cfg = scenario.configure(seed, mode.as_ref())?;
    let result = sim::run(&cfg)?;
    let mode = mode.map_or_else(|| format!("{:?}", cfg.mode).to_lowercase(), |m| m.to_string());
    output::write_run(out, &scenario.name, cfg.seed, &mode, &result)?;
    let s = &result.summary;
    println!(
        "{}: {} queries, revenue {:.2}, cost {:.2}, profit {:.2}; traces in {}",
        scenario.name,
        s.queries_completed,
        s.revenue,
        s.cost,
        s.profit,
        out.display()
    );
    Ok(())
}

fn cmd_sweep(path: &Path, seeds: &str, modes: Vec<ModeArg>, base: Option<u64>, out: &Path) -> Result<()> {
    let scenario = Scenario::load(path)?;
    let mut seeds = parse_seeds(seeds)?;
    if let Some(base) = base {
        seeds = seeds.iter().map(|&k| sub_seed(base, Stream::Sweep, k)).collect();
    }
    let modes = if modes.is_empty() {
        std::iter::once(ModeArg::Elastic)
            .chain(elastree::presets::LAYOUT_NAMES.iter().map(|n| ModeArg::Static(Some(n.to_string()))))
            .collect()
    } else {
        modes
    };

    let mut jobs = Vec::new();
    for mode in &modes {
        for &seed in &seeds {
            jobs.push((mode.clone(), seed, scenario.configure(Some(seed), Some(mode))?));
        }
    }
    let results: Vec<(String, u64, sim::Summary)> = jobs
        .into_par_iter()
        .map(|(mode, seed, cfg)| -> Result<_> {
            let result = sim::run(&cfg).with_context(|| format!("mode {mode}, seed {seed}"))?;
            let label = mode.to_string();
            let dir = out.join(label.replace(':', "-")).join(format!("seed-{seed}"));
            output::write_run(&dir, &scenario.name, seed, &label, &result)?;
            Ok((label, seed, result.summary))
        })
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(out)?;
    output::write_csv(
        &out.join("sweep.csv"),
        output::SWEEP_COLUMNS,
        results.iter().map(|(m, seed, s)| output::sweep_row(m, *seed, s)),
    )?;

    let mut table = String::new();
    for mode in &modes {
        let label = mode.to_string();
        let profits: Vec<f64> = results.iter().filter(|r| r.0 == label).map(|r| r.2.profit).collect();
        let mean = profits.iter().sum::<f64>() / profits.len() as f64;
        let _ = writeln!(table, "{label:<24} mean profit {mean:>10.2} over {} seeds", profits.len());
    }
    print!("{table}");
    println!("sweep of {} runs written to {}", results.len(), out.display());
    Ok(())
}

fn cmd_optimize(stats: &Path, config: Option<&Path>, oracle: bool) -> Result<()> {
    let (stats, cfg) = optimize::load(stats, config)?;
    print!("{}", optimize::run(&stats, &cfg, oracle)?);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_validate_placement(
    partitions: u32,
    replication: u32,
    arc: u32,
    grid_min: u32,
    grid_max: u32,
    step: u32,
    seeds: u32,
    seed: u64,
    out: &Path,
) -> Result<()> {
    if grid_max > 256 {
        return Err(SchemaError(format!("--grid-max must be at most 256, got {grid_max}")).into());
    }
    if grid_min == 0 || grid_min > grid_max || step == 0 || seeds == 0 {
        return Err(SchemaError("need 1 <= grid-min <= grid-max, step >= 1 and seeds >= 1".into()).into());
    }
    let grid: Vec<u32> = (grid_min..=grid_max).step_by(step as usize).collect();
    let per_seed: Vec<Vec<_>> = (0..u64::from(seeds))
        .into_par_iter()
        .map(|k| {
            let samples = movement_samples(
                partitions,
                replication,
                arc,
                sub_seed(seed, Stream::Placement, k),
                grid.iter().copied(),
                |_| grid_min..=grid_max,
            )?;
            Ok(samples.into_iter().filter(|s| grid.contains(&s.to)).collect())
        })
        .collect::<elastree::Result<_>>()?;

    let n = per_seed.len() as f64;
    let rows: Vec<(u32, u32, f64, f64)> = (0..per_seed[0].len())
        .map(|i| {
            let s = &per_seed[0][i];
            let simulated = per_seed.iter().map(|v| v[i].simulated).sum::<f64>() / n;
            (s.from, s.to, simulated, s.model)
        })
        .collect();
    let mae = rows.iter().map(|r| (r.2 - r.3).abs()).sum::<f64>() / rows.len() as f64;

    std::fs::create_dir_all(out)?;
    let path = out.join("heatmap.csv");
    output::write_csv(
        &path,
        output::HEATMAP_COLUMNS,
        rows.iter().map(|&(x, y, sim, model)| {
            vec![
                output::SCHEMA_VERSION.to_string(),
                x.to_string(),
                y.to_string(),
                sim.to_string(),
                model.to_string(),
                (sim - model).abs().to_string(),
            ]
        }),
    )?;
    println!("{} grid points written to {}", rows.len(), path.display());
    println!("mean abs error: {mae:.6}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, seed, mode, out } => cmd_run(&scenario, seed, mode, &out.out),
        Command::Sweep { scenario, seeds, modes, seed, out } => cmd_sweep(&scenario, &seeds, modes, seed, &out.out),
        Command::Optimize { stats, config, oracle } => cmd_optimize(&stats, config.as_deref(), oracle),
        Command::ValidatePlacement {
            partitions,
            replication,
            arc,
            grid_min,
            grid_max,
            step,
            seeds,
            seed,
            out,
        } => cmd_validate_placement(partitions, replication, arc, grid_min, grid_max, step, seeds, seed, &out.out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("1..3").unwrap(), vec![1, 2]);
        assert_eq!(parse_seeds("4, 9").unwrap(), vec![4, 9]);
        assert!(parse_seeds("a").is_err());
        assert!(parse_seeds("3..=1").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&SchemaError("x".into()).into()), 2);
        assert_eq!(exit_code(&elastree::Error::Bounds("x".into()).into()), 3);
        assert_eq!(exit_code(&elastree::Error::EnumerationCap { size: 9, cap: 1 }.into()), 4);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), 1);
        let wrapped = anyhow::Error::from(elastree::Error::Bounds("x".into())).context("while running");
        assert_eq!(exit_code(&wrapped), 3);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

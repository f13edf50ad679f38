//! Trace files written by `run` and `sweep`.
//!
//! Every CSV starts with a `schema_version` column; a change to the columns
//! of a file bumps its version.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use elastree::sim::{EpochReport, QueryTrace, SimOutput, Summary};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

pub const EPOCH_COLUMNS: &[(&str, &str)] = &[
    ("schema_version", "format version of this file"),
    ("epoch", "epoch index from 0"),
    ("start", "epoch start, seconds"),
    ("layout", "active containers per level, data level first, ';'-separated"),
    ("data_containers", "active data-level containers"),
    ("leased", "containers leased per level including pending-delete ones, ';'-separated"),
    ("revenue", "SLA revenue of queries completed in the epoch, $"),
    ("cost", "container quanta charged to the epoch, $"),
    ("profit", "revenue - cost, $"),
    ("queries_completed", "queries finished in the epoch"),
    ("avg_exec_time", "mean execution time of those queries, seconds (empty if none)"),
    ("reorg_seconds", "data re-organization time when the epoch started, seconds"),
    ("moved_fraction", "share of partition copies moved when the epoch started"),
    ("predicted_profit", "forecast profit for the epoch (empty in static mode)"),
];

pub const QUERY_COLUMNS: &[(&str, &str)] = &[
    ("schema_version", "format version of this file"),
    ("id", "query id in arrival order"),
    ("class", "query class id"),
    ("arrival", "arrival time, seconds"),
    ("finish", "completion time, seconds"),
    ("exec_time", "finish - arrival, seconds"),
    ("price", "SLA price paid, $"),
    ("epoch", "epoch the revenue is booked to"),
];

pub const SWEEP_COLUMNS: &[(&str, &str)] = &[
    ("schema_version", "format version of this file"),
    ("mode", "elastic, static or static:<layout>"),
    ("seed", "top-level seed"),
    ("revenue", "total revenue, $"),
    ("cost", "total cost, $"),
    ("profit", "total profit, $"),
    ("queries_completed", "queries finished"),
    ("mean_exec_time", "mean execution time, seconds (empty if none)"),
    ("quanta_leased", "container quanta paid for"),
];

pub const HEATMAP_COLUMNS: &[(&str, &str)] = &[
    ("schema_version", "format version of this file"),
    ("x", "data containers before the resize"),
    ("y", "data containers after the resize"),
    ("simulated", "share of partition copies moved, mean over seeds"),
    ("model", "predicted share, 1 - min(x/y, y/x)"),
    ("abs_error", "|simulated - model|"),
];

fn describe(title: &str, cols: &[(&str, &str)]) -> String {
    let mut s = format!("{title}:\n");
    for (name, what) in cols {
        s.push_str(&format!("  {name:<18} {what}\n"));
    }
    s
}

pub fn heatmap_help() -> String {
    describe("heatmap.csv", HEATMAP_COLUMNS)
}

/// Column reference shown by `--help`.
pub fn columns_help() -> String {
    format!(
        "Output files (schema version {SCHEMA_VERSION}):\n\n{}\n{}\n  summary.json: run totals with the scenario name, seed and mode\n\n{}",
        describe("epochs.csv", EPOCH_COLUMNS),
        describe("queries.csv", QUERY_COLUMNS),
        describe("sweep.csv (sweep only)", SWEEP_COLUMNS),
    )
}

fn levels(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn epoch_row(e: &EpochReport) -> Vec<String> {
    vec![
        SCHEMA_VERSION.to_string(),
        e.epoch.to_string(),
        e.start.to_string(),
        levels(e.layout.levels()),
        e.layout.get(0).to_string(),
        levels(&e.leased),
        e.revenue.to_string(),
        e.cost.to_string(),
        e.profit.to_string(),
        e.queries_completed.to_string(),
        opt(e.avg_exec_time),
        e.reorg_seconds.to_string(),
        e.moved_fraction.to_string(),
        opt(e.predicted_profit),
    ]
}

fn query_row(q: &QueryTrace) -> Vec<String> {
    vec![
        SCHEMA_VERSION.to_string(),
        q.id.to_string(),
        q.class.clone(),
        q.arrival.to_string(),
        q.finish.to_string(),
        q.exec_time().to_string(),
        q.price.to_string(),
        q.epoch.to_string(),
    ]
}

pub fn write_csv<I>(path: &Path, columns: &[(&str, &str)], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(columns.iter().map(|(name, _)| *name))?;
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SummaryFile<'a> {
    pub schema_version: u32,
    pub scenario: &'a str,
    pub seed: u64,
    pub mode: String,
    #[serde(flatten)]
    pub summary: &'a Summary,
}

/// Writes `epochs.csv`, `queries.csv` and `summary.json` into `dir`.
pub fn write_run(dir: &Path, scenario: &str, seed: u64, mode: &str, out: &SimOutput) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_csv(&dir.join("epochs.csv"), EPOCH_COLUMNS, out.epochs.iter().map(epoch_row))?;
    write_csv(&dir.join("queries.csv"), QUERY_COLUMNS, out.queries.iter().map(query_row))?;
    let summary = SummaryFile {
        schema_version: SCHEMA_VERSION,
        scenario,
        seed,
        mode: mode.to_string(),
        summary: &out.summary,
    };
    let path = dir.join("summary.json");
    let mut f = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

pub fn sweep_row(mode: &str, seed: u64, s: &Summary) -> Vec<String> {
    vec![
        SCHEMA_VERSION.to_string(),
        mode.to_string(),
        seed.to_string(),
        s.revenue.to_string(),
        s.cost.to_string(),
        s.profit.to_string(),
        s.queries_completed.to_string(),
        opt(s.mean_exec_time),
        s.quanta_leased.to_string(),
    ]
}

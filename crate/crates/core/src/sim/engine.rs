use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::forecast::{collect_stats, optimize_layout, ForecastConfig, QueryRecord};
use crate::model::{sla_price, ContainerLayout};
use crate::placement::PartitionRing;
use crate::scheduler::{schedule, ContainerId, OperatorAssignment, QueryId};
use crate::seed::{sub_seed, Stream};

use super::arrivals::generate_arrivals;
use super::fleet::{Fleet, LeaseOutcome};
use super::{EpochReport, Mode, QueryTrace, SimConfig, SimOutput, Summary};

/// Remaining CPU below which an operator counts as finished.
const DONE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    OpsDone { container: ContainerId, version: u64 },
    LevelReady { query: QueryId, level: usize },
    Boundary { epoch: usize },
    LeaseEnd { container: ContainerId },
    Arrival { index: usize },
}

impl Kind {
    /// Order of simultaneous events: work finishing at a boundary counts
    /// towards the epoch that ends there, the boundary decision precedes
    /// lease ends (so a container retired at its lease end is not renewed),
    /// and arrivals see the new layout.
    fn priority(&self) -> u8 {
        match self {
            Kind::OpsDone { .. } => 0,
            Kind::LevelReady { .. } => 1,
            Kind::Boundary { .. } => 2,
            Kind::LeaseEnd { .. } => 3,
            Kind::Arrival { .. } => 4,
        }
    }
}

#[derive(Debug)]
struct Event {
    time: f64,
    seq: u64,
    kind: Kind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap.
        other
            .time
            .total_cmp(&self.time)
            .then(other.kind.priority().cmp(&self.kind.priority()))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

#[derive(Debug, Clone, Copy)]
struct OpRun {
    query: QueryId,
    level: usize,
    /// CPU seconds still to burn.
    remaining: f64,
}

/// Processor-sharing state of one container.
#[derive(Debug, Default)]
struct Exec {
    running: Vec<OpRun>,
    queue: VecDeque<OpRun>,
    last: f64,
    version: u64,
}

impl Exec {
    fn advance(&mut self, now: f64) {
        if !self.running.is_empty() {
            let share = (now - self.last) / self.running.len() as f64;
            for op in &mut self.running {
                op.remaining -= share;
            }
        }
        self.last = now;
    }

    fn min_remaining(&self) -> Option<f64> {
        self.running.iter().map(|o| o.remaining).min_by(f64::total_cmp)
    }

    fn next_done(&self) -> Option<f64> {
        self.min_remaining()
            .map(|r| self.last + r.max(0.0) * self.running.len() as f64)
    }
}

struct LiveQuery {
    class: usize,
    arrival: f64,
    assignment: OperatorAssignment,
    outstanding: u32,
}

struct EpochMeta {
    layout: ContainerLayout,
    leased: Vec<u32>,
    reorg_seconds: f64,
    moved_fraction: f64,
    predicted_profit: Option<f64>,
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    forecast: ForecastConfig,
    epochs: usize,
    now: f64,
    heap: BinaryHeap<Event>,
    seq: u64,
    fleet: Fleet,
    exec: BTreeMap<ContainerId, Exec>,
    live: BTreeMap<QueryId, LiveQuery>,
    arrivals: Vec<(f64, usize)>,
    /// Active layout decided at the last boundary.
    layout: ContainerLayout,
    records: Vec<QueryRecord>,
    trace: Vec<QueryTrace>,
    revenue: Vec<f64>,
    cost: Vec<f64>,
    completed: Vec<u32>,
    exec_sum: Vec<f64>,
    meta: Vec<EpochMeta>,
    quanta: u64,
    fresh: u64,
    reused: u64,
    peak: u32,
}

/// Runs one simulation to completion.
///
/// Arrivals stop at the horizon. At the horizon every container is flagged
/// for deletion; queries still in flight finish, and their revenue and any
/// quanta they need are booked to the last epoch.
pub fn run(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let mut sim = Sim::new(cfg)?;
    while let Some(ev) = sim.heap.pop() {
        sim.now = ev.time;
        sim.handle(ev.kind)?;
    }
    if !sim.live.is_empty() {
        return Err(Error::Scheduling(format!("{} queries never completed", sim.live.len())));
    }
    Ok(sim.finish())
}

fn build_arrivals(cfg: &SimConfig) -> Result<Vec<(f64, usize)>> {
    let mut out = Vec::new();
    let mut start = 0.0;
    for (i, phase) in cfg.workload.phases.iter().enumerate() {
        let end = (start + phase.duration).min(cfg.horizon);
        if end > start {
            let class = cfg.class_index(&phase.class).expect("validated");
            let seed = sub_seed(cfg.seed, Stream::Arrivals, i as u64);
            for t in generate_arrivals(phase.lambda, end - start, seed, cfg.workload.gaps)? {
                out.push((start + t, class));
            }
        }
        start += phase.duration;
    }
    for a in &cfg.workload.trace {
        out.push((a.time, cfg.class_index(&a.class).expect("validated")));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        let epochs = cfg.epochs();
        let p = &cfg.placement;
        let ring = PartitionRing::build(
            p.partitions,
            p.replication,
            cfg.initial_layout.get(0),
            p.arc,
            sub_seed(cfg.seed, Stream::Placement, 0),
            p.order,
        )?
        .with_data_size(p.data_size);
        let fleet = Fleet::new(&cfg.initial_layout, ring, cfg.pricing.quantum, 0.0)?;
        let forecast = ForecastConfig {
            w_p: cfg.epoch,
            pricing: cfg.pricing,
            arc: p.arc,
            data_size: p.data_size,
            slas: cfg.classes.iter().map(|c| c.sla).collect(),
            bounds: cfg.bounds.clone(),
            enumeration_cap: cfg.enumeration_cap,
        };

        let mut sim = Sim {
            cfg,
            forecast,
            epochs,
            now: 0.0,
            heap: BinaryHeap::new(),
            seq: 0,
            exec: BTreeMap::new(),
            live: BTreeMap::new(),
            arrivals: build_arrivals(cfg)?,
            layout: cfg.initial_layout.clone(),
            records: Vec::new(),
            trace: Vec::new(),
            revenue: vec![0.0; epochs],
            cost: vec![0.0; epochs],
            completed: vec![0; epochs],
            exec_sum: vec![0.0; epochs],
            meta: Vec::with_capacity(epochs),
            quanta: 0,
            fresh: 0,
            reused: 0,
            peak: 0,
            fleet,
        };

        let initial: Vec<ContainerId> = sim.fleet.containers().iter().map(|c| c.id).collect();
        for id in initial {
            sim.charge(0.0);
            sim.push(cfg.pricing.quantum, Kind::LeaseEnd { container: id });
        }
        sim.fresh = sim.quanta;
        sim.meta.push(EpochMeta {
            layout: sim.layout.clone(),
            leased: sim.fleet.leased_per_level(),
            reorg_seconds: 0.0,
            moved_fraction: 0.0,
            predicted_profit: None,
        });
        for k in 1..=epochs {
            sim.push(k as f64 * cfg.epoch, Kind::Boundary { epoch: k });
        }
        for index in 0..sim.arrivals.len() {
            sim.push(sim.arrivals[index].0, Kind::Arrival { index });
        }
        Ok(sim)
    }

    fn push(&mut self, time: f64, kind: Kind) {
        self.seq += 1;
        self.heap.push(Event {
            time,
            seq: self.seq,
            kind,
        });
    }

    /// Books one quantum to the epoch containing `t`.
    fn charge(&mut self, t: f64) {
        let idx = ((t / self.cfg.epoch).floor() as usize).min(self.epochs - 1);
        self.cost[idx] += self.cfg.pricing.quantum_cost;
        self.quanta += 1;
    }

    /// Epoch `k` collects completions in `(k * epoch, (k + 1) * epoch]`.
    fn completion_epoch(&self, t: f64) -> usize {
        let k = (t / self.cfg.epoch).ceil() as usize;
        k.saturating_sub(1).min(self.epochs - 1)
    }

    fn handle(&mut self, kind: Kind) -> Result<()> {
        match kind {
            Kind::Arrival { index } => self.arrive(index),
            Kind::OpsDone { container, version } => self.ops_done(container, version),
            Kind::LevelReady { query, level } => {
                self.release(query, level);
                Ok(())
            }
            Kind::Boundary { epoch } => self.boundary(epoch),
            Kind::LeaseEnd { container } => {
                match self.fleet.lease_ended(container, self.now) {
                    LeaseOutcome::Released => {
                        self.exec.remove(&container);
                    }
                    LeaseOutcome::Renewed(until) => {
                        self.charge(self.now);
                        self.push(until, Kind::LeaseEnd { container });
                    }
                    LeaseOutcome::Unknown => {}
                }
                Ok(())
            }
        }
    }

    fn arrive(&mut self, index: usize) -> Result<()> {
        let cfg = self.cfg;
        let (arrival, class) = self.arrivals[index];
        let query = index as QueryId;
        let assignment = schedule(
            query,
            &cfg.classes[class].plan,
            self.fleet.containers_mut(),
            self.layout.height(),
            cfg.rank_policy,
        )?;
        self.live.insert(
            query,
            LiveQuery {
                class,
                arrival,
                assignment,
                outstanding: 0,
            },
        );
        self.release(query, 0);
        Ok(())
    }

    /// Hands the operators of plan level `level` to their containers.
    fn release(&mut self, query: QueryId, level: usize) {
        let cfg = self.cfg;
        let now = self.now;
        let q = self.live.get_mut(&query).expect("released query is live");
        let cpu = cfg.classes[q.class].plan.op_cpu[level];
        let targets = q.assignment.levels[level].containers.clone();
        q.outstanding = targets.len() as u32;

        let mut touched = BTreeSet::new();
        for id in targets {
            let e = self.exec.entry(id).or_default();
            if touched.insert(id) {
                e.advance(now);
            }
            e.queue.push_back(OpRun {
                query,
                level,
                remaining: cpu,
            });
        }
        for id in touched {
            self.refill(id);
        }
    }

    /// Starts queued operators up to capacity and schedules the next completion.
    fn refill(&mut self, id: ContainerId) {
        let cap = self.cfg.capacity as usize;
        let e = self.exec.get_mut(&id).expect("container has execution state");
        while e.running.len() < cap {
            match e.queue.pop_front() {
                Some(op) => e.running.push(op),
                None => break,
            }
        }
        self.peak = self.peak.max(e.running.len() as u32);
        e.version += 1;
        let version = e.version;
        if let Some(t) = e.next_done() {
            self.push(t, Kind::OpsDone { container: id, version });
        }
    }

    fn ops_done(&mut self, id: ContainerId, version: u64) -> Result<()> {
        let Some(e) = self.exec.get_mut(&id) else {
            return Ok(());
        };
        if e.version != version {
            return Ok(());
        }
        e.advance(self.now);
        let threshold = e.min_remaining().unwrap_or(0.0).max(0.0) + DONE_EPS;
        let (done, keep): (Vec<OpRun>, Vec<OpRun>) = std::mem::take(&mut e.running)
            .into_iter()
            .partition(|op| op.remaining <= threshold);
        e.running = keep;

        let c = self.fleet.get_mut(id).expect("busy container is leased");
        c.load -= done.len() as u32;
        self.refill(id);
        for op in done {
            self.op_finished(op.query, op.level)?;
        }
        Ok(())
    }

    fn op_finished(&mut self, query: QueryId, level: usize) -> Result<()> {
        let cfg = self.cfg;
        let q = self.live.get_mut(&query).expect("running query is live");
        q.outstanding -= 1;
        if q.outstanding > 0 {
            return Ok(());
        }
        let plan = &cfg.classes[q.class].plan;
        if level + 1 == plan.height() {
            return self.complete(query);
        }
        let target = q.assignment.levels[level + 1].layout_level;
        let bytes = plan.level_out_bytes(level);
        let delay = if bytes > 0.0 {
            let links = self.layout.get(target - 1).min(self.layout.get(target));
            bytes / (cfg.pricing.net_speed * f64::from(links))
        } else {
            0.0
        };
        if delay > 0.0 {
            self.push(self.now + delay, Kind::LevelReady { query, level: level + 1 });
        } else {
            self.release(query, level + 1);
        }
        Ok(())
    }

    fn complete(&mut self, query: QueryId) -> Result<()> {
        let cfg = self.cfg;
        let q = self.live.remove(&query).expect("completed query is live");
        let class = &cfg.classes[q.class];
        let exec_time = self.now - q.arrival;
        let price = sla_price(&class.sla, exec_time)?;
        let epoch = self.completion_epoch(self.now);
        self.revenue[epoch] += price;
        self.completed[epoch] += 1;
        self.exec_sum[epoch] += exec_time;
        self.records.push(QueryRecord::from_plan(
            q.class,
            q.arrival,
            self.now,
            &class.plan,
            self.layout.height(),
            cfg.rank_policy,
        )?);
        self.trace.push(QueryTrace {
            id: query,
            class: class.id.clone(),
            arrival: q.arrival,
            finish: self.now,
            price,
            epoch,
        });
        Ok(())
    }

    fn boundary(&mut self, epoch: usize) -> Result<()> {
        if epoch == self.epochs {
            self.fleet.retire_all();
            return Ok(());
        }
        let cfg = self.cfg;
        let mut meta = EpochMeta {
            layout: self.layout.clone(),
            leased: Vec::new(),
            reorg_seconds: 0.0,
            moved_fraction: 0.0,
            predicted_profit: None,
        };

        if cfg.mode == Mode::Elastic {
            let w_h = (f64::from(cfg.history_epochs) * cfg.epoch).min(self.now);
            let from = self.now - w_h;
            let start = self.records.partition_point(|r| r.finish <= from);
            let stats = collect_stats(&self.records[start..], &self.layout, w_h, cfg.classes.len())?;
            let target = match optimize_layout(&stats, &self.forecast) {
                Ok(d) => {
                    meta.predicted_profit = Some(d.predicted_profit);
                    d.layout
                }
                Err(e) => {
                    log::warn!("epoch {epoch}: forecast failed ({e}); keeping {}", self.layout);
                    self.layout.clone()
                }
            };
            log::debug!("epoch {epoch}: {} -> {target} on {} queries", self.layout, stats.num_q);

            let change = self.fleet.apply_layout(&target, self.now)?;
            for &id in &change.fresh {
                self.charge(self.now);
                self.push(self.now + cfg.pricing.quantum, Kind::LeaseEnd { container: id });
            }
            self.fresh += change.fresh.len() as u64;
            self.reused += change.reused.len() as u64;
            let delta = change.data_level_before.abs_diff(change.data_level_after);
            if delta > 0 {
                let rate = f64::from(delta) * f64::from(cfg.placement.arc) * cfg.pricing.net_speed;
                meta.reorg_seconds = (change.moves.bytes_to_fetch / rate).min(cfg.epoch);
                meta.moved_fraction = change.moves.moved_fraction;
            }
            self.layout = target.clone();
            meta.layout = target;
        }
        meta.leased = self.fleet.leased_per_level();
        self.meta.push(meta);
        Ok(())
    }

    fn finish(self) -> SimOutput {
        let epochs: Vec<EpochReport> = self
            .meta
            .into_iter()
            .enumerate()
            .map(|(k, m)| EpochReport {
                epoch: k,
                start: k as f64 * self.cfg.epoch,
                layout: m.layout,
                leased: m.leased,
                revenue: self.revenue[k],
                cost: self.cost[k],
                profit: self.revenue[k] - self.cost[k],
                queries_completed: self.completed[k],
                avg_exec_time: (self.completed[k] > 0).then(|| self.exec_sum[k] / f64::from(self.completed[k])),
                reorg_seconds: m.reorg_seconds,
                moved_fraction: m.moved_fraction,
                predicted_profit: m.predicted_profit,
            })
            .collect();
        let revenue: f64 = self.revenue.iter().sum();
        let cost: f64 = self.cost.iter().sum();
        let completed = self.trace.len() as u64;
        let summary = Summary {
            epochs: self.epochs,
            queries_arrived: self.arrivals.len() as u64,
            queries_completed: completed,
            revenue,
            cost,
            profit: revenue - cost,
            mean_exec_time: (completed > 0)
                .then(|| self.trace.iter().map(QueryTrace::exec_time).sum::<f64>() / completed as f64),
            quanta_leased: self.quanta,
            fresh_containers: self.fresh,
            reused_containers: self.reused,
            peak_running_ops: self.peak,
            finished_at: self.now,
        };
        SimOutput {
            epochs,
            queries: self.trace,
            summary,
        }
    }
}

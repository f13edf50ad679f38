//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or overruns its time budget.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use elastree::forecast::{
    enumerate_optimal, optimize_layout, predict_profit, predict_query_time, profit_breakdown, ForecastConfig,
    WindowStats, DEFAULT_ENUMERATION_CAP,
};
use elastree::model::{sla_price, CloudPricing, ContainerLayout, LayoutBounds, QueryClass, SlaSpec, TreePlanProfile};
use elastree::placement::{build_ring, movement_samples, ownership, PartitionRing};
use elastree::presets;
use elastree::scheduler::{schedule, ContainerState, RankPolicy};
use elastree::sim::{self, GapDistribution, GapStream, Mode, Phase, SimConfig, SimOutput, Workload};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Check = fn() -> Result<String, String>;
type Suite = fn() -> Result<(), String>;

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Check); 7] = [
        ("1 two-query table", Duration::from_secs(1), two_query_table),
        ("2 two-query optimum", Duration::from_secs(5), two_query_optimum),
        ("3 placement robustness", Duration::from_secs(30), placement_robustness),
        ("4 movement-model error", Duration::from_secs(60), movement_model_error),
        ("5 elastic dominance", Duration::from_secs(120), elastic_dominance),
        ("6 invariant suites", Duration::from_secs(120), invariant_suites),
        ("7 arrival statistics", Duration::from_secs(1), arrival_statistics),
    ];

    let mut failed = 0;
    for (name, budget, check) in criteria {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = t0.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over the time budget")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name} ({:.2} s of {} s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed == 0 {
        println!("acceptance: all 7 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 7 criteria failed");
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn layout(v: &[u32]) -> ContainerLayout {
    ContainerLayout::new(v.to_vec()).expect("valid layout")
}

// ---------------------------------------------------------------- 1

fn two_query_table() -> Result<String, String> {
    // (name, layout, profit, query times where checked)
    type Case = (&'static str, [u32; 4], f64, Option<[f64; 2]>);
    let cases: [Case; 3] = [
        ("A", [2, 2, 2, 1], 8.27, Some([13.0, 14.0])),
        ("B", [4, 2, 2, 1], 9.66, Some([9.0, 10.0])),
        ("C", [8, 4, 2, 1], 6.68, None),
    ];
    let mut detail = Vec::new();
    for (name, l, want_profit, want_times) in cases {
        let out = sim::run(&presets::two_query_scenario(&layout(&l))).map_err(|e| e.to_string())?;
        let profit = out.summary.profit;
        ensure((profit - want_profit).abs() <= 0.8, || {
            format!("layout {name}: profit {profit:.3}, expected {want_profit} ± 0.8")
        })?;
        let mut times: Vec<(String, f64)> = out.queries.iter().map(|q| (q.class.clone(), q.exec_time())).collect();
        times.sort_by(|a, b| a.0.cmp(&b.0));
        ensure(times.len() == 2, || format!("layout {name}: {} queries finished", times.len()))?;
        if let Some(want) = want_times {
            for ((class, t), w) in times.iter().zip(want) {
                ensure((t - w).abs() <= 1.0, || format!("layout {name}: {class} took {t} s, expected {w} ± 1"))?;
            }
        }
        detail.push(format!("{name} profit {profit:.2} times {}/{} s", times[0].1, times[1].1));
    }
    Ok(detail.join("; "))
}

// ---------------------------------------------------------------- 2

fn two_query_optimum() -> Result<String, String> {
    let stats = presets::two_query_stats(layout(&[2, 2, 2, 1]));
    let cfg = presets::two_query_forecast(20, 20);
    let opt = optimize_layout(&stats, &cfg).map_err(|e| e.to_string())?;
    let best = enumerate_optimal(&stats, &cfg).map_err(|e| e.to_string())?;
    let in_region = |l: &ContainerLayout| (3..=5).contains(&l.get(0)) && (2..=4).contains(&l.get(1));
    ensure(in_region(&opt.layout), || format!("optimizer chose {:?}", opt.layout.levels()))?;
    ensure(in_region(&best.layout), || format!("enumeration chose {:?}", best.layout.levels()))?;
    let gap = (best.predicted_profit - opt.predicted_profit) / best.predicted_profit.abs();
    ensure(gap <= 0.02, || format!("gap {:.3}%", gap * 100.0))?;
    Ok(format!(
        "optimizer {:?} ({:.3}), enumeration {:?} ({:.3}), gap {:.3}%",
        opt.layout.levels(),
        opt.predicted_profit,
        best.layout.levels(),
        best.predicted_profit,
        gap * 100.0
    ))
}

// ---------------------------------------------------------------- 3

fn placement_robustness() -> Result<String, String> {
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut worst: (f64, u32, u32) = (0.0, 0, 0);
    for seed in 0..20u64 {
        let samples =
            movement_samples(128, 3, 4, seed, 20..=125, |x| x - 5..=x + 5).map_err(|e| e.to_string())?;
        for s in samples.iter().filter(|s| s.from != s.to) {
            sum += s.simulated;
            n += 1;
            if s.simulated > worst.0 {
                worst = (s.simulated, s.from, s.to);
            }
        }
    }
    let mean = sum / n as f64;
    ensure(mean <= 0.15, || format!("mean moved fraction {:.2}% over {n} resizes", mean * 100.0))?;
    Ok(format!(
        "mean moved fraction {:.2}% over {n} resizes (largest single resize {:.1}% at {}->{})",
        mean * 100.0,
        worst.0 * 100.0,
        worst.1,
        worst.2
    ))
}

// ---------------------------------------------------------------- 4

fn movement_model_error() -> Result<String, String> {
    let grid: Vec<u32> = (1..=8).map(|k| 16 * k).collect();
    let coarse = movement_samples(128, 3, 4, 0, grid.iter().copied(), |_| 16..=128).map_err(|e| e.to_string())?;
    let coarse: Vec<_> = coarse.into_iter().filter(|s| grid.contains(&s.to)).collect();
    ensure(coarse.len() == 64, || format!("{} grid points", coarse.len()))?;
    let mae = coarse.iter().map(|s| s.abs_error()).sum::<f64>() / coarse.len() as f64;

    let dense = movement_samples(128, 3, 4, 0, 16..=128, |_| 16..=128).map_err(|e| e.to_string())?;
    let dense_mae = dense.iter().map(|s| s.abs_error()).sum::<f64>() / dense.len() as f64;

    ensure(mae <= 0.12, || format!("MAE {mae:.4} on the 16-step grid"))?;
    ensure(dense_mae <= 0.12, || format!("MAE {dense_mae:.4} on the dense grid"))?;
    Ok(format!(
        "MAE {:.2}% on the 16-step grid, {:.2}% over all {} pairs in 16..=128",
        mae * 100.0,
        dense_mae * 100.0,
        dense.len()
    ))
}

// ---------------------------------------------------------------- 5

fn elastic_dominance() -> Result<String, String> {
    let mut detail = Vec::new();
    for seed in 1..=5u64 {
        let small = presets::static_layout("small").expect("preset");
        let elastic = sim::run(&presets::three_phase_scenario(Mode::Elastic, small, seed)).map_err(|e| e.to_string())?;
        let e = elastic.summary.profit;
        for name in presets::LAYOUT_NAMES {
            let l = presets::static_layout(name).expect("preset");
            let s = sim::run(&presets::three_phase_scenario(Mode::Static, l, seed))
                .map_err(|e| e.to_string())?
                .summary
                .profit;
            ensure(e >= s, || format!("seed {seed}: elastic {e:.2} < static {name} {s:.2}"))?;
        }
        let l0 = |k: usize| elastic.epochs[k].layout.get(0);
        ensure(l0(5) > l0(4) || l0(6) > l0(4), || {
            format!("seed {seed}: level 0 went {} -> {} -> {}", l0(4), l0(5), l0(6))
        })?;
        detail.push(format!("seed {seed} elastic {e:.1} l0 {}->{}->{}", l0(4), l0(5), l0(6)));
    }
    Ok(detail.join("; "))
}

// ---------------------------------------------------------------- 6

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn invariant_suites() -> Result<String, String> {
    let suites: [(&str, Suite); 8] = [
        ("sla", sla_suite),
        ("query time", query_time_suite),
        ("decomposition", decomposition_suite),
        ("optimizer vs enumeration", oracle_suite),
        ("placement", placement_suite),
        ("scheduler", scheduler_suite),
        ("billing", billing_suite),
        ("determinism", determinism_suite),
    ];
    for (name, suite) in suites {
        suite().map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} suites held", suites.len()))
}

fn sla_suite() -> Result<(), String> {
    let strat = (0.01f64..200.0, 0.1f64..1e3, 0.0f64..1e4, 0.0f64..1e3);
    runner(256)
        .run(&strat, |(alpha, gamma, t, dt)| {
            let sla = SlaSpec::new(alpha, gamma).unwrap();
            let a = sla_price(&sla, t).unwrap();
            let b = sla_price(&sla, t + dt).unwrap();
            prop_assert!(b <= a);
            prop_assert!(a > 0.0 || t > 0.0);
            prop_assert!(a <= alpha && b >= 0.0);
            prop_assert_eq!(sla_price(&sla, 0.0).unwrap(), alpha);
            prop_assert!(sla_price(&sla, -1.0).is_err());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn arb_stats(h: usize) -> impl Strategy<Value = WindowStats> {
    (
        proptest::collection::vec(0.0f64..50.0, 2),
        proptest::collection::vec(0.0f64..5e3, h),
        proptest::collection::vec(0.0f64..1e9, h),
        0.0f64..20.0,
        proptest::collection::vec(1u32..30, h),
    )
        .prop_map(|(q, cpu, mut net, conc, l)| {
            net[0] = 0.0;
            WindowStats {
                num_q: q.iter().sum(),
                q_h: q,
                cpu_h: cpu,
                net_h: net,
                conc,
                l_h: ContainerLayout::new(l).unwrap(),
                w_h: 600.0,
            }
        })
}

fn forecast_config(h: usize, max: u32) -> ForecastConfig {
    ForecastConfig {
        w_p: 300.0,
        pricing: CloudPricing::default(),
        arc: 4,
        data_size: 8e9,
        slas: vec![presets::NORMAL, presets::HIGH],
        bounds: LayoutBounds::uniform(h, 1, max).unwrap(),
        enumeration_cap: DEFAULT_ENUMERATION_CAP,
    }
}

fn query_time_suite() -> Result<(), String> {
    let pricing = CloudPricing::default();
    let strat = (arb_stats(3), proptest::collection::vec(1u32..60, 3), 0usize..3, 1u32..10);
    runner(256)
        .run(&strat, |(mut s, cand, lvl, k)| {
            let base = predict_query_time(&s, &layout(&cand), &pricing).unwrap();
            let mut more = cand.clone();
            more[lvl] += k;
            let grown = predict_query_time(&s, &layout(&more), &pricing).unwrap();
            prop_assert!(grown <= base * (1.0 + 1e-12));
            // Without traffic the time is inversely proportional to a uniform scaling.
            s.net_h = vec![0.0; 3];
            let t1 = predict_query_time(&s, &layout(&cand), &pricing).unwrap();
            let doubled: Vec<u32> = cand.iter().map(|v| v * 2).collect();
            let t2 = predict_query_time(&s, &layout(&doubled), &pricing).unwrap();
            prop_assert!((t2 - t1 / 2.0).abs() <= 1e-9 * t1.max(1.0));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn decomposition_suite() -> Result<(), String> {
    let cfg = forecast_config(3, 64);
    let strat = (arb_stats(3), proptest::collection::vec(1u32..60, 3));
    runner(256)
        .run(&strat, |(s, cand)| {
            let cand = layout(&cand);
            let b = profit_breakdown(&s, &cand, &cfg).unwrap();
            let p = predict_profit(&s, &cand, &cfg).unwrap();
            prop_assert_eq!(p, b.profit);
            prop_assert!((b.revenue - (b.revenue_reorg + b.revenue_steady)).abs() <= 1e-9 * b.revenue.max(1.0));
            prop_assert!((b.profit - (b.revenue - b.cost)).abs() <= 1e-9 * b.revenue.max(b.cost).max(1.0));
            prop_assert!((0.0..=cfg.w_p).contains(&b.t_d));
            if b.t_d == 0.0 {
                prop_assert_eq!(b.revenue_reorg, 0.0);
            }
            if cand.get(0) == s.l_h.get(0) {
                prop_assert_eq!(b.t_d, 0.0);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn oracle_suite() -> Result<(), String> {
    // Heights 2 or 3 with up to 12 containers per level: at most 1728 candidates.
    let strat = (2usize..=3).prop_flat_map(|h| {
        (
            proptest::collection::vec(1.0f64..80.0, 2),
            proptest::collection::vec(50.0f64..3e3, h),
            proptest::collection::vec(0.0f64..5e8, h),
            0.5f64..8.0,
            proptest::collection::vec(1u32..=12, h),
        )
    });
    runner(20)
        .run(&strat, |(q, cpu, mut net, conc, l)| {
            let h = cpu.len();
            net[0] = 0.0;
            let stats = WindowStats {
                num_q: q.iter().sum(),
                q_h: q,
                cpu_h: cpu,
                net_h: net,
                conc,
                l_h: ContainerLayout::new(l).unwrap(),
                w_h: 600.0,
            };
            let cfg = forecast_config(h, 12);
            let best = enumerate_optimal(&stats, &cfg).unwrap();
            let opt = optimize_layout(&stats, &cfg).unwrap();
            let gap = (best.predicted_profit - opt.predicted_profit) / best.predicted_profit.abs().max(1e-9);
            prop_assert!(
                gap <= 0.02,
                "optimizer {:?} earns {} vs {:?} at {}",
                opt.layout.levels(),
                opt.predicted_profit,
                best.layout.levels(),
                best.predicted_profit
            );
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn changed_members(before: &PartitionRing, after: &PartitionRing) -> Vec<u32> {
    let old = ownership(before);
    let new = ownership(after);
    new.iter()
        .filter(|(id, parts)| old.get(id) != Some(parts))
        .map(|(id, _)| *id)
        .chain(old.keys().filter(|id| !new.contains_key(id)).copied())
        .collect()
}

fn placement_suite() -> Result<(), String> {
    let strat = (
        8u32..200,
        1u32..=3,
        1u32..40,
        2u32..6,
        any::<u64>(),
        proptest::collection::vec(any::<bool>(), 1..12),
    );
    runner(128)
        .run(&strat, |(parts, repl, n, arc, seed, steps)| {
            let mut ring = build_ring(parts, repl, n, arc, seed).unwrap();
            let twin = build_ring(parts, repl, n, arc, seed).unwrap();
            prop_assert_eq!(&ring, &twin);
            for grow in steps {
                let before = ring.clone();
                if grow || ring.len() == 1 {
                    ring.insert_next().unwrap();
                } else {
                    ring.remove_lightest().unwrap();
                }
                let owned = ownership(&ring);
                // Conservation.
                let union: BTreeSet<u32> = owned.values().flatten().copied().collect();
                prop_assert_eq!(union.len() as u32, parts);
                // Dedup, and no partition on more than `repl` containers.
                let mut holders: BTreeMap<u32, u32> = BTreeMap::new();
                for set in owned.values() {
                    let distinct: BTreeSet<u32> = set.iter().copied().collect();
                    prop_assert_eq!(distinct.len(), set.len());
                    for p in set {
                        *holders.entry(*p).or_default() += 1;
                    }
                }
                prop_assert!(holders.values().all(|&c| c <= repl));
                // Locality: only an Arc+1 neighbourhood changes, contiguous on the ring.
                let changed = changed_members(&before, &ring);
                prop_assert!(changed.len() <= arc as usize + 1);
                let order: Vec<u32> = ring.container_ids().collect();
                let pos: Vec<usize> = changed.iter().filter_map(|id| order.iter().position(|o| o == id)).collect();
                if pos.len() > 1 {
                    let m = order.len();
                    let spread = pos
                        .iter()
                        .map(|&p| pos.iter().map(|&q| (q + m - p) % m).max().unwrap())
                        .min()
                        .unwrap();
                    prop_assert!(spread <= arc as usize);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn scheduler_suite() -> Result<(), String> {
    let strat = (
        proptest::collection::vec(1u32..12, 3),
        proptest::collection::vec((1u32..20, 1u32..5), 1..15),
        any::<bool>(),
    );
    runner(256)
        .run(&strat, |(levels, queries, identity)| {
            let policy = if identity { RankPolicy::Identity } else { RankPolicy::Compress };
            let mut containers = Vec::new();
            for (lvl, &count) in levels.iter().enumerate() {
                for _ in 0..count {
                    containers.push(ContainerState::new(containers.len() as u32, lvl, 300.0));
                }
            }
            for (q, &(leaves, mid)) in queries.iter().enumerate() {
                let mid = mid.min(leaves);
                let plan = TreePlanProfile::uniform(vec![leaves, mid, 1], 1.0).unwrap();
                let a = schedule(q as u64, &plan, &mut containers, 3, policy).unwrap();
                prop_assert_eq!(a.operator_count() as u32, plan.total_ops());
                for lvl in &a.levels {
                    prop_assert_eq!(lvl.layout_level, lvl.plan_level.min(2));
                    for id in &lvl.containers {
                        prop_assert_eq!(containers[*id as usize].level, lvl.layout_level);
                    }
                }
                for lvl in 0..3 {
                    let loads: Vec<u32> = containers.iter().filter(|c| c.level == lvl).map(|c| c.load).collect();
                    let spread = loads.iter().max().unwrap() - loads.iter().min().unwrap();
                    prop_assert!(spread <= 1, "level {} loads {:?}", lvl, loads);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn arb_sim() -> impl Strategy<Value = SimConfig> {
    (
        proptest::collection::vec(1u32..6, 2..=3),
        2.0f64..40.0,
        1u32..5,
        any::<bool>(),
        any::<u64>(),
        prop_oneof![Just(300.0), Just(600.0), Just(150.0)],
    )
        .prop_map(|(init, lambda, epochs, elastic, seed, quantum)| {
            let h = init.len();
            let mut counts = vec![1u32; h];
            counts[0] = 16;
            if h == 3 {
                counts[1] = 4;
            }
            let plan = TreePlanProfile::new(counts, vec![0.5; h], vec![1e4; h]).unwrap();
            let horizon = 300.0 * f64::from(epochs);
            SimConfig {
                horizon,
                pricing: CloudPricing::new(quantum, 0.41, 1.875e7).unwrap(),
                initial_layout: ContainerLayout::new(init).unwrap(),
                bounds: LayoutBounds::uniform(h, 1, 8).unwrap(),
                classes: vec![QueryClass::new("q", presets::NORMAL, plan).unwrap()],
                workload: Workload {
                    phases: vec![Phase {
                        duration: horizon,
                        class: "q".into(),
                        lambda,
                    }],
                    ..Default::default()
                },
                seed,
                mode: if elastic { Mode::Elastic } else { Mode::Static },
                placement: sim::PlacementConfig {
                    partitions: 32,
                    replication: 2,
                    ..Default::default()
                },
                ..presets::three_phase_scenario(Mode::Static, presets::static_layout("small").unwrap(), 0)
            }
        })
}

fn check_accounting(cfg: &SimConfig, out: &SimOutput) -> Result<(), TestCaseError> {
    let tol = 1e-6;
    let c = cfg.pricing.quantum_cost;
    let rev: f64 = out.epochs.iter().map(|e| e.revenue).sum();
    let cost: f64 = out.epochs.iter().map(|e| e.cost).sum();
    let prices: f64 = out.queries.iter().map(|q| q.price).sum();
    prop_assert!((rev - out.summary.revenue).abs() < tol);
    prop_assert!((prices - out.summary.revenue).abs() < tol);
    prop_assert!((cost - out.summary.cost).abs() < tol);
    prop_assert!((out.summary.profit - (out.summary.revenue - out.summary.cost)).abs() < tol);
    prop_assert!((out.summary.quanta_leased as f64 * c - out.summary.cost).abs() < tol);
    prop_assert_eq!(out.summary.queries_completed, out.summary.queries_arrived);
    prop_assert_eq!(out.queries.len() as u64, out.summary.queries_completed);
    let per_epoch: u64 = out.epochs.iter().map(|e| u64::from(e.queries_completed)).sum();
    prop_assert_eq!(per_epoch, out.summary.queries_completed);
    for e in &out.epochs {
        prop_assert!((e.profit - (e.revenue - e.cost)).abs() < tol);
        // Whole quanta only.
        let quanta = e.cost / c;
        prop_assert!((quanta - quanta.round()).abs() < 1e-6);
    }
    let sla = cfg.classes[0].sla;
    let last = out.epochs.len() - 1;
    for q in &out.queries {
        prop_assert!((q.price - sla_price(&sla, q.exec_time()).unwrap()).abs() < 1e-9);
        let epoch = ((q.finish / cfg.epoch).ceil() as usize).saturating_sub(1).min(last);
        prop_assert_eq!(q.epoch, epoch);
    }
    // Billing floor: every initial container is paid for until the horizon.
    let floor = f64::from(cfg.initial_layout.total()) * (cfg.horizon / cfg.pricing.quantum).ceil() * c;
    if cfg.mode == Mode::Static {
        prop_assert!(out.summary.cost >= floor - tol);
    } else {
        prop_assert!(out.epochs[0].cost >= f64::from(cfg.initial_layout.total()) * c - tol);
    }
    Ok(())
}

fn billing_suite() -> Result<(), String> {
    runner(48)
        .run(&arb_sim(), |cfg| {
            let out = sim::run(&cfg).unwrap();
            check_accounting(&cfg, &out)
        })
        .map_err(|e| e.to_string())
}

fn determinism_suite() -> Result<(), String> {
    runner(24)
        .run(&arb_sim(), |cfg| {
            let a = serde_json::to_string(&sim::run(&cfg).unwrap()).unwrap();
            let b = serde_json::to_string(&sim::run(&cfg).unwrap()).unwrap();
            prop_assert_eq!(a, b);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- 7

fn arrival_statistics() -> Result<String, String> {
    let mut detail = Vec::new();
    for lambda in [30.0, 60.0] {
        for seed in 1..=5u64 {
            let gaps: Vec<f64> = GapStream::new(lambda, GapDistribution::Poisson, seed)
                .map_err(|e| e.to_string())?
                .take(10_000)
                .collect();
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            let rel = (mean - lambda).abs() / lambda;
            ensure(rel <= 0.05, || format!("lambda {lambda} seed {seed}: mean gap {mean:.3}"))?;
            if seed == 1 {
                detail.push(format!("lambda {lambda}: mean gap {mean:.3} s"));
            }
        }
    }
    Ok(detail.join("; "))
}

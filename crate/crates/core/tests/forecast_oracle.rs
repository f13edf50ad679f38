use elastree::forecast::{enumerate_optimal, optimize_layout, predict_profit, ForecastConfig, WindowStats};
use elastree::model::{CloudPricing, ContainerLayout, LayoutBounds};
use elastree::{presets, Error};
use proptest::prelude::*;

fn layout(v: &[u32]) -> ContainerLayout {
    ContainerLayout::new(v.to_vec()).unwrap()
}

#[test]
fn two_query_fixture_lands_near_four_three() {
    for seed_layout in [[2, 2, 2, 1], [4, 2, 2, 1], [8, 4, 2, 1], [20, 20, 2, 1]] {
        let stats = presets::two_query_stats(layout(&seed_layout));
        let cfg = presets::two_query_forecast(20, 20);
        let opt = optimize_layout(&stats, &cfg).unwrap();
        let best = enumerate_optimal(&stats, &cfg).unwrap();
        for l in [&opt.layout, &best.layout] {
            assert!(l.get(0).abs_diff(4) <= 1 && l.get(1).abs_diff(3) <= 1, "{:?}", l.levels());
            assert_eq!(&l.levels()[2..], &[2, 1]);
        }
        assert!(opt.predicted_profit >= 0.98 * best.predicted_profit);
    }
}

#[test]
fn enumeration_is_exhaustive() {
    let stats = presets::two_query_stats(layout(&[2, 2, 2, 1]));
    let cfg = presets::two_query_forecast(8, 8);
    let best = enumerate_optimal(&stats, &cfg).unwrap();
    for l0 in 1..=8 {
        for l1 in 1..=8 {
            let p = predict_profit(&stats, &layout(&[l0, l1, 2, 1]), &cfg).unwrap();
            assert!(p <= best.predicted_profit);
        }
    }
}

#[test]
fn enumeration_cap_surfaces_as_an_error() {
    let stats = presets::two_query_stats(layout(&[2, 2, 2, 1]));
    let mut cfg = presets::two_query_forecast(3000, 3000);
    assert!(matches!(enumerate_optimal(&stats, &cfg), Err(Error::EnumerationCap { .. })));
    cfg.enumeration_cap = 5_000_000;
    assert!(enumerate_optimal(&stats, &cfg).is_err(), "still above the raised cap");
    // The optimizer itself has no cap.
    assert!(optimize_layout(&stats, &presets::two_query_forecast(3000, 3000)).is_ok());
}

fn config(h: usize, max: u32, quantum_cost: f64) -> ForecastConfig {
    ForecastConfig {
        w_p: 300.0,
        pricing: CloudPricing::new(300.0, quantum_cost, 1.875e7).unwrap(),
        arc: 4,
        data_size: 4e9,
        slas: vec![presets::NORMAL, presets::CRITICAL],
        bounds: LayoutBounds::uniform(h, 1, max).unwrap(),
        enumeration_cap: 1_000_000,
    }
}

fn arb_instance() -> impl Strategy<Value = (WindowStats, ForecastConfig)> {
    (2usize..=3, 0.05f64..2.0).prop_flat_map(|(h, cost)| {
        (
            proptest::collection::vec(0.0f64..60.0, 2),
            proptest::collection::vec(10.0f64..4e3, h),
            proptest::collection::vec(0.0f64..1e9, h),
            0.2f64..10.0,
            proptest::collection::vec(1u32..=15, h),
        )
            .prop_map(move |(q, cpu, mut net, conc, l)| {
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
                (stats, config(h, 15, cost))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn optimizer_stays_within_two_percent_of_enumeration((stats, cfg) in arb_instance()) {
        let best = enumerate_optimal(&stats, &cfg).unwrap();
        let opt = optimize_layout(&stats, &cfg).unwrap();
        prop_assert!(cfg.bounds.contains(&opt.layout));
        prop_assert!(opt.predicted_profit <= best.predicted_profit + 1e-9);
        let slack = 0.02 * best.predicted_profit.abs();
        prop_assert!(
            best.predicted_profit - opt.predicted_profit <= slack + 1e-9,
            "{:?} {} vs {:?} {}", opt.layout.levels(), opt.predicted_profit, best.layout.levels(), best.predicted_profit
        );
    }

    #[test]
    fn optimizer_never_loses_to_staying_put((stats, cfg) in arb_instance()) {
        let opt = optimize_layout(&stats, &cfg).unwrap();
        let stay = predict_profit(&stats, &cfg.bounds.clamp(&stats.l_h), &cfg).unwrap();
        prop_assert!(opt.predicted_profit >= stay - 1e-9);
    }
}

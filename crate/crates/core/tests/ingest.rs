use grounding_core::ingest::{
    bathymetry_lookup, flow_rate_from_levels, ground_reaction_displacement, sum_tank_flows, BathymetryGrid,
    FlowEstimate, FlowQuality, IngestError, LevelSeries, PiecewiseVolumeCurve,
};
use proptest::prelude::*;

#[test]
fn quadratic_curve_matches_the_analytic_rate() {
    // V = 500 h², h = 2 m at the middle sample, ḣ = 0.05 m/s, Δt = 4 s
    let s = LevelSeries::new("c1", vec![(0.0, 1.8), (4.0, 2.0), (8.0, 2.2)]).unwrap();
    let curve = |h: f64| 500.0 * h * h;
    let q = flow_rate_from_levels(&s, &curve, 60.0, FlowQuality::Good).unwrap();
    // mean of dV/dt = 1000·h·ḣ over h = 1.8, 2.0, 2.2
    assert!((q.rate - 100.0).abs() < 1e-9, "{}", q.rate);
    let s = LevelSeries::new("c1", vec![(-4.0, 1.8), (0.0, 2.0), (4.0, 2.2), (8.0, 2.4)]).unwrap();
    let q = flow_rate_from_levels(&s, &curve, 4.0, FlowQuality::Good).unwrap_err();
    assert_eq!(q, IngestError::InsufficientSamples { needed: 3, found: 2 });
}

#[test]
fn decreasing_curve_is_rejected() {
    let s = LevelSeries::new("c1", vec![(0.0, 1.0), (2.0, 1.2), (4.0, 1.4)]).unwrap();
    let err = flow_rate_from_levels(&s, &|h: f64| -h, 60.0, FlowQuality::Poor).unwrap_err();
    assert!(matches!(err, IngestError::NonMonotoneVolumeCurve { .. }));
}

#[test]
fn table_curve_is_exact_on_one_segment() {
    let curve = PiecewiseVolumeCurve::new(vec![(0.0, 0.0), (30.0, 30_000.0)]).unwrap();
    let s = LevelSeries::new("c2", (0..25).map(|i| (2.5 * i as f64, 5.0 + 0.1 * i as f64)).collect()).unwrap();
    let q = flow_rate_from_levels(&s, &curve, 60.0, FlowQuality::Good).unwrap();
    assert!((q.rate - 40.0).abs() < 1e-9);
}

fn estimate(rate: f64, poor: bool) -> FlowEstimate {
    FlowEstimate {
        rate,
        sd: 0.0,
        samples: 3,
        quality: if poor { FlowQuality::Poor } else { FlowQuality::Good },
    }
}

proptest! {
    #[test]
    fn affine_curves_are_exact(
        slope in 1.0f64..5000.0,
        offset in 0.0f64..1e4,
        h0 in 0.0f64..20.0,
        rate in -0.2f64..0.2,
        dt in 1.0f64..10.0,
        n in 3usize..40,
    ) {
        let s = LevelSeries::new("t", (0..n).map(|i| (i as f64 * dt, h0 + rate * dt * i as f64)).collect()).unwrap();
        let curve = move |h: f64| offset + slope * h;
        let q = flow_rate_from_levels(&s, &curve, 1e6, FlowQuality::Good).unwrap();
        prop_assert!((q.rate - slope * rate).abs() <= 1e-9 * (1.0 + (slope * rate).abs()));
    }

    #[test]
    fn tank_sum_is_order_free(rates in prop::collection::vec((0.0f64..2000.0, any::<bool>()), 0..8)) {
        let forward: Vec<FlowEstimate> = rates.iter().map(|&(r, p)| estimate(r, p)).collect();
        let mut backward = forward.clone();
        backward.reverse();
        let a = sum_tank_flows(&forward);
        let b = sum_tank_flows(&backward);
        prop_assert!((a.rate - b.rate).abs() <= 1e-9 * (1.0 + a.rate));
        prop_assert_eq!(a.quality, b.quality);
        let (left, right) = forward.split_at(forward.len() / 2);
        let nested = sum_tank_flows(&[estimate(sum_tank_flows(left).rate, false), estimate(sum_tank_flows(right).rate, false)]);
        prop_assert!((nested.rate - a.rate).abs() <= 1e-9 * (1.0 + a.rate));
    }

    #[test]
    fn reaction_adds_back_exactly(floating in 1e4f64..4e5, reaction in 0.0f64..5e4) {
        let damaged = floating + reaction;
        let r = ground_reaction_displacement(damaged, floating).unwrap();
        prop_assert_eq!(r + floating, damaged);
    }

    #[test]
    fn bathymetry_is_continuous(lat in 0.0f64..2.0, lon in 0.0f64..3.0, eps in 1e-9f64..1e-6) {
        let g = BathymetryGrid::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 1.0, 2.0, 3.0],
            vec![10.0, 12.0, 9.0, 20.0, 14.0, 18.0, 11.0, 16.0, 13.0, 15.0, 17.0, 19.0],
        )
        .unwrap();
        let here = bathymetry_lookup(&g, lat, lon).unwrap();
        let lat2 = (lat + eps).min(2.0);
        let lon2 = (lon + eps).min(3.0);
        let there = bathymetry_lookup(&g, lat2, lon2).unwrap();
        // the two partial slopes of this grid sum to under 20 m per degree
        prop_assert!((here - there).abs() <= 20.0 * eps + 1e-12);
    }
}

#[test]
fn bathymetry_cell_centre_and_midpoint() {
    let g = BathymetryGrid::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![14.0, 18.0, 14.0, 18.0]).unwrap();
    assert_eq!(bathymetry_lookup(&g, 1.0, 1.0).unwrap(), 18.0);
    assert_eq!(bathymetry_lookup(&g, 0.5, 0.5).unwrap(), 16.0);
    let flat = BathymetryGrid::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![12.0; 4]).unwrap();
    assert_eq!(bathymetry_lookup(&flat, 0.5, 0.0).unwrap(), 12.0);
    assert!(BathymetryGrid::new(vec![0.0], vec![0.0], vec![f64::NAN]).is_err());
}

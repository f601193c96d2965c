use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use setext::ext_engine::{estimate_ext, estimate_ext_stretched, ExtensionEstimate, SetFunction, Tolerances};
use setext::metric_core::FiniteSet;
use setext::properties::{
    certify_d_increasing, check_d_continuous, check_d_increasing, check_increasing, DContParams, DIncParams, Direction,
};
use setext::set_functions::{
    arrange_blocks, arrange_iso_sequence, d_increasing_delta, sf_darboux_upper, sf_diam, sf_measure_integral, sf_midpoint,
    sf_polygon_length, sf_riemann, sf_series_harmonic, Curve, IsoSetSpec, LayerOracle, MeasureOracle, MeasureVariant,
    RealFn, SeriesSpec, SupOracle,
};
use setext::spaces::{random_subset, EdsRule, SamplerSpec, Schedule, Sequence, SpaceDescriptor, Strategy as Sampler};

const TOL: f64 = 1e-6;

fn tol() -> Tolerances {
    Tolerances::default().with_tol(TOL)
}

fn converged(e: &ExtensionEstimate) -> f64 {
    e.status.value().unwrap_or_else(|| panic!("{} after {} levels", e.status.name(), e.levels()))
}

/// Spread of the values that made up the stabilization window.
fn window_spread(e: &ExtensionEstimate) -> f64 {
    let w = e.tol.window.min(e.trace.len());
    let tail = &e.trace[e.trace.len() - w..];
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.s_value), hi.max(r.s_value)));
    hi - lo
}

fn riemann_sq() -> SetFunction {
    sf_riemann(RealFn::Square, 0.0, 1.0)
}

struct Scenario {
    s: SetFunction,
    space: SpaceDescriptor,
    specs: Vec<SamplerSpec>,
}

fn scenarios() -> Vec<Scenario> {
    let unit = SpaceDescriptor::unit_interval();
    let g = |a, b| SamplerSpec::grid(Schedule::geometric(a, b));
    vec![
        Scenario {
            s: riemann_sq(),
            space: unit.clone(),
            specs: vec![
                g(8, 2),
                g(3, 3),
                SamplerSpec::new(Sampler::OffsetGrid { theta: 0.3 }, Schedule::geometric(8, 2)),
                SamplerSpec::eds(EdsRule::Midpoint, Schedule::geometric(8, 2)),
            ],
        },
        Scenario {
            s: sf_polygon_length(Curve::QuarterCircle),
            space: unit.clone(),
            specs: vec![g(8, 2), g(5, 3), SamplerSpec::new(Sampler::OffsetGrid { theta: 0.5 }, Schedule::geometric(8, 2))],
        },
        Scenario {
            s: sf_series_harmonic(&SeriesSpec::new(Sequence::Geometric { scale: 1.0, ratio: 0.5 })),
            space: SpaceDescriptor::harmonic(),
            specs: vec![SamplerSpec::prefix(Schedule::linear(1, 1)), SamplerSpec::prefix(Schedule::linear(3, 2))],
        },
        Scenario { s: sf_midpoint(), space: SpaceDescriptor::dyadic(), specs: vec![
            SamplerSpec::prefix(Schedule::linear(1, 1)),
            SamplerSpec::stretched_dyadic(Schedule::linear(2, 3)),
        ] },
    ]
}

#[test]
fn limits_do_not_depend_on_the_sampler() {
    for sc in scenarios() {
        let runs: Vec<ExtensionEstimate> = sc.specs.iter().map(|spec| estimate_ext(&sc.s, &sc.space, spec, &tol()).unwrap()).collect();
        for a in &runs {
            for b in &runs {
                let bound = 2.0 * TOL + window_spread(a) + window_spread(b);
                let (va, vb) = (converged(a), converged(b));
                assert!((va - vb).abs() <= bound, "{}: {va} vs {vb}", sc.s.name);
            }
        }
    }
}

#[test]
fn ext_implies_ext_str() {
    let unit = SpaceDescriptor::unit_interval();
    // Uniform grids are stretched: spacing h, gap h/2.
    let grid = SamplerSpec::grid(Schedule::geometric(8, 2));
    for s in [riemann_sq(), sf_polygon_length(Curve::Parabola), sf_diam()] {
        let a = estimate_ext(&s, &unit, &grid, &tol()).unwrap();
        let b = estimate_ext_stretched(&s, &unit, &grid, &tol()).unwrap();
        assert!((converged(&a) - converged(&b)).abs() <= 2.0 * TOL, "{}", s.name);
    }
    let dy = SpaceDescriptor::dyadic();
    let geo = sf_series_harmonic(&SeriesSpec::new(Sequence::Geometric { scale: 1.0, ratio: 0.5 }));
    let plain = SetFunction::new("midpoint-dyadic", geo.domain, |k| Ok(0.5 * (k.min_x() + k.max_x())));
    let a = estimate_ext(&plain, &dy, &SamplerSpec::prefix(Schedule::linear(1, 1)), &tol()).unwrap();
    let b = estimate_ext_stretched(&plain, &dy, &SamplerSpec::stretched_dyadic(Schedule::linear(1, 1)), &tol()).unwrap();
    assert!((converged(&a) - converged(&b)).abs() <= 2.0 * TOL);
}

#[test]
fn traces_are_ordered_and_bounded_after_convergence() {
    for sc in scenarios() {
        for spec in &sc.specs {
            let e = estimate_ext(&sc.s, &sc.space, spec, &tol()).unwrap();
            let v = converged(&e);
            for w in e.trace.windows(2) {
                assert!(w[0].level < w[1].level);
                assert!(w[1].gap_hi <= w[0].gap_hi * (1.0 + 1e-12));
            }
            let start = e.trace.len() - e.tol.window;
            for r in &e.trace[start..] {
                assert!((r.s_value - v).abs() <= TOL, "{}: {} far from {v}", sc.s.name, r.s_value);
            }
        }
    }
}

#[test]
fn uniformly_continuous_functions_converge() {
    let spaces = [
        (SpaceDescriptor::unit_interval(), SamplerSpec::grid(Schedule::linear(1, 1))),
        (SpaceDescriptor::harmonic(), SamplerSpec::prefix(Schedule::geometric(2, 2))),
        (SpaceDescriptor::dyadic(), SamplerSpec::stretched_dyadic(Schedule::linear(1, 1))),
    ];
    for (space, spec) in &spaces {
        for s in [sf_midpoint(), sf_diam()] {
            let e = estimate_ext(&s, space, spec, &tol()).unwrap();
            assert!(e.status.is_converged(), "{} on {}: {}", s.name, space.kind_name(), e.status.name());
        }
    }
}

#[test]
fn darboux_converges_to_its_running_inf() {
    let t = Tolerances::default().with_tol(1e-4);
    let s = sf_darboux_upper(RealFn::Square, 0.0, 1.0, SupOracle::PiecewiseMonotone);
    // geometric(8, 2) grids are nested, so each level refines the last.
    let e = estimate_ext(&s, &SpaceDescriptor::unit_interval(), &SamplerSpec::grid(Schedule::geometric(8, 2)), &t).unwrap();
    for w in e.trace.windows(2) {
        assert!(w[1].s_value <= w[0].s_value + 1e-15);
    }
    let inf = e.trace.iter().map(|r| r.s_value).fold(f64::INFINITY, f64::min);
    let v = converged(&e);
    assert!((v - inf).abs() <= 1e-4, "{v} vs {inf}");
    assert!((v - 1.0 / 3.0).abs() <= 1e-3);
}

#[test]
fn darboux_indicator_is_d_decreasing_not_d_increasing() {
    let s = sf_darboux_upper(RealFn::IndicatorAt(0.5), 0.0, 1.0, SupOracle::PiecewiseMonotone);
    let space = SpaceDescriptor::open_interval(0.0, 1.0);
    let dec = DIncParams { direction: Direction::Decreasing, seed: 5, ..DIncParams::default() };
    assert!(check_d_increasing(&s, &space, &dec).holds_on_samples());
    let half = FiniteSet::from_reals(&[0.5]);
    let inc = DIncParams { fixed_k: vec![half], k_samples: 0, seed: 5, ..DIncParams::default() };
    let r = check_d_increasing(&s, &space, &inc);
    let c = r.counterexample().expect("upper sums are not d-increasing");
    assert!(c.value_k - c.value_l > 0.1);
}

#[test]
fn increasing_and_d_continuous_implies_d_increasing() {
    let unit = SpaceDescriptor::unit_interval();
    let layer = sf_measure_integral(Arc::new(LayerOracle::lebesgue_identity()), 2.0, MeasureVariant::Nonneg).unwrap();
    let cases = [
        (sf_diam(), unit.clone()),
        (sf_polygon_length(Curve::QuarterCircle), unit.clone()),
        (layer, MeasureVariant::Nonneg.space(2.0)),
    ];
    for (s, space) in &cases {
        assert!(check_increasing(s, space, 64, 1).holds_on_samples(), "{}", s.name);
        for n in [1, 2, 4] {
            let r = check_d_continuous(s, space, &DContParams { seed: 2, ..DContParams::new(n, 1e-3) });
            assert!(r.holds_on_samples(), "{} n={n}: {:?}", s.name, r.verdict);
        }
        let r = check_d_increasing(s, space, &DIncParams { seed: 9, ..DIncParams::default() });
        assert!(r.holds_on_samples(), "{}: {:?}", s.name, r.verdict);
    }
}

#[test]
fn riemann_parity_sum_is_d_continuous() {
    let space = SpaceDescriptor::open_interval(0.0, 1.0);
    for f in [RealFn::Square, RealFn::SinPi, RealFn::Tent] {
        let s = sf_riemann(f, 0.0, 1.0);
        for n in 1..=5 {
            let r = check_d_continuous(&s, &space, &DContParams { seed: n as u64, ..DContParams::new(n, 1e-3) });
            assert!(r.holds_on_samples(), "{} n={n}: {:?}", s.name, r.verdict);
        }
    }
}

fn layer_cases() -> Vec<(Arc<dyn MeasureOracle>, f64, MeasureVariant, bool)> {
    vec![
        (Arc::new(LayerOracle::lebesgue_identity()), 2.0, MeasureVariant::Nonneg, true),
        (Arc::new(LayerOracle::Power { p: 3.0 }), 1.5, MeasureVariant::Nonneg, true),
        (Arc::new(LayerOracle::Affine { slope: 2.0, intercept: -1.0 }), 2.0, MeasureVariant::Signed, true),
        // The half-line recipe needs finite total mass; f = x^-1/2 is unbounded.
        (Arc::new(LayerOracle::InvSqrt), 0.0, MeasureVariant::HalfLine, false),
    ]
}

#[test]
fn d_increasing_certificate_from_the_recipe() {
    for (i, (oracle, m, variant, strict)) in layer_cases().into_iter().enumerate() {
        let s = sf_measure_integral(oracle.clone(), m, variant).unwrap();
        let space = variant.space(m);
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        for trial in 0..6u64 {
            let k = match variant {
                MeasureVariant::HalfLine => {
                    FiniteSet::from_reals(&(0..rng.gen_range(1..5)).map(|_| rng.gen_range(0.05..6.0)).collect::<Vec<_>>())
                }
                _ => {
                    let n = rng.gen_range(1..6);
                    random_subset(&space, &mut rng, n).unwrap()
                }
            };
            // A half-line draw at delta covers (0, 1/delta) with spacing
            // delta, so eps = 1e-3 there would need millions of points.
            let eps_list: &[f64] = if variant == MeasureVariant::HalfLine { &[5e-2, 1e-2] } else { &[1e-2, 1e-3] };
            for &eps in eps_list {
                let delta = d_increasing_delta(oracle.as_ref(), &k, eps, m, variant);
                let r = certify_d_increasing(&s, &space, &k, eps, delta, 100, trial, strict);
                assert!(r.holds_on_samples(), "{} K={:?} eps={eps}: {:?}", s.name, k.xs(), r.verdict);
                assert_eq!(r.trials, 100);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_combinations(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let unit = SpaceDescriptor::unit_interval();
        let grid = SamplerSpec::grid(Schedule::geometric(8, 2));
        let (s1, s2) = (riemann_sq(), sf_riemann(RealFn::SinPi, 0.0, 1.0));
        let e1 = estimate_ext(&s1, &unit, &grid, &tol()).unwrap();
        let e2 = estimate_ext(&s2, &unit, &grid, &tol()).unwrap();
        let e = estimate_ext(&s1.combine(a, &s2, b), &unit, &grid, &tol()).unwrap();
        let want = a * converged(&e1) + b * converged(&e2);
        // Each estimate carries its own window error, scaled by the weights.
        let bound = 3.0 * TOL * (a.abs() + b.abs()).max(1.0);
        prop_assert!((converged(&e) - want).abs() <= bound, "{} vs {want}", converged(&e));
    }

    #[test]
    fn layer_sum_is_increasing(seed in 0u64..100_000, ksize in 0usize..6, extra in 1usize..6) {
        for (oracle, m, variant, _) in layer_cases().into_iter().filter(|c| c.2 == MeasureVariant::Nonneg) {
            let s = sf_measure_integral(oracle, m, variant).unwrap();
            let space = variant.space(m);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_subset(&space, &mut rng, ksize).unwrap();
            let l = k.union(&random_subset(&space, &mut rng, extra).unwrap());
            prop_assert!(s.eval(&k).unwrap() <= s.eval(&l).unwrap() + 1e-12);
        }
    }
}

fn prefix_averages(xs: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    xs.iter().enumerate().map(|(i, x)| {
        sum += x;
        sum / (i + 1) as f64
    }).collect()
}

fn blocks_strategy() -> impl Strategy<Value = (f64, Vec<Vec<f64>>)> {
    (0.1f64..10.0).prop_flat_map(|m| {
        let v = prop::collection::vec(-0.999f64..0.999, 1..25).prop_map(move |b| b.into_iter().map(|x| x * m).collect::<Vec<_>>());
        (Just(m), prop::collection::vec(v, 1..8))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn arranged_prefix_averages((m, blocks) in blocks_strategy()) {
        let out = arrange_blocks(&blocks);
        prop_assert_eq!(out.len(), blocks.iter().map(Vec::len).sum::<usize>());
        let avg = prefix_averages(&out);
        // Consecutive averages move by less than 2M/(n+1).
        for n in 1..avg.len() {
            prop_assert!((avg[n - 1] - avg[n]).abs() < 2.0 * m / (n + 1) as f64);
        }
        // While block j is appended the averages stay inside its window.
        let mut g = blocks[0].len();
        let mut sum: f64 = blocks[0].iter().sum();
        for block in &blocks[1..] {
            let a = sum / g as f64;
            sum += block.iter().sum::<f64>();
            let b = sum / (g + block.len()) as f64;
            let r = 2.0 * m / (g + 1) as f64;
            for &v in &avg[g..g + block.len()] {
                prop_assert!(v > a.min(b) - r && v < a.max(b) + r, "{v} outside ({a}, {b}) +- {r}");
            }
            g += block.len();
        }
    }
}

#[test]
fn two_block_window() {
    // A = 0 after the first block, B = 1 after the second, M = 1.
    let blocks = vec![vec![0.0; 4], vec![0.99, 0.99, 0.99, 0.99, 0.99, 0.99, 0.99, 0.99, 0.99, 0.99].into_iter().chain([0.99; 30]).collect()];
    let avg = prefix_averages(&arrange_blocks(&blocks));
    let r = 2.0 / 5.0;
    assert!(avg[4..].iter().all(|&v| v > -r && v < 1.0 + r));
}

#[test]
fn iso_sequence_steps() {
    for spec in [IsoSetSpec::harmonic_with_zero(), IsoSetSpec::two_sided_harmonic()] {
        let xs = arrange_iso_sequence(&spec, 2000).unwrap();
        let avg = prefix_averages(&xs);
        for n in 1..avg.len() {
            assert!((avg[n - 1] - avg[n]).abs() < 2.0 * spec.bound / (n + 1) as f64);
        }
    }
}

//! Scenarios shared by the structural suite and the acceptance runner.
#![allow(dead_code)]

use std::sync::Arc;

use setext::ext_engine::{cross_check_within, estimate_ext, ExtensionEstimate, SetFunction, Tolerances};
use setext::metric_core::FiniteSet;
use setext::properties::{certify_left_continuity, check_increasing, check_l_continuous, LContParams, Side};
use setext::set_functions::{
    left_continuity_delta, sf_diam, sf_finite_mean, sf_measure_integral, sf_midpoint, sf_polygon_length, sf_riemann, Curve,
    LayerOracle, MeasureOracle, MeasureVariant, RealFn,
};
use setext::spaces::{SamplerSpec, Schedule, Segment, SpaceDescriptor, Strategy};

/// Outcome of one scenario.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, ok: bool, detail: impl Into<String>) -> Self {
        Check { name, ok, detail: detail.into() }
    }
}

pub const TOL: f64 = 1e-6;

pub fn tol() -> Tolerances {
    Tolerances::default().with_tol(TOL)
}

pub fn grid() -> SamplerSpec {
    SamplerSpec::grid(Schedule::geometric(8, 2))
}

pub fn offset_grid() -> SamplerSpec {
    SamplerSpec::new(Strategy::OffsetGrid { theta: 0.5 }, Schedule::geometric(8, 2))
}

pub fn value(e: &ExtensionEstimate) -> Result<f64, String> {
    e.status.value().ok_or_else(|| format!("{} after {} levels", e.status.name(), e.levels()))
}

pub fn ext(s: &SetFunction, space: &SpaceDescriptor, spec: &SamplerSpec) -> Result<f64, String> {
    estimate_ext(s, space, spec, &tol()).map_err(|e| e.to_string()).and_then(|e| value(&e))
}

fn compare(name: &'static str, got: Result<f64, String>, want: Result<f64, String>) -> Check {
    compare_at(name, got, want, TOL)
}

fn compare_at(name: &'static str, got: Result<f64, String>, want: Result<f64, String>, tol: f64) -> Check {
    match (got, want) {
        (Ok(g), Ok(w)) => Check::new(name, (g - w).abs() <= 3.0 * tol, format!("{g:.9} vs {w:.9}")),
        (g, w) => Check::new(name, false, format!("{g:?} vs {w:?}")),
    }
}

/// Points of `k` inside `[a, b]`.
fn part(k: &FiniteSet, a: f64, b: f64) -> FiniteSet {
    k.filter(|p| (a..=b).contains(&p.x))
}

/// Restricts `s` to `[a, b]`: `K` is cut down before evaluation.
fn restricted(s: SetFunction, a: f64, b: f64) -> SetFunction {
    SetFunction::new(format!("{}|[{a},{b}]", s.name), s.domain, move |k| s.eval(&part(k, a, b)))
}

fn riemann(f: RealFn) -> SetFunction {
    sf_riemann(f, 0.0, 1.0)
}

pub fn linearity() -> Check {
    let unit = SpaceDescriptor::unit_interval();
    let (s1, s2) = (riemann(RealFn::Square), riemann(RealFn::SinPi));
    let combo = s1.combine(2.0, &s2, -3.0);
    let want = ext(&s1, &unit, &grid()).and_then(|a| ext(&s2, &unit, &grid()).map(|b| 2.0 * a - 3.0 * b));
    compare("linearity", ext(&combo, &unit, &grid()), want)
}

/// An increasing functional converges to the running sup of its trace.
pub fn ext_is_sup() -> Check {
    let unit = SpaceDescriptor::unit_interval();
    let s = sf_polygon_length(Curve::QuarterCircle);
    let inc = check_increasing(&s, &unit, 64, 3);
    if !inc.holds_on_samples() {
        return Check::new("ext = sup", false, format!("not increasing on samples: {:?}", inc.verdict));
    }
    let e = match estimate_ext(&s, &unit, &grid(), &tol()) {
        Ok(e) => e,
        Err(e) => return Check::new("ext = sup", false, e.to_string()),
    };
    let v = match value(&e) {
        Ok(v) => v,
        Err(m) => return Check::new("ext = sup", false, m),
    };
    let sup = e.trace.iter().map(|r| r.s_value).fold(f64::NEG_INFINITY, f64::max);
    let below = e.trace.iter().all(|r| v >= r.s_value - TOL);
    Check::new("ext = sup", below && (v - sup).abs() <= TOL, format!("ext {v:.9}, running sup {sup:.9}"))
}

pub fn dense_subspace() -> Check {
    let unit = SpaceDescriptor::unit_interval();
    let rationals = SpaceDescriptor::Interval(Segment::closed(0.0, 1.0).rationals());
    let mut details = Vec::new();
    let mut ok = true;
    for s in [sf_midpoint(), sf_diam(), riemann(RealFn::Square)] {
        let c = compare("dense subspace", ext(&s, &rationals, &grid()), ext(&s, &unit, &offset_grid()));
        ok &= c.ok;
        details.push(format!("{}: {}", s.name, c.detail));
    }
    Check::new("dense subspace", ok, details.join(", "))
}

/// `I = [0,1] u [2,3]`, `s(K) = s0(K n [0,1]) * s1(K n [2,3])`.
pub fn separated_union() -> Check {
    let union = SpaceDescriptor::Union(vec![Segment::closed(0.0, 1.0), Segment::closed(2.0, 3.0)]);
    let s0 = restricted(sf_riemann(RealFn::Square, 0.0, 1.0), 0.0, 1.0);
    let s1 = restricted(sf_riemann(RealFn::Identity, 2.0, 3.0), 2.0, 3.0);
    let s = s0.map2(&s1, "product-of-parts", |a, b| a * b);
    let a0 = ext(&s0, &SpaceDescriptor::unit_interval(), &grid());
    let a1 = ext(&s1, &SpaceDescriptor::interval(2.0, 3.0), &grid());
    compare("separated union", ext(&s, &union, &grid()), a0.and_then(|a| a1.map(|b| a * b)))
}

/// `J = (1, 2]` is null in `[0, 2]` for a functional that only sees `[0, 1]`.
pub fn null_subspace() -> Check {
    let s = restricted(riemann(RealFn::Square), 0.0, 1.0);
    let null_ok = [1.01, 1.25, 2.0]
        .iter()
        .all(|&x| s.eval(&FiniteSet::from_reals(&[0.3, x])).ok() == s.eval(&FiniteSet::from_reals(&[0.3])).ok());
    let c = compare("null subspace", ext(&s, &SpaceDescriptor::interval(0.0, 1.0), &offset_grid()), ext(&s, &SpaceDescriptor::interval(0.0, 2.0), &grid()));
    Check::new("null subspace", null_ok && c.ok, c.detail)
}

/// `s_j = s_i o f` with `f(x) = x^2` from `[0,1]` onto `[0,1]`.
pub fn pullback() -> Check {
    let unit = SpaceDescriptor::unit_interval();
    let mut details = Vec::new();
    let mut ok = true;
    for si in [sf_midpoint(), riemann(RealFn::Identity)] {
        let inner = si.clone();
        let sj = SetFunction::new(format!("{}∘x^2", si.name), si.domain, move |k| {
            inner.eval(&FiniteSet::from_reals(&k.iter().map(|p| p.x * p.x).collect::<Vec<_>>()))
        });
        let c = compare("pullback", ext(&sj, &unit, &grid()), ext(&si, &unit, &grid()));
        ok &= c.ok;
        details.push(format!("{}: {}", si.name, c.detail));
    }
    Check::new("uniform-continuity pullback", ok, details.join(", "))
}

fn projection(k: &FiniteSet, second: bool) -> FiniteSet {
    FiniteSet::from_reals(&k.iter().map(|p| if second { p.y } else { p.x }).collect::<Vec<_>>())
}

/// `[0,1] x [0,1]`, `s(K) = s1(pi_1 K) + s2(pi_2 K)`. Product grids have
/// `n^2` points, so the Riemann pair runs at a coarser tolerance.
pub const PRODUCT_TOL: f64 = 1e-4;

pub fn product() -> Check {
    let unit = SpaceDescriptor::unit_interval();
    let square = SpaceDescriptor::product(unit.clone(), unit.clone());
    let mut details = Vec::new();
    let mut ok = true;
    let pairs = [(sf_midpoint(), sf_midpoint()), (riemann(RealFn::Square), riemann(RealFn::Identity))];
    for (s1, s2) in pairs {
        let (f1, f2) = (s1.clone(), s2.clone());
        let s = SetFunction::new("sum-of-projections", s1.domain, move |k| {
            Ok(f1.eval(&projection(k, false))? + f2.eval(&projection(k, true))?)
        });
        let t = Tolerances::default().with_tol(PRODUCT_TOL);
        let at = |s: &SetFunction, sp: &SpaceDescriptor| {
            estimate_ext(s, sp, &grid(), &t).map_err(|e| e.to_string()).and_then(|e| value(&e))
        };
        let want = at(&s1, &unit).and_then(|a| at(&s2, &unit).map(|b| a + b));
        let c = compare_at("product", at(&s, &square), want, PRODUCT_TOL);
        ok &= c.ok;
        details.push(format!("{}+{}: {}", s1.name, s2.name, c.detail));
    }
    Check::new("product composition", ok, details.join(", "))
}

/// `f_n = x + x/n -> x` uniformly; `ext(s_n)` tends to `ext(s)`.
pub fn uniform_limit() -> Check {
    let unit = SpaceDescriptor::unit_interval();
    let limit = match ext(&riemann(RealFn::Identity), &unit, &grid()) {
        Ok(v) => v,
        Err(m) => return Check::new("uniform limit", false, m),
    };
    let mut last = f64::INFINITY;
    for n in [1u64, 4, 16, 64, 256, 1024, 1 << 20] {
        let v = match ext(&riemann(RealFn::ScaledIdentity { n }), &unit, &grid()) {
            Ok(v) => v,
            Err(m) => return Check::new("uniform limit", false, format!("n={n}: {m}")),
        };
        let d = (v - limit).abs();
        // sup |f_n - f| = 1/n bounds the distance of the integrals.
        if d > 1.0 / n as f64 + 3.0 * TOL || d > last + 3.0 * TOL {
            return Check::new("uniform limit", false, format!("n={n}: {v:.9} vs {limit:.9}"));
        }
        last = d;
    }
    Check::new("uniform limit", last <= 3.0 * TOL, format!("|ext(s_n) - ext(s)| = {last:.2e} at n=2^20"))
}

/// Finite average on `(Q n [0,1], [0,1])`: l-continuous, and the
/// outside approximation agrees with the extension over `J`.
pub fn l_continuity_transfer() -> Check {
    let unit = SpaceDescriptor::unit_interval();
    let rationals = SpaceDescriptor::Interval(Segment::closed(0.0, 1.0).rationals());
    let s = sf_finite_mean();
    let report = check_l_continuous(&s, &rationals, &unit, &LContParams::new(1e-3));
    if !report.holds_on_samples() {
        return Check::new("l-continuity transfer", false, format!("{:?}", report.verdict));
    }
    let within = cross_check_within(
        &s,
        &rationals,
        &unit,
        &SamplerSpec::new(Strategy::IrrationalGrid, Schedule::geometric(8, 2)),
        &grid(),
        &tol(),
    )
    .map_err(|e| e.to_string())
    .and_then(|e| value(&e));
    let c = compare("l-continuity transfer", within, ext(&s, &rationals, &grid()));
    Check::new("l-continuity transfer", c.ok, format!("{} ({} comparisons)", c.detail, report.trials))
}

/// Downward shifts below the recipe delta keep the layer sum within eps.
pub fn left_continuity() -> Check {
    let oracle: Arc<dyn MeasureOracle> = Arc::new(LayerOracle::Power { p: 2.0 });
    let m = 2.0;
    let s = match sf_measure_integral(oracle.clone(), m, MeasureVariant::Nonneg) {
        Ok(s) => s,
        Err(e) => return Check::new("left-continuity", false, e.to_string()),
    };
    let space = MeasureVariant::Nonneg.space(m);
    let hs = [vec![0.5], vec![0.2, 0.7, 1.0], vec![0.05, 0.3, 0.31, 0.9, 1.5]];
    for (i, h) in hs.iter().enumerate() {
        let h = FiniteSet::from_reals(h);
        for eps in [1e-2, 1e-3] {
            let delta = left_continuity_delta(oracle.as_ref(), &h, eps, m);
            let r = certify_left_continuity(&s, &space, &h, eps, delta, 200, i as u64, Side::Downward);
            if !r.holds_on_samples() {
                return Check::new("left-continuity", false, format!("H={:?} eps={eps}: {:?}", h.xs(), r.verdict));
            }
        }
    }
    Check::new("left-continuity", true, "downward shifts within eps for 3 sets, eps in {1e-2, 1e-3}")
}

/// The upward variant fails for `f = 1` except `f(1) = 2`.
pub fn upward_counterexample() -> Check {
    let oracle: Arc<dyn MeasureOracle> = Arc::new(LayerOracle::OneExceptAtOne);
    let m = 3.0;
    let s = match sf_measure_integral(oracle, m, MeasureVariant::Nonneg) {
        Ok(s) => s,
        Err(e) => return Check::new("upward counterexample", false, e.to_string()),
    };
    let space = MeasureVariant::Nonneg.space(m);
    let h = FiniteSet::from_reals(&[1.0]);
    let found = (0..8).all(|k| {
        let r = certify_left_continuity(&s, &space, &h, 0.5, 0.5f64.powi(k), 64, 1, Side::Upward);
        r.counterexample().is_some_and(|c| c.value_k == 1.0 && c.value_l == 0.0)
    });
    Check::new("upward counterexample", found, "s({1}) = 1, s({1 + eta}) = 0 at every delta down to 2^-7")
}

/// `s({0.9, 1.1})` for `f = 1` except `f(1) = 2`.
pub fn fixture_09_11() -> f64 {
    let s = sf_measure_integral(Arc::new(LayerOracle::OneExceptAtOne), 3.0, MeasureVariant::Nonneg).unwrap();
    s.eval(&FiniteSet::from_reals(&[0.9, 1.1])).unwrap()
}

pub fn structural_suite() -> Vec<Check> {
    let checks: [fn() -> Check; 11] = [
        linearity,
        ext_is_sup,
        dense_subspace,
        separated_union,
        null_subspace,
        pullback,
        product,
        uniform_limit,
        l_continuity_transfer,
        left_continuity,
        upward_counterexample,
    ];
    checks.iter().map(|f| f()).collect()
}

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ext_engine::{ext_add, ext_mul, DomainClass, SetFunction};
use crate::metric_core::FiniteSet;
use crate::spaces::{Segment, SpaceDescriptor};

/// Access to a measure space through the layers of one function `f`.
pub trait MeasureOracle: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    /// `mu(f^-1([a, b)))` for `a <= b`; may be `+inf`.
    fn layer(&self, a: f64, b: f64) -> f64;
    /// `mu(X)`; may be `+inf`.
    fn total_mass(&self) -> f64;
    /// `int_X f dmu` when known.
    fn integral(&self) -> Option<f64> {
        None
    }
}

/// Built-in oracles.
#[derive(Clone, Debug, PartialEq)]
pub enum LayerOracle {
    /// Lebesgue measure on `[0, 1]`, `f(x) = slope x + intercept`, `slope > 0`.
    Affine { slope: f64, intercept: f64 },
    /// Lebesgue on `[0, 1]`, `f = 1` except `f(1) = 2`.
    OneExceptAtOne,
    /// Lebesgue on `[0, 1]`, `f(x) = x^p`, `p > 0`.
    Power { p: f64 },
    /// Lebesgue on `(0, 1]`, `f(x) = x^(-1/2)`; unbounded with integral 2.
    InvSqrt,
    /// Lebesgue on `[0, inf)`, `f(x) = e^-x`; infinite total mass.
    ExpHalfLine,
    /// Weighted point masses at the listed `f` values.
    Counting { atoms: Vec<(f64, f64)> },
}

impl LayerOracle {
    pub fn lebesgue_identity() -> Self {
        LayerOracle::Affine { slope: 1.0, intercept: 0.0 }
    }
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

impl MeasureOracle for LayerOracle {
    fn name(&self) -> String {
        match self {
            LayerOracle::Affine { slope, intercept } => format!("lebesgue[{slope}x+{intercept}]"),
            LayerOracle::OneExceptAtOne => "lebesgue[1 except f(1)=2]".into(),
            LayerOracle::Power { p } => format!("lebesgue[x^{p}]"),
            LayerOracle::InvSqrt => "lebesgue[x^-1/2]".into(),
            LayerOracle::ExpHalfLine => "lebesgue-halfline[e^-x]".into(),
            LayerOracle::Counting { atoms } => format!("counting[{} atoms]", atoms.len()),
        }
    }

    fn layer(&self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        match self {
            LayerOracle::Affine { slope, intercept } => {
                let lo = clamp01((a - intercept) / slope);
                let hi = clamp01((b - intercept) / slope);
                (hi - lo).max(0.0)
            }
            LayerOracle::OneExceptAtOne => {
                if a <= 1.0 && 1.0 < b {
                    1.0
                } else {
                    0.0
                }
            }
            LayerOracle::Power { p } => {
                let inv = |y: f64| if y <= 0.0 { 0.0 } else { clamp01(y.powf(1.0 / p)) };
                (inv(b) - inv(a)).max(0.0)
            }
            LayerOracle::InvSqrt => {
                let upper = if a <= 0.0 { 1.0 } else { (a * a).recip().min(1.0) };
                let lower = if b.is_infinite() { 0.0 } else { (b * b).recip().min(1.0) };
                (upper - lower).max(0.0)
            }
            LayerOracle::ExpHalfLine => {
                if b <= 0.0 || a > 1.0 {
                    return 0.0;
                }
                let upper = if a <= 0.0 { f64::INFINITY } else { -a.ln() };
                let lower = if b >= 1.0 { 0.0 } else { -b.ln() };
                (upper - lower).max(0.0)
            }
            LayerOracle::Counting { atoms } => {
                atoms.iter().filter(|(v, _)| a <= *v && *v < b).map(|(_, w)| w).sum()
            }
        }
    }

    fn total_mass(&self) -> f64 {
        match self {
            LayerOracle::ExpHalfLine => f64::INFINITY,
            LayerOracle::Counting { atoms } => atoms.iter().map(|(_, w)| w).sum(),
            _ => 1.0,
        }
    }

    fn integral(&self) -> Option<f64> {
        Some(match self {
            LayerOracle::Affine { slope, intercept } => 0.5 * slope + intercept,
            LayerOracle::OneExceptAtOne => 1.0,
            LayerOracle::Power { p } => 1.0 / (p + 1.0),
            LayerOracle::InvSqrt => 2.0,
            LayerOracle::ExpHalfLine => 1.0,
            LayerOracle::Counting { atoms } => atoms.iter().map(|(v, w)| v * w).sum(),
        })
    }
}

/// Which layer sum to build.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasureVariant {
    /// `I = (0, M)`, `a_0 = 0`, `a_(n+1) = M`; needs `0 <= f < M`.
    Nonneg,
    /// `I = (-M, M) \ {0}`, `0` inserted, `a_0 = -M`; needs `|f| < M`.
    Signed,
    /// `I = (0, inf)`, `a_(n+1) = +inf`; needs `f >= 0`.
    HalfLine,
}

impl MeasureVariant {
    pub fn space(self, m: f64) -> SpaceDescriptor {
        match self {
            MeasureVariant::Nonneg => SpaceDescriptor::open_interval(0.0, m),
            MeasureVariant::Signed => SpaceDescriptor::Union(vec![Segment::open(-m, 0.0), Segment::open(0.0, m)]),
            MeasureVariant::HalfLine => SpaceDescriptor::HalfLine,
        }
    }
}

fn close(x: f64, y: f64) -> bool {
    if x.is_infinite() || y.is_infinite() {
        return x == y;
    }
    (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()))
}

/// Nonnegativity, monotonicity and finite additivity of the layers on a
/// grid of cut points in `[lo, hi]`.
pub fn check_additivity(oracle: &dyn MeasureOracle, lo: f64, hi: f64, cuts: usize) -> Result<()> {
    let n = cuts.max(2);
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    for i in 0..n {
        for j in i + 1..=n {
            let whole = oracle.layer(xs[i], xs[j]);
            if whole < 0.0 || whole.is_nan() {
                return Err(Error::domain(format!("{}: negative layer on [{}, {})", oracle.name(), xs[i], xs[j])));
            }
            for k in i + 1..j {
                let (left, right) = (oracle.layer(xs[i], xs[k]), oracle.layer(xs[k], xs[j]));
                if left > whole || right > whole {
                    return Err(Error::domain(format!("{}: layers not monotone at {}", oracle.name(), xs[k])));
                }
                if !close(left + right, whole) {
                    return Err(Error::domain(format!(
                        "{}: additivity violated on [{}, {}) split at {}",
                        oracle.name(),
                        xs[i],
                        xs[j],
                        xs[k]
                    )));
                }
            }
        }
    }
    Ok(())
}

fn partition(k: &FiniteSet, m: f64, variant: MeasureVariant) -> Result<Vec<f64>> {
    let space = variant.space(m);
    let mut v = Vec::with_capacity(k.len() + 3);
    for p in k.iter() {
        if !space.contains(p) {
            return Err(Error::NotInSpace(format!("{} outside the layer domain", p.x)));
        }
        v.push(p.x);
    }
    match variant {
        MeasureVariant::Nonneg => v.extend([0.0, m]),
        MeasureVariant::Signed => v.extend([-m, 0.0, m]),
        MeasureVariant::HalfLine => v.extend([0.0, f64::INFINITY]),
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

/// `s(H) = sum_i a_i mu(f^-1([a_i, a_(i+1))))` with the endpoints of
/// `variant`. The oracle is checked for additivity first; each evaluation
/// also checks that the layers add up to the full range.
pub fn sf_measure_integral(oracle: Arc<dyn MeasureOracle>, m: f64, variant: MeasureVariant) -> Result<SetFunction> {
    if variant != MeasureVariant::HalfLine && !(m > 0.0 && m.is_finite()) {
        return Err(Error::domain("layer bound M must be positive and finite"));
    }
    let (lo, hi) = match variant {
        MeasureVariant::Nonneg => (0.0, m),
        MeasureVariant::Signed => (-m, m),
        MeasureVariant::HalfLine => (0.0, 64.0),
    };
    check_additivity(oracle.as_ref(), lo, hi, 12)?;
    let name = format!("layer-sum[{}]", oracle.name());
    Ok(SetFunction::new(name, DomainClass::All, move |k| {
        let a = partition(k, m, variant)?;
        let mut s = 0.0;
        let mut mass = 0.0;
        for w in a.windows(2) {
            let layer = oracle.layer(w[0], w[1]);
            mass += layer;
            s = ext_add(s, ext_mul(w[0], layer));
        }
        let whole = oracle.layer(a[0], a[a.len() - 1]);
        if !close(mass, whole) {
            return Err(Error::domain(format!("{}: layers sum to {mass}, range has {whole}", oracle.name())));
        }
        Ok(s)
    }))
}

/// `delta` from the d-increasing recipe: `delta < eps / mu(X)`; with
/// infinite mass `eps / mu(f^-1[min H, M))` or `min H / 2` when that is
/// infinite; on the half-line also `delta < 1 / max H`.
pub fn d_increasing_delta(oracle: &dyn MeasureOracle, h: &FiniteSet, eps: f64, m: f64, variant: MeasureVariant) -> f64 {
    let mass = oracle.total_mass();
    let base = match variant {
        MeasureVariant::Nonneg if mass.is_infinite() && !h.is_empty() => {
            let upper = oracle.layer(h.min_x(), m);
            if upper.is_infinite() {
                return 0.5 * h.min_x();
            }
            if upper == 0.0 {
                eps
            } else {
                eps / upper
            }
        }
        MeasureVariant::Signed => 0.5 * eps / mass,
        _ => eps / mass,
    };
    let base = if variant == MeasureVariant::HalfLine && !h.is_empty() { base.min(1.0 / h.max_x()) } else { base };
    0.5 * base
}

/// `delta` from the left-continuity recipe: the minimum of
/// `eps / (2 mu(X))`, half the spacing of `H ∪ {0}`, and for each `a` in
/// `H` a radius `gamma` with `mu(f^-1([a - gamma, a))) < eps / (8 n M)`.
pub fn left_continuity_delta(oracle: &dyn MeasureOracle, h: &FiniteSet, eps: f64, m: f64) -> f64 {
    let mut xs = h.xs();
    xs.push(0.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let spacing = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let n = h.len().max(1) as f64;
    let target = eps / (8.0 * n * m);
    let mut delta = (eps / (2.0 * oracle.total_mass())).min(0.5 * spacing);
    for &a in h.xs().iter() {
        let mut g = a.min(m);
        while g > 1e-300 && oracle.layer(a - g, a) >= target {
            g *= 0.5;
        }
        delta = delta.min(g);
    }
    delta
}

use crate::error::{Error, Result};
use crate::ext_engine::{DomainClass, SetFunction};
use crate::metric_core::{FiniteSet, PointVal};
use crate::spaces::{dyadic_value, harmonic_value, Sequence, SpaceDescriptor};

/// Coefficients `a_1, a_2, ...` with an optional closed-form sum.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSpec {
    pub a: Sequence,
    pub known_sum: Option<f64>,
}

impl SeriesSpec {
    pub fn new(a: Sequence) -> Self {
        let known_sum = a.known_sum();
        SeriesSpec { a, known_sum }
    }
}

/// `sum_{i <= n} a_i`, compensated.
pub fn partial_sum(a: &Sequence, n: u64) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for i in 1..=n {
        let y = a.value(i) - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

pub(super) fn harmonic_index(p: &PointVal) -> Result<u64> {
    if p.label >= 1 && harmonic_value(p.label) == p.x {
        return Ok(p.label);
    }
    if p.x > 0.0 {
        let n = (1.0 / p.x).round();
        if n >= 1.0 && harmonic_value(n as u64) == p.x {
            return Ok(n as u64);
        }
    }
    Err(Error::NotInSpace(format!("{} is not of the form 1/n", p.x)))
}

fn dyadic_index(p: &PointVal) -> Result<u64> {
    if p.label >= 1 && dyadic_value(p.label) == p.x {
        return Ok(p.label);
    }
    if p.x > 0.0 && p.x <= 0.5 {
        let m = -p.x.log2();
        if m.fract() == 0.0 && dyadic_value(m as u64) == p.x {
            return Ok(m as u64);
        }
    }
    Err(Error::domain(format!("{} is not of the form 2^-m with m >= 1", p.x)))
}

/// On `{1/n}`: `s(H) = sum_{h in H} a_(1/h)`.
pub fn sf_series_harmonic(spec: &SeriesSpec) -> SetFunction {
    let a = spec.a.clone();
    SetFunction::new(format!("series[{}]", a.name()), DomainClass::All, move |k| {
        k.iter().map(|p| harmonic_index(p).map(|n| a.value(n))).sum()
    })
}

/// `s(H) = sum_{h in H} a(h)` on the index set with `d(x, y) = |a(x) - a(y)|`.
pub fn sf_unordered_sum(a: Sequence) -> (SpaceDescriptor, SetFunction) {
    let s = SetFunction::pure(format!("unordered-sum[{}]", a.name()), |k: &FiniteSet| k.iter().map(|p| p.x).sum());
    (SpaceDescriptor::FunctionInduced(a), s)
}

/// On `{2^-m : m >= 1}`, stretched sets only: `s(H) = sum a_(-log2 h)`.
pub fn sf_series_dyadic(spec: &SeriesSpec) -> SetFunction {
    let a = spec.a.clone();
    SetFunction::new(format!("dyadic-series[{}]", a.name()), DomainClass::StretchedOnly, move |k| {
        k.iter().map(|p| dyadic_index(p).map(|m| a.value(m))).sum()
    })
}

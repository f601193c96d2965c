//! Estimation of `ext(s, I)` along refinement ladders.
//!
//! A ladder is evaluated level by level; `Converged(A)` is declared once
//! the last `window` values agree within `tol_abs`, divergence once they all
//! lie beyond `threshold`. Nonexistence is only ever reported as evidence:
//! two ladders with vanishing gaps whose limits separate.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric_core::{gap_to_space, is_stretched, FiniteSet, FLOAT_TOL};
use crate::spaces::{refine, SamplerSpec, SpaceDescriptor, Strategy};

/// Which finite sets a set function accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainClass {
    All,
    StretchedOnly,
    /// One representative per nonempty equal-width bin.
    ClassS,
}

type EvalFn = dyn Fn(&FiniteSet) -> Result<f64> + Send + Sync;

/// A pure map from finite sets to extended reals (`NaN` is rejected).
#[derive(Clone)]
pub struct SetFunction {
    pub name: String,
    pub domain: DomainClass,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for SetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetFunction").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

impl SetFunction {
    pub fn new(
        name: impl Into<String>,
        domain: DomainClass,
        f: impl Fn(&FiniteSet) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        SetFunction { name: name.into(), domain, eval: Arc::new(f) }
    }

    /// Infallible variant for closed-form functionals.
    pub fn pure(name: impl Into<String>, f: impl Fn(&FiniteSet) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, DomainClass::All, move |k| Ok(f(k)))
    }

    pub fn eval(&self, k: &FiniteSet) -> Result<f64> {
        let v = (self.eval)(k)?;
        if v.is_nan() {
            return Err(Error::domain(format!("{} returned NaN", self.name)));
        }
        Ok(v)
    }

    pub fn with_domain(mut self, domain: DomainClass) -> Self {
        self.domain = domain;
        self
    }

    /// `a * self + b * other` in extended-real arithmetic.
    pub fn combine(&self, a: f64, other: &SetFunction, b: f64) -> SetFunction {
        let (f, g) = (self.clone(), other.clone());
        let domain = if self.domain == other.domain { self.domain } else { DomainClass::All };
        SetFunction::new(format!("{a}*{}+{b}*{}", self.name, other.name), domain, move |k| {
            Ok(ext_add(ext_mul(a, f.eval(k)?), ext_mul(b, g.eval(k)?)))
        })
    }

    /// `F(self(K), other(K))`.
    pub fn map2(&self, other: &SetFunction, name: &str, op: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> SetFunction {
        let (f, g) = (self.clone(), other.clone());
        SetFunction::new(name, DomainClass::All, move |k| Ok(op(f.eval(k)?, g.eval(k)?)))
    }
}

/// Extended-real product with `0 * (±inf) = 0`.
pub fn ext_mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// Extended-real sum; `+inf + -inf` is left undefined (`NaN`).
pub fn ext_add(a: f64, b: f64) -> f64 {
    a + b
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub tol_abs: f64,
    pub window: usize,
    pub threshold: f64,
    pub separation: f64,
    pub max_level: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol_abs: 1e-9, window: 4, threshold: 1e9, separation: 1e-8, max_level: 64 }
    }
}

impl Tolerances {
    /// Sets `tol_abs` and the matching default separation `10 * tol_abs`.
    pub fn with_tol(self, tol_abs: f64) -> Self {
        Tolerances { tol_abs, separation: 10.0 * tol_abs, ..self }
    }

    pub fn with_max_level(self, max_level: usize) -> Self {
        Tolerances { max_level, ..self }
    }

    pub fn with_threshold(self, threshold: f64) -> Self {
        Tolerances { threshold, ..self }
    }

    pub fn with_window(self, window: usize) -> Self {
        Tolerances { window, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.tol_abs) {
            return Err(Error::config("tol.abs", "must be positive"));
        }
        if self.window < 2 {
            return Err(Error::config("tol.window", "must be at least 2"));
        }
        if !pos(self.threshold) {
            return Err(Error::config("tol.threshold", "must be positive"));
        }
        if !pos(self.separation) {
            return Err(Error::config("tol.separation", "must be positive"));
        }
        if self.max_level < self.window {
            return Err(Error::config("tol.max_level", "must be at least the window"));
        }
        Ok(())
    }
}

/// Two sets with vanishing gaps whose values separate.
#[derive(Clone, Debug)]
pub struct Witness {
    pub set_a: FiniteSet,
    pub set_b: FiniteSet,
    pub gap_a: f64,
    pub gap_b: f64,
    pub value_a: f64,
    pub value_b: f64,
}

#[derive(Clone, Debug)]
pub enum Status {
    Converged(f64),
    DivergesPlus,
    DivergesMinus,
    NoExtensionEvidence(Box<Witness>),
    Inconclusive,
}

impl Status {
    pub fn value(&self) -> Option<f64> {
        match self {
            Status::Converged(v) => Some(*v),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Status::Converged(_) => "converged",
            Status::DivergesPlus => "diverges_plus",
            Status::DivergesMinus => "diverges_minus",
            Status::NoExtensionEvidence(_) => "no_extension_evidence",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Status::Converged(_))
    }

    pub fn is_nonexistence(&self) -> bool {
        matches!(self, Status::NoExtensionEvidence(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub level: usize,
    pub gap_hi: f64,
    pub s_value: f64,
    pub running_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct ExtensionEstimate {
    pub status: Status,
    pub trace: Vec<TraceRow>,
    /// Trace of the second ladder in a cross-check.
    pub aux_trace: Vec<TraceRow>,
    pub tol: Tolerances,
    /// Last sampled set of the primary ladder.
    pub last_set: Option<FiniteSet>,
}

impl ExtensionEstimate {
    pub fn levels(&self) -> usize {
        self.trace.len()
    }

    /// Largest and smallest `s` value seen, primary ladder only.
    pub fn value_range(&self) -> (f64, f64) {
        self.trace.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.s_value), hi.max(r.s_value)))
    }
}

/// One rung of a ladder.
#[derive(Clone, Debug)]
pub struct Rung {
    pub gap_hi: f64,
    pub value: f64,
    pub set: Option<FiniteSet>,
}

fn decide(values: &[f64], tol: &Tolerances) -> Option<Status> {
    let w = tol.window;
    if values.len() < w {
        return None;
    }
    let last = &values[values.len() - w..];
    if last.iter().all(|&v| v > tol.threshold) {
        return Some(Status::DivergesPlus);
    }
    if last.iter().all(|&v| v < -tol.threshold) {
        return Some(Status::DivergesMinus);
    }
    if last.iter().all(|v| v.is_finite()) {
        let lo = last.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = last.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= tol.tol_abs {
            return Some(Status::Converged(last.iter().sum::<f64>() / w as f64));
        }
    }
    None
}

fn running(values: &[f64], w: usize) -> f64 {
    let tail = &values[values.len().saturating_sub(w)..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// Drives a ladder `level -> Rung`: batches of `window` levels are
/// evaluated in parallel and merged in level order; the trace stops at the
/// decision point. Gap bounds must not grow.
pub fn estimate_ladder(
    rung: impl Fn(usize) -> Result<Rung> + Sync,
    tol: &Tolerances,
) -> Result<ExtensionEstimate> {
    tol.validate()?;
    let mut trace = Vec::new();
    let mut values = Vec::new();
    let mut last_set = None;
    let mut prev_gap = f64::INFINITY;
    let mut level = 1;
    while level <= tol.max_level {
        let hi = (level + tol.window - 1).min(tol.max_level);
        let batch: Vec<Result<Rung>> = (level..=hi).into_par_iter().map(&rung).collect();
        for (i, r) in batch.into_iter().enumerate() {
            let lv = level + i;
            let r = r.map_err(|e| match e {
                Error::Evaluation { .. } | Error::NotStretched { .. } | Error::GapNotMonotone { .. } => e,
                other => Error::Evaluation { level: lv, msg: other.to_string() },
            })?;
            if r.value.is_nan() {
                return Err(Error::Evaluation { level: lv, msg: "NaN value".into() });
            }
            if r.gap_hi > prev_gap * (1.0 + FLOAT_TOL) + f64::MIN_POSITIVE {
                return Err(Error::GapNotMonotone { level: lv, prev: prev_gap, now: r.gap_hi });
            }
            prev_gap = r.gap_hi;
            values.push(r.value);
            trace.push(TraceRow { level: lv, gap_hi: r.gap_hi, s_value: r.value, running_estimate: running(&values, tol.window) });
            if r.set.is_some() {
                last_set = r.set;
            }
            if let Some(status) = decide(&values, tol) {
                return Ok(ExtensionEstimate { status, trace, aux_trace: Vec::new(), tol: *tol, last_set });
            }
        }
        level = hi + 1;
    }
    Ok(ExtensionEstimate { status: Status::Inconclusive, trace, aux_trace: Vec::new(), tol: *tol, last_set })
}

fn check_domain(s: &SetFunction, spec: &SamplerSpec) -> Result<()> {
    if s.domain == DomainClass::ClassS && !matches!(spec.strategy, Strategy::EdsBins { .. }) {
        return Err(Error::domain(format!("{} is defined on class-S sets; sampler {} does not produce them", s.name, spec.strategy.name())));
    }
    Ok(())
}

/// Samples over `sample_space`, measures gaps against `gap_space`.
fn ladder_estimate(
    s: &SetFunction,
    sample_space: &SpaceDescriptor,
    gap_space: &SpaceDescriptor,
    spec: &SamplerSpec,
    tol: &Tolerances,
    stretched: bool,
) -> Result<ExtensionEstimate> {
    check_domain(s, spec)?;
    let same = sample_space == gap_space;
    estimate_ladder(
        |level| {
            let sample = refine(sample_space, spec, level)?;
            let gap_hi = if same {
                if sample.gap.hi > sample.envelope * (1.0 + FLOAT_TOL) {
                    return Err(Error::Evaluation { level, msg: "sampler envelope below certified gap".into() });
                }
                sample.envelope
            } else {
                gap_to_space(&sample.set, gap_space)?.hi
            };
            if stretched && !is_stretched(&sample.set, gap_space)? {
                return Err(Error::NotStretched { level });
            }
            let value = s.eval(&sample.set).map_err(|e| Error::Evaluation { level, msg: e.to_string() })?;
            Ok(Rung { gap_hi, value, set: Some(sample.set) })
        },
        tol,
    )
}

/// `ext(s, I)` along the ladder `spec`.
pub fn estimate_ext(s: &SetFunction, space: &SpaceDescriptor, spec: &SamplerSpec, tol: &Tolerances) -> Result<ExtensionEstimate> {
    let stretched = s.domain == DomainClass::StretchedOnly;
    ladder_estimate(s, space, space, spec, tol, stretched)
}

/// `ext_str(s, I)`; a non-stretched sample is a hard error.
pub fn estimate_ext_stretched(s: &SetFunction, space: &SpaceDescriptor, spec: &SamplerSpec, tol: &Tolerances) -> Result<ExtensionEstimate> {
    ladder_estimate(s, space, space, spec, tol, true)
}

/// `ext(s, J, I)`: samples `K ⊂ I`, gaps measured as `d_H(K, J)`.
pub fn estimate_ext_within(
    s: &SetFunction,
    j: &SpaceDescriptor,
    i: &SpaceDescriptor,
    spec: &SamplerSpec,
    tol: &Tolerances,
) -> Result<ExtensionEstimate> {
    ladder_estimate(s, i, j, spec, tol, false)
}

fn last_rung(e: &ExtensionEstimate) -> (f64, f64) {
    e.trace.last().map(|r| (r.gap_hi, r.s_value)).unwrap_or((f64::INFINITY, f64::NAN))
}

/// Merges two independent ladders of the same functional.
pub fn merge_cross(a: ExtensionEstimate, b: ExtensionEstimate) -> ExtensionEstimate {
    let witness = |a: &ExtensionEstimate, b: &ExtensionEstimate| {
        let (ga, va) = last_rung(a);
        let (gb, vb) = last_rung(b);
        Status::NoExtensionEvidence(Box::new(Witness {
            set_a: a.last_set.clone().unwrap_or_default(),
            set_b: b.last_set.clone().unwrap_or_default(),
            gap_a: ga,
            gap_b: gb,
            value_a: a.status.value().unwrap_or(va),
            value_b: b.status.value().unwrap_or(vb),
        }))
    };
    let tol = a.tol;
    let status = match (&a.status, &b.status) {
        (Status::Converged(x), Status::Converged(y)) => {
            if (x - y).abs() <= tol.separation {
                Status::Converged(0.5 * (x + y))
            } else {
                witness(&a, &b)
            }
        }
        (Status::DivergesPlus, Status::DivergesPlus) => Status::DivergesPlus,
        (Status::DivergesMinus, Status::DivergesMinus) => Status::DivergesMinus,
        (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
        (Status::NoExtensionEvidence(w), _) | (_, Status::NoExtensionEvidence(w)) => Status::NoExtensionEvidence(w.clone()),
        _ => witness(&a, &b),
    };
    ExtensionEstimate { status, aux_trace: b.trace, ..a }
}

/// Runs two ladders for the same `s` and compares their limits.
pub fn cross_check(
    s: &SetFunction,
    space: &SpaceDescriptor,
    spec_a: &SamplerSpec,
    spec_b: &SamplerSpec,
    tol: &Tolerances,
) -> Result<ExtensionEstimate> {
    let (a, b) = rayon::join(|| estimate_ext(s, space, spec_a, tol), || estimate_ext(s, space, spec_b, tol));
    Ok(merge_cross(a?, b?))
}

/// [`cross_check`] with stretched ladders.
pub fn cross_check_stretched(
    s: &SetFunction,
    space: &SpaceDescriptor,
    spec_a: &SamplerSpec,
    spec_b: &SamplerSpec,
    tol: &Tolerances,
) -> Result<ExtensionEstimate> {
    let (a, b) = rayon::join(
        || estimate_ext_stretched(s, space, spec_a, tol),
        || estimate_ext_stretched(s, space, spec_b, tol),
    );
    Ok(merge_cross(a?, b?))
}

/// [`cross_check`] for `ext(s, J, I)`.
pub fn cross_check_within(
    s: &SetFunction,
    j: &SpaceDescriptor,
    i: &SpaceDescriptor,
    spec_a: &SamplerSpec,
    spec_b: &SamplerSpec,
    tol: &Tolerances,
) -> Result<ExtensionEstimate> {
    let (a, b) = rayon::join(
        || estimate_ext_within(s, j, i, spec_a, tol),
        || estimate_ext_within(s, j, i, spec_b, tol),
    );
    Ok(merge_cross(a?, b?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Schedule;

    #[test]
    fn decide_window() {
        let tol = Tolerances::default();
        assert!(decide(&[1.0, 1.0, 1.0], &tol).is_none());
        assert_eq!(decide(&[5.0, 1.0, 1.0, 1.0, 1.0], &tol).unwrap().value(), Some(1.0));
        assert!(decide(&[1.0, 1.0, 1.0, 1.1], &tol).is_none());
        assert!(matches!(decide(&[2e9, 3e9, 4e9, f64::INFINITY], &tol), Some(Status::DivergesPlus)));
        assert!(matches!(decide(&[-2e9; 4], &tol), Some(Status::DivergesMinus)));
    }

    #[test]
    fn extended_arithmetic() {
        assert_eq!(ext_mul(0.0, f64::INFINITY), 0.0);
        assert_eq!(ext_mul(2.0, f64::INFINITY), f64::INFINITY);
        assert_eq!(ext_add(1.0, f64::INFINITY), f64::INFINITY);
    }

    #[test]
    fn constant_converges_at_window() {
        let s = SetFunction::pure("const", |_| 3.5);
        let est = estimate_ext_stretched(
            &s,
            &SpaceDescriptor::dyadic(),
            &SamplerSpec::stretched_dyadic(Schedule::linear(1, 1)),
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(est.status.value(), Some(3.5));
        assert_eq!(est.levels(), 4);
    }

    #[test]
    fn evaluation_error_reports_level() {
        let s = SetFunction::new("fails", DomainClass::All, |k| {
            if k.len() > 3 {
                Err(Error::domain("too big"))
            } else {
                Ok(0.0 + k.len() as f64)
            }
        });
        let e = estimate_ext(&s, &SpaceDescriptor::unit_interval(), &SamplerSpec::grid(Schedule::linear(1, 1)), &Tolerances::default());
        assert!(matches!(e, Err(Error::Evaluation { level: 3, .. })), "{e:?}");
    }

    #[test]
    fn nan_rejected() {
        let s = SetFunction::pure("nan", |_| f64::NAN);
        assert!(s.eval(&FiniteSet::empty()).is_err());
    }

    #[test]
    fn class_s_needs_eds_sampler() {
        let s = SetFunction::pure("m", |_| 0.0).with_domain(DomainClass::ClassS);
        let e = estimate_ext(&s, &SpaceDescriptor::unit_interval(), &SamplerSpec::grid(Schedule::linear(1, 1)), &Tolerances::default());
        assert!(matches!(e, Err(Error::Domain(_))));
    }
}

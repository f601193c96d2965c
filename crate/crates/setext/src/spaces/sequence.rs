use std::fmt;
use std::sync::Arc;

/// A real sequence `a(n)`, `n >= 1`, from a closed catalog.
///
/// Catalog entries know their cluster values and a tail envelope, which is
/// what lets gaps in function-induced spaces be bracketed. `Custom` carries
/// no structure; operations needing it report "unknown" or unresolved.
#[derive(Clone)]
pub enum Sequence {
    /// `scale * ratio^n`, `|ratio| < 1`.
    Geometric { scale: f64, ratio: f64 },
    /// `(-1)^(n+1) / n`.
    AlternatingHarmonic,
    /// `1 / n`.
    Harmonic,
    /// `n^-p`, `p > 0`.
    Power { p: f64 },
    Constant { c: f64 },
    /// `c + 1/n`.
    ShiftedHarmonic { c: f64 },
    /// `(-1)^n`.
    AlternatingSign,
    /// `1` at `n = 1`, `0` elsewhere.
    IndicatorAtOne,
    /// `1` at odd `n`, `2^-(n/2)` at even `n`.
    OddOneEvenGeometric,
    /// `1/n` at even `n`, `1 - 1/n` at odd `n`.
    TwoCluster,
    Custom { name: String, f: Arc<dyn Fn(u64) -> f64 + Send + Sync> },
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sequence({})", self.name())
    }
}

impl PartialEq for Sequence {
    fn eq(&self, other: &Self) -> bool {
        use Sequence::*;
        match (self, other) {
            (Geometric { scale: a, ratio: b }, Geometric { scale: c, ratio: d }) => a == c && b == d,
            (Power { p: a }, Power { p: b }) => a == b,
            (Constant { c: a }, Constant { c: b }) => a == b,
            (ShiftedHarmonic { c: a }, ShiftedHarmonic { c: b }) => a == b,
            (Custom { f: a, .. }, Custom { f: b, .. }) => Arc::ptr_eq(a, b),
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

impl Sequence {
    pub fn custom(name: impl Into<String>, f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        Sequence::Custom { name: name.into(), f: Arc::new(f) }
    }

    pub fn name(&self) -> String {
        match self {
            Sequence::Geometric { scale, ratio } => format!("geometric({scale},{ratio})"),
            Sequence::AlternatingHarmonic => "alternating-harmonic".into(),
            Sequence::Harmonic => "harmonic".into(),
            Sequence::Power { p } => format!("power({p})"),
            Sequence::Constant { c } => format!("constant({c})"),
            Sequence::ShiftedHarmonic { c } => format!("shifted-harmonic({c})"),
            Sequence::AlternatingSign => "alternating-sign".into(),
            Sequence::IndicatorAtOne => "indicator-at-one".into(),
            Sequence::OddOneEvenGeometric => "odd-one-even-geometric".into(),
            Sequence::TwoCluster => "two-cluster".into(),
            Sequence::Custom { name, .. } => name.clone(),
        }
    }

    pub fn value(&self, n: u64) -> f64 {
        let nf = n as f64;
        match self {
            Sequence::Geometric { scale, ratio } => scale * ratio.powi(n.min(i32::MAX as u64) as i32),
            Sequence::AlternatingHarmonic => {
                if n % 2 == 1 {
                    1.0 / nf
                } else {
                    -1.0 / nf
                }
            }
            Sequence::Harmonic => 1.0 / nf,
            Sequence::Power { p } => nf.powf(-p),
            Sequence::Constant { c } => *c,
            Sequence::ShiftedHarmonic { c } => c + 1.0 / nf,
            Sequence::AlternatingSign => {
                if n % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Sequence::IndicatorAtOne => {
                if n == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Sequence::OddOneEvenGeometric => {
                if n % 2 == 1 {
                    1.0
                } else {
                    super::dyadic_value(n / 2)
                }
            }
            Sequence::TwoCluster => {
                if n % 2 == 0 {
                    1.0 / nf
                } else {
                    1.0 - 1.0 / nf
                }
            }
            Sequence::Custom { f, .. } => f(n),
        }
    }

    /// Cluster values of the sequence (limits of subsequences).
    pub fn accumulation(&self) -> Option<Vec<f64>> {
        match self {
            Sequence::Geometric { ratio, .. } if ratio.abs() < 1.0 => Some(vec![0.0]),
            Sequence::Geometric { .. } => None,
            Sequence::AlternatingHarmonic | Sequence::Harmonic | Sequence::IndicatorAtOne => {
                Some(vec![0.0])
            }
            Sequence::Power { p } if *p > 0.0 => Some(vec![0.0]),
            Sequence::Power { .. } => None,
            Sequence::Constant { c } | Sequence::ShiftedHarmonic { c } => Some(vec![*c]),
            Sequence::AlternatingSign => Some(vec![-1.0, 1.0]),
            Sequence::OddOneEvenGeometric | Sequence::TwoCluster => Some(vec![0.0, 1.0]),
            Sequence::Custom { .. } => None,
        }
    }

    /// Upper bound on `sup_{n > p} dist(a(n), cluster values)`.
    pub fn tail_radius(&self, p: u64) -> Option<f64> {
        let next = (p + 1) as f64;
        match self {
            Sequence::Geometric { scale, ratio } if ratio.abs() < 1.0 => {
                Some(scale.abs() * ratio.abs().powi((p + 1).min(i32::MAX as u64) as i32))
            }
            Sequence::AlternatingHarmonic | Sequence::Harmonic | Sequence::ShiftedHarmonic { .. } => {
                Some(1.0 / next)
            }
            Sequence::Power { p: e } if *e > 0.0 => Some(next.powf(-e)),
            Sequence::Constant { .. } | Sequence::AlternatingSign | Sequence::IndicatorAtOne => {
                Some(0.0)
            }
            Sequence::OddOneEvenGeometric => Some(2f64.powf(-next / 2.0)),
            Sequence::TwoCluster => Some(1.0 / next),
            _ => None,
        }
    }

    /// `sup |a(n)|` when it is known.
    pub fn bound(&self) -> Option<f64> {
        match self {
            Sequence::Geometric { scale, ratio } if ratio.abs() < 1.0 => Some(scale.abs() * ratio.abs()),
            Sequence::AlternatingHarmonic | Sequence::Harmonic => Some(1.0),
            Sequence::Power { p } if *p > 0.0 => Some(1.0),
            Sequence::Constant { c } => Some(c.abs()),
            Sequence::ShiftedHarmonic { c } => Some(c.abs() + 1.0),
            Sequence::AlternatingSign
            | Sequence::IndicatorAtOne
            | Sequence::OddOneEvenGeometric
            | Sequence::TwoCluster => Some(1.0),
            _ => None,
        }
    }

    /// Range of values, closure included.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        let acc = self.accumulation()?;
        let probe = 64u64;
        let tail = self.tail_radius(probe)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for n in 1..=probe {
            let v = self.value(n);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        for c in acc {
            lo = lo.min(c - tail);
            hi = hi.max(c + tail);
        }
        Some((lo, hi))
    }

    /// Closed-form sum `sum_{n >= 1} a(n)` when known; `+inf` for divergent
    /// positive series.
    pub fn known_sum(&self) -> Option<f64> {
        match self {
            Sequence::Geometric { scale, ratio } if ratio.abs() < 1.0 => {
                Some(scale * ratio / (1.0 - ratio))
            }
            Sequence::AlternatingHarmonic => Some(std::f64::consts::LN_2),
            Sequence::Harmonic => Some(f64::INFINITY),
            Sequence::Power { p } if *p <= 1.0 && *p > 0.0 => Some(f64::INFINITY),
            Sequence::Constant { c } if *c > 0.0 => Some(f64::INFINITY),
            Sequence::Constant { c } if *c < 0.0 => Some(f64::NEG_INFINITY),
            Sequence::Constant { .. } => Some(0.0),
            Sequence::IndicatorAtOne => Some(1.0),
            _ => None,
        }
    }

    /// Limit of `a(n)` when the sequence converges.
    pub fn limit(&self) -> Option<f64> {
        match self.accumulation() {
            Some(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_radius_bounds_the_tail() {
        let seqs = [
            Sequence::Geometric { scale: 1.0, ratio: 0.5 },
            Sequence::AlternatingHarmonic,
            Sequence::Power { p: 1.5 },
            Sequence::OddOneEvenGeometric,
            Sequence::TwoCluster,
            Sequence::AlternatingSign,
        ];
        for seq in seqs {
            let acc = seq.accumulation().unwrap();
            for p in [1u64, 5, 20] {
                let r = seq.tail_radius(p).unwrap();
                for n in p + 1..p + 200 {
                    let v = seq.value(n);
                    let d = acc.iter().map(|c| (v - c).abs()).fold(f64::INFINITY, f64::min);
                    assert!(d <= r + 1e-15, "{} n={n} d={d} r={r}", seq.name());
                }
            }
        }
    }

    #[test]
    fn catalog_values() {
        assert_eq!(Sequence::AlternatingHarmonic.value(3), 1.0 / 3.0);
        assert_eq!(Sequence::AlternatingHarmonic.value(2), -0.5);
        assert_eq!(Sequence::OddOneEvenGeometric.value(4), 0.25);
        assert_eq!(Sequence::OddOneEvenGeometric.value(7), 1.0);
        assert_eq!(Sequence::Geometric { scale: 1.0, ratio: 0.5 }.value(3), 0.125);
        assert_eq!(Sequence::IndicatorAtOne.value(1), 1.0);
        assert_eq!(Sequence::IndicatorAtOne.value(9), 0.0);
    }
}

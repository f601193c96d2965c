use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ext_engine::{DomainClass, SetFunction};
use crate::metric_core::FiniteSet;
use crate::spaces::{Segment, SpaceDescriptor};

type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Real functions of one variable with known monotone pieces.
#[derive(Clone)]
pub enum RealFn {
    Identity,
    Square,
    Constant(f64),
    /// `alpha x + beta`.
    Affine { slope: f64, intercept: f64 },
    /// `0` on `[0, 1/4]`, `4x - 1`, `3 - 4x`, `0` on `[3/4, 1]`.
    Tent,
    /// `1` at `c`, `0` elsewhere.
    IndicatorAt(f64),
    /// `sin(pi x)`.
    SinPi,
    /// `x + x / n`.
    ScaledIdentity { n: u64 },
    /// `breaks` split the domain into pieces on which `f` is monotone.
    Custom { name: String, f: Fn1, breaks: Vec<f64> },
}

impl fmt::Debug for RealFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl RealFn {
    pub fn name(&self) -> String {
        match self {
            RealFn::Identity => "x".into(),
            RealFn::Square => "x^2".into(),
            RealFn::Constant(c) => format!("{c}"),
            RealFn::Affine { slope, intercept } => format!("{slope}x+{intercept}"),
            RealFn::Tent => "tent".into(),
            RealFn::IndicatorAt(c) => format!("indicator({c})"),
            RealFn::SinPi => "sin(pi x)".into(),
            RealFn::ScaledIdentity { n } => format!("x+x/{n}"),
            RealFn::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RealFn::Identity => x,
            RealFn::Square => x * x,
            RealFn::Constant(c) => *c,
            RealFn::Affine { slope, intercept } => slope * x + intercept,
            RealFn::Tent => {
                if x <= 0.25 || x >= 0.75 {
                    0.0
                } else if x <= 0.5 {
                    4.0 * x - 1.0
                } else {
                    3.0 - 4.0 * x
                }
            }
            RealFn::IndicatorAt(c) => {
                if x == *c {
                    1.0
                } else {
                    0.0
                }
            }
            RealFn::SinPi => (PI * x).sin(),
            RealFn::ScaledIdentity { n } => x + x / *n as f64,
            RealFn::Custom { f, .. } => f(x),
        }
    }

    /// Points splitting `[a, b]` into monotone pieces.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let raw = match self {
            RealFn::Tent => vec![0.25, 0.5, 0.75],
            RealFn::IndicatorAt(c) => vec![*c],
            RealFn::SinPi => {
                let mut v = Vec::new();
                let mut t = (a - 0.5).ceil() + 0.5;
                while t <= b {
                    v.push(t);
                    t += 1.0;
                }
                v
            }
            RealFn::Custom { breaks, .. } => breaks.clone(),
            _ => Vec::new(),
        };
        raw.into_iter().filter(|&t| t > a && t < b).collect()
    }

    /// `int_a^b f` when known in closed form.
    pub fn integral(&self, a: f64, b: f64) -> Option<f64> {
        let prim = |f: &dyn Fn(f64) -> f64| Some(f(b) - f(a));
        match self {
            RealFn::Identity => prim(&|x| 0.5 * x * x),
            RealFn::Square => prim(&|x| x * x * x / 3.0),
            RealFn::Constant(c) => Some(c * (b - a)),
            RealFn::Affine { slope, intercept } => prim(&|x| 0.5 * slope * x * x + intercept * x),
            RealFn::Tent if a <= 0.25 && b >= 0.75 => Some(0.25),
            RealFn::IndicatorAt(_) => Some(0.0),
            RealFn::SinPi => prim(&|x| -(PI * x).cos() / PI),
            RealFn::ScaledIdentity { n } => prim(&|x| 0.5 * x * x * (1.0 + 1.0 / *n as f64)),
            _ => None,
        }
    }
}

/// `sup f([l, r])` for Darboux sums.
#[derive(Clone)]
pub enum SupOracle {
    /// Maximum over endpoints and interior breakpoints; exact when the
    /// breakpoints split `f` into monotone pieces.
    PiecewiseMonotone,
    Exact(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
    /// Maximum over `n + 1` equispaced probes; may underestimate.
    Probe(usize),
}

impl fmt::Debug for SupOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupOracle::PiecewiseMonotone => f.write_str("PiecewiseMonotone"),
            SupOracle::Exact(_) => f.write_str("Exact"),
            SupOracle::Probe(n) => write!(f, "Probe({n})"),
        }
    }
}

impl SupOracle {
    pub fn is_optimistic(&self) -> bool {
        matches!(self, SupOracle::Probe(_))
    }

    fn sup(&self, f: &RealFn, l: f64, r: f64) -> f64 {
        match self {
            SupOracle::PiecewiseMonotone => f
                .breakpoints(l, r)
                .into_iter()
                .chain([l, r])
                .map(|t| f.eval(t))
                .fold(f64::NEG_INFINITY, f64::max),
            SupOracle::Exact(g) => g(l, r),
            SupOracle::Probe(n) => {
                let n = (*n).max(1);
                (0..=n).map(|i| f.eval(l + (r - l) * i as f64 / n as f64)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }
}

/// `H ∪ {a, b}` sorted, after checking `H ⊂ [a, b]`.
fn augmented(k: &FiniteSet, a: f64, b: f64) -> Result<Vec<f64>> {
    let mut v = Vec::with_capacity(k.len() + 2);
    v.push(a);
    for p in k.iter() {
        if !(a..=b).contains(&p.x) {
            return Err(Error::NotInSpace(format!("{} outside [{a}, {b}]", p.x)));
        }
        v.push(p.x);
    }
    v.push(b);
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

/// The parity Riemann sum on `H~ = {a_0 < ... < a_n}`:
/// `f(a_1)(a_2 - a_0) + f(a_3)(a_4 - a_2) + ...`, closed by
/// `f(a_(n-1))(a_n - a_(n-2))` for even `n` or `f(b)(a_n - a_(n-1))` for odd.
pub fn riemann_sum(f: &RealFn, pts: &[f64]) -> f64 {
    let n = pts.len().saturating_sub(1);
    if n == 0 {
        return 0.0;
    }
    let mut s = 0.0;
    let mut j = 1;
    while j < n {
        s += f.eval(pts[j]) * (pts[j + 1] - pts[j - 1]);
        j += 2;
    }
    if n % 2 == 1 {
        s += f.eval(pts[n]) * (pts[n] - pts[n - 1]);
    }
    s
}

pub fn sf_riemann(f: RealFn, a: f64, b: f64) -> SetFunction {
    SetFunction::new(format!("riemann[{}]", f.name()), DomainClass::All, move |k| {
        Ok(riemann_sum(&f, &augmented(k, a, b)?))
    })
}

/// Upper Darboux sum of the partition `H ∪ {a, b}`.
pub fn sf_darboux_upper(f: RealFn, a: f64, b: f64, sup: SupOracle) -> SetFunction {
    let tag = if sup.is_optimistic() { "optimistic" } else { "exact" };
    SetFunction::new(format!("darboux[{}:{tag}]", f.name()), DomainClass::All, move |k| {
        let pts = augmented(k, a, b)?;
        Ok(pts.windows(2).map(|w| sup.sup(&f, w[0], w[1]) * (w[1] - w[0])).sum())
    })
}

/// Curves `[0, 1] -> R^3` for inscribed-polygon length.
#[derive(Clone)]
pub enum Curve {
    Segment { from: [f64; 3], to: [f64; 3] },
    /// Unit quarter circle `(cos(pi t/2), sin(pi t/2))`.
    QuarterCircle,
    /// `(t, t^2)`.
    Parabola,
    Helix { radius: f64, pitch: f64, turns: f64 },
    Custom { name: String, f: Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync> },
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Curve {
    pub fn name(&self) -> String {
        match self {
            Curve::Segment { .. } => "segment".into(),
            Curve::QuarterCircle => "quarter-circle".into(),
            Curve::Parabola => "parabola".into(),
            Curve::Helix { .. } => "helix".into(),
            Curve::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        match self {
            Curve::Segment { from, to } => [0, 1, 2].map(|i| from[i] + t * (to[i] - from[i])),
            Curve::QuarterCircle => {
                let th = 0.5 * PI * t;
                [th.cos(), th.sin(), 0.0]
            }
            Curve::Parabola => [t, t * t, 0.0],
            Curve::Helix { radius, pitch, turns } => {
                let th = 2.0 * PI * turns * t;
                [radius * th.cos(), radius * th.sin(), pitch * turns * t]
            }
            Curve::Custom { f, .. } => f(t),
        }
    }

    /// Closed-form arc length.
    pub fn length(&self) -> Option<f64> {
        match self {
            Curve::Segment { from, to } => Some(chord(*from, *to)),
            Curve::QuarterCircle => Some(0.5 * PI),
            Curve::Parabola => Some(0.25 * (2.0 * 5f64.sqrt() + 2f64.asinh())),
            Curve::Helix { radius, pitch, turns } => Some(turns * (2.0 * PI * radius).hypot(*pitch)),
            Curve::Custom { .. } => None,
        }
    }
}

fn chord(p: [f64; 3], q: [f64; 3]) -> f64 {
    let d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Length of the polygon inscribed at `K ∪ {0, 1}`.
pub fn sf_polygon_length(curve: Curve) -> SetFunction {
    SetFunction::new(format!("polygon-length[{}]", curve.name()), DomainClass::All, move |k| {
        let pts = augmented(k, 0.0, 1.0)?;
        Ok(pts.windows(2).map(|w| chord(curve.eval(w[0]), curve.eval(w[1]))).sum())
    })
}

/// Sum of `k_(i+1) - k_i` over consecutive points whose open gap lies in `H`.
/// Its extension is the inner Jordan measure of `H`.
pub fn sf_inner_jordan(h: &SpaceDescriptor) -> Result<SetFunction> {
    let segs = h.segments().ok_or_else(|| Error::domain("inner Jordan measure needs a union of intervals"))?;
    let full: Vec<Segment> = segs.iter().copied().filter(|s| !s.rational_only).collect();
    let mut ends: Vec<f64> = full.iter().flat_map(|s| [s.lo, s.hi]).collect();
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    let covered = move |l: f64, r: f64| -> bool {
        let inside = |x: f64| full.iter().any(|s| s.contains_x(x));
        let mut cuts: Vec<f64> = vec![l];
        cuts.extend(ends.iter().copied().filter(|&e| e > l && e < r));
        cuts.push(r);
        cuts.windows(2).all(|w| inside(0.5 * (w[0] + w[1])))
            && cuts[1..cuts.len() - 1].iter().all(|&e| inside(e))
    };
    Ok(SetFunction::pure("inner-jordan", move |k| {
        let xs: Vec<f64> = k.iter().map(|p| p.x).collect();
        xs.windows(2).filter(|w| w[0] < w[1] && covered(w[0], w[1])).map(|w| w[1] - w[0]).sum()
    }))
}

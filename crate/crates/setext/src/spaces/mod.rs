//! Space descriptors and refinement samplers.

pub mod cantor;
mod random;
mod sampler;
mod sequence;

pub use cantor::{cantor_samples, CantorLadder};
pub use random::{random_dense_halfline, random_sdense, random_subset, TagPolicy};
pub use sampler::{
    adversarial_series_sampler, eds_bins, refine, BinConvention, EdsRule, Sample, SamplerSpec,
    Schedule, Strategy,
};
pub use sequence::Sequence;

use crate::metric_core::{FiniteSet, PointVal, TAG_IRRATIONAL};

/// A closed, open or half-open segment of the real line.
///
/// `rational_only` marks the rational points of the segment: points tagged
/// irrational are not members.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
    pub rational_only: bool,
}

impl Segment {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Segment { lo, hi, lo_open: false, hi_open: false, rational_only: false }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Segment { lo, hi, lo_open: true, hi_open: true, rational_only: false }
    }

    pub fn rationals(self) -> Self {
        Segment { rational_only: true, ..self }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// Membership of a real coordinate, ignoring tags.
    pub fn contains_x(&self, x: f64) -> bool {
        let above = if self.lo_open { x > self.lo } else { x >= self.lo };
        let below = if self.hi_open { x < self.hi } else { x <= self.hi };
        above && below
    }

    pub fn contains(&self, p: &PointVal) -> bool {
        self.contains_x(p.x) && !(self.rational_only && p.label == TAG_IRRATIONAL)
    }
}

/// A totally bounded pseudo-metric space given by its structure.
///
/// Point conventions: line spaces use `label` as a tag (`0` ordinary,
/// [`TAG_IRRATIONAL`] for points standing in for irrationals); sequence sets
/// use `label = n` for the point `1/n` or `2^-n` and `label = 0` for extra
/// points; function-induced spaces use `label = n` and `x = a(n)`; products
/// use `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceDescriptor {
    Interval(Segment),
    Union(Vec<Segment>),
    /// `{1/n : n >= 1}` together with finitely many extra reals.
    Harmonic { extras: Vec<f64> },
    /// `{2^-n : n >= first}`.
    Dyadic { first: u32 },
    /// Index set `n >= 1` with `d(x, y) = |a(x) - a(y)|`.
    FunctionInduced(Sequence),
    Cantor,
    /// `(0, +inf)`; only the half-line density notion applies.
    HalfLine,
    /// Product with the sum metric `d1 + d2`.
    Product(Box<SpaceDescriptor>, Box<SpaceDescriptor>),
    Finite(FiniteSet),
}

impl SpaceDescriptor {
    pub fn unit_interval() -> Self {
        SpaceDescriptor::Interval(Segment::closed(0.0, 1.0))
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        SpaceDescriptor::Interval(Segment::closed(lo, hi))
    }

    pub fn open_interval(lo: f64, hi: f64) -> Self {
        SpaceDescriptor::Interval(Segment::open(lo, hi))
    }

    pub fn harmonic() -> Self {
        SpaceDescriptor::Harmonic { extras: Vec::new() }
    }

    pub fn dyadic() -> Self {
        SpaceDescriptor::Dyadic { first: 1 }
    }

    pub fn product(a: SpaceDescriptor, b: SpaceDescriptor) -> Self {
        SpaceDescriptor::Product(Box::new(a), Box::new(b))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SpaceDescriptor::Interval(_) => "interval",
            SpaceDescriptor::Union(_) => "union",
            SpaceDescriptor::Harmonic { .. } => "harmonic",
            SpaceDescriptor::Dyadic { .. } => "dyadic",
            SpaceDescriptor::FunctionInduced(_) => "function-induced",
            SpaceDescriptor::Cantor => "cantor",
            SpaceDescriptor::HalfLine => "half-line",
            SpaceDescriptor::Product(..) => "product",
            SpaceDescriptor::Finite(_) => "finite",
        }
    }

    /// Segments of a line space; `None` for other kinds.
    pub fn segments(&self) -> Option<Vec<Segment>> {
        match self {
            SpaceDescriptor::Interval(s) => Some(vec![*s]),
            SpaceDescriptor::Union(v) => Some(v.clone()),
            _ => None,
        }
    }

    /// True when points are compared by a single real coordinate.
    pub fn is_one_dimensional(&self) -> bool {
        !matches!(self, SpaceDescriptor::Product(..))
    }

    /// True when `gap_to_space` returns `lo == hi` for every subset.
    pub fn exact_gap(&self) -> bool {
        match self {
            SpaceDescriptor::Interval(_)
            | SpaceDescriptor::Union(_)
            | SpaceDescriptor::Harmonic { .. }
            | SpaceDescriptor::Dyadic { .. }
            | SpaceDescriptor::Finite(_) => true,
            SpaceDescriptor::FunctionInduced(seq) => seq.tail_radius(1) == Some(0.0),
            _ => false,
        }
    }

    /// Pseudo-distance between two points of the space.
    pub fn dist(&self, p: &PointVal, q: &PointVal) -> f64 {
        match self {
            SpaceDescriptor::Product(..) => (p.x - q.x).abs() + (p.y - q.y).abs(),
            _ => (p.x - q.x).abs(),
        }
    }

    /// Smallest and largest coordinate of a line-like space.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match self {
            SpaceDescriptor::Interval(s) => Some((s.lo, s.hi)),
            SpaceDescriptor::Union(v) => {
                let lo = v.iter().map(|s| s.lo).fold(f64::INFINITY, f64::min);
                let hi = v.iter().map(|s| s.hi).fold(f64::NEG_INFINITY, f64::max);
                (lo <= hi).then_some((lo, hi))
            }
            SpaceDescriptor::Harmonic { extras } => {
                let lo = extras.iter().copied().fold(0.0, f64::min);
                let hi = extras.iter().copied().fold(1.0, f64::max);
                Some((lo, hi))
            }
            SpaceDescriptor::Dyadic { first } => Some((0.0, dyadic_value(*first as u64))),
            SpaceDescriptor::FunctionInduced(seq) => seq.value_range(),
            SpaceDescriptor::Cantor => Some((0.0, 1.0)),
            SpaceDescriptor::HalfLine => None,
            SpaceDescriptor::Product(..) => None,
            SpaceDescriptor::Finite(k) => {
                if k.is_empty() {
                    None
                } else {
                    Some((k.min_x(), k.max_x()))
                }
            }
        }
    }

    /// Diameter of the space; `+inf` for the half-line.
    pub fn diameter(&self) -> f64 {
        match self {
            SpaceDescriptor::Product(a, b) => a.diameter() + b.diameter(),
            SpaceDescriptor::HalfLine => f64::INFINITY,
            _ => self.bounds().map(|(lo, hi)| hi - lo).unwrap_or(0.0),
        }
    }

    /// Membership test for a single point.
    pub fn contains(&self, p: &PointVal) -> bool {
        if !p.x.is_finite() || !p.y.is_finite() {
            return false;
        }
        match self {
            SpaceDescriptor::Interval(s) => s.contains(p),
            SpaceDescriptor::Union(v) => v.iter().any(|s| s.contains(p)),
            SpaceDescriptor::Harmonic { extras } => {
                if p.label == 0 {
                    extras.contains(&p.x)
                } else {
                    p.x == harmonic_value(p.label)
                }
            }
            SpaceDescriptor::Dyadic { first } => {
                p.label >= *first as u64 && p.label <= 1074 && p.x == dyadic_value(p.label)
            }
            SpaceDescriptor::FunctionInduced(seq) => p.label >= 1 && seq.value(p.label) == p.x,
            SpaceDescriptor::Cantor => cantor::in_cantor_f64(p.x),
            SpaceDescriptor::HalfLine => p.x > 0.0,
            SpaceDescriptor::Product(a, b) => {
                a.contains(&PointVal::real(p.x)) && b.contains(&PointVal::real(p.y))
            }
            SpaceDescriptor::Finite(k) => k.contains(p),
        }
    }

    /// The canonical point of a sequence set or function-induced space with
    /// index `n`.
    pub fn indexed_point(&self, n: u64) -> Option<PointVal> {
        match self {
            SpaceDescriptor::Harmonic { .. } if n >= 1 => {
                Some(PointVal::indexed(n, harmonic_value(n)))
            }
            SpaceDescriptor::Dyadic { first } if n >= *first as u64 && n <= 1074 => {
                Some(PointVal::indexed(n, dyadic_value(n)))
            }
            SpaceDescriptor::FunctionInduced(seq) if n >= 1 => {
                Some(PointVal::indexed(n, seq.value(n)))
            }
            _ => None,
        }
    }
}

pub fn harmonic_value(n: u64) -> f64 {
    1.0 / n as f64
}

/// Exact `2^-n` for `0 <= n <= 1074`; zero beyond.
pub fn dyadic_value(n: u64) -> f64 {
    if n <= 1022 {
        f64::from_bits((1023 - n) << 52)
    } else if n <= 1074 {
        f64::from_bits(1u64 << (1074 - n))
    } else {
        0.0
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cantor::CantorLadder;
use super::{dyadic_value, harmonic_value, Segment, Sequence, SpaceDescriptor};
use crate::error::{Error, Result};
use crate::metric_core::{gap_to_space, is_stretched, FiniteSet, GapBound, PointVal, TAG_IRRATIONAL};

/// Level to resolution mapping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    /// `start + step * (level - 1)`.
    Linear { start: u64, step: u64 },
    /// `start * factor^(level - 1)`, saturating.
    Geometric { start: u64, factor: u64 },
}

impl Schedule {
    pub fn linear(start: u64, step: u64) -> Self {
        Schedule::Linear { start, step }
    }

    pub fn geometric(start: u64, factor: u64) -> Self {
        Schedule::Geometric { start, factor }
    }

    pub fn size(&self, level: usize) -> u64 {
        let l = level.max(1) as u64 - 1;
        match *self {
            Schedule::Linear { start, step } => start.saturating_add(step.saturating_mul(l)),
            Schedule::Geometric { start, factor } => {
                let mut v = start;
                for _ in 0..l {
                    v = v.saturating_mul(factor);
                }
                v
            }
        }
    }
}

/// Representative rule for evenly distributed bins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdsRule {
    /// Point of the bin closest to the bin centre.
    Midpoint,
    /// Point of the bin closest to the bin's lower end.
    Infimum,
    /// Seeded uniform choice inside the bin.
    Random(u64),
}

/// How the bins `[a + i h, a + (i + 1) h)` cover `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinConvention {
    /// `n` bins, the last one closed at `b`.
    ClosedLast,
    /// `n + 1` half-open bins; the last holds only `b`.
    Overshoot,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    /// Interval `[a, b]`: `{a + i (b - a) / n : 0 <= i <= n}`; half-line:
    /// `{i / n : 1 <= i <= n^2}`; products: grid in both factors.
    UniformGrid,
    /// `{a + (i + theta) (b - a) / n : 0 <= i < n}`.
    OffsetGrid { theta: f64 },
    /// Offset grid at `theta = sqrt 2 - 1`, every point tagged irrational.
    IrrationalGrid,
    /// First `n` points of a sequence space.
    Prefix,
    /// `{2^-m : first <= m < first + n}`, certified stretched.
    StretchedDyadic,
    /// Labels `offset + stride * j` for `j < n`, plus fixed extra labels.
    LabelStride { offset: u64, stride: u64, extras: Vec<u64> },
    /// Nested stratification with `2^depth` cells, one seeded point each.
    RandomizedSdense { seed: u64 },
    EdsBins { rule: EdsRule, convention: BinConvention },
    /// Cantor ladder `K_(level + 1)`.
    CantorK,
    /// Cantor ladder `L_(level + 1)`.
    CantorL,
    /// Prefix of length `n` plus the `k_factor * n` largest positive terms
    /// of `seq` beyond it.
    AdversarialTail { seq: Sequence, k_factor: f64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::UniformGrid => "grid",
            Strategy::OffsetGrid { .. } => "offset-grid",
            Strategy::IrrationalGrid => "irrational-grid",
            Strategy::Prefix => "prefix",
            Strategy::StretchedDyadic => "stretched-dyadic",
            Strategy::LabelStride { .. } => "label-stride",
            Strategy::RandomizedSdense { .. } => "randomized-sdense",
            Strategy::EdsBins { .. } => "eds-bins",
            Strategy::CantorK => "cantor-k",
            Strategy::CantorL => "cantor-l",
            Strategy::AdversarialTail { .. } => "adversarial-tail",
        }
    }
}

/// A refinement ladder: strategy plus level schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerSpec {
    pub strategy: Strategy,
    pub schedule: Schedule,
}

impl SamplerSpec {
    pub fn new(strategy: Strategy, schedule: Schedule) -> Self {
        SamplerSpec { strategy, schedule }
    }

    pub fn grid(schedule: Schedule) -> Self {
        Self::new(Strategy::UniformGrid, schedule)
    }

    pub fn prefix(schedule: Schedule) -> Self {
        Self::new(Strategy::Prefix, schedule)
    }

    pub fn stretched_dyadic(schedule: Schedule) -> Self {
        Self::new(Strategy::StretchedDyadic, schedule)
    }

    pub fn randomized(seed: u64) -> Self {
        Self::new(Strategy::RandomizedSdense { seed }, Schedule::linear(1, 1))
    }

    pub fn eds(rule: EdsRule, schedule: Schedule) -> Self {
        Self::new(Strategy::EdsBins { rule, convention: BinConvention::ClosedLast }, schedule)
    }

    pub fn cantor_k() -> Self {
        Self::new(Strategy::CantorK, Schedule::linear(1, 1))
    }

    pub fn cantor_l() -> Self {
        Self::new(Strategy::CantorL, Schedule::linear(1, 1))
    }
}

/// A sampled set with its certified gap. `envelope` is a sampler-side
/// bound `>= gap.hi` that is nonincreasing in the level.
#[derive(Clone, Debug)]
pub struct Sample {
    pub level: usize,
    pub set: FiniteSet,
    pub gap: GapBound,
    pub envelope: f64,
}

fn mismatch(spec: &SamplerSpec, space: &SpaceDescriptor) -> Error {
    Error::KindMismatch { sampler: spec.strategy.name().into(), space: space.kind_name().into() }
}

fn grid_points(s: &Segment, n: u64, theta: Option<f64>, label: u64) -> Vec<PointVal> {
    let h = s.len() / n as f64;
    let pts: Vec<f64> = match theta {
        None => (0..=n).map(|i| if i == n { s.hi } else { s.lo + i as f64 * h }).collect(),
        Some(t) => (0..n).map(|i| s.lo + (i as f64 + t) * h).collect(),
    };
    pts.into_iter().filter(|&x| s.contains_x(x)).map(|x| PointVal::tagged(x, label)).collect()
}

fn line_grid(space: &SpaceDescriptor, n: u64, theta: Option<f64>, label: u64) -> Option<FiniteSet> {
    let segs = space.segments()?;
    let mut pts = Vec::new();
    for s in &segs {
        pts.extend(grid_points(s, n, theta, label));
    }
    Some(FiniteSet::new(pts))
}

fn product_of(a: &FiniteSet, b: &FiniteSet) -> FiniteSet {
    let mut v = Vec::with_capacity(a.len() * b.len());
    for p in a.iter() {
        for q in b.iter() {
            v.push(PointVal::pair(p.x, q.x));
        }
    }
    FiniteSet::new(v)
}

/// Seeded nested stratification of one segment into `2^depth` cells.
fn nested_random(s: &Segment, depth: u32, seed: u64) -> Vec<f64> {
    let draw = |d: u32, j: u64, lo: f64, w: f64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((d as u64) << 56) ^ j.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let u: f64 = rng.gen_range(0.05..0.95);
        lo + u * w
    };
    let mut pts = vec![draw(0, 0, s.lo, s.len())];
    let mut w = s.len();
    for d in 1..=depth {
        w *= 0.5;
        let mut next = Vec::with_capacity(pts.len() * 2);
        for (j, &p) in pts.iter().enumerate() {
            let left = s.lo + 2.0 * j as f64 * w;
            let child = 2 * j as u64;
            if p < left + w {
                next.push(p);
                next.push(draw(d, child + 1, left + w, w));
            } else {
                next.push(draw(d, child, left, w));
                next.push(p);
            }
        }
        pts = next;
    }
    pts
}

fn depth_for(n: u64) -> u32 {
    (64 - n.max(1).saturating_sub(1).leading_zeros()).min(24)
}

/// The level-th set of the ladder, with its certified gap.
pub fn refine(space: &SpaceDescriptor, spec: &SamplerSpec, level: usize) -> Result<Sample> {
    if level == 0 {
        return Err(Error::domain("levels start at 1"));
    }
    let n = spec.schedule.size(level).max(1);
    let mut envelope = None;
    let set = match (&spec.strategy, space) {
        (Strategy::UniformGrid, SpaceDescriptor::HalfLine) => {
            let m = n.min(4096);
            let set = FiniteSet::new((1..=m * m).map(|i| PointVal::real(i as f64 / m as f64)).collect());
            let g = 1.0 / m as f64;
            return Ok(Sample { level, set, gap: GapBound { lo: g, hi: g, attained: false }, envelope: g });
        }
        (Strategy::UniformGrid, SpaceDescriptor::Product(a, b)) => {
            let sa = refine(a, spec, level)?;
            let sb = refine(b, spec, level)?;
            product_of(&sa.set, &sb.set)
        }
        (Strategy::UniformGrid, SpaceDescriptor::Finite(s)) => s.clone(),
        (Strategy::UniformGrid, _) => line_grid(space, n, None, 0).ok_or_else(|| mismatch(spec, space))?,
        (Strategy::OffsetGrid { theta }, _) => {
            if !(0.0..=1.0).contains(theta) {
                return Err(Error::domain(format!("offset theta {theta} outside [0,1]")));
            }
            line_grid(space, n, Some(*theta), 0).ok_or_else(|| mismatch(spec, space))?
        }
        (Strategy::IrrationalGrid, _) => line_grid(space, n, Some(std::f64::consts::SQRT_2 - 1.0), TAG_IRRATIONAL)
            .ok_or_else(|| mismatch(spec, space))?,
        (Strategy::Prefix, SpaceDescriptor::Harmonic { .. })
        | (Strategy::Prefix, SpaceDescriptor::FunctionInduced(_)) => FiniteSet::from_indices(space, 1..=n)?,
        (Strategy::Prefix | Strategy::StretchedDyadic, SpaceDescriptor::Dyadic { first }) => {
            let f = *first as u64;
            let last = (f + n - 1).min(1074);
            let set = FiniteSet::from_indices(space, f..=last)?;
            if matches!(spec.strategy, Strategy::StretchedDyadic) && !is_stretched(&set, space)? {
                return Err(Error::NotStretched { level });
            }
            set
        }
        (Strategy::LabelStride { offset, stride, extras }, SpaceDescriptor::Harmonic { .. } | SpaceDescriptor::FunctionInduced(_) | SpaceDescriptor::Dyadic { .. }) => {
            if *stride == 0 || *offset == 0 {
                return Err(Error::domain("label stride and offset must be positive"));
            }
            let labels = (0..n).map(|j| offset + stride * j).chain(extras.iter().copied());
            FiniteSet::from_indices(space, labels)?
        }
        (Strategy::RandomizedSdense { seed }, _) => {
            // One extra halving per level keeps the ladder nested.
            let depth = (depth_for(spec.schedule.size(1)) + level as u32 - 1).min(22);
            match space {
                SpaceDescriptor::Product(a, b) => {
                    let sa = refine(a, spec, level)?;
                    let sb = refine(b, &SamplerSpec { strategy: Strategy::RandomizedSdense { seed: seed.wrapping_add(1) }, ..spec.clone() }, level)?;
                    envelope = Some(sa.envelope + sb.envelope);
                    product_of(&sa.set, &sb.set)
                }
                _ => {
                    let segs = space.segments().ok_or_else(|| mismatch(spec, space))?;
                    let mut pts = Vec::new();
                    let mut env = 0.0f64;
                    for (i, s) in segs.iter().enumerate() {
                        let w = s.len() / (1u64 << depth) as f64;
                        env = env.max(w);
                        for x in nested_random(s, depth, seed.wrapping_add(i as u64 * 7919)) {
                            if s.contains_x(x) {
                                pts.push(PointVal::real(x));
                            }
                        }
                    }
                    envelope = Some(env);
                    FiniteSet::new(pts)
                }
            }
        }
        (Strategy::EdsBins { rule, convention }, _) => {
            let set = eds_bins(space, n, *rule, *convention)?;
            if let Some((a, b)) = space.bounds() {
                // Any point of a bin lies within one bin width of its representative.
                envelope = Some((b - a) / n as f64);
            }
            set
        }
        (Strategy::CantorK, SpaceDescriptor::Cantor) => CantorLadder::new(level as u32 + 1)?.k_set(),
        (Strategy::CantorL, SpaceDescriptor::Cantor) => CantorLadder::new(level as u32 + 1)?.l_set(),
        (Strategy::AdversarialTail { seq, k_factor }, SpaceDescriptor::Harmonic { .. }) => {
            let k = (k_factor * n as f64).round().max(0.0) as u64;
            adversarial_series_sampler(seq, n, k)
        }
        _ => return Err(mismatch(spec, space)),
    };
    let gap = gap_to_space(&set, space)?;
    let envelope = envelope.map(|e| e.max(gap.hi)).unwrap_or(gap.hi);
    Ok(Sample { level, set, gap, envelope })
}

/// Smallest `n >= first` with `pred(n)` for a predicate that is false then
/// true along `n`.
fn first_true(first: u64, limit: u64, pred: impl Fn(u64) -> bool) -> u64 {
    if pred(first) {
        return first;
    }
    let mut lo = first;
    let mut step = 1u64;
    let mut hi = first + 1;
    while hi < limit && !pred(hi) {
        lo = hi;
        step *= 2;
        hi = (first + step).min(limit);
    }
    if hi >= limit && !pred(hi) {
        return limit;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Points of a decreasing sequence set inside the bin `[lo, hi)` (closed at
/// `hi` when `closed`): the first one and the two nearest to `target`.
fn seq_candidates(
    value: &dyn Fn(u64) -> f64,
    first: u64,
    lo: f64,
    hi: f64,
    closed: bool,
    target: f64,
) -> Vec<(u64, f64)> {
    let limit = 1u64 << 40;
    let below_hi = |n: u64| value(n) < hi || (closed && value(n) == hi);
    let n0 = first_true(first, limit, below_hi);
    if n0 >= limit || value(n0) < lo {
        return Vec::new();
    }
    let mut out = vec![(n0, value(n0))];
    let n1 = first_true(n0, limit, |n| value(n) < target.max(lo));
    for m in [n1.saturating_sub(1), n1] {
        if m >= n0 && m < limit && value(m) >= lo {
            out.push((m, value(m)));
        }
    }
    out
}

/// One representative per nonempty bin of `H`.
pub fn eds_bins(space: &SpaceDescriptor, n: u64, rule: EdsRule, convention: BinConvention) -> Result<FiniteSet> {
    if n == 0 {
        return Err(Error::domain("eds needs at least one bin"));
    }
    let (a, b) = space.bounds().ok_or_else(|| Error::unresolved(format!("{} has no known bounds", space.kind_name())))?;
    let h = (b - a) / n as f64;
    let nbins = match convention {
        BinConvention::ClosedLast => n,
        BinConvention::Overshoot => n + 1,
    };
    let mut pts = Vec::new();
    for i in 0..nbins {
        let lo = a + i as f64 * h;
        let (hi, closed) = match convention {
            BinConvention::ClosedLast if i + 1 == n => (b, true),
            _ => (a + (i + 1) as f64 * h, false),
        };
        if h == 0.0 && i > 0 {
            break;
        }
        let mut rng = match rule {
            EdsRule::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed ^ (n << 20) ^ i)),
            _ => None,
        };
        let target = match rule {
            EdsRule::Midpoint => 0.5 * (lo + hi),
            EdsRule::Infimum => lo,
            EdsRule::Random(_) => lo + rng.as_mut().map(|r| r.gen::<f64>()).unwrap_or(0.5) * (hi - lo),
        };
        if let Some(p) = bin_representative(space, lo, hi, closed || h == 0.0, target, rng.as_mut())? {
            pts.push(p);
        }
    }
    FiniteSet::try_new(pts)
}

fn bin_representative(
    space: &SpaceDescriptor,
    lo: f64,
    hi: f64,
    closed: bool,
    target: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<Option<PointVal>> {
    let pick = |c: Vec<PointVal>| {
        c.into_iter().min_by(|p, q| (p.x - target).abs().total_cmp(&(q.x - target).abs()).then(p.x.total_cmp(&q.x)))
    };
    match space {
        SpaceDescriptor::Interval(_) | SpaceDescriptor::Union(_) => {
            let mut cands = Vec::new();
            for s in space.segments().unwrap_or_default() {
                let l = s.lo.max(lo);
                let r = s.hi.min(hi);
                if l > r {
                    continue;
                }
                let x = target.clamp(l, r);
                let bin_ok = |x: f64| x >= lo && (x < hi || (closed && x == hi));
                if s.contains_x(x) && bin_ok(x) {
                    cands.push(PointVal::real(x));
                } else if l < r {
                    let mid = 0.5 * (l + r);
                    let inner = if x <= l { l + (r - l) * 1e-9 } else if x >= r { r - (r - l) * 1e-9 } else { mid };
                    if s.contains_x(inner) && bin_ok(inner) {
                        cands.push(PointVal::real(inner));
                    }
                }
            }
            let _ = rng;
            Ok(pick(cands))
        }
        SpaceDescriptor::Harmonic { extras } => {
            let v = |n: u64| harmonic_value(n);
            let mut c: Vec<PointVal> =
                seq_candidates(&v, 1, lo, hi, closed, target).into_iter().map(|(n, x)| PointVal::indexed(n, x)).collect();
            c.extend(extras.iter().filter(|&&e| e >= lo && (e < hi || (closed && e == hi))).map(|&e| PointVal::real(e)));
            Ok(pick(c))
        }
        SpaceDescriptor::Dyadic { first } => {
            let v = |n: u64| dyadic_value(n);
            let c = seq_candidates(&v, *first as u64, lo, hi, closed, target)
                .into_iter()
                .filter(|(n, _)| *n <= 1074)
                .map(|(n, x)| PointVal::indexed(n, x))
                .collect();
            Ok(pick(c))
        }
        SpaceDescriptor::Finite(s) => {
            let c = s.iter().copied().filter(|p| p.x >= lo && (p.x < hi || (closed && p.x == hi))).collect();
            Ok(pick(c))
        }
        _ => Err(Error::unresolved(format!("bin membership in {} is not resolvable", space.kind_name()))),
    }
}

/// Prefix `{1, ..., 1/N}` plus the indices of the `k` largest positive
/// terms of `a` beyond `N`, as points of the harmonic set.
pub fn adversarial_series_sampler(a: &Sequence, n: u64, k: u64) -> FiniteSet {
    let mut pts: Vec<PointVal> = (1..=n).map(|i| PointVal::indexed(i, harmonic_value(i))).collect();
    if k > 0 {
        let scan_to = n + 8 * k + 64;
        let mut tail: Vec<(u64, f64)> = (n + 1..=scan_to).map(|i| (i, a.value(i))).filter(|&(_, v)| v > 0.0).collect();
        tail.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        pts.extend(tail.into_iter().take(k as usize).map(|(i, _)| PointVal::indexed(i, harmonic_value(i))));
    }
    FiniteSet::new(pts)
}

//! Pseudo-metric and Hausdorff-distance primitives.
//!
//! Balls follow the usual convention: `S(x, r)` is open, `B(x, r)` closed.
//! Float comparisons that decide a predicate use [`FLOAT_TOL`] as a relative
//! tolerance.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spaces::{cantor, dyadic_value, harmonic_value, Segment, Sequence, SpaceDescriptor};

pub const FLOAT_TOL: f64 = 1e-12;

/// Label marking a line point that stands in for an irrational number.
pub const TAG_IRRATIONAL: u64 = 1;

/// A point of a space. See [`SpaceDescriptor`] for the label conventions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointVal {
    pub label: u64,
    pub x: f64,
    pub y: f64,
}

impl PointVal {
    pub fn real(x: f64) -> Self {
        PointVal { label: 0, x, y: 0.0 }
    }

    pub fn tagged(x: f64, label: u64) -> Self {
        PointVal { label, x, y: 0.0 }
    }

    pub fn indexed(n: u64, x: f64) -> Self {
        PointVal { label: n, x, y: 0.0 }
    }

    pub fn pair(x: f64, y: f64) -> Self {
        PointVal { label: 0, x, y }
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then(self.y.total_cmp(&other.y))
            .then(self.label.cmp(&other.label))
    }
}

/// A finite set of identity-distinct points, sorted by `(x, y, label)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FiniteSet {
    pts: Vec<PointVal>,
}

impl FiniteSet {
    pub fn empty() -> Self {
        FiniteSet { pts: Vec::new() }
    }

    /// Panics on non-finite coordinates.
    pub fn new(pts: Vec<PointVal>) -> Self {
        Self::try_new(pts).expect("non-finite coordinate in FiniteSet")
    }

    pub fn try_new(mut pts: Vec<PointVal>) -> Result<Self> {
        if let Some(p) = pts.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::domain(format!("non-finite coordinate {:?}", p)));
        }
        pts.sort_by(PointVal::key_cmp);
        pts.dedup_by(|a, b| a.key_cmp(b) == Ordering::Equal);
        Ok(FiniteSet { pts })
    }

    pub fn from_reals(xs: &[f64]) -> Self {
        Self::new(xs.iter().map(|&x| PointVal::real(x)).collect())
    }

    pub fn from_indices(space: &SpaceDescriptor, ns: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut pts = Vec::new();
        for n in ns {
            pts.push(space.indexed_point(n).ok_or_else(|| {
                Error::NotInSpace(format!("index {n} in {}", space.kind_name()))
            })?);
        }
        Self::try_new(pts)
    }

    pub fn points(&self) -> &[PointVal] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PointVal> {
        self.pts.iter()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.pts.iter().map(|p| p.x).collect()
    }

    pub fn union(&self, other: &FiniteSet) -> FiniteSet {
        let mut v = self.pts.clone();
        v.extend_from_slice(&other.pts);
        FiniteSet::new(v)
    }

    pub fn contains(&self, p: &PointVal) -> bool {
        self.pts.binary_search_by(|q| q.key_cmp(p)).is_ok()
    }

    pub fn is_subset(&self, other: &FiniteSet) -> bool {
        self.pts.iter().all(|p| other.contains(p))
    }

    pub fn min_x(&self) -> f64 {
        self.pts.first().map(|p| p.x).unwrap_or(f64::NAN)
    }

    pub fn max_x(&self) -> f64 {
        self.pts.last().map(|p| p.x).unwrap_or(f64::NAN)
    }

    pub fn filter(&self, keep: impl Fn(&PointVal) -> bool) -> FiniteSet {
        FiniteSet { pts: self.pts.iter().copied().filter(|p| keep(p)).collect() }
    }
}

impl FromIterator<PointVal> for FiniteSet {
    fn from_iter<T: IntoIterator<Item = PointVal>>(iter: T) -> Self {
        FiniteSet::new(iter.into_iter().collect())
    }
}

/// Bracket on `d_H(K, I)`. `attained` tells whether the supremum in the
/// directed distance from `I` is reached by a point of `I`; it matters only
/// when `lo == hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapBound {
    pub lo: f64,
    pub hi: f64,
    pub attained: bool,
}

impl GapBound {
    fn exact(v: f64, attained: bool) -> Self {
        GapBound { lo: v, hi: v, attained }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

/// Hausdorff distance between two nonempty finite sets under `d`.
pub fn hausdorff_finite(
    k: &FiniteSet,
    l: &FiniteSet,
    d: impl Fn(&PointVal, &PointVal) -> f64,
) -> Result<f64> {
    if k.is_empty() || l.is_empty() {
        return Err(Error::domain("hausdorff distance of an empty set"));
    }
    let directed = |a: &FiniteSet, b: &FiniteSet| {
        a.iter()
            .map(|p| b.iter().map(|q| d(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(k, l).max(directed(l, k)))
}

/// Hausdorff distance under the metric of `space`.
pub fn hausdorff_in(k: &FiniteSet, l: &FiniteSet, space: &SpaceDescriptor) -> Result<f64> {
    hausdorff_finite(k, l, |p, q| space.dist(p, q))
}

/// Distance from `x` to the nearest entry of the sorted slice `xs`.
pub fn dist_sorted(x: f64, xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::INFINITY;
    }
    let i = xs.partition_point(|&v| v < x);
    let mut best = f64::INFINITY;
    if i < xs.len() {
        best = best.min(xs[i] - x);
    }
    if i > 0 {
        best = best.min(x - xs[i - 1]);
    }
    best
}

fn sorted_xs(k: &FiniteSet) -> Vec<f64> {
    let mut v = k.xs();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Running maximum with an attainment flag; ties prefer attained.
#[derive(Clone, Copy)]
struct SupTracker {
    v: f64,
    attained: bool,
}

impl SupTracker {
    fn new() -> Self {
        SupTracker { v: 0.0, attained: true }
    }

    fn push(&mut self, v: f64, attained: bool) {
        if v > self.v || (v == self.v && attained && !self.attained) {
            self.v = v;
            self.attained = attained;
        } else if v == self.v && attained {
            self.attained = true;
        }
    }
}

/// `sup_{x in segments} dist(x, xs)` for sorted `xs`.
fn segments_sup(segs: &[Segment], xs: &[f64]) -> SupTracker {
    let mut sup = SupTracker::new();
    for s in segs {
        if s.hi < s.lo || (s.hi == s.lo && (s.lo_open || s.hi_open)) {
            continue;
        }
        sup.push(dist_sorted(s.lo, xs), !s.lo_open);
        sup.push(dist_sorted(s.hi, xs), !s.hi_open);
        let i0 = xs.partition_point(|&v| v < s.lo);
        let mut i = i0.saturating_sub(1);
        while i + 1 < xs.len() && xs[i] < s.hi {
            let m = 0.5 * (xs[i] + xs[i + 1]);
            if s.contains_x(m) {
                sup.push(0.5 * (xs[i + 1] - xs[i]), true);
            }
            i += 1;
        }
    }
    sup
}

fn dist_to_segments(x: f64, segs: &[Segment]) -> f64 {
    segs.iter()
        .map(|s| {
            if x < s.lo {
                s.lo - x
            } else if x > s.hi {
                x - s.hi
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Sequence set `{value(n) : n >= first}` decreasing to 0, plus extras.
struct SeqSet<'a> {
    first: u64,
    value: &'a dyn Fn(u64) -> f64,
    /// Real `n` with `value(n) = t`, for `t` in `(0, value(first)]`.
    inverse: &'a dyn Fn(f64) -> f64,
    extras: &'a [f64],
}

fn seqset_sup(set: &SeqSet<'_>, k: &FiniteSet) -> SupTracker {
    let xs = sorted_xs(k);
    let mut sup = SupTracker::new();
    for &e in set.extras {
        sup.push(dist_sorted(e, &xs), true);
    }
    if xs.is_empty() {
        return sup;
    }
    let q = xs.iter().copied().find(|&v| v > 0.0);
    let p = xs.iter().copied().rev().find(|&v| v <= 0.0);
    // Scan until every positive point of K lies above the tail.
    let mut b = set.first;
    if let Some(q) = q {
        let nq = (set.inverse)(q).ceil();
        b = b.max(if nq.is_finite() { nq as u64 } else { b });
    }
    let cap = 1u64 << 26;
    let b = b.min(cap);
    for n in set.first..=b {
        sup.push(dist_sorted((set.value)(n), &xs), true);
    }
    let tmax = (set.value)(b + 1);
    if tmax <= 0.0 {
        return sup;
    }
    let q = q.filter(|&q| q > tmax);
    match (p, q) {
        (None, None) => {}
        (Some(p), None) => sup.push(tmax - p, true),
        (None, Some(q)) => sup.push(q, false),
        (Some(p), Some(q)) => {
            let t_star = 0.5 * (p + q);
            if t_star <= 0.0 {
                sup.push(q, false);
            } else if t_star >= tmax {
                sup.push(tmax - p, true);
            } else {
                let n_star = (set.inverse)(t_star);
                let lo = (n_star.floor() as u64).max(b + 1);
                for n in lo..=lo + 2 {
                    sup.push(dist_sorted((set.value)(n), &xs), true);
                }
                sup.push(dist_sorted(tmax, &xs), true);
                // The limit point 0 is approached but not a member.
                sup.push(q.min(-p), false);
            }
        }
    }
    sup
}

fn directed_k_to_segments(k: &FiniteSet, segs: &[Segment]) -> f64 {
    k.iter().map(|p| dist_to_segments(p.x, segs)).fold(0.0, f64::max)
}

/// Upper bound on `d_H(K, I)` when `K` is empty.
fn empty_gap(space: &SpaceDescriptor) -> Result<GapBound> {
    let d = space.diameter();
    if !d.is_finite() {
        return Err(Error::domain("gap of the empty set in an unbounded space"));
    }
    Ok(GapBound { lo: 0.5 * d, hi: d, attained: true })
}

/// `d_H(K, I)` bracket. Exact for line, sequence and finite spaces.
pub fn gap_to_space(k: &FiniteSet, space: &SpaceDescriptor) -> Result<GapBound> {
    if k.is_empty() {
        return empty_gap(space);
    }
    match space {
        SpaceDescriptor::Interval(_) | SpaceDescriptor::Union(_) => {
            let segs = space.segments().unwrap_or_default();
            let xs = sorted_xs(k);
            let mut sup = segments_sup(&segs, &xs);
            sup.push(directed_k_to_segments(k, &segs), true);
            Ok(GapBound::exact(sup.v, sup.attained))
        }
        SpaceDescriptor::Harmonic { extras } => {
            let value = |n: u64| harmonic_value(n);
            let inverse = |t: f64| 1.0 / t;
            let sup = seqset_sup(&SeqSet { first: 1, value: &value, inverse: &inverse, extras }, k);
            Ok(GapBound::exact(sup.v, sup.attained))
        }
        SpaceDescriptor::Dyadic { first } => {
            let value = |n: u64| dyadic_value(n);
            let inverse = |t: f64| -t.log2();
            let sup = seqset_sup(
                &SeqSet { first: *first as u64, value: &value, inverse: &inverse, extras: &[] },
                k,
            );
            Ok(GapBound::exact(sup.v, sup.attained))
        }
        SpaceDescriptor::FunctionInduced(seq) => function_induced_gap(k, seq),
        SpaceDescriptor::Cantor => Ok(cantor_gap(k)),
        SpaceDescriptor::Finite(s) => {
            let xs = sorted_xs(k);
            let sx = sorted_xs(s);
            let a = s.iter().map(|p| dist_sorted(p.x, &xs)).fold(0.0, f64::max);
            let b = k.iter().map(|p| dist_sorted(p.x, &sx)).fold(0.0, f64::max);
            Ok(GapBound::exact(a.max(b), true))
        }
        SpaceDescriptor::Product(a, b) => product_gap(k, a, b),
        SpaceDescriptor::HalfLine => {
            Err(Error::domain("the half-line is not totally bounded; use is_delta_dense_halfline"))
        }
    }
}

fn function_induced_gap(k: &FiniteSet, seq: &Sequence) -> Result<GapBound> {
    let acc = seq
        .accumulation()
        .ok_or_else(|| Error::unresolved(format!("no cluster data for {}", seq.name())))?;
    let vals = sorted_xs(k);
    let max_label = k.iter().map(|p| p.label).max().unwrap_or(1);
    let mut probe = max_label.max(64);
    let cap = 1u64 << 22;
    let mut tail = seq
        .tail_radius(probe)
        .ok_or_else(|| Error::unresolved(format!("no tail envelope for {}", seq.name())))?;
    while tail > FLOAT_TOL && probe < cap {
        probe *= 2;
        tail = seq.tail_radius(probe).unwrap_or(f64::INFINITY);
    }
    let mut scan = 0.0f64;
    for n in 1..=probe {
        scan = scan.max(dist_sorted(seq.value(n), &vals));
    }
    let acc_d = acc.iter().map(|&c| dist_sorted(c, &vals)).fold(0.0, f64::max);
    let lo = scan.max(acc_d);
    let hi = scan.max(acc_d + tail);
    Ok(GapBound { lo, hi, attained: lo == scan })
}

/// Nearest members of the Cantor set below and above `m`, within the
/// level-`depth` construction; `None` when `m` survives every level.
fn cantor_neighbors(m: f64, depth: u32) -> Option<(f64, f64)> {
    if m <= 0.0 {
        return Some((0.0, 0.0));
    }
    if m >= 1.0 {
        return Some((1.0, 1.0));
    }
    let mut a = 0.0f64;
    let mut w = 1.0f64;
    for _ in 0..depth {
        w /= 3.0;
        let l = a + w;
        let r = a + 2.0 * w;
        if m > l && m < r {
            return Some((l, r));
        }
        if m >= r {
            a = r;
        }
    }
    None
}

const CANTOR_DEPTH: u32 = 30;

fn cantor_gap(k: &FiniteSet) -> GapBound {
    let xs = sorted_xs(k);
    let mut lo = xs[0].max(1.0 - xs[xs.len() - 1]);
    let mut hi = lo;
    let slack = 3f64.powi(-(CANTOR_DEPTH as i32));
    for w in xs.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        match cantor_neighbors(m, CANTOR_DEPTH) {
            Some((l, r)) => {
                let v = dist_sorted(l, &xs).max(dist_sorted(r, &xs));
                lo = lo.max(v);
                hi = hi.max(v);
            }
            None => {
                let v = 0.5 * (w[1] - w[0]);
                lo = lo.max(v - slack);
                hi = hi.max(v);
            }
        }
    }
    GapBound { lo: lo.max(0.0), hi, attained: true }
}

fn product_gap(k: &FiniteSet, a: &SpaceDescriptor, b: &SpaceDescriptor) -> Result<GapBound> {
    let xs = sorted_xs(k);
    let mut ys: Vec<f64> = k.iter().map(|p| p.y).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    if xs.len() * ys.len() == k.len() {
        let ga = gap_to_space(&FiniteSet::from_reals(&xs), a)?;
        let gb = gap_to_space(&FiniteSet::from_reals(&ys), b)?;
        return Ok(GapBound {
            lo: ga.lo + gb.lo,
            hi: ga.hi + gb.hi,
            attained: ga.attained && gb.attained,
        });
    }
    let (Some((ax, bx)), Some((ay, by))) = (a.bounds(), b.bounds()) else {
        return Err(Error::unresolved("product factor without bounds"));
    };
    if a.segments().is_none() || b.segments().is_none() {
        return Err(Error::unresolved("probe bracket needs interval factors"));
    }
    let m = 64usize;
    let hx = (bx - ax) / m as f64;
    let hy = (by - ay) / m as f64;
    let mut lo = 0.0f64;
    for i in 0..=m {
        for j in 0..=m {
            let p = PointVal::pair(ax + i as f64 * hx, ay + j as f64 * hy);
            let d = k.iter().map(|q| (p.x - q.x).abs() + (p.y - q.y).abs()).fold(f64::INFINITY, f64::min);
            lo = lo.max(d);
        }
    }
    Ok(GapBound { lo, hi: lo + 0.5 * (hx + hy), attained: true })
}

/// Open `delta`-balls around `K` cover `I`.
pub fn is_delta_dense(k: &FiniteSet, space: &SpaceDescriptor, delta: f64) -> Result<bool> {
    if k.is_empty() || !(delta > 0.0) {
        return Ok(false);
    }
    let g = gap_to_space(k, space)?;
    if g.is_exact() {
        Ok(g.hi < delta || (g.hi == delta && !g.attained))
    } else {
        Ok(g.hi < delta)
    }
}

/// `d_H(K, I) < delta`; conservative on bracketed spaces.
pub fn is_sdense(k: &FiniteSet, space: &SpaceDescriptor, delta: f64) -> Result<bool> {
    if k.is_empty() || !(delta > 0.0) {
        return Ok(false);
    }
    Ok(gap_to_space(k, space)?.hi < delta)
}

/// Smallest pseudo-distance between two distinct points of `K`.
pub fn min_pairwise(k: &FiniteSet, space: &SpaceDescriptor) -> f64 {
    let pts = k.points();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    if space.is_one_dimensional() {
        // Sorted by x, so neighbours realise the minimum.
        pts.windows(2).map(|w| (w[1].x - w[0].x).abs()).fold(f64::INFINITY, f64::min)
    } else {
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.min(space.dist(&pts[i], &pts[j]));
            }
        }
        best
    }
}

/// Every pair of distinct points is at least `d_H(K, I)` apart.
pub fn is_stretched(k: &FiniteSet, space: &SpaceDescriptor) -> Result<bool> {
    if k.len() < 2 {
        return Ok(true);
    }
    let gap = gap_to_space(k, space)?.hi;
    Ok(min_pairwise(k, space) >= gap * (1.0 - FLOAT_TOL))
}

/// Every pair of distinct points is more than `d_H(K, I)` apart.
pub fn is_strongly_stretched(k: &FiniteSet, space: &SpaceDescriptor) -> Result<bool> {
    if k.len() < 2 {
        return Ok(true);
    }
    let gap = gap_to_space(k, space)?.hi;
    Ok(min_pairwise(k, space) > gap * (1.0 + FLOAT_TOL))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanOrder {
    /// Leftmost first on line spaces, largest first on sequence sets.
    Natural,
    Reverse,
    Shuffled,
}

/// Probe grid resolving a continuous space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeGrid {
    pub step: f64,
    pub order: ScanOrder,
}

impl ProbeGrid {
    pub fn new(step: f64) -> Self {
        ProbeGrid { step, order: ScanOrder::Natural }
    }

    pub fn with_order(self, order: ScanOrder) -> Self {
        ProbeGrid { order, ..self }
    }
}

fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let m = ((hi - lo) / step).round().max(1.0) as usize;
    (0..=m).map(|i| lo + i as f64 * (hi - lo) / m as f64).collect()
}

/// Points of `space` the greedy scan may pick, in natural order.
fn probe_points(space: &SpaceDescriptor, step: f64, floor: f64) -> Result<Vec<PointVal>> {
    if !(step > 0.0) {
        return Err(Error::unresolved("probe step must be positive"));
    }
    let v = match space {
        SpaceDescriptor::Interval(_) | SpaceDescriptor::Union(_) => {
            let mut v = Vec::new();
            for s in space.segments().unwrap_or_default() {
                for x in lattice(s.lo, s.hi, step) {
                    if s.contains_x(x) {
                        v.push(PointVal::real(x));
                    }
                }
                if s.lo_open && s.hi_open && v.is_empty() && s.lo < s.hi {
                    v.push(PointVal::real(0.5 * (s.lo + s.hi)));
                }
            }
            v
        }
        SpaceDescriptor::Harmonic { extras } => {
            let mut v: Vec<PointVal> = Vec::new();
            let mut n = 1u64;
            while harmonic_value(n) >= floor && n < (1 << 22) {
                v.push(PointVal::indexed(n, harmonic_value(n)));
                n += 1;
            }
            let mut ex: Vec<f64> = extras.clone();
            ex.sort_by(|a, b| b.total_cmp(a));
            v.extend(ex.into_iter().map(PointVal::real));
            v.sort_by(|a, b| b.x.total_cmp(&a.x));
            v
        }
        SpaceDescriptor::Dyadic { first } => {
            let mut v = Vec::new();
            let mut n = *first as u64;
            while n <= 1074 && dyadic_value(n) >= floor {
                v.push(PointVal::indexed(n, dyadic_value(n)));
                n += 1;
            }
            v
        }
        SpaceDescriptor::FunctionInduced(seq) => {
            let mut p = 64u64;
            loop {
                let t = seq
                    .tail_radius(p)
                    .ok_or_else(|| Error::unresolved("no tail envelope for probes"))?;
                if t <= floor || p >= (1 << 22) {
                    break;
                }
                p *= 2;
            }
            (1..=p).map(|n| PointVal::indexed(n, seq.value(n))).collect()
        }
        SpaceDescriptor::Cantor => {
            let mut depth = 0u32;
            while 3f64.powi(-(depth as i32)) > step && depth < 16 {
                depth += 1;
            }
            let ladder = cantor::interval_endpoints(depth);
            ladder.into_iter().map(PointVal::real).collect()
        }
        SpaceDescriptor::Finite(s) => s.points().to_vec(),
        SpaceDescriptor::Product(a, b) => {
            let pa = probe_points(a, step, floor)?;
            let pb = probe_points(b, step, floor)?;
            let mut v = Vec::with_capacity(pa.len() * pb.len());
            for p in &pa {
                for q in &pb {
                    v.push(PointVal::pair(p.x, q.x));
                }
            }
            v
        }
        SpaceDescriptor::HalfLine => return Err(Error::domain("greedy packing needs a bounded space")),
    };
    if v.is_empty() {
        return Err(Error::unresolved("probe grid has no points in the space"));
    }
    Ok(v)
}

/// Chosen points with nearest-distance queries.
struct Chosen<'a> {
    space: &'a SpaceDescriptor,
    pts: Vec<PointVal>,
    xs: Vec<f64>,
}

impl<'a> Chosen<'a> {
    fn new(space: &'a SpaceDescriptor) -> Self {
        Chosen { space, pts: Vec::new(), xs: Vec::new() }
    }

    fn dist(&self, p: &PointVal) -> f64 {
        if self.space.is_one_dimensional() {
            dist_sorted(p.x, &self.xs)
        } else {
            self.pts.iter().map(|q| self.space.dist(p, q)).fold(f64::INFINITY, f64::min)
        }
    }

    fn add(&mut self, p: PointVal) {
        let i = self.xs.partition_point(|&v| v < p.x);
        self.xs.insert(i, p.x);
        self.pts.push(p);
    }
}

fn greedy_scan(
    space: &SpaceDescriptor,
    delta: f64,
    probe: ProbeGrid,
    seed: u64,
    seed_set: &FiniteSet,
) -> Result<FiniteSet> {
    let floor = delta / 64.0;
    let mut probes = probe_points(space, probe.step, floor)?;
    match probe.order {
        ScanOrder::Natural => {}
        ScanOrder::Reverse => probes.reverse(),
        ScanOrder::Shuffled => probes.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
    }
    let radius = 0.5 * delta * (1.0 + 1e-9);
    let mut chosen = Chosen::new(space);
    for p in seed_set.iter() {
        chosen.add(*p);
    }
    for p in probes {
        if chosen.dist(&p) > radius {
            chosen.add(p);
        }
    }
    complete_tail(space, &mut chosen, radius);
    FiniteSet::try_new(chosen.pts)
}

/// On sets accumulating at 0 the probe floor cuts the scan short. Continue
/// it below the smallest chosen point `c` until the tail is within `radius`.
fn complete_tail(space: &SpaceDescriptor, chosen: &mut Chosen, radius: f64) {
    loop {
        let c = chosen.xs.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
        if !c.is_finite() || c <= radius {
            return;
        }
        let target = c - radius;
        let p = match space {
            SpaceDescriptor::Harmonic { .. } => {
                let mut n = (1.0 / target).floor().max(1.0) as u64;
                while harmonic_value(n) >= target {
                    n += 1;
                }
                PointVal::indexed(n, harmonic_value(n))
            }
            SpaceDescriptor::Dyadic { first } => {
                let mut n = (-target.log2()).floor().max(*first as f64) as u64;
                while dyadic_value(n) >= target {
                    n += 1;
                }
                if n > 1074 {
                    return;
                }
                PointVal::indexed(n, dyadic_value(n))
            }
            _ => return,
        };
        if chosen.dist(&p) > radius {
            chosen.add(p);
        } else {
            return;
        }
    }
}

/// Greedy `delta/2`-separated net. The result is verified to be
/// `delta`-dense, strongly stretched and pairwise `> delta/2`; a probe grid
/// too coarse to guarantee this yields [`Error::Unresolved`].
pub fn greedy_packing(
    space: &SpaceDescriptor,
    delta: f64,
    probe: ProbeGrid,
    seed: u64,
) -> Result<FiniteSet> {
    if !(delta > 0.0) {
        return Err(Error::domain("delta must be positive"));
    }
    let k = greedy_scan(space, delta, probe, seed, &FiniteSet::empty())?;
    if !is_delta_dense(&k, space, delta)? {
        return Err(Error::unresolved(format!("greedy net is not {delta}-dense; refine the probe grid")));
    }
    if min_pairwise(&k, space) <= 0.5 * delta {
        return Err(Error::unresolved("greedy net has a pair within delta/2"));
    }
    if !is_strongly_stretched(&k, space)? {
        return Err(Error::unresolved("greedy net is not strongly stretched; refine the probe grid"));
    }
    Ok(k)
}

/// Split `[from, to]` into `p = ceil(len / m)` equal parts and return the
/// interior cut points.
fn cuts(from: f64, to: f64, m: f64) -> Vec<f64> {
    let len = to - from;
    if len <= m {
        return Vec::new();
    }
    let p = (len / m).ceil() as usize;
    (1..p).map(|i| from + len * i as f64 / p as f64).collect()
}

/// Boundary fill from a segment end `e` towards the first point `f`, with
/// `|f - e| = b`; returns the new points (excluding `f`).
fn boundary_fill(e: f64, f: f64, m: f64) -> Vec<f64> {
    let b = (f - e).abs();
    if b <= 0.5 * m {
        return Vec::new();
    }
    let dir = if f >= e { 1.0 } else { -1.0 };
    let t = if b < 0.75 * m { b - 0.5 * m } else { 0.25 * m };
    let start = e + dir * t;
    let mut v = vec![start];
    if dir > 0.0 {
        v.extend(cuts(start, f, m));
    } else {
        v.extend(cuts(f, start, m));
    }
    v
}

/// A stretched superset of `K`.
pub fn stretch_extend(
    k: &FiniteSet,
    space: &SpaceDescriptor,
    probe: ProbeGrid,
    seed: u64,
) -> Result<FiniteSet> {
    if k.is_empty() {
        let d = space.diameter();
        let delta = if d > 0.0 { 0.5 * d } else { 1.0 };
        return greedy_packing(space, delta, probe, seed);
    }
    if is_stretched(k, space)? {
        return Ok(k.clone());
    }
    let m = min_pairwise(k, space);
    if !(m > 0.0) {
        return Err(Error::unresolved("coincident points cannot be stretched"));
    }
    let out = if let SpaceDescriptor::Interval(s) = space {
        let xs = sorted_xs(k);
        let mut add = Vec::new();
        add.extend(boundary_fill(s.lo, xs[0], m));
        add.extend(boundary_fill(s.hi, xs[xs.len() - 1], m));
        for w in xs.windows(2) {
            add.extend(cuts(w[0], w[1], m));
        }
        k.union(&add.into_iter().map(PointVal::real).collect())
    } else {
        let step = probe.step.min(m / 8.0);
        greedy_scan(space, m, ProbeGrid { step, ..probe }, seed, k)?
    };
    if !is_stretched(&out, space)? {
        return Err(Error::unresolved("could not certify a stretched superset; refine the probe grid"));
    }
    Ok(out)
}

/// Density on the half-line: `K ∩ (0, 1/delta)` is `delta`-dense in the
/// open interval `(0, 1/delta)`.
pub fn is_delta_dense_halfline(k: &FiniteSet, delta: f64) -> Result<bool> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("half-line density needs 0 < delta < 1, got {delta}")));
    }
    let r = 1.0 / delta;
    let inner = k.filter(|p| p.x > 0.0 && p.x < r);
    is_delta_dense(&inner, &SpaceDescriptor::open_interval(0.0, r), delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> SpaceDescriptor {
        SpaceDescriptor::unit_interval()
    }

    #[test]
    fn hausdorff_examples() {
        let d = |p: &PointVal, q: &PointVal| (p.x - q.x).abs();
        let a = FiniteSet::from_reals(&[1.0, 2.0]);
        assert_eq!(hausdorff_finite(&a, &a, d).unwrap(), 0.0);
        let z = FiniteSet::from_reals(&[0.0]);
        let o = FiniteSet::from_reals(&[1.0]);
        assert_eq!(hausdorff_finite(&z, &o, d).unwrap(), 1.0);
        let k = FiniteSet::from_reals(&[0.0, 1.0]);
        let l = FiniteSet::from_reals(&[0.25, 0.75]);
        assert_eq!(hausdorff_finite(&k, &l, d).unwrap(), 0.25);
        assert!(hausdorff_finite(&FiniteSet::empty(), &l, d).is_err());
    }

    #[test]
    fn interval_gap_and_density() {
        let k = FiniteSet::from_reals(&[0.25, 0.75]);
        let g = gap_to_space(&k, &unit()).unwrap();
        assert_eq!((g.lo, g.hi), (0.25, 0.25));
        assert!(is_delta_dense(&k, &unit(), 0.5).unwrap());
        assert!(!is_delta_dense(&k, &unit(), 0.25).unwrap());
        assert!(!is_delta_dense(&FiniteSet::empty(), &unit(), 0.5).unwrap());
        assert!(is_sdense(&k, &unit(), 0.3).unwrap());
        assert!(!is_sdense(&k, &unit(), 0.25).unwrap());
        assert!(!is_sdense(&k, &unit(), 0.0).unwrap());
    }

    #[test]
    fn open_interval_boundary_not_attained() {
        let sp = SpaceDescriptor::open_interval(0.0, 0.5);
        let k = FiniteSet::from_reals(&[0.25]);
        let g = gap_to_space(&k, &sp).unwrap();
        assert_eq!(g.hi, 0.25);
        assert!(!g.attained);
        assert!(is_delta_dense(&k, &sp, 0.25).unwrap());
        // The interior midpoint attains the gap.
        let k2 = FiniteSet::from_reals(&[0.1, 0.4]);
        let sp2 = SpaceDescriptor::open_interval(0.0, 0.5);
        let g2 = gap_to_space(&k2, &sp2).unwrap();
        assert!((g2.hi - 0.15).abs() < 1e-15 && g2.attained);
    }

    #[test]
    fn harmonic_with_minus_one_prefix_gap() {
        let sp = SpaceDescriptor::Harmonic { extras: vec![-1.0] };
        for n in [1u64, 2, 5, 40, 1000] {
            let k = FiniteSet::from_indices(&sp, 1..=n).unwrap();
            let g = gap_to_space(&k, &sp).unwrap();
            assert_eq!(g.hi, 1.0 + 1.0 / n as f64, "n={n}");
            assert!(g.is_exact());
            assert!(!is_delta_dense(&k, &sp, 1.0).unwrap());
        }
    }

    #[test]
    fn dyadic_prefix_gap() {
        let sp = SpaceDescriptor::dyadic();
        for n in 1u64..=30 {
            let k = FiniteSet::from_indices(&sp, 1..=n).unwrap();
            let g = gap_to_space(&k, &sp).unwrap();
            assert_eq!(g.hi, dyadic_value(n), "n={n}");
            assert!(!g.attained);
        }
    }

    #[test]
    fn harmonic_interior_gap_brute_force() {
        let sp = SpaceDescriptor::harmonic();
        let k = FiniteSet::from_indices(&sp, [1u64, 7, 50]).unwrap();
        let g = gap_to_space(&k, &sp).unwrap();
        let xs = k.xs();
        let mut brute = 0.0f64;
        for n in 1..200_000u64 {
            brute = brute.max(dist_sorted(1.0 / n as f64, &xs));
        }
        assert!((g.hi - brute).abs() < 1e-12, "{} vs {}", g.hi, brute);
    }

    #[test]
    fn stretched_examples() {
        let a = FiniteSet::from_reals(&[0.0, 0.5, 1.0]);
        assert!(is_stretched(&a, &unit()).unwrap());
        assert!(is_strongly_stretched(&a, &unit()).unwrap());
        let b = FiniteSet::from_reals(&[0.25, 0.75]);
        assert!(is_stretched(&b, &unit()).unwrap());
        assert!(is_stretched(&FiniteSet::from_reals(&[0.5]), &unit()).unwrap());
    }

    #[test]
    fn no_stretched_half_dense_subset() {
        let h = [0.25, 0.75];
        let subsets: [&[f64]; 3] = [&h[..1], &h[1..], &h[..]];
        for s in subsets {
            let k = FiniteSet::from_reals(s);
            let ok = is_stretched(&k, &unit()).unwrap() && is_delta_dense(&k, &unit(), 0.5).unwrap();
            if s.len() == 2 {
                // {0.25, 0.75} is stretched and dense; the claim concerns
                // proper subsets of a set with an extra close point.
                assert!(ok);
            } else {
                assert!(!ok);
            }
        }
    }

    #[test]
    fn greedy_interval_example() {
        let k = greedy_packing(&unit(), 0.5, ProbeGrid::new(0.05), 0).unwrap();
        let xs = k.xs();
        let want = [0.0, 0.3, 0.6, 0.9];
        assert_eq!(xs.len(), 4);
        for (a, b) in xs.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_dyadic_example() {
        let sp = SpaceDescriptor::Dyadic { first: 0 };
        let k = greedy_packing(&sp, 0.3, ProbeGrid::new(0.01), 0).unwrap();
        let mut xs = k.xs();
        xs.reverse();
        assert_eq!(xs, vec![1.0, 0.5, 0.25, 0.0625]);
    }

    #[test]
    fn greedy_single_point() {
        let sp = SpaceDescriptor::interval(0.3, 0.3);
        let k = greedy_packing(&sp, 0.1, ProbeGrid::new(0.01), 0).unwrap();
        assert_eq!(k.xs(), vec![0.3]);
    }

    #[test]
    fn stretch_extend_examples() {
        let k = FiniteSet::from_reals(&[0.0, 0.5, 1.0]);
        assert_eq!(stretch_extend(&k, &unit(), ProbeGrid::new(0.01), 0).unwrap(), k);
        let k = FiniteSet::from_reals(&[0.0, 0.01]);
        let l = stretch_extend(&k, &unit(), ProbeGrid::new(0.01), 0).unwrap();
        assert!(k.is_subset(&l));
        assert!(is_stretched(&l, &unit()).unwrap());
        let e = stretch_extend(&FiniteSet::empty(), &unit(), ProbeGrid::new(0.01), 0).unwrap();
        assert!(is_stretched(&e, &unit()).unwrap());
    }

    #[test]
    fn halfline_examples() {
        let k = FiniteSet::from_reals(&(1..=99).map(|i| 0.1 * i as f64).collect::<Vec<_>>());
        assert!(is_delta_dense_halfline(&k, 0.2).unwrap());
        assert!(!is_delta_dense_halfline(&FiniteSet::from_reals(&[1.0]), 0.5).unwrap());
        assert!(!is_delta_dense_halfline(&FiniteSet::empty(), 0.5).unwrap());
        assert!(is_delta_dense_halfline(&k, 1.0).is_err());
    }

    #[test]
    fn cantor_gap_of_endpoints() {
        let k = FiniteSet::from_reals(&[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        let g = gap_to_space(&k, &SpaceDescriptor::Cantor).unwrap();
        assert!((g.hi - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn product_gap_is_sum() {
        let sp = SpaceDescriptor::product(unit(), unit());
        let k: FiniteSet = [0.25, 0.75]
            .iter()
            .flat_map(|&x| [0.25, 0.75].map(move |y| PointVal::pair(x, y)))
            .collect();
        let g = gap_to_space(&k, &sp).unwrap();
        assert_eq!(g.hi, 0.5);
    }
}

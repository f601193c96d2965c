//! Sampling checks for structural properties of set functions: increasing,
//! d-increasing, d-continuous, left-continuous and l-continuous.
//!
//! Every check draws its random sets from a ChaCha stream keyed by
//! `(seed, stream)`, so a reported counterexample can be regenerated. A
//! verdict of [`Verdict::HoldsOnSamples`] is evidence only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ext_engine::SetFunction;
use crate::metric_core::{gap_to_space, FiniteSet, PointVal, FLOAT_TOL};
use crate::spaces::{
    dyadic_value, harmonic_value, random_dense_halfline, random_sdense, random_subset, SpaceDescriptor, TagPolicy,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub k: FiniteSet,
    pub l: FiniteSet,
    pub value_k: f64,
    pub value_l: f64,
    /// The epsilon, delta or scale the pair was found at.
    pub param: f64,
    /// Stream index of the random draw that produced `l`.
    pub stream: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    HoldsOnSamples,
    Counterexample(Box<Counterexample>),
    Unresolved(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateReport {
    pub verdict: Verdict,
    /// Comparisons actually made.
    pub trials: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
}

impl PredicateReport {
    fn holds(trials: usize, grid: Vec<f64>, seed: u64) -> Self {
        PredicateReport { verdict: Verdict::HoldsOnSamples, trials, grid, seed }
    }

    fn unresolved(msg: impl Into<String>, trials: usize, grid: Vec<f64>, seed: u64) -> Self {
        PredicateReport { verdict: Verdict::Unresolved(msg.into()), trials, grid, seed }
    }

    fn found(c: Counterexample, trials: usize, grid: Vec<f64>, seed: u64) -> Self {
        PredicateReport { verdict: Verdict::Counterexample(Box::new(c)), trials, grid, seed }
    }

    pub fn holds_on_samples(&self) -> bool {
        self.verdict == Verdict::HoldsOnSamples
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match &self.verdict {
            Verdict::Counterexample(c) => Some(c),
            _ => None,
        }
    }

    /// Counterexamples win over unresolved, which wins over holds; among
    /// equals the left one is kept. Trials add, grids are merged.
    pub fn merge(self, other: PredicateReport) -> PredicateReport {
        let rank = |v: &Verdict| match v {
            Verdict::Counterexample(_) => 2,
            Verdict::Unresolved(_) => 1,
            Verdict::HoldsOnSamples => 0,
        };
        let trials = self.trials + other.trials;
        let mut grid = self.grid;
        for g in other.grid {
            if !grid.contains(&g) {
                grid.push(g);
            }
        }
        let verdict = if rank(&other.verdict) > rank(&self.verdict) { other.verdict } else { self.verdict };
        PredicateReport { verdict, trials, grid, seed: self.seed }
    }
}

fn merge_all(reports: Vec<PredicateReport>, grid: Vec<f64>, seed: u64) -> PredicateReport {
    reports.into_iter().fold(PredicateReport::holds(0, grid, seed), PredicateReport::merge)
}

/// The generator behind every random draw of the checks.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const POLICIES: [TagPolicy; 3] = [TagPolicy::AllOrdinary, TagPolicy::AllIrrational, TagPolicy::Mixed];

/// The `delta`-dense set drawn for `stream`: `d_H(L, I) < delta`, or on
/// the half-line the half-line density.
pub fn sdense_trial(space: &SpaceDescriptor, delta: f64, seed: u64, stream: u64) -> Result<FiniteSet> {
    let mut rng = trial_rng(seed, stream);
    match space {
        SpaceDescriptor::HalfLine => random_dense_halfline(delta, &mut rng),
        _ => random_sdense(space, delta, &mut rng, POLICIES[(stream % 3) as usize]),
    }
}

fn slack(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m.is_finite() {
        FLOAT_TOL * (1.0 + m)
    } else {
        0.0
    }
}

/// Errors that mean "outside the domain of s", as opposed to a broken run.
fn skippable(e: &Error) -> bool {
    matches!(e, Error::Domain(_) | Error::NotInSpace(_))
}

fn default_delta0(space: &SpaceDescriptor) -> f64 {
    match space {
        SpaceDescriptor::HalfLine => 0.5,
        _ => 0.25 * space.diameter(),
    }
}

fn ladder(delta0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|l| delta0 * 0.5f64.powi(l as i32)).collect()
}

fn sample_sets(space: &SpaceDescriptor, fixed: &[FiniteSet], count: usize, max_size: usize, seed: u64, stream0: u64) -> Result<Vec<FiniteSet>> {
    let mut out = fixed.to_vec();
    for i in 0..count as u64 {
        let mut rng = trial_rng(seed, stream0 + i);
        let size = rng.gen_range(1..=max_size);
        let k = random_subset(space, &mut rng, size)?;
        if !k.is_empty() {
            out.push(k);
        }
    }
    Ok(out)
}

/// Random chains `K ⊂ L`; a counterexample has `s(K) > s(L)`.
pub fn check_increasing(s: &SetFunction, space: &SpaceDescriptor, trials: usize, seed: u64) -> PredicateReport {
    let mut made = 0;
    for t in 0..trials as u64 {
        let mut rng = trial_rng(seed, t);
        let ksize = rng.gen_range(0..=6);
        let esize = rng.gen_range(1..=4);
        let (k, extra) = match (random_subset(space, &mut rng, ksize), random_subset(space, &mut rng, esize)) {
            (Ok(k), Ok(e)) => (k, e),
            (Err(e), _) | (_, Err(e)) => return PredicateReport::unresolved(e.to_string(), made, vec![], seed),
        };
        let l = k.union(&extra);
        let (vk, vl) = match (s.eval(&k), s.eval(&l)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) if skippable(&e) => continue,
            (Err(e), _) | (_, Err(e)) => return PredicateReport::unresolved(e.to_string(), made, vec![], seed),
        };
        made += 1;
        if vk > vl + slack(vk, vl) {
            let c = Counterexample { k, l, value_k: vk, value_l: vl, param: 0.0, stream: t };
            return PredicateReport::found(c, made, vec![], seed);
        }
    }
    if made == 0 {
        return PredicateReport::unresolved("no sampled pair was in the domain", 0, vec![], seed);
    }
    PredicateReport::holds(made, vec![], seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `s(K) - eps < s(L)`.
    Increasing,
    /// `s(L) < s(K) + eps`.
    Decreasing,
}

/// Parameters of [`check_d_increasing`].
#[derive(Clone, Debug)]
pub struct DIncParams {
    pub eps: Vec<f64>,
    pub k_samples: usize,
    pub fixed_k: Vec<FiniteSet>,
    pub delta0: Option<f64>,
    pub levels: usize,
    pub trials: usize,
    pub seed: u64,
    pub direction: Direction,
    /// `false` gives the non-strict comparison used on the half-line.
    pub strict: bool,
}

impl Default for DIncParams {
    fn default() -> Self {
        DIncParams {
            eps: vec![1e-1, 1e-2],
            k_samples: 6,
            fixed_k: Vec::new(),
            delta0: None,
            levels: 10,
            trials: 24,
            seed: 0,
            direction: Direction::Increasing,
            strict: true,
        }
    }
}

fn d_inc_pass(direction: Direction, strict: bool, vk: f64, vl: f64, eps: f64) -> bool {
    let (lhs, rhs) = match direction {
        Direction::Increasing => (vk - eps, vl),
        Direction::Decreasing => (vl, vk + eps),
    };
    if strict {
        lhs < rhs + slack(lhs, rhs)
    } else {
        lhs <= rhs + slack(lhs, rhs)
    }
}

enum LevelOutcome {
    Pass(usize),
    Fail(Counterexample, usize),
    Skip,
}

#[allow(clippy::too_many_arguments)]
fn d_inc_level(s: &SetFunction, space: &SpaceDescriptor, k: &FiniteSet, vk: f64, eps: f64, delta: f64, trials: usize, seed: u64, stream0: u64, direction: Direction, strict: bool) -> Result<LevelOutcome> {
    let mut made = 0;
    for t in 0..trials as u64 {
        let stream = stream0 + t;
        let l = sdense_trial(space, delta, seed, stream)?;
        let vl = match s.eval(&l) {
            Ok(v) => v,
            Err(e) if skippable(&e) => continue,
            Err(e) => return Err(e),
        };
        made += 1;
        if !d_inc_pass(direction, strict, vk, vl, eps) {
            return Ok(LevelOutcome::Fail(Counterexample { k: k.clone(), l, value_k: vk, value_l: vl, param: delta, stream }, made));
        }
    }
    Ok(if made == 0 { LevelOutcome::Skip } else { LevelOutcome::Pass(made) })
}

/// Checks the d-increasing condition for one `K`, `eps` and a fixed
/// `delta` (for example the one a proof recipe gives).
#[allow(clippy::too_many_arguments)]
pub fn certify_d_increasing(s: &SetFunction, space: &SpaceDescriptor, k: &FiniteSet, eps: f64, delta: f64, trials: usize, seed: u64, strict: bool) -> PredicateReport {
    let grid = vec![delta];
    let vk = match s.eval(k) {
        Ok(v) => v,
        Err(e) => return PredicateReport::unresolved(e.to_string(), 0, grid, seed),
    };
    match d_inc_level(s, space, k, vk, eps, delta, trials, seed, 0, Direction::Increasing, strict) {
        Ok(LevelOutcome::Pass(n)) => PredicateReport::holds(n, grid, seed),
        Ok(LevelOutcome::Fail(c, n)) => PredicateReport::found(c, n, grid, seed),
        Ok(LevelOutcome::Skip) => PredicateReport::unresolved("no sampled L was in the domain", 0, grid, seed),
        Err(e) => PredicateReport::unresolved(e.to_string(), 0, grid, seed),
    }
}

/// For each `eps` and sampled `K`, walks the halving ladder of `delta`
/// looking for a level at which every drawn `delta`-sdense `L` passes.
/// If no level does, the failure at the finest level is reported.
pub fn check_d_increasing(s: &SetFunction, space: &SpaceDescriptor, p: &DIncParams) -> PredicateReport {
    let grid = ladder(p.delta0.unwrap_or_else(|| default_delta0(space)), p.levels);
    let ks = match sample_sets(space, &p.fixed_k, p.k_samples, 6, p.seed, 1 << 40) {
        Ok(ks) => ks,
        Err(e) => return PredicateReport::unresolved(e.to_string(), 0, grid, p.seed),
    };
    let cases: Vec<(usize, f64, &FiniteSet)> =
        p.eps.iter().flat_map(|&e| ks.iter().map(move |k| (e, k))).enumerate().map(|(i, (e, k))| (i, e, k)).collect();
    let reports: Vec<PredicateReport> = cases
        .par_iter()
        .map(|&(ci, eps, k)| {
            let vk = match s.eval(k) {
                Ok(v) => v,
                Err(e) if skippable(&e) => return PredicateReport::holds(0, vec![], p.seed),
                Err(e) => return PredicateReport::unresolved(e.to_string(), 0, vec![], p.seed),
            };
            let mut made = 0;
            let mut last = None;
            for (li, &delta) in grid.iter().enumerate() {
                let stream0 = ((ci as u64) << 24) | ((li as u64) << 12);
                match d_inc_level(s, space, k, vk, eps, delta, p.trials, p.seed, stream0, p.direction, p.strict) {
                    Ok(LevelOutcome::Pass(n)) => return PredicateReport::holds(made + n, vec![], p.seed),
                    Ok(LevelOutcome::Fail(c, n)) => {
                        made += n;
                        last = Some(c);
                    }
                    Ok(LevelOutcome::Skip) => {}
                    // Too fine for the sampler: stop descending.
                    Err(Error::Unresolved(_)) if last.is_some() => break,
                    Err(e) => return PredicateReport::unresolved(e.to_string(), made, vec![], p.seed),
                }
            }
            match last {
                Some(c) => PredicateReport::found(c, made, vec![], p.seed),
                None => PredicateReport::unresolved("no sampled L was in the domain", made, vec![], p.seed),
            }
        })
        .collect();
    merge_all(reports, grid, p.seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cardinality {
    /// Only sets with as many points as `H`.
    Fixed,
    /// Extra points near `H` may be added.
    Free,
}

/// Parameters of [`check_d_continuous`].
#[derive(Clone, Debug)]
pub struct DContParams {
    pub n: usize,
    pub eps: f64,
    pub scales: Vec<f64>,
    pub h_samples: usize,
    pub fixed_h: Vec<FiniteSet>,
    pub trials: usize,
    pub seed: u64,
    pub mode: Cardinality,
}

impl DContParams {
    pub fn new(n: usize, eps: f64) -> Self {
        DContParams {
            n,
            eps,
            scales: ladder(0.1, 14),
            h_samples: 6,
            fixed_h: Vec::new(),
            trials: 24,
            seed: 0,
            mode: Cardinality::Fixed,
        }
    }
}

/// Points of `space` other than `p` within distance `delta`, at most `cap`
/// of them, nearest indices first. Used for spaces without a continuum.
fn discrete_neighbours(space: &SpaceDescriptor, p: &PointVal, delta: f64, cap: usize) -> Vec<PointVal> {
    let mut out = Vec::new();
    let near = |q: &PointVal| space.dist(p, q) < delta && q != p;
    match space {
        SpaceDescriptor::Harmonic { extras } => {
            out.extend(extras.iter().map(|&e| PointVal::real(e)).filter(near));
            let hi = p.x + delta;
            let first = if hi >= 1.0 { 1 } else { ((1.0 / hi).floor() as u64).max(1) };
            let mut n = first;
            while out.len() < cap {
                let q = PointVal::indexed(n, harmonic_value(n));
                if near(&q) {
                    out.push(q);
                } else if q.x < p.x - delta {
                    break;
                }
                n += 1;
            }
        }
        SpaceDescriptor::Dyadic { first } => {
            for m in *first as u64..=1074 {
                let q = PointVal::indexed(m, dyadic_value(m));
                if near(&q) {
                    out.push(q);
                    if out.len() >= cap {
                        break;
                    }
                }
            }
        }
        SpaceDescriptor::FunctionInduced(seq) => {
            for n in 1..=(1u64 << 14) {
                let q = PointVal::indexed(n, seq.value(n));
                if near(&q) {
                    out.push(q);
                    if out.len() >= cap {
                        break;
                    }
                }
            }
        }
        SpaceDescriptor::Finite(s) => out.extend(s.iter().copied().filter(near)),
        _ => {}
    }
    out
}

/// A point of `space` within `delta` of `p`, or `p` itself.
fn nearby<R: Rng>(space: &SpaceDescriptor, p: &PointVal, delta: f64, rng: &mut R) -> PointVal {
    match space {
        SpaceDescriptor::Interval(_) | SpaceDescriptor::Union(_) | SpaceDescriptor::HalfLine => {
            for _ in 0..8 {
                let q = PointVal::tagged(p.x + delta * rng.gen_range(-0.999..0.999), p.label);
                if space.contains(&q) {
                    return q;
                }
                let q = PointVal::real(q.x);
                if space.contains(&q) {
                    return q;
                }
            }
            *p
        }
        SpaceDescriptor::Product(..) => {
            let r = delta * std::f64::consts::FRAC_1_SQRT_2;
            let q = PointVal::pair(p.x + r * rng.gen_range(-0.999..0.999), p.y + r * rng.gen_range(-0.999..0.999));
            if space.contains(&q) {
                q
            } else {
                *p
            }
        }
        _ => {
            let mut cands = discrete_neighbours(space, p, delta, 32);
            cands.push(*p);
            cands[rng.gen_range(0..cands.len())]
        }
    }
}

/// A set within Hausdorff distance `delta` of `h`.
fn perturb<R: Rng>(space: &SpaceDescriptor, h: &FiniteSet, delta: f64, mode: Cardinality, rng: &mut R) -> Option<FiniteSet> {
    let mut pts: Vec<PointVal> = h.iter().map(|p| nearby(space, p, delta, rng)).collect();
    if mode == Cardinality::Free {
        let anchor = h.points()[rng.gen_range(0..h.len())];
        let cap = ((4.0 / delta) as usize).clamp(8, 1 << 16);
        let run = discrete_neighbours(space, &anchor, delta, cap);
        if run.is_empty() {
            for _ in 0..rng.gen_range(1..=8) {
                pts.push(nearby(space, &anchor, delta, rng));
            }
        } else {
            let take = rng.gen_range(1..=run.len());
            pts.extend_from_slice(&run[..take]);
        }
    }
    let k = FiniteSet::new(pts);
    if mode == Cardinality::Fixed && k.len() != h.len() {
        return None;
    }
    Some(k)
}

fn sample_n_sets(space: &SpaceDescriptor, fixed: &[FiniteSet], count: usize, n: usize, seed: u64) -> Result<Vec<FiniteSet>> {
    let mut out = fixed.to_vec();
    let mut stream = 1u64 << 41;
    let mut tries = 0;
    while out.len() < fixed.len() + count && tries < 64 * (count + 1) {
        let mut rng = trial_rng(seed, stream);
        let k = random_subset(space, &mut rng, n)?;
        if k.len() == n {
            out.push(k);
        }
        stream += 1;
        tries += 1;
    }
    Ok(out)
}

/// Scale search shared by the continuity checks: for each `H`, is there a
/// scale at which every drawn nearby `K` has `|s(H) - s(K)| <= eps`?
#[allow(clippy::too_many_arguments)]
fn continuity_search(
    s: &SetFunction,
    hs: &[FiniteSet],
    scales: &[f64],
    eps: f64,
    trials: usize,
    seed: u64,
    draw: &(dyn Fn(&FiniteSet, f64, &mut ChaCha8Rng) -> Option<FiniteSet> + Sync),
) -> PredicateReport {
    let reports: Vec<PredicateReport> = hs
        .par_iter()
        .enumerate()
        .map(|(hi, h)| {
            let vh = match s.eval(h) {
                Ok(v) => v,
                Err(e) if skippable(&e) => return PredicateReport::holds(0, vec![], seed),
                Err(e) => return PredicateReport::unresolved(e.to_string(), 0, vec![], seed),
            };
            let mut made = 0;
            let mut last = None;
            for (si, &delta) in scales.iter().enumerate() {
                let mut ok = true;
                let mut any = false;
                for t in 0..trials as u64 {
                    let stream = ((hi as u64) << 24) | ((si as u64) << 12) | t;
                    let mut rng = trial_rng(seed, stream);
                    let Some(k) = draw(h, delta, &mut rng) else { continue };
                    let vk = match s.eval(&k) {
                        Ok(v) => v,
                        Err(e) if skippable(&e) => continue,
                        Err(e) => return PredicateReport::unresolved(e.to_string(), made, vec![], seed),
                    };
                    made += 1;
                    any = true;
                    let drift = if vh == vk { 0.0 } else { (vh - vk).abs() };
                    if drift > eps + slack(vh, vk) {
                        last = Some(Counterexample { k: h.clone(), l: k, value_k: vh, value_l: vk, param: delta, stream });
                        ok = false;
                        break;
                    }
                }
                if ok && any {
                    return PredicateReport::holds(made, vec![], seed);
                }
            }
            match last {
                Some(c) => PredicateReport::found(c, made, vec![], seed),
                None => PredicateReport::unresolved("no perturbation was in the domain", made, vec![], seed),
            }
        })
        .collect();
    merge_all(reports, scales.to_vec(), seed)
}

/// Continuity of `s` restricted to `n`-point sets (or, in
/// [`Cardinality::Free`] mode, to all finite sets) at sampled `H`.
pub fn check_d_continuous(s: &SetFunction, space: &SpaceDescriptor, p: &DContParams) -> PredicateReport {
    if p.n == 0 {
        return PredicateReport::unresolved("n must be at least 1", 0, p.scales.clone(), p.seed);
    }
    let hs = match sample_n_sets(space, &p.fixed_h, p.h_samples, p.n, p.seed) {
        Ok(hs) => hs,
        Err(e) => return PredicateReport::unresolved(e.to_string(), 0, p.scales.clone(), p.seed),
    };
    let mode = p.mode;
    let draw = move |h: &FiniteSet, delta: f64, rng: &mut ChaCha8Rng| perturb(space, h, delta, mode, rng);
    continuity_search(s, &hs, &p.scales, p.eps, p.trials, p.seed, &draw)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Each `a` in `H` moves to some `b` with `a - delta < b <= a`.
    Downward,
    /// Each `a` moves to `b` with `a <= b < a + delta`.
    Upward,
}

/// Parameters of [`check_left_continuous`].
#[derive(Clone, Debug)]
pub struct LeftContParams {
    pub eps: f64,
    pub scales: Vec<f64>,
    pub h_samples: usize,
    pub fixed_h: Vec<FiniteSet>,
    pub trials: usize,
    pub seed: u64,
    pub side: Side,
}

impl LeftContParams {
    pub fn new(eps: f64) -> Self {
        LeftContParams { eps, scales: ladder(0.1, 14), h_samples: 6, fixed_h: Vec::new(), trials: 24, seed: 0, side: Side::Downward }
    }
}

fn shift_one_sided(space: &SpaceDescriptor, h: &FiniteSet, delta: f64, side: Side, rng: &mut ChaCha8Rng) -> Option<FiniteSet> {
    let sign = match side {
        Side::Downward => -1.0,
        Side::Upward => 1.0,
    };
    let mut pts = Vec::with_capacity(h.len());
    for p in h.iter() {
        let u = if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.0..0.999) };
        let q = PointVal::tagged(p.x + sign * u * delta, p.label);
        pts.push(if space.contains(&q) { q } else { *p });
    }
    let k = FiniteSet::new(pts);
    (k.len() == h.len()).then_some(k)
}

/// Left-continuity on a subset of the line: for sampled `H`, is there a
/// scale at which every one-sided shift changes `s` by at most `eps`?
pub fn check_left_continuous(s: &SetFunction, space: &SpaceDescriptor, p: &LeftContParams) -> PredicateReport {
    if !space.is_one_dimensional() {
        return PredicateReport::unresolved("left-continuity needs an ordered space", 0, p.scales.clone(), p.seed);
    }
    let hs = match sample_sets(space, &p.fixed_h, p.h_samples, 5, p.seed, 1 << 42) {
        Ok(hs) => hs,
        Err(e) => return PredicateReport::unresolved(e.to_string(), 0, p.scales.clone(), p.seed),
    };
    let side = p.side;
    let draw = move |h: &FiniteSet, delta: f64, rng: &mut ChaCha8Rng| shift_one_sided(space, h, delta, side, rng);
    continuity_search(s, &hs, &p.scales, p.eps, p.trials, p.seed, &draw)
}

/// One-sided shifts of a fixed `H` by less than a fixed `delta`.
#[allow(clippy::too_many_arguments)]
pub fn certify_left_continuity(s: &SetFunction, space: &SpaceDescriptor, h: &FiniteSet, eps: f64, delta: f64, trials: usize, seed: u64, side: Side) -> PredicateReport {
    let draw = move |h: &FiniteSet, d: f64, rng: &mut ChaCha8Rng| shift_one_sided(space, h, d, side, rng);
    continuity_search(s, std::slice::from_ref(h), &[delta], eps, trials, seed, &draw)
}

/// Parameters of [`check_l_continuous`].
#[derive(Clone, Debug)]
pub struct LContParams {
    pub eps: f64,
    pub k_samples: usize,
    pub fixed_k: Vec<FiniteSet>,
    /// Candidate sets `L ⊂ J` tried per `K` besides the projection.
    pub trials: usize,
    pub seed: u64,
}

impl LContParams {
    pub fn new(eps: f64) -> Self {
        LContParams { eps, k_samples: 12, fixed_k: Vec::new(), trials: 8, seed: 0 }
    }
}

/// A point of `j` at distance at most `r` from `p`, preferring `p` with
/// its tag dropped.
fn project<R: Rng>(j: &SpaceDescriptor, p: &PointVal, r: f64, rng: &mut R) -> Option<PointVal> {
    if j.contains(p) {
        return Some(*p);
    }
    let plain = PointVal { label: 0, ..*p };
    if j.contains(&plain) {
        return Some(plain);
    }
    (0..16).map(|_| PointVal::real(p.x + r * rng.gen_range(-1.0..1.0))).find(|q| j.contains(q))
}

/// For sampled `K ⊂ I` searches for `L ⊂ J` with
/// `d_H(L, J) <= 2 d_H(K, J)` and `|s(K) - s(L)| < eps`. `J` must be dense
/// in `I`.
pub fn check_l_continuous(s: &SetFunction, j: &SpaceDescriptor, i: &SpaceDescriptor, p: &LContParams) -> PredicateReport {
    let grid = vec![p.eps];
    let ks = match sample_sets(i, &p.fixed_k, p.k_samples, 8, p.seed, 1 << 43) {
        Ok(ks) => ks,
        Err(e) => return PredicateReport::unresolved(e.to_string(), 0, grid, p.seed),
    };
    let reports: Vec<PredicateReport> = ks
        .par_iter()
        .enumerate()
        .map(|(ki, k)| {
            let unresolved = |e: Error| PredicateReport::unresolved(e.to_string(), 0, vec![], p.seed);
            let vk = match s.eval(k) {
                Ok(v) => v,
                Err(e) if skippable(&e) => return PredicateReport::holds(0, vec![], p.seed),
                Err(e) => return unresolved(e),
            };
            let gk = match gap_to_space(k, j) {
                Ok(g) => g.hi,
                Err(e) => return unresolved(e),
            };
            let mut made = 0;
            let mut first = None;
            for t in 0..=p.trials as u64 {
                let stream = ((ki as u64) << 24) | t;
                let mut rng = trial_rng(p.seed, stream);
                // Trial 0 is the plain projection; later trials jitter it.
                let r = if t == 0 { 0.0 } else { 0.5 * gk * 0.5f64.powi(t as i32) };
                let pts: Option<Vec<PointVal>> = k.iter().map(|q| project(j, q, r, &mut rng)).collect();
                let Some(pts) = pts else { continue };
                let l = FiniteSet::new(pts);
                let (gl, vl) = match (gap_to_space(&l, j), s.eval(&l)) {
                    (Ok(g), Ok(v)) => (g.hi, v),
                    (_, Err(e)) if skippable(&e) => continue,
                    (Err(e), _) | (_, Err(e)) => return unresolved(e),
                };
                made += 1;
                let close = if vk == vl { true } else { (vk - vl).abs() < p.eps };
                if gl <= 2.0 * gk + slack(gl, gk) && close {
                    return PredicateReport::holds(made, vec![], p.seed);
                }
                first.get_or_insert(Counterexample { k: k.clone(), l, value_k: vk, value_l: vl, param: p.eps, stream });
            }
            match first {
                Some(c) => PredicateReport::found(c, made, vec![], p.seed),
                None => PredicateReport::unresolved("no candidate L in J", made, vec![], p.seed),
            }
        })
        .collect();
    merge_all(reports, grid, p.seed)
}

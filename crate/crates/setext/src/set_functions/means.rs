use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::series::harmonic_index;
use crate::error::{Error, Result};
use crate::ext_engine::{estimate_ext, estimate_ladder, merge_cross, DomainClass, ExtensionEstimate, Rung, SetFunction, Tolerances};
use crate::metric_core::{FiniteSet, FLOAT_TOL};
use crate::spaces::{dyadic_value, EdsRule, SamplerSpec, Schedule, Sequence, SpaceDescriptor};

type MeanFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A mean of finite lists, with a claim that it is regular: permutation
/// invariant, convergent along convergent sequences, and stable when a point
/// of an interval containing the mean is appended.
#[derive(Clone)]
pub struct MeanSpec {
    pub name: String,
    pub claims_regular: bool,
    f: MeanFn,
}

impl fmt::Debug for MeanSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeanSpec").field("name", &self.name).field("claims_regular", &self.claims_regular).finish()
    }
}

impl MeanSpec {
    pub fn arithmetic() -> Self {
        Self::custom("arithmetic", true, |xs| xs.iter().sum::<f64>() / xs.len() as f64)
    }

    pub fn custom(name: impl Into<String>, claims_regular: bool, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        MeanSpec { name: name.into(), claims_regular, f: Arc::new(f) }
    }

    pub fn eval(&self, xs: &[f64]) -> Result<f64> {
        if xs.is_empty() {
            return Err(Error::domain(format!("{} mean of an empty list", self.name)));
        }
        Ok((self.f)(xs))
    }

    /// Spot checks of the regularity claims on random lists in `[-1, 1]`.
    /// Returns the first failing condition.
    pub fn spot_check(&self, trials: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fail = |what: &str| Err(Error::domain(format!("{} fails {what}", self.name)));
        for _ in 0..trials {
            let len = rng.gen_range(1..12);
            let mut xs: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m = self.eval(&xs)?;
            let mut ys = xs.clone();
            ys.shuffle(&mut rng);
            if (self.eval(&ys)? - m).abs() > 1e-12 {
                return fail("permutation invariance");
            }
            let (l, r) = (m - rng.gen::<f64>(), m + rng.gen::<f64>());
            let mut zs = xs.clone();
            zs.push(rng.gen_range(l..=r));
            let mz = self.eval(&zs)?;
            if mz < l - 1e-12 || mz > r + 1e-12 {
                return fail("interval stability");
            }
            let c = rng.gen_range(-1.0..1.0);
            for j in 1..=4000 {
                xs.push(c + (1.0 - 2.0 * (j % 2) as f64) / j as f64);
            }
            if (self.eval(&xs)? - c).abs() > 1e-2 {
                return fail("convergence along convergent sequences");
            }
        }
        Ok(())
    }
}

/// `s(K) = mean{a(i) : i in K}` on the index set with `d = |a(x) - a(y)|`.
pub fn sf_unordered_mean(a: Sequence, mean: MeanSpec) -> (SpaceDescriptor, SetFunction) {
    let name = format!("unordered-mean[{},{}]", a.name(), mean.name);
    let s = SetFunction::new(name, DomainClass::All, move |k| mean.eval(&k.xs()));
    (SpaceDescriptor::FunctionInduced(a), s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AverageVerdict {
    Exists(f64),
    NotExists,
    Unknown,
}

/// Decides the unordered average of `a` from its cluster values: it exists
/// and equals `c` iff `a` converges to `c` (finitely many exceptions
/// included); two or more cluster values rule it out.
pub fn unordered_average_oracle(a: &Sequence) -> AverageVerdict {
    match a.accumulation() {
        None => AverageVerdict::Unknown,
        Some(v) if v.len() == 1 => AverageVerdict::Exists(v[0]),
        Some(v) if v.is_empty() => AverageVerdict::Unknown,
        Some(_) => AverageVerdict::NotExists,
    }
}

/// A piece of a bounded set `H` with computable derived set.
#[derive(Clone, Debug, PartialEq)]
pub enum IsoComponent {
    /// `{offset + scale * a(n) : n >= 1}` for a convergent `a`.
    Sequence { offset: f64, scale: f64, seq: Sequence },
    Points(Vec<f64>),
}

/// `H` as a finite union of convergent sequences and finite sets, with
/// `|h| < bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoSetSpec {
    pub components: Vec<IsoComponent>,
    pub bound: f64,
}

impl IsoSetSpec {
    /// `{1/n} ∪ {0}`.
    pub fn harmonic_with_zero() -> Self {
        IsoSetSpec {
            components: vec![
                IsoComponent::Sequence { offset: 0.0, scale: 1.0, seq: Sequence::Harmonic },
                IsoComponent::Points(vec![0.0]),
            ],
            bound: 1.5,
        }
    }

    /// `{1/n} ∪ {1 - 1/n} ∪ {0, 1}`.
    pub fn two_sided_harmonic() -> Self {
        IsoSetSpec {
            components: vec![
                IsoComponent::Sequence { offset: 0.0, scale: 1.0, seq: Sequence::Harmonic },
                IsoComponent::Sequence { offset: 1.0, scale: -1.0, seq: Sequence::Harmonic },
                IsoComponent::Points(vec![0.0, 1.0]),
            ],
            bound: 1.5,
        }
    }

    /// The derived set `H'`: limits of the sequence components.
    pub fn derived(&self) -> Result<Vec<f64>> {
        let mut v = Vec::new();
        for c in &self.components {
            if let IsoComponent::Sequence { offset, scale, seq } = c {
                let l = seq.limit().ok_or_else(|| Error::domain(format!("{} has no single limit", seq.name())))?;
                v.push(offset + scale * l);
            }
        }
        Ok(v)
    }

    /// Isolated points `x` of `H` with `d(x, H') >= delta`, each paired
    /// with that distance, deduplicated and sorted by value.
    pub fn isolated_beyond(&self, delta: f64) -> Result<Vec<(f64, f64)>> {
        if !(delta > 0.0) {
            return Err(Error::domain("delta must be positive"));
        }
        let derived = self.derived()?;
        let dist = |x: f64| derived.iter().map(|c| (x - c).abs()).fold(f64::INFINITY, f64::min);
        let mut out = Vec::new();
        let mut push = |x: f64| {
            if x.abs() >= self.bound {
                return Err(Error::domain(format!("{x} exceeds the bound {}", self.bound)));
            }
            let d = dist(x);
            // 1 - (1 - 1/n) and 1/n can differ in the last bit.
            if d >= delta * (1.0 - FLOAT_TOL) {
                out.push((x, d));
            }
            Ok(())
        };
        for c in &self.components {
            match c {
                IsoComponent::Points(ps) => {
                    for &x in ps {
                        push(x)?;
                    }
                }
                IsoComponent::Sequence { offset, scale, seq } => {
                    let mut p = 1u64;
                    loop {
                        let r = seq.tail_radius(p).ok_or_else(|| Error::unresolved(format!("no tail bound for {}", seq.name())))?;
                        if scale.abs() * r < delta {
                            break;
                        }
                        if p >= 1 << 26 {
                            return Err(Error::unresolved(format!("delta {delta} needs more than 2^26 terms")));
                        }
                        p *= 2;
                    }
                    for n in 1..=p {
                        push(offset + scale * seq.value(n))?;
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.dedup_by(|b, a| (a.0 - b.0).abs() <= 1e-12 * a.0.abs().max(1.0));
        Ok(out)
    }
}

/// Arithmetic mean of the isolated points of `H` outside `S(H', delta)`.
pub fn mean_iso(spec: &IsoSetSpec, delta: f64) -> Result<f64> {
    let pts = spec.isolated_beyond(delta)?;
    if pts.is_empty() {
        return Err(Error::domain(format!("no isolated points at distance >= {delta}")));
    }
    Ok(pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64)
}

/// `lim_{delta -> 0+} mean_iso(delta)` along `delta_0 2^-(level - 1)`,
/// where `delta_0` is the largest isolation distance.
pub fn mean_iso_limit(spec: &IsoSetSpec, tol: &Tolerances) -> Result<ExtensionEstimate> {
    let mut probe = spec.bound;
    let delta0 = loop {
        let pts = spec.isolated_beyond(probe)?;
        if let Some(d) = pts.iter().map(|p| p.1).filter(|d| d.is_finite()).reduce(f64::max) {
            break d;
        }
        if !pts.is_empty() {
            // No derived set: the mean is constant.
            break spec.bound;
        }
        probe *= 0.5;
        if probe < 1e-12 {
            return Err(Error::domain("set has no isolated points"));
        }
    };
    estimate_ladder(
        |level| {
            let delta = delta0 * 0.5f64.powi(level as i32 - 1);
            Ok(Rung { gap_hi: delta, value: mean_iso(spec, delta)?, set: None })
        },
        tol,
    )
}

/// Interleaves blocks so that while block `j` is being appended, every
/// prefix average stays in `(min(A, B) - 2M/(g + 1), max(A, B) + 2M/(g + 1))`,
/// where `A`, `B` are the averages before and after the block and `g` the
/// number of earlier values.
pub fn arrange_blocks(blocks: &[Vec<f64>]) -> Vec<f64> {
    let mut blocks = blocks.iter().filter(|b| !b.is_empty());
    let Some(first) = blocks.next() else {
        return Vec::new();
    };
    let mut out = first.clone();
    let mut sum: f64 = out.iter().sum();
    for block in blocks {
        let g = out.len() as f64;
        let a = sum / g;
        let b = (sum + block.iter().sum::<f64>()) / (g + block.len() as f64);
        let (lo, hi) = (a.min(b), a.max(b));
        let mut rest = block.clone();
        while !rest.is_empty() {
            let cur = sum / out.len() as f64;
            let idx = if cur <= lo {
                argmax(&rest)
            } else if cur >= hi {
                argmin(&rest)
            } else {
                0
            };
            let x = rest.remove(idx);
            sum += x;
            out.push(x);
        }
    }
    out
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap_or(0)
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap_or(0)
}

/// The first `n` values of the isolated points of `H`, grouped by
/// decreasing distance to `H'` and interleaved by [`arrange_blocks`].
pub fn arrange_iso_sequence(spec: &IsoSetSpec, n: usize) -> Result<Vec<f64>> {
    let mut delta = spec.bound;
    let pts = loop {
        let pts = spec.isolated_beyond(delta)?;
        let finite = pts.iter().all(|p| p.1.is_finite());
        if pts.len() >= n || (!finite && !pts.is_empty()) {
            break pts;
        }
        delta *= 0.5;
        if delta < 1e-9 {
            return Err(Error::unresolved(format!("fewer than {n} isolated points resolved")));
        }
    };
    let mut by_dist = pts;
    by_dist.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    let mut blocks: Vec<Vec<f64>> = Vec::new();
    let mut last = f64::NAN;
    for (x, d) in by_dist {
        if blocks.is_empty() || (d - last).abs() > 1e-12 * d.abs().max(1e-300) {
            blocks.push(Vec::new());
            last = d;
        }
        blocks.last_mut().expect("pushed").push(x);
    }
    let mut seq = arrange_blocks(&blocks);
    seq.truncate(n);
    Ok(seq)
}

/// `M^iso` as a stretched extension on `{2^-m : m >= 1}`: the point `2^-m`
/// carries the `m`-th arranged value, `s(K)` is the mean over `K`.
pub fn sf_iso_dyadic(spec: &IsoSetSpec, len: usize) -> Result<SetFunction> {
    let vals = arrange_iso_sequence(spec, len)?;
    Ok(SetFunction::new("iso-dyadic", DomainClass::StretchedOnly, move |k| {
        if k.is_empty() {
            return Err(Error::domain("mean of the empty set"));
        }
        let mut sum = 0.0;
        for p in k.iter() {
            let m = p.label as usize;
            if m == 0 || dyadic_value(p.label) != p.x {
                return Err(Error::NotInSpace(format!("{} is not an indexed dyadic point", p.x)));
            }
            sum += *vals.get(m - 1).ok_or_else(|| Error::domain(format!("index {m} beyond the arranged prefix")))?;
        }
        Ok(sum / k.len() as f64)
    }))
}

/// Arithmetic mean restricted to class-S sets (one point per nonempty bin).
pub fn sf_mean_eds() -> SetFunction {
    SetFunction::new("mean-eds", DomainClass::ClassS, |k: &FiniteSet| {
        if k.is_empty() {
            return Err(Error::domain("mean of the empty set"));
        }
        Ok(k.iter().map(|p| p.x).sum::<f64>() / k.len() as f64)
    })
}

/// `M^eds(H)` along bin counts from `schedule`, one ladder per rule. The
/// ladders are merged pairwise: separated limits are nonexistence evidence.
pub fn mean_eds_limit(h: &SpaceDescriptor, rules: &[EdsRule], schedule: Schedule, tol: &Tolerances) -> Result<ExtensionEstimate> {
    if rules.is_empty() {
        return Err(Error::domain("at least one representative rule is needed"));
    }
    let s = sf_mean_eds();
    let runs: Vec<Result<ExtensionEstimate>> =
        rules.par_iter().map(|r| estimate_ext(&s, h, &SamplerSpec::eds(*r, schedule), tol)).collect();
    let mut it = runs.into_iter();
    let mut acc = it.next().expect("nonempty")?;
    for r in it {
        acc = merge_cross(acc, r?);
    }
    Ok(acc)
}

/// On `{1/n}`: `s(K) = a_(1/min K)`.
pub fn sf_sequence_limit(a: Sequence) -> SetFunction {
    SetFunction::new(format!("sequence-limit[{}]", a.name()), DomainClass::All, move |k| {
        let p = k.iter().min_by(|p, q| p.x.total_cmp(&q.x)).ok_or_else(|| Error::domain("min of the empty set"))?;
        Ok(a.value(harmonic_index(p)?))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unordered_mean_example() {
        let (sp, s) = sf_unordered_mean(Sequence::IndicatorAtOne, MeanSpec::arithmetic());
        let k = FiniteSet::from_indices(&sp, [1, 2]).unwrap();
        assert_eq!(s.eval(&k).unwrap(), 0.5);
        let l = FiniteSet::from_indices(&sp, [1, 2, 3]).unwrap();
        assert!((s.eval(&l).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let (sc, c) = sf_unordered_mean(Sequence::Constant { c: 2.5 }, MeanSpec::arithmetic());
        assert_eq!(c.eval(&FiniteSet::from_indices(&sc, [3, 9, 11]).unwrap()).unwrap(), 2.5);
    }

    #[test]
    fn oracle_characterisation() {
        assert_eq!(unordered_average_oracle(&Sequence::ShiftedHarmonic { c: 0.3 }), AverageVerdict::Exists(0.3));
        assert_eq!(unordered_average_oracle(&Sequence::TwoCluster), AverageVerdict::NotExists);
        assert_eq!(unordered_average_oracle(&Sequence::Constant { c: 4.0 }), AverageVerdict::Exists(4.0));
        assert_eq!(unordered_average_oracle(&Sequence::custom("f", |n| n as f64)), AverageVerdict::Unknown);
    }

    #[test]
    fn arithmetic_mean_is_regular_on_samples() {
        MeanSpec::arithmetic().spot_check(50, 1).unwrap();
        let max = MeanSpec::custom("max", false, |xs| xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        assert!(max.spot_check(50, 1).is_err());
    }

    #[test]
    fn iso_mean_values() {
        let h = IsoSetSpec::harmonic_with_zero();
        // delta = 1/4: isolated points 1, 1/2, 1/3, 1/4.
        let m = mean_iso(&h, 0.25).unwrap();
        assert!((m - (1.0 + 0.5 + 1.0 / 3.0 + 0.25) / 4.0).abs() < 1e-15);
        let sym = IsoSetSpec::two_sided_harmonic();
        for d in [0.3, 0.1, 0.01] {
            assert!((mean_iso(&sym, d).unwrap() - 0.5).abs() < 1e-12);
        }
        let finite = IsoSetSpec { components: vec![IsoComponent::Points(vec![1.0, 2.0, 6.0])], bound: 7.0 };
        for d in [1.0, 1e-3] {
            assert_eq!(mean_iso(&finite, d).unwrap(), 3.0);
        }
    }

    #[test]
    fn arrangement_of_two_blocks() {
        let out = arrange_blocks(&[vec![0.0, 0.0], vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0]]);
        assert_eq!(out.len(), 8);
        let m = 1.0001;
        let g = 2.0;
        let mut sum = 0.0;
        for (i, x) in out.iter().enumerate() {
            sum += x;
            if i + 1 > 2 {
                let avg = sum / (i + 1) as f64;
                assert!(avg > -2.0 * m / (g + 1.0) && avg < 0.75 + 2.0 * m / (g + 1.0));
            }
        }
        assert_eq!(arrange_blocks(&[vec![0.4; 3], vec![0.4; 5]]), vec![0.4; 8]);
    }

    #[test]
    fn sequence_limit_values() {
        let s = sf_sequence_limit(Sequence::AlternatingSign);
        let sp = SpaceDescriptor::harmonic();
        assert_eq!(s.eval(&FiniteSet::from_indices(&sp, 1..=4).unwrap()).unwrap(), 1.0);
        assert_eq!(s.eval(&FiniteSet::from_indices(&sp, 1..=5).unwrap()).unwrap(), -1.0);
    }
}

use rand::Rng;

use super::{cantor, dyadic_value, harmonic_value, SpaceDescriptor};
use crate::error::{Error, Result};
use crate::metric_core::{is_delta_dense_halfline, is_sdense, FiniteSet, PointVal, TAG_IRRATIONAL};

/// Tags assigned to random line points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TagPolicy {
    AllOrdinary,
    AllIrrational,
    Mixed,
}

impl TagPolicy {
    fn tag<R: Rng>(self, rng: &mut R, rational_only: bool) -> u64 {
        if rational_only {
            return 0;
        }
        match self {
            TagPolicy::AllOrdinary => 0,
            TagPolicy::AllIrrational => TAG_IRRATIONAL,
            TagPolicy::Mixed => {
                if rng.gen_bool(0.5) {
                    TAG_IRRATIONAL
                } else {
                    0
                }
            }
        }
    }
}

fn random_point<R: Rng>(space: &SpaceDescriptor, rng: &mut R, policy: TagPolicy, scale: u64) -> Result<PointVal> {
    match space {
        SpaceDescriptor::Interval(_) | SpaceDescriptor::Union(_) => {
            let segs = space.segments().unwrap_or_default();
            let total: f64 = segs.iter().map(|s| s.len()).sum();
            let mut u = rng.gen::<f64>() * total;
            for s in &segs {
                if u <= s.len() {
                    let x = (s.lo + u).clamp(s.lo, s.hi);
                    if s.contains_x(x) {
                        return Ok(PointVal::tagged(x, policy.tag(rng, s.rational_only)));
                    }
                    let mid = 0.5 * (s.lo + s.hi);
                    return Ok(PointVal::tagged(mid, policy.tag(rng, s.rational_only)));
                }
                u -= s.len();
            }
            Err(Error::domain("empty line space"))
        }
        SpaceDescriptor::Harmonic { extras } => {
            let k = rng.gen_range(0..scale + extras.len() as u64);
            if k < extras.len() as u64 {
                Ok(PointVal::real(extras[k as usize]))
            } else {
                let n = rng.gen_range(1..=scale);
                Ok(PointVal::indexed(n, harmonic_value(n)))
            }
        }
        SpaceDescriptor::Dyadic { first } => {
            let n = rng.gen_range(*first as u64..=*first as u64 + 50);
            Ok(PointVal::indexed(n, dyadic_value(n)))
        }
        SpaceDescriptor::FunctionInduced(seq) => {
            let n = rng.gen_range(1..=scale);
            Ok(PointVal::indexed(n, seq.value(n)))
        }
        SpaceDescriptor::Cantor => {
            let mut x = 0.0;
            let mut w = 1.0;
            for _ in 0..25 {
                w /= 3.0;
                if rng.gen_bool(0.5) {
                    x += 2.0 * w;
                }
            }
            Ok(PointVal::real(x))
        }
        SpaceDescriptor::Finite(s) => {
            if s.is_empty() {
                return Err(Error::domain("empty finite space"));
            }
            Ok(s.points()[rng.gen_range(0..s.len())])
        }
        SpaceDescriptor::Product(a, b) => {
            let p = random_point(a, rng, policy, scale)?;
            let q = random_point(b, rng, policy, scale)?;
            Ok(PointVal::pair(p.x, q.x))
        }
        SpaceDescriptor::HalfLine => {
            let x = -(1.0 - rng.gen::<f64>()).ln() * scale as f64 / 8.0;
            Ok(PointVal::real(x.max(f64::MIN_POSITIVE)))
        }
    }
}

/// `size` random points of `space` (fewer if draws coincide). Line points
/// are tagged irrational with probability 1/2 outside rational-only parts.
pub fn random_subset<R: Rng>(space: &SpaceDescriptor, rng: &mut R, size: usize) -> Result<FiniteSet> {
    let mut v = Vec::with_capacity(size);
    for _ in 0..size {
        v.push(random_point(space, rng, TagPolicy::Mixed, 4 * size.max(4) as u64)?);
    }
    FiniteSet::try_new(v)
}

/// A random finite set with `d_H(K, I) < delta`: one point per stratum of
/// width `delta / 2`, plus a few free extras.
pub fn random_sdense<R: Rng>(space: &SpaceDescriptor, delta: f64, rng: &mut R, policy: TagPolicy) -> Result<FiniteSet> {
    if !(delta > 0.0) {
        return Err(Error::domain("delta must be positive"));
    }
    let w = 0.5 * delta;
    let mut pts = Vec::new();
    match space {
        SpaceDescriptor::Interval(_) | SpaceDescriptor::Union(_) => {
            for s in space.segments().unwrap_or_default() {
                let cells = ((s.len() / w).ceil() as usize).max(1);
                let cw = s.len() / cells as f64;
                for c in 0..cells {
                    let lo = s.lo + c as f64 * cw;
                    let mut x = lo + rng.gen::<f64>() * cw;
                    if !s.contains_x(x) {
                        x = lo + 0.5 * cw;
                    }
                    if s.contains_x(x) {
                        pts.push(PointVal::tagged(x, policy.tag(rng, s.rational_only)));
                    }
                }
            }
        }
        SpaceDescriptor::Harmonic { extras } => {
            let mut n = 1u64;
            while harmonic_value(n) >= w {
                pts.push(PointVal::indexed(n, harmonic_value(n)));
                n += 1;
            }
            pts.extend(extras.iter().map(|&e| PointVal::real(e)));
            for _ in 0..rng.gen_range(0..4) {
                let m = rng.gen_range(n..n + 4 * n);
                pts.push(PointVal::indexed(m, harmonic_value(m)));
            }
        }
        SpaceDescriptor::Dyadic { first } => {
            let mut n = *first as u64;
            while dyadic_value(n) >= w && n <= 1074 {
                pts.push(PointVal::indexed(n, dyadic_value(n)));
                n += 1;
            }
            for _ in 0..rng.gen_range(0..4) {
                let m = rng.gen_range(n..n + 20);
                pts.push(PointVal::indexed(m, dyadic_value(m)));
            }
        }
        SpaceDescriptor::FunctionInduced(seq) => {
            let mut p = 8u64;
            while seq.tail_radius(p).ok_or_else(|| Error::unresolved("no tail envelope"))? >= w && p < (1 << 22) {
                p *= 2;
            }
            let keep = rng.gen_range(p..=2 * p);
            pts.extend((1..=keep).map(|n| PointVal::indexed(n, seq.value(n))));
        }
        SpaceDescriptor::Cantor => {
            let mut depth = 0;
            while 3f64.powi(-depth) >= w {
                depth += 1;
            }
            pts.extend(cantor::interval_endpoints(depth as u32).into_iter().map(PointVal::real));
        }
        SpaceDescriptor::Finite(s) => pts.extend_from_slice(s.points()),
        SpaceDescriptor::Product(a, b) => {
            let ka = random_sdense(a, 0.5 * delta, rng, policy)?;
            let kb = random_sdense(b, 0.5 * delta, rng, policy)?;
            for p in ka.iter() {
                for q in kb.iter() {
                    pts.push(PointVal::pair(p.x, q.x));
                }
            }
        }
        SpaceDescriptor::HalfLine => return Err(Error::domain("use the half-line density notion")),
    }
    let k = FiniteSet::try_new(pts)?;
    if !is_sdense(&k, space, delta)? {
        return Err(Error::unresolved(format!("random set is not {delta}-sdense")));
    }
    Ok(k)
}

/// A random subset of `(0, inf)` whose part in `(0, 1/delta)` is
/// `delta`-dense there, plus a few points beyond `1/delta`.
pub fn random_dense_halfline<R: Rng>(delta: f64, rng: &mut R) -> Result<FiniteSet> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("half-line density needs 0 < delta < 1, got {delta}")));
    }
    let r = 1.0 / delta;
    let cells = (2.0 * r / delta).ceil();
    if cells > 4.0e6 {
        return Err(Error::unresolved(format!("delta {delta} needs {cells} points")));
    }
    let cells = cells as usize;
    let cw = r / cells as f64;
    let mut pts = Vec::with_capacity(cells + 4);
    for c in 0..cells {
        let x = (c as f64 + rng.gen_range(0.05..0.95)) * cw;
        pts.push(PointVal::real(x));
    }
    for _ in 0..rng.gen_range(0..4) {
        pts.push(PointVal::real(rng.gen_range(r..4.0 * r)));
    }
    let k = FiniteSet::try_new(pts)?;
    if !is_delta_dense_halfline(&k, delta)? {
        return Err(Error::unresolved(format!("random set is not {delta}-dense on the half-line")));
    }
    Ok(k)
}

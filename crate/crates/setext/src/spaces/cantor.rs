//! Finite subsets of the ternary Cantor set with eventually constant digit
//! expansions, kept as integer numerators so means and gaps are exact.
//!
//! For depth `n`, every point `0.x_1 x_2 ... x_{n-1} t t t ...` (base 3,
//! digits in `{0, 2}`) equals `(2 * sum x_i 3^(n-1-i) + t) / (2 * 3^(n-1))`.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::metric_core::{FiniteSet, PointVal};

/// The two ladders at depth `n`.
///
/// `k`: digits from position `n` on are constant.
/// `l = l1 ∪ l2`: `l1` has first digit 0 and its last two free digits
/// `(x_{n-1}, x_n)` equal to `(2, 0)` or `(0, 2)`; `l2` has first digit 2.
#[derive(Clone, Debug)]
pub struct CantorLadder {
    pub n: u32,
    k: Vec<u64>,
    l1: Vec<u64>,
    l2: Vec<u64>,
}

fn pow3(e: u32) -> u64 {
    3u64.pow(e)
}

impl CantorLadder {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("cantor ladder needs n >= 2, got {n}")));
        }
        if n > 30 {
            return Err(Error::domain(format!("cantor ladder depth {n} exceeds 30")));
        }
        let free = n - 1;
        let mut k = Vec::with_capacity(1 << n);
        let mut l1 = Vec::new();
        let mut l2 = Vec::new();
        for mask in 0u64..(1 << free) {
            // Digit i (1-based) is 2 when bit (free - i) is set.
            let mut head = 0u64;
            for i in 1..=free {
                if mask >> (free - i) & 1 == 1 {
                    head += 2 * pow3(free - i);
                }
            }
            let x1 = mask >> (free - 1) & 1;
            let x_last = mask & 1;
            for t in [0u64, 1] {
                let num = 2 * head + 2 * t;
                k.push(num);
                if x1 == 1 {
                    l2.push(num);
                } else if n >= 3 && x_last != t {
                    l1.push(num);
                } else if n == 2 && t == 1 {
                    // Only x_1 = x_{n-1} = 0 with x_n = 2 remains.
                    l1.push(num);
                }
            }
        }
        k.sort_unstable();
        l1.sort_unstable();
        l2.sort_unstable();
        Ok(CantorLadder { n, k, l1, l2 })
    }

    /// Common denominator `2 * 3^(n-1)` of every numerator.
    pub fn denom(&self) -> u64 {
        2 * pow3(self.n - 1)
    }

    pub fn k_numerators(&self) -> &[u64] {
        &self.k
    }

    pub fn l_numerators(&self) -> Vec<u64> {
        let mut v = self.l1.clone();
        v.extend_from_slice(&self.l2);
        v.sort_unstable();
        v
    }

    pub fn l1_len(&self) -> usize {
        self.l1.len()
    }

    pub fn l2_len(&self) -> usize {
        self.l2.len()
    }

    fn rational(&self, num: u64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(self.denom()))
    }

    fn mean_of(&self, nums: &[u64]) -> BigRational {
        let s: u128 = nums.iter().map(|&v| v as u128).sum();
        BigRational::new(BigInt::from(s), BigInt::from(self.denom() as u128 * nums.len() as u128))
    }

    pub fn k_rationals(&self) -> Vec<BigRational> {
        self.k.iter().map(|&v| self.rational(v)).collect()
    }

    pub fn l_rationals(&self) -> Vec<BigRational> {
        self.l_numerators().into_iter().map(|v| self.rational(v)).collect()
    }

    pub fn mean_k(&self) -> BigRational {
        self.mean_of(&self.k)
    }

    pub fn mean_l(&self) -> BigRational {
        self.mean_of(&self.l_numerators())
    }

    /// Exact `d_H(K_n, C)`.
    pub fn gap_k(&self) -> BigRational {
        self.gap_of(&self.k)
    }

    /// Exact `d_H(L_n, C)`.
    pub fn gap_l(&self) -> BigRational {
        self.gap_of(&self.l_numerators())
    }

    /// Exact minimum distance between distinct points of `nums`.
    pub fn min_pairwise(&self, nums: &[u64]) -> BigRational {
        let m = nums.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
        self.rational(m)
    }

    fn gap_of(&self, nums: &[u64]) -> BigRational {
        // Integer units of 1 / (4 * 3^(n + extra)); a midpoint landing on the
        // centre of a surviving interval at the finest level forces one more.
        for extra in 0..8u32 {
            let g = 4 * pow3(self.n + extra) as u128;
            let scale = 6 * pow3(extra) as u128;
            let xs: Vec<u128> = nums.iter().map(|&v| scale * v as u128).collect();
            let mut best = xs[0].max(g - xs[xs.len() - 1]);
            let mut ambiguous = false;
            for w in xs.windows(2) {
                let h = (w[1] - w[0]) / 2;
                let m = w[0] + h;
                let c = match removed_gap(m, g) {
                    Cut::Removed(l, r) => h - (m - l).min(r - m),
                    Cut::Member => h,
                    Cut::TooCoarse => {
                        ambiguous = true;
                        break;
                    }
                };
                best = best.max(c);
            }
            if !ambiguous {
                return BigRational::new(BigInt::from(best), BigInt::from(g));
            }
        }
        unreachable!("cantor gap did not resolve within 8 extra levels")
    }

    pub fn k_set(&self) -> FiniteSet {
        self.to_set(&self.k)
    }

    pub fn l_set(&self) -> FiniteSet {
        self.to_set(&self.l_numerators())
    }

    fn to_set(&self, nums: &[u64]) -> FiniteSet {
        let d = self.denom() as f64;
        FiniteSet::new(nums.iter().map(|&v| PointVal::real(v as f64 / d)).collect())
    }
}

enum Cut {
    Removed(u128, u128),
    Member,
    TooCoarse,
}

/// Removed middle third containing `x / g` in its interior, as integer
/// endpoints.
fn removed_gap(x: u128, g: u128) -> Cut {
    let mut base = 0u128;
    let mut w = g;
    while w % 3 == 0 {
        let t = w / 3;
        let off = x - base;
        if off > t && off < 2 * t {
            return Cut::Removed(base + t, base + 2 * t);
        }
        if off >= 2 * t {
            base += 2 * t;
        }
        w = t;
    }
    // Here w = 4: offsets 0, 1/4, 3/4 and 1 of the interval lie in C, while
    // 1/2 sits in the next removed third, whose ends are not integers.
    if 2 * (x - base) == w {
        Cut::TooCoarse
    } else {
        Cut::Member
    }
}

/// `K_n` and `L_n` as exact rationals.
pub fn cantor_samples(n: u32) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let ladder = CantorLadder::new(n)?;
    Ok((ladder.k_rationals(), ladder.l_rationals()))
}

/// Membership in the Cantor set up to `1e-12` snapping at gap endpoints.
pub fn in_cantor_f64(x: f64) -> bool {
    if !(-1e-12..=1.0 + 1e-12).contains(&x) {
        return false;
    }
    let eps = 1e-12;
    let mut a = 0.0f64;
    let mut w = 1.0f64;
    for _ in 0..30 {
        w /= 3.0;
        let l = a + w;
        let r = a + 2.0 * w;
        if x > l + eps && x < r - eps {
            return false;
        }
        if (x - l).abs() <= eps || (x - r).abs() <= eps {
            return true;
        }
        if x >= r {
            a = r;
        }
    }
    true
}

/// Endpoints of the `2^depth` closed intervals of the level-`depth`
/// construction, ascending.
pub fn interval_endpoints(depth: u32) -> Vec<f64> {
    let d = pow3(depth) as f64;
    let mut v = Vec::with_capacity(1 << (depth + 1));
    for mask in 0u64..(1 << depth) {
        let mut left = 0u64;
        for i in 1..=depth {
            if mask >> (depth - i) & 1 == 1 {
                left += 2 * pow3(depth - i);
            }
        }
        v.push(left as f64 / d);
        v.push((left + 1) as f64 / d);
    }
    v
}

//! Set functions whose extensions are series, integrals, arc length and
//! means, with closed-form oracles for checking them.

mod integrals;
mod means;
mod measure;
mod series;

pub use integrals::{
    riemann_sum, sf_darboux_upper, sf_inner_jordan, sf_polygon_length, sf_riemann, Curve, RealFn,
    SupOracle,
};
pub use means::{
    arrange_blocks, arrange_iso_sequence, mean_eds_limit, mean_iso, mean_iso_limit, sf_iso_dyadic,
    sf_mean_eds, sf_sequence_limit, sf_unordered_mean, unordered_average_oracle, AverageVerdict,
    IsoComponent, IsoSetSpec, MeanSpec,
};
pub use measure::{
    check_additivity, d_increasing_delta, left_continuity_delta, sf_measure_integral, LayerOracle,
    MeasureOracle,
    MeasureVariant,
};
pub use series::{partial_sum, sf_series_dyadic, sf_series_harmonic, sf_unordered_sum, SeriesSpec};

use crate::error::{Error, Result};
use crate::ext_engine::SetFunction;
use crate::metric_core::{FiniteSet, TAG_IRRATIONAL};
use crate::spaces::SpaceDescriptor;

fn nonempty(k: &FiniteSet, name: &str) -> Result<()> {
    if k.is_empty() {
        return Err(Error::domain(format!("{name} is undefined on the empty set")));
    }
    Ok(())
}

/// `(min K + max K) / 2`.
pub fn sf_midpoint() -> SetFunction {
    SetFunction::new("midpoint", crate::ext_engine::DomainClass::All, |k| {
        nonempty(k, "midpoint")?;
        Ok(0.5 * (k.min_x() + k.max_x()))
    })
}

/// `max K - min K`; zero on the empty set.
pub fn sf_diam() -> SetFunction {
    SetFunction::pure("diam", |k| if k.is_empty() { 0.0 } else { k.max_x() - k.min_x() })
}

/// Finite summation `sum_{k in K} k` over point values.
pub fn sf_finite_sum() -> SetFunction {
    SetFunction::pure("finite-sum", |k| k.iter().map(|p| p.x).sum())
}

/// Arithmetic mean of the point values.
pub fn sf_finite_mean() -> SetFunction {
    SetFunction::new("finite-mean", crate::ext_engine::DomainClass::All, |k| {
        nonempty(k, "finite-mean")?;
        Ok(k.iter().map(|p| p.x).sum::<f64>() / k.len() as f64)
    })
}

pub fn sf_constant(c: f64) -> SetFunction {
    SetFunction::pure(format!("constant({c})"), move |_| c)
}

/// `1` if every point of `K` lies in `j`, else `0`.
pub fn sf_subset_indicator(j: SpaceDescriptor) -> SetFunction {
    SetFunction::pure(format!("indicator(K in {})", j.kind_name()), move |k| {
        if k.iter().all(|p| j.contains(p)) {
            1.0
        } else {
            0.0
        }
    })
}

/// `0` if `K` avoids the irrational-tagged part of the line, else `1`.
/// Increasing, but not d-increasing, on `(0, 1)` split into its two dense
/// parts.
pub fn sf_two_dense_indicator() -> SetFunction {
    SetFunction::pure("two-dense-indicator", |k| {
        if k.iter().any(|p| p.label == TAG_IRRATIONAL) {
            1.0
        } else {
            0.0
        }
    })
}

/// On `{2^-n}`: `sum K` for even `|K|`, `sum (K - min K) - 1/|K|` for odd.
/// d-increasing with a finite extension, but not increasing.
pub fn sf_parity_dyadic() -> SetFunction {
    SetFunction::pure("parity-dyadic", |k| {
        let total: f64 = k.iter().map(|p| p.x).sum();
        if k.len() % 2 == 0 {
            total
        } else {
            total - k.min_x() - 1.0 / k.len() as f64
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::PointVal;
    use crate::spaces::Segment;

    #[test]
    fn basic_functionals() {
        let k = FiniteSet::from_reals(&[0.2, 0.5, 0.9]);
        assert!((sf_midpoint().eval(&k).unwrap() - 0.55).abs() < 1e-15);
        assert!((sf_diam().eval(&k).unwrap() - 0.7).abs() < 1e-15);
        assert!((sf_finite_sum().eval(&k).unwrap() - 1.6).abs() < 1e-15);
        assert!(sf_midpoint().eval(&FiniteSet::empty()).is_err());
        assert_eq!(sf_diam().eval(&FiniteSet::empty()).unwrap(), 0.0);
    }

    #[test]
    fn indicators() {
        let q = SpaceDescriptor::Interval(Segment::closed(0.0, 1.0).rationals());
        let s = sf_subset_indicator(q);
        let rational = FiniteSet::from_reals(&[0.1, 0.7]);
        let mixed = FiniteSet::new(vec![PointVal::real(0.1), PointVal::tagged(0.4, TAG_IRRATIONAL)]);
        assert_eq!(s.eval(&rational).unwrap(), 1.0);
        assert_eq!(s.eval(&mixed).unwrap(), 0.0);
        let t = sf_two_dense_indicator();
        assert_eq!(t.eval(&rational).unwrap(), 0.0);
        assert_eq!(t.eval(&mixed).unwrap(), 1.0);
    }

    #[test]
    fn parity_dyadic_values() {
        let sp = SpaceDescriptor::dyadic();
        let s = sf_parity_dyadic();
        let k2 = FiniteSet::from_indices(&sp, 1..=2).unwrap();
        assert_eq!(s.eval(&k2).unwrap(), 0.75);
        let k3 = FiniteSet::from_indices(&sp, 1..=3).unwrap();
        assert!((s.eval(&k3).unwrap() - (0.75 - 1.0 / 3.0)).abs() < 1e-15);
        // Not increasing: adding a point to an even set can lower the value.
        assert!(s.eval(&k3).unwrap() < s.eval(&k2).unwrap());
    }
}

//! Extension of set functions from finite subsets of a totally bounded
//! pseudo-metric space to the whole space, estimated by Hausdorff refinement.
//!
//! A set function `s` maps finite sets `K` to extended reals. Its extension
//! `ext(s, I)` is the value `A` with `s(K) -> A` as `d_H(K, I) -> 0`. Series,
//! unordered sums and averages, Riemann, Darboux and layer-cake integrals,
//! polygon arc length and two generalised means are all instances.
//!
//! ```
//! use setext::prelude::*;
//!
//! let space = SpaceDescriptor::unit_interval();
//! let s = set_functions::sf_midpoint();
//! let spec = SamplerSpec::grid(Schedule::linear(1, 1));
//! let est = estimate_ext(&s, &space, &spec, &Tolerances::default()).unwrap();
//! assert_eq!(est.status.value(), Some(0.5));
//! ```

pub mod cli;
pub mod error;
pub mod ext_engine;
pub mod metric_core;
pub mod properties;
pub mod set_functions;
pub mod spaces;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::ext_engine::{
        cross_check, estimate_ext, estimate_ext_stretched, estimate_ext_within, ExtensionEstimate,
        SetFunction, Status, Tolerances, DomainClass,
    };
    pub use crate::metric_core::{
        gap_to_space, hausdorff_finite, is_delta_dense, is_sdense, is_stretched,
        is_strongly_stretched, FiniteSet, GapBound, PointVal,
    };
    pub use crate::set_functions;
    pub use crate::spaces::{SamplerSpec, Schedule, Segment, Sequence, SpaceDescriptor, Strategy};
}

//! Bayesian lower bounds for single-tone circular frequency estimation under a
//! von Mises prior, with a Monte Carlo MAP estimator for comparison.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod error;
pub mod map_sim;
pub mod numerics;
pub mod prior;
pub mod signal;
pub mod sweep;
pub mod testpoints;
pub mod wwb;

pub use benchmark::{BoundKind, BoundPoint};
pub use error::{Error, Result};
pub use map_sim::{ErrorMetric, McConfig, McResult};
pub use numerics::QuadratureSpec;
pub use prior::VonMisesPrior;
pub use signal::{ObservationVector, SignalConfig};
pub use sweep::{run_sweep, SweepRow, SweepSpec};
pub use testpoints::{Provenance, TestPointConfig, TestPointSet};
pub use wwb::{optimize_s, wwb_value, WwbEvaluator, WwbResult};

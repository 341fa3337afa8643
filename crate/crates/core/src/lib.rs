//! Feature screening for regressions with far more predictors than rows.
//!
//! The crate ranks predictors by ridge coefficients computed in the dual
//! (observation) space, where the heavy factorization is n-by-n instead of
//! p-by-p. On top of that sit three screeners plus an adaptive one:
//!
//! * [`screening::screen_sis`]: marginal correlation ranking.
//! * [`screening::screen_holp`]: high-dimensional OLS projection, the
//!   ridge limit at r = 0.
//! * [`screening::screen_ridge_holp`]: penalized projection at a fixed r.
//! * [`airholp::air_holp`]: picks the penalty by iteratively minimizing a
//!   spectral estimate of the fit-distortion trade-off.
//!
//! [`simgen`], [`metrics`], and [`bench`] generate synthetic equicorrelated
//! designs, score screening quality over replicates, and time the kernels;
//! [`cli`] wires everything into the `airholp` binary.

pub mod airholp;
pub mod bench;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod manifest;
pub mod metrics;
pub mod report;
pub mod screening;
pub mod simgen;

pub use airholp::{air_holp, AirHolpConfig, AirHolpTrace};
pub use error::{Error, Result};
pub use screening::{
    default_threshold, screen_fixed_ridge, screen_holp, screen_ridge_holp, screen_sis, MethodTag,
    ScreeningResult,
};

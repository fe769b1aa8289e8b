//! Energy-detection spectrum sensing for cognitive radio.
//!
//! The crate covers the whole sensing chain used to study single-threshold,
//! double-threshold and bisection-resolved ("optimum") detection:
//!
//! * [`specfun`] – Gaussian Q, regularized upper incomplete gamma, generalized Marcum Q.
//! * [`signal_model`] – seeded noise / BPSK-plus-noise sample generation.
//! * [`detector`] – energy statistic, threshold decisions and the bisection search.
//! * [`analytic`] – closed-form false-alarm, detection, miss, collision and no-access probabilities.
//! * [`montecarlo`] – deterministic, chunk-parallel Monte Carlo estimates of the same quantities.
//!
//! ```
//! use crn_sense::detector::{bisection_optimum_threshold, BisectionConfig, ThresholdPair};
//!
//! let pair = ThresholdPair::new(12.0, 18.0).unwrap();
//! let res = bisection_optimum_threshold(pair, 12.5, &BisectionConfig::default()).unwrap();
//! assert_eq!(res.lambda_opt, 12.375);
//! ```

pub mod analytic;
pub mod detector;
mod error;
pub mod montecarlo;
pub mod signal_model;
pub mod specfun;

pub use analytic::{DoubleThresholdReport, Form, RocCurve, RocPoint};
pub use detector::{BisectionConfig, BisectionResult, Decision, ThresholdPair};
pub use error::{Error, Result};
pub use montecarlo::{EmpiricalReport, GenerativeModel, RateEstimate, Resolver, TrialConfig};
pub use signal_model::{Hypothesis, Modulation, RngSeed, SampleBlock, SensingParams};

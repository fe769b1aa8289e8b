//! Energy statistic and threshold decisions.

use crate::signal_model::SampleBlock;
use crate::{Error, Result};

/// Sensing outcome. `Idle` corresponds to H0, `Occupied` to H1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Idle,
    Occupied,
    /// Energy inside `[λ_L, λ_H]`; no confident local decision.
    Fuzzy,
}

/// Lower and upper thresholds `(λ_L, λ_H)` of a double-threshold detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPair {
    low: f64,
    high: f64,
}

impl ThresholdPair {
    /// Requires `0 ≤ low < high < ∞`.
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite()) || low < 0.0 || low >= high {
            return Err(Error::InvalidParameter(format!(
                "threshold pair needs 0 <= lambda_low < lambda_high, got ({low}, {high})"
            )));
        }
        Ok(Self { low, high })
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    pub fn contains(&self, energy: f64) -> bool {
        self.low <= energy && energy <= self.high
    }
}

/// Controls for [`bisection_optimum_threshold`].
///
/// A zero product `f(low)·f(mid) = 0` always takes the `low ← mid` branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionConfig {
    pub max_iter: u32,
    /// Stop early once the bracket width is at most this value. Zero means
    /// the iteration count alone decides.
    pub min_tol: f64,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            max_iter: 4,
            min_tol: 0.0,
        }
    }
}

impl BisectionConfig {
    pub fn with_max_iter(max_iter: u32) -> Self {
        Self {
            max_iter,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        if !(self.min_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "min_tol must be non-negative, got {}",
                self.min_tol
            )));
        }
        Ok(())
    }

    /// Number of midpoints the search produces on a bracket of the given
    /// width. Independent of the energy being searched for.
    pub fn iterations_for_width(&self, width: f64) -> u32 {
        let mut w = width;
        let mut n = 0;
        while n < self.max_iter && (n == 0 || w > self.min_tol) {
            w *= 0.5;
            n += 1;
        }
        n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionResult {
    pub lambda_opt: f64,
    pub iterations_used: u32,
    /// Midpoints in evaluation order; the last one is `lambda_opt`.
    pub trace: Vec<f64>,
}

/// Mean squared sample, `T = (1/M) Σ y(n)²`.
pub fn energy_statistic(block: &SampleBlock) -> Result<f64> {
    energy_of(&block.samples)
}

pub fn energy_of(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Precondition("energy of an empty block".into()));
    }
    Ok(samples.iter().map(|y| y * y).sum::<f64>() / samples.len() as f64)
}

/// `Occupied` iff `energy > lambda`; the boundary decides `Idle`.
pub fn single_threshold_decide(energy: f64, lambda: f64) -> Decision {
    if energy > lambda {
        Decision::Occupied
    } else {
        Decision::Idle
    }
}

/// `Idle` below `λ_L`, `Occupied` above `λ_H`, `Fuzzy` on the closed band between.
pub fn double_threshold_decide(energy: f64, pair: ThresholdPair) -> Decision {
    if energy < pair.low {
        Decision::Idle
    } else if energy > pair.high {
        Decision::Occupied
    } else {
        Decision::Fuzzy
    }
}

/// Sign-test bisection of `f(x) = x − energy` over `[λ_L, λ_H]`.
///
/// Each step sets `mid = (low + high) / 2`, then `high ← mid` when
/// `f(low)·f(mid) < 0` and `low ← mid` otherwise (zero products included).
/// The last midpoint is returned after `max_iter` steps, or earlier once the
/// bracket is no wider than `min_tol`.
pub fn bisection_optimum_threshold(
    pair: ThresholdPair,
    energy: f64,
    config: &BisectionConfig,
) -> Result<BisectionResult> {
    config.validate()?;
    if !pair.contains(energy) {
        return Err(Error::Precondition(format!(
            "energy {energy} outside [{}, {}]: f(x) = x - energy has no sign change",
            pair.low, pair.high
        )));
    }
    let f = |x: f64| x - energy;
    let (mut low, mut high) = (pair.low, pair.high);
    let mut trace = Vec::with_capacity(config.max_iter as usize);
    while trace.len() < config.max_iter as usize
        && (trace.is_empty() || high - low > config.min_tol)
    {
        let mid = 0.5 * (low + high);
        trace.push(mid);
        if f(low) * f(mid) < 0.0 {
            high = mid;
        } else {
            low = mid;
        }
    }
    Ok(BisectionResult {
        lambda_opt: *trace.last().expect("at least one iteration"),
        iterations_used: trace.len() as u32,
        trace,
    })
}

/// Turns a fuzzy outcome into a binary one by thresholding the energy at the
/// bisection result.
pub fn resolve_fuzzy(
    energy: f64,
    pair: ThresholdPair,
    config: &BisectionConfig,
) -> Result<Decision> {
    if double_threshold_decide(energy, pair) != Decision::Fuzzy {
        return Err(Error::Precondition(format!(
            "energy {energy} is not in the fuzzy band [{}, {}]",
            pair.low, pair.high
        )));
    }
    let opt = bisection_optimum_threshold(pair, energy, config)?;
    Ok(single_threshold_decide(energy, opt.lambda_opt))
}

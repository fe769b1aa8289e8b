//! Seeded Monte Carlo estimation of the detection probabilities.
//!
//! Trials are grouped into fixed blocks of [`BLOCK_TRIALS`]; block `b` under
//! hypothesis `h` draws from ChaCha8 stream `2b + h`. `parallel_chunks` only
//! decides how many contiguous runs of blocks are handed to rayon, so every
//! count is bit-identical for any chunk count.
//!
//! All estimators work on per-trial energies, which lets a whole threshold
//! grid (or a list of threshold pairs) be evaluated on common random numbers.

use std::fmt;
use std::str::FromStr;

use log::info;
use rayon::prelude::*;

use crate::analytic::{descending_grid, RocCurve, RocPoint};
use crate::detector::{
    bisection_optimum_threshold, double_threshold_decide, resolve_fuzzy, BisectionConfig, Decision,
    ThresholdPair,
};
use crate::signal_model::{
    add_bpsk, fill_noise, GaussianSource, Hypothesis, Modulation, RngSeed, SensingParams,
};
use crate::{Error, Result};

/// Trials per RNG stream.
pub const BLOCK_TRIALS: usize = 1024;

/// How the energy statistic of one trial is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GenerativeModel {
    /// `M` received samples, energy = mean square. Matches the Gaussian form.
    Sample,
    /// Noise-normalized sum of `2u` squared unit Gaussians, with
    /// noncentrality `2γ` under H1. Matches the gamma/Marcum form.
    #[default]
    ChiSquare,
}

impl FromStr for GenerativeModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" => Ok(GenerativeModel::Sample),
            "chisq" | "chi-square" => Ok(GenerativeModel::ChiSquare),
            other => Err(Error::InvalidParameter(format!(
                "unknown generative model '{other}'"
            ))),
        }
    }
}

impl fmt::Display for GenerativeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenerativeModel::Sample => "sample",
            GenerativeModel::ChiSquare => "chisq",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    /// Trials per hypothesis.
    pub num_trials: usize,
    pub seed: RngSeed,
    pub params: SensingParams,
    pub mode: Modulation,
    pub model: GenerativeModel,
    pub parallel_chunks: usize,
}

impl TrialConfig {
    pub fn new(
        num_trials: usize,
        seed: RngSeed,
        params: SensingParams,
        model: GenerativeModel,
    ) -> Self {
        Self {
            num_trials,
            seed,
            params,
            mode: Modulation::default(),
            model,
            parallel_chunks: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.num_trials == 0 {
            return Err(Error::InvalidParameter(
                "num_trials must be at least 1".into(),
            ));
        }
        if self.parallel_chunks == 0 {
            return Err(Error::InvalidParameter(
                "parallel_chunks must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Binomial rate with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci95_halfwidth: f64,
}

impl RateEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(
            trials > 0 && successes <= trials,
            "invalid counts {successes}/{trials}"
        );
        let n = trials as f64;
        let rate = successes as f64 / n;
        Self {
            successes,
            trials,
            rate,
            ci95_halfwidth: 1.96 * (rate * (1.0 - rate) / n).sqrt(),
        }
    }

    /// Binomial standard deviation of the rate if the true probability is `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Whether `p` is within `k` binomial standard deviations (evaluated at `p`).
    pub fn covers(&self, p: f64, k: f64) -> bool {
        (self.rate - p).abs() <= k * self.sigma_at(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalReport {
    pub pf: RateEstimate,
    pub pd: RateEstimate,
    pub pm: RateEstimate,
    pub pc: RateEstimate,
    pub pna: RateEstimate,
    /// Share of H0 trials that landed in the fuzzy band (before resolution).
    pub fuzzy_rate_h0: RateEstimate,
    pub fuzzy_rate_h1: RateEstimate,
}

/// What to do with energies inside `[λ_L, λ_H]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolver {
    /// Keep them as fuzzy reports: neither detections nor collisions.
    ReportFuzzy,
    /// Decide them by thresholding at the bisection result.
    BisectionResolve(BisectionConfig),
}

fn stream_index(block: usize, truth: Hypothesis) -> u64 {
    2 * block as u64
        + match truth {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
}

fn simulate_block(config: &TrialConfig, truth: Hypothesis, block: usize, out: &mut Vec<f64>) {
    let start = block * BLOCK_TRIALS;
    let count = BLOCK_TRIALS.min(config.num_trials - start);
    let mut src = GaussianSource::new(config.seed.stream(stream_index(block, truth)));
    let params = &config.params;
    match config.model {
        GenerativeModel::Sample => {
            let mut buf = vec![0.0; params.num_samples];
            let m = params.num_samples as f64;
            for _ in 0..count {
                fill_noise(&mut src, params.noise_variance, &mut buf);
                if truth == Hypothesis::H1 {
                    add_bpsk(&mut src, config.mode, params.signal_variance(), &mut buf);
                }
                out.push(buf.iter().map(|y| y * y).sum::<f64>() / m);
            }
        }
        GenerativeModel::ChiSquare => {
            let dof = 2 * params.time_bandwidth as usize;
            let shift = match truth {
                Hypothesis::H0 => 0.0,
                Hypothesis::H1 => (2.0 * params.snr_linear()).sqrt(),
            };
            for _ in 0..count {
                let first = src.standard_normal() + shift;
                let mut t = first * first;
                for _ in 1..dof {
                    let z = src.standard_normal();
                    t += z * z;
                }
                out.push(t);
            }
        }
    }
}

/// Energy statistic of every trial under `truth`, in trial order.
pub fn simulate_energies(config: &TrialConfig, truth: Hypothesis) -> Result<Vec<f64>> {
    config.validate()?;
    let blocks = config.num_trials.div_ceil(BLOCK_TRIALS);
    let chunks = config.parallel_chunks.min(blocks);
    let per_chunk = blocks.div_ceil(chunks);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let range = (c * per_chunk)..((c + 1) * per_chunk).min(blocks);
            let mut out = Vec::with_capacity(range.len() * BLOCK_TRIALS);
            for b in range {
                simulate_block(config, truth, b, &mut out);
            }
            out
        })
        .collect();
    Ok(parts.concat())
}

fn count_above(energies: &[f64], lambda: f64) -> u64 {
    energies.iter().filter(|&&e| e > lambda).count() as u64
}

/// Fraction of trials under `truth` whose energy exceeds `lambda`.
pub fn estimate_single(
    lambda: f64,
    config: &TrialConfig,
    truth: Hypothesis,
) -> Result<RateEstimate> {
    let energies = simulate_energies(config, truth)?;
    Ok(RateEstimate::from_counts(
        count_above(&energies, lambda),
        energies.len() as u64,
    ))
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    idle: u64,
    occupied: u64,
    fuzzy: u64,
    resolved_idle: u64,
    resolved_occupied: u64,
}

fn tally(energies: &[f64], pair: ThresholdPair, resolver: &Resolver) -> Result<Tally> {
    let mut t = Tally::default();
    for &e in energies {
        match double_threshold_decide(e, pair) {
            Decision::Idle => t.idle += 1,
            Decision::Occupied => t.occupied += 1,
            Decision::Fuzzy => {
                t.fuzzy += 1;
                if let Resolver::BisectionResolve(cfg) = resolver {
                    match resolve_fuzzy(e, pair, cfg)? {
                        Decision::Occupied => t.resolved_occupied += 1,
                        _ => t.resolved_idle += 1,
                    }
                }
            }
        }
    }
    Ok(t)
}

/// Double-threshold report from precomputed H0 / H1 energies.
pub fn report_from_energies(
    pair: ThresholdPair,
    h0: &[f64],
    h1: &[f64],
    resolver: &Resolver,
) -> Result<EmpiricalReport> {
    if h0.is_empty() || h1.is_empty() {
        return Err(Error::Precondition(
            "need at least one trial per hypothesis".into(),
        ));
    }
    if let Resolver::BisectionResolve(cfg) = resolver {
        cfg.validate()?;
    }
    let t0 = tally(h0, pair, resolver)?;
    let t1 = tally(h1, pair, resolver)?;
    let (n0, n1) = (h0.len() as u64, h1.len() as u64);
    let rate = RateEstimate::from_counts;

    let occupied0 = t0.occupied + t0.resolved_occupied;
    let occupied1 = t1.occupied + t1.resolved_occupied;
    let pna = match resolver {
        // a fuzzy report keeps the secondary user off the channel
        Resolver::ReportFuzzy => t0.occupied + t0.fuzzy,
        Resolver::BisectionResolve(_) => occupied0,
    };
    Ok(EmpiricalReport {
        pf: rate(occupied0, n0),
        pd: rate(occupied1, n1),
        pm: rate(n1 - occupied1, n1),
        pc: rate(t1.idle + t1.resolved_idle, n1),
        pna: rate(pna, n0),
        fuzzy_rate_h0: rate(t0.fuzzy, n0),
        fuzzy_rate_h1: rate(t1.fuzzy, n1),
    })
}

/// Runs `num_trials` trials under each hypothesis through the double-threshold detector.
pub fn estimate_double(
    pair: ThresholdPair,
    config: &TrialConfig,
    resolver: Resolver,
) -> Result<EmpiricalReport> {
    let h0 = simulate_energies(config, Hypothesis::H0)?;
    let h1 = simulate_energies(config, Hypothesis::H1)?;
    report_from_energies(pair, &h0, &h1, &resolver)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRocPoint {
    pub lambda: f64,
    pub pf: RateEstimate,
    pub pd: RateEstimate,
}

/// Empirical ROC with the per-point rate estimates kept.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpiricalRoc {
    pub points: Vec<EmpiricalRocPoint>,
}

impl EmpiricalRoc {
    pub fn to_curve(&self) -> RocCurve {
        RocCurve {
            points: self
                .points
                .iter()
                .map(|p| RocPoint {
                    lambda: p.lambda,
                    pf: p.pf.rate,
                    pd: p.pd.rate,
                })
                .collect(),
        }
    }
}

/// Single-threshold ROC from precomputed energies; every grid point sees the same trials.
pub fn roc_from_energies(lambda_grid: &[f64], h0: &[f64], h1: &[f64]) -> Result<EmpiricalRoc> {
    if h0.is_empty() || h1.is_empty() {
        return Err(Error::Precondition(
            "need at least one trial per hypothesis".into(),
        ));
    }
    let sorted = |e: &[f64]| {
        let mut v = e.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let (s0, s1) = (sorted(h0), sorted(h1));
    let above = |s: &[f64], lambda: f64| (s.len() - s.partition_point(|&e| e <= lambda)) as u64;
    let points = descending_grid(lambda_grid)
        .into_iter()
        .map(|lambda| EmpiricalRocPoint {
            lambda,
            pf: RateEstimate::from_counts(above(&s0, lambda), s0.len() as u64),
            pd: RateEstimate::from_counts(above(&s1, lambda), s1.len() as u64),
        })
        .collect();
    Ok(EmpiricalRoc { points })
}

pub fn roc_empirical(lambda_grid: &[f64], config: &TrialConfig) -> Result<EmpiricalRoc> {
    let h0 = simulate_energies(config, Hypothesis::H0)?;
    let h1 = simulate_energies(config, Hypothesis::H1)?;
    roc_from_energies(lambda_grid, &h0, &h1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionRow {
    pub pair: ThresholdPair,
    /// Energy scenario the bisection column is computed for.
    pub energy: f64,
    /// `None` when the scenario energy lies outside the pair's band.
    pub lambda_opt: Option<f64>,
    /// Collision rate with fuzzy outcomes reported, not decided.
    pub pc_double: RateEstimate,
    /// Collision rate with fuzzy outcomes resolved by bisection.
    pub pc_optimum: RateEstimate,
    /// False-alarm rate of the double-threshold detector.
    pub pf: RateEstimate,
}

/// Collision rates for each pair and energy scenario, on common random numbers.
pub fn collision_sweep(
    pairs: &[ThresholdPair],
    energy_scenarios: &[f64],
    config: &TrialConfig,
    bisection: &BisectionConfig,
) -> Result<Vec<CollisionRow>> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter(
            "collision sweep needs at least one threshold pair".into(),
        ));
    }
    if energy_scenarios.is_empty() {
        return Err(Error::InvalidParameter(
            "collision sweep needs at least one energy scenario".into(),
        ));
    }
    bisection.validate()?;
    let h0 = simulate_energies(config, Hypothesis::H0)?;
    let h1 = simulate_energies(config, Hypothesis::H1)?;

    let mut rows = Vec::with_capacity(pairs.len() * energy_scenarios.len());
    for &pair in pairs {
        let double = report_from_energies(pair, &h0, &h1, &Resolver::ReportFuzzy)?;
        let optimum =
            report_from_energies(pair, &h0, &h1, &Resolver::BisectionResolve(*bisection))?;
        let change = optimum.pc.rate - double.pc.rate;
        info!(
            "pair ({}, {}): pc_optimum - pc_double = {change:+.6} ({})",
            pair.low(),
            pair.high(),
            if change <= 0.0 {
                "reduction"
            } else {
                "increase"
            }
        );
        for &energy in energy_scenarios {
            let lambda_opt = if pair.contains(energy) {
                Some(bisection_optimum_threshold(pair, energy, bisection)?.lambda_opt)
            } else {
                None
            };
            rows.push(CollisionRow {
                pair,
                energy,
                lambda_opt,
                pc_double: double.pc,
                pc_optimum: optimum.pc,
                pf: double.pf,
            });
        }
    }
    Ok(rows)
}

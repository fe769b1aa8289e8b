use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use crn_sense::{GenerativeModel, Modulation, SensingParams};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "crn-sense",
    version,
    about = "Energy-detection spectrum sensing experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recompute a comparison table (2: P_d, 3: P_f, 4: P_m, 5: P_c).
    Tables(TablesArgs),
    /// Analytic and Monte Carlo ROC for the single, double and optimum detectors.
    Roc(RocArgs),
    /// Collision rates of the double-threshold and bisection-resolved detectors.
    Collision(CollisionArgs),
    /// Print the bisection midpoint trace for one energy.
    Bisect(BisectArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SensingArgs {
    /// Signal-to-noise ratio in dB.
    #[arg(long, default_value_t = -14.0, allow_negative_numbers = true)]
    pub snr_db: f64,
    /// Time-bandwidth product.
    #[arg(long, default_value_t = 5)]
    pub u: u32,
    /// Samples per sensing interval (sample model).
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Noise variance.
    #[arg(long, default_value_t = 1.0)]
    pub noise_var: f64,
}

impl SensingArgs {
    pub fn params(&self) -> Result<SensingParams, CliError> {
        Ok(SensingParams::new(
            self.samples,
            self.snr_db,
            self.noise_var,
            self.u,
        )?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct MonteCarloArgs {
    /// Trials per hypothesis.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, env = "CRN_SENSE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Parallel work chunks; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub chunks: usize,
    #[arg(long, default_value_t = GenerativeModel::ChiSquare, value_name = "sample|chisq")]
    pub model: GenerativeModel,
    #[arg(long, default_value_t = Modulation::BasebandBpsk, value_name = "baseband|carrier")]
    pub mode: Modulation,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=5))]
    pub which: u8,
    #[command(flatten)]
    pub sensing: SensingArgs,
    #[arg(long, default_value_t = 4)]
    pub max_iter: u32,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RocArgs {
    #[command(flatten)]
    pub sensing: SensingArgs,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
    /// Threshold grid `lo:hi:n`. Defaults to 0:40:41 (chisq) or 0.9:1.2:31 (sample).
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Fuzzy band width W; the double and optimum curves use the pair (λ, λ + W).
    /// Defaults to 6 (chisq) or 0.05 (sample).
    #[arg(long)]
    pub fuzzy_width: Option<f64>,
    #[arg(long, default_value_t = 4)]
    pub max_iter: u32,
    /// Output path; `<stem>_single.csv`, `<stem>_double.csv` and `<stem>_optimum.csv` are written.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CollisionArgs {
    #[command(flatten)]
    pub sensing: SensingArgs,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
    /// Threshold pair `low:high`; repeatable.
    #[arg(long = "pair")]
    pub pairs: Vec<PairArg>,
    /// Energy scenario for the bisection column; repeatable. Defaults to 14.5.
    #[arg(long = "energy", allow_negative_numbers = true)]
    pub energies: Vec<f64>,
    /// Use the eight published collision-table pairs with energy 14.5.
    #[arg(long, conflicts_with_all = ["pairs", "energies"])]
    pub paper_table5: bool,
    #[arg(long, default_value_t = 4)]
    pub max_iter: u32,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BisectArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_low: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_high: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, default_value_t = 4)]
    pub max_iter: u32,
    /// Also write the trace to this file, with a manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `lo:hi:n`, `n` evenly spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.hi
                } else {
                    self.lo + i as f64 * step
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected lo:hi:n, got '{s}'"));
        };
        let lo: f64 = lo.parse().map_err(|_| format!("bad grid start '{lo}'"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad grid end '{hi}'"))?;
        let n: usize = n.parse().map_err(|_| format!("bad grid count '{n}'"))?;
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
            return Err(format!("grid needs 0 <= lo <= hi, got {lo}:{hi}"));
        }
        if n == 0 || (n == 1 && lo != hi) {
            return Err(format!(
                "grid {lo}:{hi} needs at least {} points",
                if lo == hi { 1 } else { 2 }
            ));
        }
        Ok(Grid { lo, hi, n })
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairArg {
    pub low: f64,
    pub high: f64,
}

impl FromStr for PairArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (low, high) = s
            .split_once(':')
            .ok_or_else(|| format!("expected low:high, got '{s}'"))?;
        let low = low
            .parse()
            .map_err(|_| format!("bad lower threshold '{low}'"))?;
        let high = high
            .parse()
            .map_err(|_| format!("bad upper threshold '{high}'"))?;
        Ok(PairArg { low, high })
    }
}

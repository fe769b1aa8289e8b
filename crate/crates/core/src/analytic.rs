//! Closed-form detection probabilities.
//!
//! Two parameterizations coexist and are never mixed implicitly:
//!
//! * [`Form::Gaussian`] – CLT approximation of the sample-mean energy,
//!   keyed on the window length `M` and noise power `σ_w²`.
//! * [`Form::GammaMarcum`] – exact central / noncentral chi-square tails
//!   with `2u` degrees of freedom and noncentrality `2γ`, keyed on the
//!   time-bandwidth product `u`. Thresholds are in noise-normalized units.

use std::fmt;
use std::str::FromStr;

use crate::detector::{BisectionConfig, ThresholdPair};
use crate::signal_model::{Hypothesis, SensingParams};
use crate::specfun::{gaussian_q, gaussian_q_inv, marcum_q, reg_upper_gamma};
use crate::{Error, Result};

/// Above this many bisection steps the resolved-detector probability uses
/// the half-band limit instead of summing every dyadic cell.
const MAX_EXACT_RESOLVE_ITER: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    Gaussian,
    GammaMarcum,
}

impl FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Form::Gaussian),
            "gamma-marcum" | "gamma" | "marcum" => Ok(Form::GammaMarcum),
            other => Err(Error::InvalidParameter(format!(
                "unknown analytic form '{other}'"
            ))),
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Gaussian => "gaussian",
            Form::GammaMarcum => "gamma-marcum",
        })
    }
}

impl Form {
    /// `P[T > λ | truth]` under this form.
    pub fn survival(&self, lambda: f64, params: &SensingParams, truth: Hypothesis) -> Result<f64> {
        let gamma = params.snr_linear();
        match (self, truth) {
            (Form::Gaussian, Hypothesis::H0) => {
                pf_gaussian(lambda, params.noise_variance, params.num_samples)
            }
            (Form::Gaussian, Hypothesis::H1) => {
                pd_gaussian(lambda, params.noise_variance, gamma, params.num_samples)
            }
            (Form::GammaMarcum, Hypothesis::H0) => pf_gamma(lambda, params.time_bandwidth),
            (Form::GammaMarcum, Hypothesis::H1) => pd_marcum(lambda, gamma, params.time_bandwidth),
        }
    }

    pub fn pf(&self, lambda: f64, params: &SensingParams) -> Result<f64> {
        self.survival(lambda, params, Hypothesis::H0)
    }

    pub fn pd(&self, lambda: f64, params: &SensingParams) -> Result<f64> {
        self.survival(lambda, params, Hypothesis::H1)
    }

    /// Double-threshold probabilities (fuzzy outcomes left unresolved).
    pub fn double_report(
        &self,
        pair: ThresholdPair,
        params: &SensingParams,
    ) -> Result<DoubleThresholdReport> {
        let pd = self.pd(pair.high(), params)?;
        Ok(DoubleThresholdReport {
            pf: self.pf(pair.high(), params)?,
            pd,
            pm: 1.0 - pd,
            pc: 1.0 - self.pd(pair.low(), params)?,
            pna: self.pf(pair.low(), params)?,
        })
    }

    /// Probabilities of the detector that resolves fuzzy outcomes by bisection.
    pub fn resolved_report(
        &self,
        pair: ThresholdPair,
        bisection: &BisectionConfig,
        params: &SensingParams,
    ) -> Result<DoubleThresholdReport> {
        let pf = resolved_occupied_probability(pair, bisection, |x| self.pf(x, params))?;
        let pd = resolved_occupied_probability(pair, bisection, |x| self.pd(x, params))?;
        Ok(DoubleThresholdReport {
            pf,
            pd,
            pm: 1.0 - pd,
            pc: 1.0 - pd,
            pna: pf,
        })
    }
}

fn check_probability_args(noise_variance: f64, num_samples: usize) -> Result<()> {
    if !(noise_variance > 0.0 && noise_variance.is_finite()) {
        return Err(Error::Domain(format!(
            "noise variance must be positive, got {noise_variance}"
        )));
    }
    if num_samples == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    Ok(())
}

fn check_snr(snr_linear: f64) -> Result<()> {
    if !(snr_linear >= 0.0 && snr_linear.is_finite()) {
        return Err(Error::Domain(format!(
            "linear SNR must be non-negative, got {snr_linear}"
        )));
    }
    Ok(())
}

fn check_threshold(lambda: f64) -> Result<()> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Domain(format!(
            "threshold must be non-negative, got {lambda}"
        )));
    }
    Ok(())
}

fn q_of(arg: f64) -> Result<f64> {
    if arg == f64::INFINITY {
        return Ok(0.0);
    }
    if arg == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    gaussian_q(arg)
}

/// `P_f = Q((λ/σ_w² − 1)·√(M/2))`.
pub fn pf_gaussian(lambda: f64, noise_variance: f64, num_samples: usize) -> Result<f64> {
    check_probability_args(noise_variance, num_samples)?;
    if lambda.is_nan() {
        return Err(Error::Domain("threshold is NaN".into()));
    }
    q_of((lambda / noise_variance - 1.0) * (num_samples as f64 / 2.0).sqrt())
}

/// `P_d = Q((λ/σ_w² − γ − 1)·√(M / (2(2γ + 1))))`.
pub fn pd_gaussian(
    lambda: f64,
    noise_variance: f64,
    snr_linear: f64,
    num_samples: usize,
) -> Result<f64> {
    check_probability_args(noise_variance, num_samples)?;
    check_snr(snr_linear)?;
    if lambda.is_nan() {
        return Err(Error::Domain("threshold is NaN".into()));
    }
    let scale = (num_samples as f64 / (2.0 * (2.0 * snr_linear + 1.0))).sqrt();
    q_of((lambda / noise_variance - snr_linear - 1.0) * scale)
}

/// `P_f = Γ(u, λ/2) / Γ(u)`.
pub fn pf_gamma(lambda: f64, u: u32) -> Result<f64> {
    check_threshold(lambda)?;
    reg_upper_gamma(f64::from(u), lambda / 2.0)
}

/// `P_d = Q_u(√(2γ), √λ)`.
pub fn pd_marcum(lambda: f64, snr_linear: f64, u: u32) -> Result<f64> {
    check_threshold(lambda)?;
    check_snr(snr_linear)?;
    marcum_q(f64::from(u), (2.0 * snr_linear).sqrt(), lambda.sqrt())
}

/// Miss probability `1 − P_d`.
pub fn pm_single(lambda: f64, snr_linear: f64, u: u32) -> Result<f64> {
    Ok(1.0 - pd_marcum(lambda, snr_linear, u)?)
}

/// Single-threshold collision probability `P[T ≤ λ | H1]`, i.e. the miss probability.
pub fn collision_single(lambda: f64, snr_linear: f64, u: u32) -> Result<f64> {
    pm_single(lambda, snr_linear, u)
}

/// Double-threshold probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleThresholdReport {
    /// `P[T > λ_H | H0]`.
    pub pf: f64,
    /// `P[T > λ_H | H1]`.
    pub pd: f64,
    /// `1 − pd`.
    pub pm: f64,
    /// Collision: `P[T < λ_L | H1]`.
    pub pc: f64,
    /// No access: `P[T > λ_L | H0]`.
    pub pna: f64,
}

/// Gamma/Marcum-form double-threshold report.
///
/// The miss term keeps `λ_H` inside the Marcum function; the `λ_L`-based
/// miss probability is what `pc` reports.
pub fn double_threshold_report(
    pair: ThresholdPair,
    snr_linear: f64,
    u: u32,
) -> Result<DoubleThresholdReport> {
    let pd = pd_marcum(pair.high(), snr_linear, u)?;
    Ok(DoubleThresholdReport {
        pf: pf_gamma(pair.high(), u)?,
        pd,
        pm: 1.0 - pd,
        pc: 1.0 - marcum_q(f64::from(u), (2.0 * snr_linear).sqrt(), pair.low().sqrt())?,
        pna: pf_gamma(pair.low(), u)?,
    })
}

/// Gaussian-form counterpart of [`double_threshold_report`].
pub fn double_threshold_report_gaussian(
    pair: ThresholdPair,
    noise_variance: f64,
    snr_linear: f64,
    num_samples: usize,
) -> Result<DoubleThresholdReport> {
    let pd = pd_gaussian(pair.high(), noise_variance, snr_linear, num_samples)?;
    Ok(DoubleThresholdReport {
        pf: pf_gaussian(pair.high(), noise_variance, num_samples)?,
        pd,
        pm: 1.0 - pd,
        pc: 1.0 - pd_gaussian(pair.low(), noise_variance, snr_linear, num_samples)?,
        pna: pf_gaussian(pair.low(), noise_variance, num_samples)?,
    })
}

/// Threshold whose Gaussian-form false-alarm probability equals `target_pf`.
pub fn threshold_for_target_pf(
    target_pf: f64,
    noise_variance: f64,
    num_samples: usize,
) -> Result<f64> {
    check_probability_args(noise_variance, num_samples)?;
    let z = gaussian_q_inv(target_pf)?;
    Ok(noise_variance * (1.0 + z * (2.0 / num_samples as f64).sqrt()))
}

/// `P[decision = Occupied]` for the bisection-resolved detector given the
/// survival function of the energy statistic.
///
/// For tie-free energies the bisection keeps the dyadic cell of `[λ_L, λ_H]`
/// that contains the energy, and the final midpoint is the centre of the cell
/// reached after `n − 1` halvings. A fuzzy energy is therefore declared
/// occupied exactly when it lies in the upper half of its level-`(n − 1)`
/// cell. Ties have probability zero for continuous statistics.
pub fn resolved_occupied_probability<F>(
    pair: ThresholdPair,
    bisection: &BisectionConfig,
    survival: F,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    bisection.validate()?;
    let (low, high) = (pair.low(), pair.high());
    let above = survival(high)?;
    let n = bisection.iterations_for_width(high - low);
    if n > MAX_EXACT_RESOLVE_ITER {
        return Ok(above + 0.5 * (survival(low)? - above));
    }
    let cells = 1u64 << (n - 1);
    let width = (high - low) / cells as f64;
    let mut p = above;
    for j in 0..cells {
        let start = low + j as f64 * width;
        let end = if j + 1 == cells { high } else { start + width };
        p += survival(start + 0.5 * width)? - survival(end)?;
    }
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub lambda: f64,
    pub pf: f64,
    pub pd: f64,
}

/// Operating points ordered by decreasing threshold, so both `pf` and `pd`
/// are nondecreasing along the curve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Checks ordering, range and monotonicity.
    pub fn is_consistent(&self) -> bool {
        let in_range = |p: f64| (0.0..=1.0).contains(&p);
        self.points.iter().all(|p| in_range(p.pf) && in_range(p.pd))
            && self
                .points
                .windows(2)
                .all(|w| w[0].lambda >= w[1].lambda && w[0].pf <= w[1].pf && w[0].pd <= w[1].pd)
    }
}

/// Sorts `grid` into decreasing order, dropping NaNs.
pub(crate) fn descending_grid(grid: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = grid.iter().copied().filter(|x| !x.is_nan()).collect();
    g.sort_by(|a, b| b.total_cmp(a));
    g
}

/// Analytic ROC, one point per grid threshold.
pub fn roc_analytic(lambda_grid: &[f64], params: &SensingParams, form: Form) -> Result<RocCurve> {
    params.validate()?;
    let points = descending_grid(lambda_grid)
        .into_iter()
        .map(|lambda| {
            Ok(RocPoint {
                lambda,
                pf: form.pf(lambda, params)?,
                pd: form.pd(lambda, params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RocCurve { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAMMA: f64 = 0.039_810_717_055_349_72;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pf_gaussian_examples() {
        for m in [1, 10, 1000] {
            assert_eq!(pf_gaussian(1.0, 1.0, m).unwrap(), 0.5);
        }
        // Q(2)
        assert!(close(
            pf_gaussian(1.2, 1.0, 200).unwrap(),
            0.022_750_131_948_179_2,
            1e-14
        ));
        assert_eq!(pf_gaussian(1e300, 1.0, 200).unwrap(), 0.0);
        assert!(pf_gaussian(1.0, 0.0, 10).is_err());
        assert!(pf_gaussian(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn pd_gaussian_examples() {
        assert!(close(
            pd_gaussian(1.0 + GAMMA, 1.0, GAMMA, 200).unwrap(),
            0.5,
            1e-15
        ));
        for lam in [0.5, 0.9, 1.0, 1.2, 2.0] {
            assert_eq!(
                pd_gaussian(lam, 1.0, 0.0, 50).unwrap(),
                pf_gaussian(lam, 1.0, 50).unwrap()
            );
        }
        // Q((0.2 − γ)·√(200 / 2.15924))
        assert!(close(
            pd_gaussian(1.2, 1.0, GAMMA, 200).unwrap(),
            0.061_574_189_848_722_5,
            1e-12
        ));
    }

    #[test]
    fn gamma_marcum_examples() {
        assert_eq!(pf_gamma(0.0, 5).unwrap(), 1.0);
        assert!(close(
            pf_gamma(12.375, 5).unwrap(),
            0.260_742_685_071_523_7,
            1e-13
        ));
        let want = (-9f64).exp() * (1.0 + 9.0 + 40.5 + 121.5 + 273.375);
        assert!(close(pf_gamma(18.0, 5).unwrap(), want, 1e-15));
        assert!(close(want, 0.0550, 5e-5));

        assert_eq!(pd_marcum(0.0, GAMMA, 5).unwrap(), 1.0);
        for lam in [0.5, 6.0, 12.375, 30.0] {
            assert_eq!(pd_marcum(lam, 0.0, 5).unwrap(), pf_gamma(lam, 5).unwrap());
        }
        // scipy.stats.ncx2.sf(12.375, 10, 2γ)
        let pd = pd_marcum(12.375, GAMMA, 5).unwrap();
        assert!(close(pd, 0.266_929_263_737_188_4, 1e-12));
        assert!(pd > pf_gamma(12.375, 5).unwrap());
    }

    #[test]
    fn miss_and_collision() {
        assert_eq!(pm_single(0.0, GAMMA, 5).unwrap(), 0.0);
        assert!(close(
            pm_single(7.0, 0.0, 5).unwrap(),
            1.0 - pf_gamma(7.0, 5).unwrap(),
            1e-15
        ));
        for lam in [1.0, 10.0, 18.0] {
            let pd = pd_marcum(lam, GAMMA, 5).unwrap();
            assert_eq!(pm_single(lam, GAMMA, 5).unwrap(), 1.0 - pd);
            assert_eq!(
                collision_single(lam, GAMMA, 5).unwrap(),
                pm_single(lam, GAMMA, 5).unwrap()
            );
        }
    }

    #[test]
    fn double_report_examples() {
        let rep =
            double_threshold_report(ThresholdPair::new(12.0, 18.0).unwrap(), GAMMA, 5).unwrap();
        assert_eq!(rep.pf, pf_gamma(18.0, 5).unwrap());
        assert_eq!(rep.pm, 1.0 - rep.pd);
        // scipy.stats.ncx2.cdf(12, 10, 2γ)
        assert!(close(rep.pc, 0.708_549_217_362_631_1, 1e-12));
        assert!(close(rep.pna, pf_gamma(12.0, 5).unwrap(), 0.0));

        let rep =
            double_threshold_report(ThresholdPair::new(0.0, 40.0).unwrap(), GAMMA, 5).unwrap();
        assert_eq!(rep.pc, 0.0);
        assert_eq!(rep.pna, 1.0);
    }

    #[test]
    fn collapsing_pair_reduces_to_single_threshold() {
        for lam in [3.0, 12.0, 18.0] {
            let rep =
                double_threshold_report(ThresholdPair::new(lam - 1e-9, lam).unwrap(), GAMMA, 5)
                    .unwrap();
            assert!(close(rep.pf, pf_gamma(lam, 5).unwrap(), 1e-12));
            assert!(close(rep.pd, pd_marcum(lam, GAMMA, 5).unwrap(), 1e-12));
            assert!(close(rep.pna, rep.pf, 1e-9));
            assert!(close(rep.pc, rep.pm, 1e-9));
        }
    }

    #[test]
    fn gaussian_double_report_matches_form() {
        let params = SensingParams::new(1000, -14.0, 1.0, 5).unwrap();
        let pair = ThresholdPair::new(1.0, 1.08).unwrap();
        let a = double_threshold_report_gaussian(pair, 1.0, params.snr_linear(), 1000).unwrap();
        let b = Form::Gaussian.double_report(pair, &params).unwrap();
        assert_eq!(a, b);
        let c = double_threshold_report(pair, params.snr_linear(), 5).unwrap();
        assert_eq!(c, Form::GammaMarcum.double_report(pair, &params).unwrap());
    }

    #[test]
    fn target_pf_roundtrip() {
        assert!(close(
            threshold_for_target_pf(0.5, 2.0, 100).unwrap(),
            2.0,
            1e-15
        ));
        let lam = threshold_for_target_pf(0.022_75, 1.0, 200).unwrap();
        assert!(close(lam, 1.2, 1e-4));
        assert!(close(pf_gaussian(lam, 1.0, 200).unwrap(), 0.022_75, 1e-9));
        let mut prev = f64::INFINITY;
        for p in [0.001, 0.01, 0.1, 0.5, 0.9] {
            let t = threshold_for_target_pf(p, 1.0, 200).unwrap();
            assert!(t < prev);
            prev = t;
        }
        assert!(threshold_for_target_pf(0.0, 1.0, 200).is_err());
    }

    #[test]
    fn roc_examples() {
        let params = SensingParams::default();
        let c = roc_analytic(&[0.0], &params, Form::GammaMarcum).unwrap();
        assert_eq!((c.points[0].pf, c.points[0].pd), (1.0, 1.0));
        let c = roc_analytic(&[1e6], &params, Form::GammaMarcum).unwrap();
        assert_eq!((c.points[0].pf, c.points[0].pd), (0.0, 0.0));

        let grid: Vec<f64> = (0..=60).map(|i| i as f64 * 0.5).collect();
        let c = roc_analytic(&grid, &params, Form::GammaMarcum).unwrap();
        assert!(c.is_consistent());
        assert_eq!(c.points.first().unwrap().lambda, 30.0);
        assert!(c.points.iter().all(|p| p.pd >= p.pf));

        let grid: Vec<f64> = (0..=40).map(|i| 0.9 + i as f64 * 0.01).collect();
        let c = roc_analytic(&grid, &params, Form::Gaussian).unwrap();
        assert!(c.is_consistent());
    }

    #[test]
    fn resolved_detector_matches_brute_force_cell_sum() {
        // exponential tail S(x) = e^{-x/10}: integrate 1[occupied] over a fine
        // grid of energies using the real bisection as the decision rule.
        let survival = |x: f64| Ok((-x / 10.0).exp());
        let pair = ThresholdPair::new(12.0, 18.0).unwrap();
        let cfg = BisectionConfig::default();
        let analytic = resolved_occupied_probability(pair, &cfg, survival).unwrap();

        let steps = 600_000;
        let h = (pair.high() - pair.low()) / steps as f64;
        let mut mass = (-1.8f64).exp();
        for i in 0..steps {
            let e = pair.low() + (i as f64 + 0.5) * h;
            if crate::detector::resolve_fuzzy(e, pair, &cfg).unwrap() == crate::Decision::Occupied {
                mass += (-e / 10.0).exp() / 10.0 * h;
            }
        }
        assert!(close(analytic, mass, 1e-9), "{analytic} vs {mass}");
    }
}

//! Received-sample generation under the idle (H0) and occupied (H1) hypotheses.
//!
//! `y(n) = w(n)` under H0 and `y(n) = s(n) + w(n)` under H1, with `w` white
//! Gaussian noise of variance `σ_w²` and `s` a BPSK signal of average power
//! `σ_s² = γ·σ_w²`.
//!
//! All randomness comes from ChaCha8 keyed by an [`RngSeed`] and a 64-bit
//! stream index, so blocks are reproducible across runs and platforms and
//! independent streams can be handed to parallel workers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Samples per carrier cycle in carrier-BPSK mode.
pub const SAMPLES_PER_CYCLE: usize = 8;
/// Carrier cycles per BPSK symbol in carrier-BPSK mode.
pub const CYCLES_PER_BIT: usize = 8;
pub const SAMPLES_PER_BIT: usize = SAMPLES_PER_CYCLE * CYCLES_PER_BIT;

pub fn snr_db_to_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Sensing-window configuration shared by the generators, the closed forms
/// and the Monte Carlo engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingParams {
    /// Samples per sensing window, `M`.
    pub num_samples: usize,
    pub snr_db: f64,
    /// Noise power `σ_w²`.
    pub noise_variance: f64,
    /// Time-bandwidth product `u` used by the gamma / Marcum forms.
    pub time_bandwidth: u32,
}

impl Default for SensingParams {
    fn default() -> Self {
        Self {
            num_samples: 1000,
            snr_db: -14.0,
            noise_variance: 1.0,
            time_bandwidth: 5,
        }
    }
}

impl SensingParams {
    pub fn new(
        num_samples: usize,
        snr_db: f64,
        noise_variance: f64,
        time_bandwidth: u32,
    ) -> Result<Self> {
        let params = Self {
            num_samples,
            snr_db,
            noise_variance,
            time_bandwidth,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::InvalidParameter(
                "num_samples must be at least 1".into(),
            ));
        }
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise_variance must be positive and finite, got {}",
                self.noise_variance
            )));
        }
        if self.time_bandwidth == 0 {
            return Err(Error::InvalidParameter(
                "time_bandwidth must be at least 1".into(),
            ));
        }
        // -inf dB is allowed and means "no signal".
        if self.snr_db.is_nan() || self.snr_db == f64::INFINITY {
            return Err(Error::InvalidParameter(format!(
                "snr_db must be finite, got {}",
                self.snr_db
            )));
        }
        Ok(())
    }

    /// Linear SNR `γ`.
    pub fn snr_linear(&self) -> f64 {
        snr_db_to_linear(self.snr_db)
    }

    /// Signal power `σ_s² = γ·σ_w²`.
    pub fn signal_variance(&self) -> f64 {
        self.snr_linear() * self.noise_variance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// Band idle: noise only.
    H0,
    /// Primary user transmitting.
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Modulation {
    /// `s(n) = ±σ_s` with independent equiprobable signs.
    #[default]
    BasebandBpsk,
    /// `s(n) = √2·σ_s·b_k·cos(2π n / 8)`, one symbol per 64 samples.
    CarrierBpsk,
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseband" | "baseband-bpsk" => Ok(Modulation::BasebandBpsk),
            "carrier" | "carrier-bpsk" => Ok(Modulation::CarrierBpsk),
            other => Err(Error::InvalidParameter(format!(
                "unknown modulation mode '{other}'"
            ))),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::BasebandBpsk => "baseband",
            Modulation::CarrierBpsk => "carrier",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Independent generator for `(seed, stream)`.
    pub fn stream(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    pub samples: Vec<f64>,
    pub truth: Hypothesis,
}

/// Standard normal variates by the Box–Muller transform.
///
/// Exactly two uniforms are consumed per pair of outputs, so the stream
/// position never depends on the values drawn.
#[derive(Debug, Clone)]
pub struct GaussianSource<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: RngCore> GaussianSource<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// Overwrites `out` with white Gaussian noise of the given variance.
pub fn fill_noise<R: RngCore>(src: &mut GaussianSource<R>, variance: f64, out: &mut [f64]) {
    let sigma = variance.sqrt();
    for y in out.iter_mut() {
        *y = sigma * src.standard_normal();
    }
}

/// Adds a BPSK signal of power `signal_variance` onto `out`.
pub fn add_bpsk<R: RngCore>(
    src: &mut GaussianSource<R>,
    mode: Modulation,
    signal_variance: f64,
    out: &mut [f64],
) {
    if signal_variance == 0.0 {
        return;
    }
    match mode {
        Modulation::BasebandBpsk => {
            let amp = signal_variance.sqrt();
            for chunk in out.chunks_mut(64) {
                let bits = src.next_u64();
                for (i, y) in chunk.iter_mut().enumerate() {
                    *y += if (bits >> i) & 1 == 1 { amp } else { -amp };
                }
            }
        }
        Modulation::CarrierBpsk => {
            let amp = (2.0 * signal_variance).sqrt();
            for (bit, chunk) in out.chunks_mut(SAMPLES_PER_BIT).enumerate() {
                let sign = if src.next_u64() & 1 == 1 { 1.0 } else { -1.0 };
                for (i, y) in chunk.iter_mut().enumerate() {
                    let n = bit * SAMPLES_PER_BIT + i;
                    let phase =
                        2.0 * PI * (n % SAMPLES_PER_CYCLE) as f64 / SAMPLES_PER_CYCLE as f64;
                    *y += sign * amp * phase.cos();
                }
            }
        }
    }
}

/// Noise-only block (H0).
pub fn gen_noise(params: &SensingParams, seed: RngSeed) -> Result<SampleBlock> {
    params.validate()?;
    let mut src = GaussianSource::new(seed.stream(0));
    let mut samples = vec![0.0; params.num_samples];
    fill_noise(&mut src, params.noise_variance, &mut samples);
    Ok(SampleBlock {
        samples,
        truth: Hypothesis::H0,
    })
}

/// Signal-plus-noise block (H1).
pub fn gen_signal_plus_noise(
    params: &SensingParams,
    mode: Modulation,
    seed: RngSeed,
) -> Result<SampleBlock> {
    params.validate()?;
    let mut src = GaussianSource::new(seed.stream(0));
    let mut samples = vec![0.0; params.num_samples];
    fill_noise(&mut src, params.noise_variance, &mut samples);
    add_bpsk(&mut src, mode, params.signal_variance(), &mut samples);
    Ok(SampleBlock {
        samples,
        truth: Hypothesis::H1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: usize, snr_db: f64, var: f64) -> SensingParams {
        SensingParams::new(m, snr_db, var, 5).unwrap()
    }

    fn variance(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
    }

    #[test]
    fn snr_conversion() {
        assert_eq!(snr_db_to_linear(0.0), 1.0);
        assert_eq!(snr_db_to_linear(10.0), 10.0);
        assert!((snr_db_to_linear(-14.0) - 0.039_810_717_055_349_72).abs() < 1e-15);
        assert_eq!(snr_db_to_linear(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(SensingParams::new(0, 0.0, 1.0, 5).is_err());
        assert!(SensingParams::new(10, 0.0, 0.0, 5).is_err());
        assert!(SensingParams::new(10, 0.0, 1.0, 0).is_err());
        assert!(SensingParams::new(10, f64::NAN, 1.0, 5).is_err());
        assert!(SensingParams::new(10, f64::NEG_INFINITY, 1.0, 5).is_ok());
    }

    #[test]
    fn noise_is_deterministic() {
        let p = params(4, 0.0, 1.0);
        let a = gen_noise(&p, RngSeed(7)).unwrap();
        let b = gen_noise(&p, RngSeed(7)).unwrap();
        let bits = |blk: &SampleBlock| blk.samples.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.truth, Hypothesis::H0);
        assert_ne!(a, gen_noise(&p, RngSeed(8)).unwrap());
    }

    #[test]
    fn noise_variance_calibration() {
        // std of the variance estimator at M = 10^6 is ~√2·σ²/1000, so 1% is > 7σ.
        let blk = gen_noise(&params(1_000_000, 0.0, 1.0), RngSeed(1)).unwrap();
        let v = variance(&blk.samples);
        assert!((0.99..=1.01).contains(&v), "variance {v}");
        let blk = gen_noise(&params(1_000_000, 0.0, 4.0), RngSeed(2)).unwrap();
        let v = variance(&blk.samples);
        assert!((v - 4.0).abs() <= 0.04, "variance {v}");
    }

    #[test]
    fn noise_lag1_autocorrelation_is_small() {
        let blk = gen_noise(&params(1_000_000, 0.0, 1.0), RngSeed(3)).unwrap();
        let s = &blk.samples;
        let num: f64 = s.windows(2).map(|w| w[0] * w[1]).sum();
        let den: f64 = s.iter().map(|v| v * v).sum();
        assert!((num / den).abs() < 0.005);
    }

    #[test]
    fn zero_snr_adds_nothing() {
        let p = params(256, f64::NEG_INFINITY, 1.0);
        for mode in [Modulation::BasebandBpsk, Modulation::CarrierBpsk] {
            let h1 = gen_signal_plus_noise(&p, mode, RngSeed(5)).unwrap();
            let h0 = gen_noise(&p, RngSeed(5)).unwrap();
            assert_eq!(h1.samples, h0.samples);
            assert_eq!(h1.truth, Hypothesis::H1);
        }
    }

    #[test]
    fn signal_power_calibration() {
        // The signal component is the difference to the same-seed noise block.
        let p = params(1_000_000, -14.0, 1.0);
        let target = p.signal_variance();
        let noise = gen_noise(&p, RngSeed(11)).unwrap();
        for mode in [Modulation::BasebandBpsk, Modulation::CarrierBpsk] {
            let blk = gen_signal_plus_noise(&p, mode, RngSeed(11)).unwrap();
            let power = blk
                .samples
                .iter()
                .zip(&noise.samples)
                .map(|(y, w)| (y - w) * (y - w))
                .sum::<f64>()
                / p.num_samples as f64;
            assert!(
                (power / target - 1.0).abs() < 0.02,
                "{mode}: {power} vs {target}"
            );
        }
    }

    #[test]
    fn carrier_symbols_span_64_samples() {
        let p = params(128, 0.0, 1.0);
        let mut src = GaussianSource::new(RngSeed(9).stream(0));
        let mut s = vec![0.0; p.num_samples];
        add_bpsk(&mut src, Modulation::CarrierBpsk, 1.0, &mut s);
        // cos(0) = 1: the first sample of every symbol carries ±√2.
        assert!((s[0].abs() - 2f64.sqrt()).abs() < 1e-15);
        assert!((s[64].abs() - 2f64.sqrt()).abs() < 1e-15);
        assert!(s[2].abs() < 1e-15);
        for i in 1..64 {
            let want = s[0] * (2.0 * PI * (i % 8) as f64 / 8.0).cos();
            assert!((s[i] - want).abs() < 1e-12, "sample {i}");
        }
        let mean_sq = s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
        assert!((mean_sq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modulation_parsing() {
        assert_eq!(
            "baseband".parse::<Modulation>().unwrap(),
            Modulation::BasebandBpsk
        );
        assert_eq!(
            "carrier-bpsk".parse::<Modulation>().unwrap(),
            Modulation::CarrierBpsk
        );
        assert!(matches!(
            "qpsk".parse::<Modulation>(),
            Err(Error::InvalidParameter(_))
        ));
    }
}

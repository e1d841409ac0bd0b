//! Observation model `x_k = A e^{i(θk + φ)} + n_k`, `k = 0..K-1`.
//!
//! Noise is circular complex Gaussian with independent real and imaginary
//! parts of variance `σ²` each, so `SNR = A² / (2σ²)` and the amplitude is
//! always derived from `(snr, sigma2)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{config, Result};
use crate::prior::VonMisesPrior;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalConfig {
    k: usize,
    snr: f64,
    phi: f64,
    sigma2: f64,
}

impl SignalConfig {
    /// Unit noise variance and zero phase.
    pub fn new(k: usize, snr: f64) -> Result<Self> {
        Self::with_phase(k, snr, 0.0, 1.0)
    }

    pub fn with_phase(k: usize, snr: f64, phi: f64, sigma2: f64) -> Result<Self> {
        if k == 0 {
            return Err(config("number of samples K must be >= 1"));
        }
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(config(format!("SNR must be positive and finite, got {snr}")));
        }
        if !phi.is_finite() {
            return Err(config("phase phi must be finite"));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(config(format!("noise variance must be positive, got {sigma2}")));
        }
        Ok(Self { k, snr, phi, sigma2 })
    }

    pub fn from_snr_db(k: usize, snr_db: f64) -> Result<Self> {
        Self::new(k, db_to_linear(snr_db))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn amplitude(&self) -> f64 {
        (2.0 * self.sigma2 * self.snr).sqrt()
    }
}

/// Received samples together with the frequency that generated them.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector {
    pub samples: Vec<Complex64>,
    pub truth: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Linear SNR at the correlator output for a carrier-to-noise density ratio
/// and a noise bandwidth.
pub fn snr_from_cn0(cn0_dbhz: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(config(format!("bandwidth must be positive, got {bandwidth_hz}")));
    }
    Ok(db_to_linear(cn0_dbhz) / bandwidth_hz)
}

/// Inverse of [`snr_from_cn0`], in dB-Hz.
pub fn cn0_from_snr(snr: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(config(format!("bandwidth must be positive, got {bandwidth_hz}")));
    }
    Ok(linear_to_db(snr * bandwidth_hz))
}

/// Noise-free samples `A e^{i(θk + φ)}`.
pub fn noiseless(config: &SignalConfig, theta: f64) -> ObservationVector {
    let a = config.amplitude();
    let samples = (0..config.k).map(|k| Complex64::from_polar(a, theta * k as f64 + config.phi)).collect();
    ObservationVector { samples, truth: theta }
}

/// Draws one observation vector for frequency `theta`.
pub fn generate<R: Rng + ?Sized>(config: &SignalConfig, theta: f64, rng: &mut R) -> ObservationVector {
    let sd = config.sigma2.sqrt();
    let mut obs = noiseless(config, theta);
    for x in &mut obs.samples {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *x += Complex64::new(sd * re, sd * im);
    }
    obs
}

/// Log-posterior surface up to a θ-free constant:
/// `2K·SNR·Re{e^{-jφ} (1/K) Σ_k (x_k/A) e^{-jθk}} + κ cos(θ - μ)`.
///
/// Samples are normalized by the amplitude, which makes the data term equal
/// to the exact log-likelihood `(A/σ²) Re Σ_k x_k e^{-j(θk+φ)}`.
pub fn ambiguity(
    config: &SignalConfig,
    obs: &ObservationVector,
    prior: &VonMisesPrior,
    theta_grid: &[f64],
) -> Vec<f64> {
    theta_grid.iter().map(|&theta| log_posterior(config, &obs.samples, prior, theta)).collect()
}

pub(crate) fn data_weight(config: &SignalConfig) -> f64 {
    // 2K·SNR·(1/K)·(1/A) = A/σ²
    2.0 * config.snr / config.amplitude()
}

pub(crate) fn log_posterior(config: &SignalConfig, samples: &[Complex64], prior: &VonMisesPrior, theta: f64) -> f64 {
    let rotate = Complex64::from_polar(1.0, -theta);
    let mut phasor = Complex64::from_polar(1.0, -config.phi);
    let mut acc = Complex64::new(0.0, 0.0);
    for &x in samples {
        acc += x * phasor;
        phasor *= rotate;
    }
    data_weight(config) * acc.re + prior.kappa() * (theta - prior.mu()).cos()
}

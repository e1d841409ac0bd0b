//! Grid-plus-refinement MAP estimator and the Monte Carlo MSE harness.
//!
//! Trial `n` draws from `ChaCha8Rng` seeded with the run seed on stream `n`,
//! so results do not depend on thread count or scheduling.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::numerics::reduce_angle;
use crate::prior::VonMisesPrior;
use crate::signal::{data_weight, generate, linear_to_db, log_posterior, ObservationVector, SignalConfig};

pub const MIN_GRID_SIZE: usize = 64;
const REFINE_TOL: f64 = 1e-12;

/// How the estimation error is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMetric {
    /// Shortest signed arc, in `[-π, π)`.
    Wrapped,
    Linear,
}

/// Where the true frequency comes from in each trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThetaMode {
    /// Drawn from the prior (Bayesian MSE).
    Prior,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: usize,
    pub grid_size: usize,
    pub refine: bool,
    pub seed: u64,
    pub metric: ErrorMetric,
    pub theta: ThetaMode,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            grid_size: 4096,
            refine: true,
            seed: 0,
            metric: ErrorMetric::Wrapped,
            theta: ThetaMode::Prior,
        }
    }
}

impl McConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config("trials must be >= 1"));
        }
        if self.grid_size < MIN_GRID_SIZE {
            return Err(config(format!("grid_size must be >= {MIN_GRID_SIZE}, got {}", self.grid_size)));
        }
        if let ThetaMode::Fixed(t) = self.theta {
            if !VonMisesPrior::in_support(t) {
                return Err(config(format!("fixed theta {t} lies outside [-pi, pi]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub mse: f64,
    /// `10 log10(mse)`.
    pub rmse_db: f64,
    pub trials_used: usize,
    /// Fraction of trials with `|error| > π/2`.
    pub outlier_fraction: f64,
    /// Standard error of `mse`.
    pub mse_std_err: f64,
}

/// `((estimate - truth + π) mod 2π) - π`.
pub fn wrap_error(estimate: f64, truth: f64) -> f64 {
    (estimate - truth + PI).rem_euclid(TAU) - PI
}

/// Reusable MAP search for a fixed grid size.
pub struct MapEstimator {
    grid_size: usize,
    refine: bool,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for MapEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MapEstimator").field("grid_size", &self.grid_size).field("refine", &self.refine).finish()
    }
}

impl MapEstimator {
    pub fn new(grid_size: usize, refine: bool) -> Result<Self> {
        if grid_size < MIN_GRID_SIZE {
            return Err(config(format!("grid_size must be >= {MIN_GRID_SIZE}, got {grid_size}")));
        }
        let fft = FftPlanner::new().plan_fft_forward(grid_size);
        Ok(Self { grid_size, refine, fft })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Grid node `m`: `-π + 2πm/N`.
    pub fn grid_point(&self, m: usize) -> f64 {
        -PI + TAU * m as f64 / self.grid_size as f64
    }

    /// Maximizer of the log-posterior over `[-π, π)`.
    pub fn estimate(&self, config: &SignalConfig, prior: &VonMisesPrior, obs: &ObservationVector) -> f64 {
        let n = self.grid_size;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let derotate = Complex64::from_polar(1.0, -config.phi());
        for (k, &x) in obs.samples.iter().enumerate() {
            // e^{-j 2π m k / N} is N-periodic in k, so long records fold in
            buf[k % n] += x * derotate;
        }
        self.fft.process(&mut buf);
        let weight = data_weight(config);
        let mut best = (f64::NEG_INFINITY, 0);
        for m in 0..n {
            // θ_m = -π + 2πm/N corresponds to FFT bin (m + N/2) mod N
            let bin = (m + n / 2) % n;
            let theta = self.grid_point(m);
            let v = weight * buf[bin].re + prior.kappa() * (theta - prior.mu()).cos();
            if v > best.0 {
                best = (v, m);
            }
        }
        let coarse = self.grid_point(best.1);
        if !self.refine {
            return coarse;
        }
        let cell = TAU / n as f64;
        let objective = |t: f64| log_posterior(config, &obs.samples, prior, t);
        let fine = golden_max(&objective, coarse - cell, coarse + cell);
        let fine_wrapped = reduce_angle(fine);
        if objective(fine) >= objective(coarse) {
            if fine_wrapped >= PI {
                fine_wrapped - TAU
            } else {
                fine_wrapped
            }
        } else {
            coarse
        }
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > REFINE_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// One-shot MAP estimate (plans a fresh FFT).
pub fn map_estimate(
    config: &SignalConfig,
    prior: &VonMisesPrior,
    obs: &ObservationVector,
    grid_size: usize,
    refine: bool,
) -> Result<f64> {
    Ok(MapEstimator::new(grid_size, refine)?.estimate(config, prior, obs))
}

/// Random stream for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn run_monte_carlo(config: &SignalConfig, prior: &VonMisesPrior, mc: &McConfig) -> Result<McResult> {
    mc.validate()?;
    let estimator = MapEstimator::new(mc.grid_size, mc.refine)?;
    let errors: Vec<f64> = (0..mc.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(mc.seed, i as u64);
            let truth = match mc.theta {
                ThetaMode::Prior => prior.sample(&mut rng),
                ThetaMode::Fixed(t) => t,
            };
            let obs = generate(config, truth, &mut rng);
            let est = estimator.estimate(config, prior, &obs);
            match mc.metric {
                ErrorMetric::Wrapped => wrap_error(est, truth),
                ErrorMetric::Linear => est - truth,
            }
        })
        .collect();
    // sequential reduction in trial order keeps the sum bit-reproducible
    let n = errors.len() as f64;
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let mse = sq.iter().sum::<f64>() / n;
    let var = if errors.len() > 1 { sq.iter().map(|v| (v - mse).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let outliers = errors.iter().filter(|e| e.abs() > PI / 2.0).count();
    Ok(McResult {
        mse,
        rmse_db: linear_to_db(mse),
        trials_used: errors.len(),
        outlier_fraction: outliers as f64 / n,
        mse_std_err: (var / n).sqrt(),
    })
}

//! Von Mises prior on the normalized circular frequency.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::error::{config, domain, Result};
use crate::numerics::{bessel_ratio_i1_i0, ln_bessel_i0, reduce_angle};

/// Variance of the uniform distribution on `[-π, π]`, used as the ceiling of
/// [`VonMisesPrior::prior_variance`].
pub const UNIFORM_VARIANCE: f64 = PI * PI / 3.0;

/// Von Mises density `e^{κ cos(θ-μ)} / (2π I₀(κ))` supported on `[-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMisesPrior {
    mu: f64,
    kappa: f64,
    ln_norm: f64,
}

impl VonMisesPrior {
    pub fn new(mu: f64, kappa: f64) -> Result<Self> {
        if !mu.is_finite() || mu.abs() > PI {
            return Err(config(format!("prior location mu must lie in [-pi, pi], got {mu}")));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(config(format!("prior concentration kappa must be >= 0, got {kappa}")));
        }
        let ln_norm = TAU.ln() + ln_bessel_i0(kappa)?;
        Ok(Self { mu, kappa, ln_norm })
    }

    pub fn uniform() -> Self {
        Self::new(0.0, 0.0).expect("uniform prior is valid")
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `ln(2π I₀(κ))`.
    pub fn ln_normalizer(&self) -> f64 {
        self.ln_norm
    }

    pub fn in_support(theta: f64) -> bool {
        (-PI..=PI).contains(&theta)
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        if !Self::in_support(theta) {
            return 0.0;
        }
        (self.kappa * (theta - self.mu).cos() - self.ln_norm).exp()
    }

    pub fn log_pdf(&self, theta: f64) -> Result<f64> {
        if !Self::in_support(theta) {
            return Err(domain(format!("theta = {theta} lies outside [-pi, pi]")));
        }
        Ok(self.kappa * (theta - self.mu).cos() - self.ln_norm)
    }

    /// `I₁(κ)/I₀(κ)`; zero for the uniform prior.
    pub fn bessel_ratio(&self) -> f64 {
        bessel_ratio_i1_i0(self.kappa).expect("kappa validated at construction")
    }

    /// Normal-approximation variance `-2 ln(I₁(κ)/I₀(κ))`, capped at
    /// [`UNIFORM_VARIANCE`] (which is also the κ = 0 value).
    pub fn prior_variance(&self) -> f64 {
        let ratio = self.bessel_ratio();
        if ratio <= 0.0 {
            return UNIFORM_VARIANCE;
        }
        (-2.0 * ratio.ln()).clamp(0.0, UNIFORM_VARIANCE)
    }

    /// Draws one sample in `[-π, π]` (Best-Fisher rejection sampler).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let kappa = self.kappa;
        if kappa < 1e-8 {
            return PI * (2.0 * rng.random::<f64>() - 1.0);
        }
        let s = if kappa < 1e-5 {
            // second-order expansion; the exact form cancels catastrophically
            1.0 / kappa + kappa
        } else {
            let r = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
            let rho = (r - (2.0 * r).sqrt()) / (2.0 * kappa);
            (1.0 + rho * rho) / (2.0 * rho)
        };
        let w = loop {
            let u: f64 = rng.random();
            let z = (PI * u).cos();
            let w = (1.0 + s * z) / (s + z);
            let y = kappa * (s - w);
            let v: f64 = rng.random();
            if y * (2.0 - y) - v >= 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
                break w;
            }
        };
        let mut offset = w.clamp(-1.0, 1.0).acos();
        if rng.random::<f64>() < 0.5 {
            offset = -offset;
        }
        reduce_angle(self.mu + offset)
    }
}

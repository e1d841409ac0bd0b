//! Bayesian Cramér-Rao and Ziv-Zakai bounds for comparison with the WWB.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::numerics::{normal_tail, regularized_lower_gamma};
use crate::prior::VonMisesPrior;
use crate::signal::linear_to_db;

/// Ordered as the sweep output sorts them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BoundKind {
    Wwb,
    Bcrb,
    Zzb,
    Map,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BoundKind::Wwb => "WWB",
            BoundKind::Bcrb => "BCRB",
            BoundKind::Zzb => "ZZB",
            BoundKind::Map => "MAP",
        };
        f.write_str(name)
    }
}

/// One bound (or simulated MSE) at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub kind: BoundKind,
    pub k: usize,
    pub snr: f64,
    pub mse_bound: f64,
    pub db: f64,
}

impl BoundPoint {
    pub fn new(kind: BoundKind, k: usize, snr: f64, mse_bound: f64) -> Self {
        Self { kind, k, snr, mse_bound, db: linear_to_db(mse_bound) }
    }
}

/// `J_F = SNR K(K-1)(2K-1)/3`, the Fisher information with the first sample at `t = 0`.
pub fn fisher_information(k: usize, snr: f64) -> f64 {
    let kf = k as f64;
    snr * kf * (kf - 1.0) * (2.0 * kf - 1.0) / 3.0
}

fn check(k: usize, snr: f64) -> Result<()> {
    if k == 0 {
        return Err(config("number of samples K must be >= 1"));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(config(format!("SNR must be positive and finite, got {snr}")));
    }
    Ok(())
}

/// `1 / (J_F + κ I₁(κ)/I₀(κ))`.
pub fn bcrb(prior: &VonMisesPrior, k: usize, snr: f64) -> Result<f64> {
    check(k, snr)?;
    let info = fisher_information(k, snr) + prior.kappa() * prior.bessel_ratio();
    if info <= 0.0 {
        return Err(domain("Bayesian information is zero (K = 1 with a uniform prior)"));
    }
    Ok(1.0 / info)
}

/// `J_F⁻¹ Γ_{1.5}(K·SNR/2) + σ²_θ · 2Φ(√(K·SNR))`.
pub fn zzb(prior: &VonMisesPrior, k: usize, snr: f64) -> Result<f64> {
    check(k, snr)?;
    if k < 2 {
        return Err(config(format!("the Ziv-Zakai bound needs K >= 2, got {k}")));
    }
    let ks = k as f64 * snr;
    let gamma = regularized_lower_gamma(1.5, 0.5 * ks)?;
    Ok(gamma / fisher_information(k, snr) + prior.prior_variance() * 2.0 * normal_tail(ks.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureSpec};
    use crate::signal::db_to_linear;
    use std::f64::consts::PI;

    #[test]
    fn fisher_values() {
        assert_eq!(fisher_information(1, 3.0), 0.0);
        assert_eq!(fisher_information(20, 1.0), 4940.0);
        for k in 1..=100 {
            let sum: f64 = (0..k).map(|i| (i * i) as f64).sum();
            assert!((fisher_information(k, 0.7) - 2.0 * 0.7 * sum).abs() < 1e-9 * sum.max(1.0));
        }
    }

    #[test]
    fn bcrb_uniform_prior() {
        let p = VonMisesPrior::uniform();
        assert!((bcrb(&p, 20, 1.0).unwrap() - 1.0 / 4940.0).abs() < 1e-18);
        assert!(bcrb(&p, 1, 1.0).is_err());
        let tiny = VonMisesPrior::new(0.0, 1e-9).unwrap();
        assert!((bcrb(&tiny, 20, 1.0).unwrap() * 4940.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bcrb_prior_term_matches_quadrature() {
        // E{(∂/∂θ ln p(θ))²} = E{κ² sin²(θ-μ)} = κ I₁(κ)/I₀(κ)
        let p = VonMisesPrior::new(0.4, 2.0).unwrap();
        let spec = QuadratureSpec::new(64, 1e-12).unwrap();
        let j_p = integrate(|t| (2.0 * (t - 0.4).sin()).powi(2) * p.pdf(t), -PI, PI, &spec).unwrap();
        let j_cos = integrate(|t| 2.0 * (t - 0.4).cos() * p.pdf(t), -PI, PI, &spec).unwrap();
        assert!((j_p - 2.0 * p.bessel_ratio()).abs() < 1e-8);
        assert!((j_cos - 2.0 * p.bessel_ratio()).abs() < 1e-8);
        let b = bcrb(&p, 20, 1.0).unwrap();
        assert!((1.0 / b - 4940.0 - j_p).abs() < 1e-8);
    }

    #[test]
    fn bcrb_never_exceeds_inverse_fisher_and_falls_with_kappa() {
        let mut prev = f64::INFINITY;
        for i in 0..30 {
            let p = VonMisesPrior::new(0.0, 0.5 * i as f64).unwrap();
            let b = bcrb(&p, 10, 0.3).unwrap();
            assert!(b <= 1.0 / fisher_information(10, 0.3));
            if i > 0 {
                assert!(b < prev);
            }
            prev = b;
        }
    }

    #[test]
    fn zzb_limits() {
        for kappa in [0.0, 1.0, 5.0] {
            let p = VonMisesPrior::new(0.0, kappa).unwrap();
            let high = zzb(&p, 20, 3.0).unwrap();
            assert!((high * fisher_information(20, 3.0) - 1.0).abs() < 1e-3);
            let low = zzb(&p, 20, 1e-6 / 20.0).unwrap();
            assert!((low / p.prior_variance() - 1.0).abs() < 1e-3);
        }
        assert!(zzb(&VonMisesPrior::uniform(), 1, 1.0).is_err());
    }

    #[test]
    fn zzb_and_bcrb_converge_at_high_snr() {
        let p = VonMisesPrior::new(0.0, 2.0).unwrap();
        for k in [5, 20, 60] {
            let snr = 100.0 / k as f64;
            let ratio = zzb(&p, k, snr).unwrap() / bcrb(&p, k, snr).unwrap();
            assert!((ratio - 1.0).abs() < 0.01, "K = {k}: {ratio}");
        }
    }

    #[test]
    fn zzb_monotone_in_snr_and_kappa() {
        let p = VonMisesPrior::new(0.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=70 {
            let v = zzb(&p, 20, db_to_linear(-20.0 + 0.5 * i as f64)).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for kappa in [0.0, 0.5, 1.0, 2.0, 5.0, 20.0] {
            let v = zzb(&VonMisesPrior::new(0.0, kappa).unwrap(), 20, 0.1).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn bound_point_db() {
        let b = BoundPoint::new(BoundKind::Zzb, 20, 1.0, 0.01);
        assert!((b.db + 20.0).abs() < 1e-12);
        assert_eq!(BoundKind::Bcrb.to_string(), "BCRB");
    }
}

//! Special functions, quadrature and small dense linear algebra.

mod bessel;
mod linalg;
mod quadrature;

pub use bessel::{
    bessel_i0, bessel_i0_scaled, bessel_i1, bessel_i1_scaled, bessel_ratio_i1_i0, ln_bessel_i0, SERIES_LIMIT,
};
pub use linalg::{spd_solve, SquareMatrix, MAX_DIM, PIVOT_REL_THRESHOLD};
pub use quadrature::{gauss_legendre, integrate, QuadratureSpec, PANEL_ORDER};

use std::f64::consts::{PI, TAU};

use crate::error::{domain, Result};

/// `|sin(h/2)|` below which the Dirichlet kernel is summed directly.
pub const DIRICHLET_GUARD: f64 = 1e-8;

/// `Σ_{k=0}^{K-1} cos(h k)`.
///
/// Uses `cos[h(K-1)/2] sin[hK/2] / sin[h/2]` after reducing `h` into
/// `(-π, π]`, and the direct sum when `|sin(h/2)|` is below [`DIRICHLET_GUARD`].
pub fn dirichlet_kernel(h: f64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let h = reduce_angle(h);
    let half_sin = (0.5 * h).sin();
    if half_sin.abs() < DIRICHLET_GUARD {
        return direct_cosine_sum(h, k);
    }
    let kf = k as f64;
    (0.5 * h * (kf - 1.0)).cos() * (0.5 * h * kf).sin() / half_sin
}

fn direct_cosine_sum(h: f64, k: usize) -> f64 {
    (0..k).map(|i| (h * i as f64).cos()).sum()
}

/// Reduces an angle into `(-π, π]`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x - TAU * (x / TAU).round();
    if r <= -PI {
        r + TAU
    } else if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Upper tail `P(N(0,1) > z)`.
pub fn normal_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Regularized lower incomplete gamma `(1/Γ(a)) ∫_0^z e^{-v} v^{a-1} dv`.
pub fn regularized_lower_gamma(a: f64, z: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("incomplete gamma shape must be positive, got {a}")));
    }
    if !(z >= 0.0) {
        return Err(domain(format!("incomplete gamma argument must be non-negative, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    Ok(statrs::function::gamma::gamma_lr(a, z).clamp(0.0, 1.0))
}

/// Running maximum from the right: `out[i] = max_{j >= i} f[j]`.
pub fn valley_fill(f: &[f64]) -> Vec<f64> {
    let mut out = f.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].max(out[i + 1]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dirichlet_trivial_points() {
        assert_eq!(dirichlet_kernel(0.0, 20), 20.0);
        assert!(dirichlet_kernel(PI, 20).abs() < 1e-12);
        assert!((dirichlet_kernel(PI, 21) - 1.0).abs() < 1e-12);
        assert_eq!(dirichlet_kernel(0.7, 1), 1.0);
    }

    #[test]
    fn dirichlet_matches_sum_at_0_3_pi() {
        let h = 0.3 * PI;
        let oracle: f64 = (0..20).map(|k| (h * k as f64).cos()).sum();
        assert!((dirichlet_kernel(h, 20) - oracle).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_near_singular_points() {
        for &h in &[1e-12, TAU - 1e-12, -TAU + 3e-10, 2.0 * TAU + 1e-9] {
            let oracle: f64 = (0..50).map(|k| (h * k as f64).cos()).sum();
            assert!((dirichlet_kernel(h, 50) - oracle).abs() < 1e-8, "h = {h}");
        }
    }

    proptest! {
        #[test]
        fn dirichlet_equals_direct_sum(h in -TAU..TAU, k in 1usize..=200) {
            let oracle: f64 = (0..k).map(|i| (h * i as f64).cos()).sum();
            prop_assert!((dirichlet_kernel(h, k) - oracle).abs() < 1e-10);
        }

        #[test]
        fn dirichlet_even_and_periodic(h in -TAU..TAU, k in 1usize..=200) {
            let d = dirichlet_kernel(h, k);
            prop_assert!((d - dirichlet_kernel(-h, k)).abs() < 1e-10);
            prop_assert!((d - dirichlet_kernel(h + TAU, k)).abs() < 1e-9);
        }

        #[test]
        fn valley_fill_is_non_increasing_envelope(v in proptest::collection::vec(-10.0f64..10.0, 1..60)) {
            let out = valley_fill(&v);
            prop_assert_eq!(out.len(), v.len());
            for i in 0..v.len() {
                prop_assert!(out[i] >= v[i]);
                if i + 1 < v.len() {
                    prop_assert!(out[i] >= out[i + 1]);
                }
            }
        }
    }

    #[test]
    fn valley_fill_examples() {
        assert_eq!(valley_fill(&[3.0, 1.0, 2.0, 0.0]), vec![3.0, 2.0, 2.0, 0.0]);
        assert_eq!(valley_fill(&[5.0, 4.0, 4.0, -1.0]), vec![5.0, 4.0, 4.0, -1.0]);
        assert_eq!(valley_fill(&[2.0; 4]), vec![2.0; 4]);
    }

    #[test]
    fn normal_tail_values() {
        assert!((normal_tail(0.0) - 0.5).abs() < 1e-15);
        assert!(normal_tail(40.0) < 1e-12);
        let spec = QuadratureSpec::new(64, 1e-12).unwrap();
        let density = |x: f64| (-0.5 * x * x).exp() / (TAU).sqrt();
        let oracle = integrate(density, 1.0, 40.0, &spec).unwrap();
        assert!((normal_tail(1.0) - oracle).abs() < 1e-12, "{} vs {oracle}", normal_tail(1.0));
        assert!((normal_tail(-1.0) - (1.0 - oracle)).abs() < 1e-12);
    }

    #[test]
    fn lower_gamma_values() {
        assert_eq!(regularized_lower_gamma(1.5, 0.0).unwrap(), 0.0);
        assert!((regularized_lower_gamma(1.5, 60.0).unwrap() - 1.0).abs() < 1e-10);
        // oracle: v = u^2 removes the integrable singularity at 0
        let spec = QuadratureSpec::new(64, 1e-12).unwrap();
        let gamma_1_5 = PI.sqrt() / 2.0;
        let integral = integrate(|u: f64| 2.0 * u * u * (-u * u).exp(), 0.0, 1.0, &spec).unwrap();
        let oracle = integral / gamma_1_5;
        let got = regularized_lower_gamma(1.5, 1.0).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-10);
    }

    #[test]
    fn lower_gamma_monotone_and_validated() {
        let mut prev = 0.0;
        for i in 0..400 {
            let z = i as f64 * 0.1;
            let v = regularized_lower_gamma(1.5, z).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(regularized_lower_gamma(0.0, 1.0).is_err());
        assert!(regularized_lower_gamma(1.5, -1.0).is_err());
    }
}

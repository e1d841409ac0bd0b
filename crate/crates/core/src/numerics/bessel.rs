//! Modified Bessel functions of the first kind, orders 0 and 1.
//!
//! Power series below [`SERIES_LIMIT`], Hankel asymptotic expansion above.
//! Exponentially scaled variants (`e^{-x} I_n(x)`) are provided so that ratios
//! and logarithms stay finite for large arguments.

use crate::error::{domain, Result};

/// Crossover between the power series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 15.0;

/// Largest argument accepted by the unscaled functions (`I_0(713)` overflows).
pub const MAX_UNSCALED_ARG: f64 = 700.0;

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(domain(format!("Bessel argument must be finite and non-negative, got {x}")));
    }
    Ok(())
}

fn series(x: f64, order: u32) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let mut m = 1.0_f64;
    loop {
        term *= q / (m * (m + order as f64));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        m += 1.0;
    }
    sum
}

/// `e^{-x} I_order(x)` from the asymptotic expansion; only valid for large x.
fn asymptotic_scaled(x: f64, order: u32) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let eight_x = 8.0 * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..64 {
        let odd = (2 * k - 1) as f64;
        let next = term * -(mu - odd * odd) / (k as f64 * eight_x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

fn i0_scaled_unchecked(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        series(x, 0) * (-x).exp()
    } else {
        asymptotic_scaled(x, 0)
    }
}

fn i1_scaled_unchecked(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        series(x, 1) * (-x).exp()
    } else {
        asymptotic_scaled(x, 1)
    }
}

/// `I_0(x)` for `0 <= x <= 700`.
pub fn bessel_i0(x: f64) -> Result<f64> {
    check_arg(x)?;
    if x > MAX_UNSCALED_ARG {
        return Err(domain(format!("I0({x}) overflows; use bessel_i0_scaled")));
    }
    Ok(if x < SERIES_LIMIT { series(x, 0) } else { asymptotic_scaled(x, 0) * x.exp() })
}

/// `I_1(x)` for `0 <= x <= 700`.
pub fn bessel_i1(x: f64) -> Result<f64> {
    check_arg(x)?;
    if x > MAX_UNSCALED_ARG {
        return Err(domain(format!("I1({x}) overflows; use bessel_i1_scaled")));
    }
    Ok(if x < SERIES_LIMIT { series(x, 1) } else { asymptotic_scaled(x, 1) * x.exp() })
}

/// `e^{-x} I_0(x)`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(i0_scaled_unchecked(x))
}

/// `e^{-x} I_1(x)`.
pub fn bessel_i1_scaled(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(i1_scaled_unchecked(x))
}

/// `ln I_0(x)`, finite for every finite non-negative `x`.
pub fn ln_bessel_i0(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(x + i0_scaled_unchecked(x).ln())
}

/// `I_1(x) / I_0(x)`, in `[0, 1)`.
pub fn bessel_ratio_i1_i0(x: f64) -> Result<f64> {
    check_arg(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(i1_scaled_unchecked(x) / i0_scaled_unchecked(x))
}

//! Weiss-Weinstein bound for the single-tone frequency under a von Mises prior.
//!
//! Every expectation in `Q` splits into a data exponent `μ` (closed form in the
//! Dirichlet kernel) and a prior exponent `γ` (one-dimensional quadrature over
//! the common support of the shifted densities). The `γ` terms do not depend on
//! the SNR, so [`WwbEvaluator`] computes them once per exponent and reuses them
//! across a sweep.

use std::f64::consts::{PI, TAU};

use log::warn;
use rayon::prelude::*;

use crate::error::{config, Error, Result};
use crate::numerics::{dirichlet_kernel, integrate, spd_solve, QuadratureSpec, SquareMatrix};
use crate::prior::VonMisesPrior;
use crate::signal::SignalConfig;
use crate::testpoints::{validate_exponent, Provenance, TestPointSet};

/// The exponent grid tried by [`optimize_s`] by default.
pub const S_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Largest exponent allowed to reach `exp` in [`q_element`].
pub const MAX_EXPONENT: f64 = 700.0;

/// Relative tolerance under which two grid values of the bound count as tied.
const TIE_TOL: f64 = 1e-9;

/// The four cross expectations of `[Q]_ij`, in numerator order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    /// `L^{s_i}(θ+h_i) L^{s_j}(θ+h_j)`
    PlusPlus,
    /// `L^{s_j}(θ+h_j) L^{1-s_i}(θ-h_i)`
    PlusJMinusI,
    /// `L^{s_i}(θ+h_i) L^{1-s_j}(θ-h_j)`
    PlusIMinusJ,
    /// `L^{1-s_i}(θ-h_i) L^{1-s_j}(θ-h_j)`
    MinusMinus,
}

impl Term {
    pub const ALL: [Term; 4] = [Term::PlusPlus, Term::PlusJMinusI, Term::PlusIMinusJ, Term::MinusMinus];

    pub fn from_index(n: usize) -> Result<Self> {
        match n {
            1..=4 => Ok(Self::ALL[n - 1]),
            _ => Err(config(format!("cross term index must be 1..=4, got {n}"))),
        }
    }

    fn sign(self) -> f64 {
        match self {
            Term::PlusPlus | Term::MinusMinus => 1.0,
            _ => -1.0,
        }
    }

    /// Density exponents and shifts `(a_m, offset_m)`; the exponents sum to one.
    fn components(self, s_i: f64, s_j: f64, h_i: f64, h_j: f64) -> [(f64, f64); 3] {
        match self {
            Term::PlusPlus => [(1.0 - s_i - s_j, 0.0), (s_i, h_i), (s_j, h_j)],
            Term::PlusJMinusI => [(s_i - s_j, 0.0), (s_j, h_j), (1.0 - s_i, -h_i)],
            Term::PlusIMinusJ => [(s_j - s_i, 0.0), (s_i, h_i), (1.0 - s_j, -h_j)],
            Term::MinusMinus => [(s_i + s_j - 1.0, 0.0), (1.0 - s_i, -h_i), (1.0 - s_j, -h_j)],
        }
    }
}

/// Data exponent of the denominator expectation `E{L^s(x; θ+h, θ)}`.
pub fn mu_i(s: f64, h: f64, k: usize, snr: f64) -> f64 {
    let kf = k as f64;
    -s * (1.0 - s) * 2.0 * kf * snr * (1.0 - dirichlet_kernel(h, k) / kf)
}

/// Prior exponent of the denominator expectation.
pub fn gamma_i(prior: &VonMisesPrior, s: f64, h: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_offset(h)?;
    prior_log_integral(prior, &[(1.0 - s, 0.0), (s, h)], -PI, PI - h, spec)
}

/// Data exponent `μ_{ij,n}` for `h_i ≥ h_j`.
pub fn mu_cross(term: Term, s_i: f64, s_j: f64, h_i: f64, h_j: f64, k: usize, snr: f64) -> f64 {
    let kf = k as f64;
    let d = |h: f64| dirichlet_kernel(h, k);
    let bracket = match term {
        Term::PlusPlus => {
            let c = s_i + s_j - 1.0;
            kf * (c * c + s_i * s_i + s_j * s_j - 1.0) + 2.0 * s_i * s_j * d(h_i - h_j)
                - 2.0 * c * s_i * d(h_i)
                - 2.0 * c * s_j * d(h_j)
        }
        Term::PlusJMinusI => {
            kf * (s_j * s_j + (s_i - 1.0).powi(2) + (s_i - s_j).powi(2) - 1.0) - 2.0 * s_j * (s_i - 1.0) * d(h_i + h_j)
                + 2.0 * s_j * (s_i - s_j) * d(h_j)
                - 2.0 * (s_i - 1.0) * (s_i - s_j) * d(h_i)
        }
        Term::PlusIMinusJ => {
            kf * (s_i * s_i + (s_j - 1.0).powi(2) + (s_i - s_j).powi(2) - 1.0) - 2.0 * s_i * (s_j - 1.0) * d(h_i + h_j)
                + 2.0 * s_i * (s_j - s_i) * d(h_i)
                - 2.0 * (s_j - 1.0) * (s_j - s_i) * d(h_j)
        }
        Term::MinusMinus => {
            let c = s_i + s_j - 1.0;
            kf * (c * c + (s_i - 1.0).powi(2) + (s_j - 1.0).powi(2) - 1.0)
                - 2.0 * c * (s_i - 1.0) * d(h_i)
                - 2.0 * c * (s_j - 1.0) * d(h_j)
                + 2.0 * (s_i - 1.0) * (s_j - 1.0) * d(h_i - h_j)
        }
    };
    snr * bracket
}

/// Integration limits for `h_i ≥ h_j`: every shifted argument stays in `[-π, π]`.
fn cross_limits(term: Term, h_i: f64, h_j: f64) -> (f64, f64) {
    match term {
        Term::PlusPlus => (-PI, PI - h_i),
        Term::PlusJMinusI => (-PI + h_i, PI - h_j),
        Term::PlusIMinusJ => (-PI + h_j, PI - h_i),
        Term::MinusMinus => (-PI + h_i, PI),
    }
}

/// Prior exponent `γ_{ij,n}` for `h_i ≥ h_j`; `-∞` when the support is empty.
pub fn gamma_cross(
    term: Term,
    prior: &VonMisesPrior,
    s_i: f64,
    s_j: f64,
    h_i: f64,
    h_j: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_offset(h_i)?;
    check_offset(h_j)?;
    if h_i < h_j {
        return Err(config(format!("cross terms need h_i >= h_j, got {h_i} < {h_j}")));
    }
    let (lo, hi) = cross_limits(term, h_i, h_j);
    prior_log_integral(prior, &term.components(s_i, s_j, h_i, h_j), lo, hi, spec)
}

fn check_offset(h: f64) -> Result<()> {
    if !(h > 0.0 && h <= PI) {
        return Err(config(format!("test point {h} lies outside (0, pi]")));
    }
    Ok(())
}

/// `ln ∫_lo^hi e^{κ Σ a_m cos(θ + o_m - μ)} / (2π I₀(κ)) dθ`.
fn prior_log_integral(
    prior: &VonMisesPrior,
    parts: &[(f64, f64)],
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if hi <= lo {
        return Ok(f64::NEG_INFINITY);
    }
    let kappa = prior.kappa();
    if kappa == 0.0 {
        return Ok(((hi - lo) / TAU).ln());
    }
    let exponent = |t: f64| kappa * parts.iter().map(|&(a, o)| a * (t + o - prior.mu()).cos()).sum::<f64>();
    // Factor out the largest exponent on a coarse scan so large κ cannot overflow.
    let shift = (0..=256).map(|i| exponent(lo + (hi - lo) * i as f64 / 256.0)).fold(f64::NEG_INFINITY, f64::max);
    let mass = integrate(|t| (exponent(t) - shift).exp(), lo, hi, spec)?;
    Ok(mass.ln() + shift - prior.ln_normalizer())
}

/// Single entry `[Q]_ij` at a shared exponent `s`.
pub fn q_element(
    prior: &VonMisesPrior,
    signal: &SignalConfig,
    h_i: f64,
    h_j: f64,
    s: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    validate_exponent(s)?;
    let (hi, hj) = if h_i >= h_j { (h_i, h_j) } else { (h_j, h_i) };
    let (k, snr) = (signal.k(), signal.snr());
    let denominator =
        mu_i(s, hi, k, snr) + gamma_i(prior, s, hi, spec)? + mu_i(s, hj, k, snr) + gamma_i(prior, s, hj, spec)?;
    let mut exps = [0.0; 4];
    for (n, term) in Term::ALL.iter().enumerate() {
        exps[n] = mu_cross(*term, s, s, hi, hj, k, snr) + gamma_cross(*term, prior, s, s, hi, hj, spec)? - denominator;
    }
    let (shift, sum) = signed_sum(&exps);
    if shift > MAX_EXPONENT {
        return Err(Error::Overflow(shift));
    }
    Ok(shift.exp() * sum)
}

/// Returns `(M, Σ sign_n e^{x_n - M})` with `M = max x_n`.
fn signed_sum(exps: &[f64; 4]) -> (f64, f64) {
    let shift = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return (shift, 0.0);
    }
    let sum = Term::ALL.iter().zip(exps).map(|(t, &x)| t.sign() * (x - shift).exp()).sum();
    (shift, sum)
}

/// Prior exponents for one test-point set and exponent `s`.
#[derive(Debug, Clone)]
struct PriorTerms {
    s: f64,
    single: Vec<f64>,
    /// `cross[i][j][n]` for `i ≥ j` (so `h_i ≥ h_j`).
    cross: Vec<Vec<[f64; 4]>>,
}

impl PriorTerms {
    fn new(prior: &VonMisesPrior, h: &[f64], s: f64, spec: &QuadratureSpec) -> Result<Self> {
        let single = h.iter().map(|&hi| gamma_i(prior, s, hi, spec)).collect::<Result<Vec<_>>>()?;
        let cross = (0..h.len())
            .into_par_iter()
            .map(|i| {
                (0..=i)
                    .map(|j| {
                        let mut row = [0.0; 4];
                        for (n, term) in Term::ALL.iter().enumerate() {
                            row[n] = gamma_cross(*term, prior, s, s, h[i], h[j], spec)?;
                        }
                        Ok(row)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { s, single, cross })
    }
}

/// `Q` with its test points and exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    pub q: SquareMatrix,
    pub h: Vec<f64>,
    pub s: f64,
}

/// Log-domain `Q`: `ln_diag[i] = ln Q_ii` and the unit-diagonal matrix
/// `Q_ij / sqrt(Q_ii Q_jj)`.
struct ScaledQ {
    ln_diag: Vec<f64>,
    unit: SquareMatrix,
}

fn scaled_q(h: &[f64], terms: &PriorTerms, signal: &SignalConfig) -> Result<ScaledQ> {
    let (k, snr, s) = (signal.k(), signal.snr(), terms.s);
    let r = h.len();
    let denom: Vec<f64> = h.iter().zip(&terms.single).map(|(&hi, &g)| mu_i(s, hi, k, snr) + g).collect();
    // (shift, signed sum) per lower-triangle entry
    let mut parts = vec![vec![(0.0, 0.0); r]; r];
    for i in 0..r {
        for j in 0..=i {
            let mut exps = [0.0; 4];
            for (n, term) in Term::ALL.iter().enumerate() {
                exps[n] = mu_cross(*term, s, s, h[i], h[j], k, snr) + terms.cross[i][j][n] - denom[i] - denom[j];
            }
            parts[i][j] = signed_sum(&exps);
        }
    }
    let mut ln_diag = vec![0.0; r];
    for i in 0..r {
        let (shift, sum) = parts[i][i];
        if !(sum > 0.0) || !shift.is_finite() {
            return Err(Error::Singular { index: i });
        }
        ln_diag[i] = shift + sum.ln();
    }
    let mut unit = SquareMatrix::zeros(r);
    for i in 0..r {
        for j in 0..=i {
            let (shift, sum) = parts[i][j];
            let v = if sum == 0.0 { 0.0 } else { sum * (shift - 0.5 * (ln_diag[i] + ln_diag[j])).exp() };
            unit[(i, j)] = v;
            unit[(j, i)] = v;
        }
    }
    Ok(ScaledQ { ln_diag, unit })
}

/// Echo of the inputs that produced a [`WwbResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEcho {
    pub k: usize,
    pub snr: f64,
    pub mu: f64,
    pub kappa: f64,
    pub s: f64,
    /// `"C,S,E"` counts of the points actually used.
    pub trio: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WwbResult {
    /// Bound on the MSE in rad².
    pub mse_bound: f64,
    /// `10 log10(mse_bound)`.
    pub db: f64,
    /// Indices into the input set removed to keep `Q` positive definite.
    pub dropped_points: Vec<usize>,
    pub config_echo: ConfigEcho,
}

fn trio_of(provenance: &[Provenance]) -> String {
    let count = |p| provenance.iter().filter(|&&q| q == p).count();
    format!("{},{},{}", count(Provenance::Close), count(Provenance::SideLobe), count(Provenance::Even))
}

/// Evaluates the bound for a fixed test-point set, caching prior exponents per `s`.
#[derive(Debug, Clone)]
pub struct WwbEvaluator {
    prior: VonMisesPrior,
    points: TestPointSet,
    terms: Vec<PriorTerms>,
}

impl WwbEvaluator {
    pub fn new(prior: &VonMisesPrior, points: &TestPointSet, s_grid: &[f64], spec: &QuadratureSpec) -> Result<Self> {
        if s_grid.is_empty() {
            return Err(config("exponent grid is empty"));
        }
        if points.is_empty() {
            return Err(config("test-point set is empty"));
        }
        let mut terms = Vec::with_capacity(s_grid.len());
        for &s in s_grid {
            validate_exponent(s)?;
            terms.push(PriorTerms::new(prior, points.h(), s, spec)?);
        }
        Ok(Self { prior: *prior, points: points.clone(), terms })
    }

    pub fn s_grid(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.s).collect()
    }

    pub fn points(&self) -> &TestPointSet {
        &self.points
    }

    /// Assembled `Q` for grid entry `s` (linear domain; may overflow at high SNR).
    pub fn q_matrix(&self, signal: &SignalConfig, s: f64) -> Result<QMatrix> {
        let terms = self.terms_for(s)?;
        let h = self.points.h();
        let scaled = scaled_q(h, terms, signal)?;
        let r = h.len();
        let mut q = SquareMatrix::zeros(r);
        for i in 0..r {
            for j in 0..r {
                let ln_scale = 0.5 * (scaled.ln_diag[i] + scaled.ln_diag[j]);
                if ln_scale > MAX_EXPONENT {
                    return Err(Error::Overflow(ln_scale));
                }
                q[(i, j)] = scaled.unit[(i, j)] * ln_scale.exp();
            }
        }
        Ok(QMatrix { q, h: h.to_vec(), s })
    }

    fn terms_for(&self, s: f64) -> Result<&PriorTerms> {
        self.terms
            .iter()
            .find(|t| (t.s - s).abs() < 1e-12)
            .ok_or_else(|| config(format!("exponent {s} is not on the evaluator grid")))
    }

    /// `H Q⁻¹ Hᵀ` at grid exponent `s`, dropping points until `Q` is positive definite.
    pub fn value(&self, signal: &SignalConfig, s: f64) -> Result<WwbResult> {
        let terms = self.terms_for(s)?;
        let scaled = scaled_q(self.points.h(), terms, signal)?;
        let h = self.points.h();
        // bound = Σ g_i [Q̃⁻¹ g]_i with g_i = h_i / sqrt(Q_ii)
        let g_all: Vec<f64> = h.iter().zip(&scaled.ln_diag).map(|(&hi, &l)| hi * (-0.5 * l).exp()).collect();
        let mut active: Vec<usize> = (0..h.len()).collect();
        let mut dropped = Vec::new();
        let mut unit = scaled.unit;
        loop {
            if active.is_empty() {
                return Err(Error::AllPointsDropped);
            }
            let g: Vec<f64> = active.iter().map(|&i| g_all[i]).collect();
            match spd_solve(&unit, &g) {
                Ok(x) => {
                    let mse: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
                    let kept: Vec<Provenance> = active.iter().map(|&i| self.points.provenance()[i]).collect();
                    dropped.sort_unstable();
                    return Ok(WwbResult {
                        mse_bound: mse,
                        db: 10.0 * mse.log10(),
                        dropped_points: dropped,
                        config_echo: ConfigEcho {
                            k: signal.k(),
                            snr: signal.snr(),
                            mu: self.prior.mu(),
                            kappa: self.prior.kappa(),
                            s,
                            trio: trio_of(&kept),
                        },
                    });
                }
                Err(Error::Singular { index }) => {
                    warn!("dropping test point h = {} to keep Q positive definite", h[active[index]]);
                    dropped.push(active.remove(index));
                    unit = unit.without(index);
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Maximizes over the evaluator's exponent grid.
    ///
    /// Values within a relative `1e-9` of the maximum are tied; ties go to the
    /// exponent nearest 0.5, then to the smaller exponent. Grid points that fail
    /// are skipped with a warning.
    pub fn optimize(&self, signal: &SignalConfig) -> Result<(f64, WwbResult)> {
        let mut results = Vec::new();
        let mut last_err = None;
        for t in &self.terms {
            match self.value(signal, t.s) {
                Ok(r) if r.mse_bound.is_finite() => results.push((t.s, r)),
                Ok(r) => warn!("non-finite bound {} at s = {}", r.mse_bound, t.s),
                Err(e) => {
                    warn!("skipping s = {}: {e}", t.s);
                    last_err = Some(e);
                }
            }
        }
        let best = results.iter().map(|(_, r)| r.mse_bound).fold(f64::NEG_INFINITY, f64::max);
        results
            .into_iter()
            .filter(|(_, r)| r.mse_bound >= best - TIE_TOL * best.abs())
            .min_by(|a, b| {
                let da = (a.0 - 0.5).abs();
                let db = (b.0 - 0.5).abs();
                da.total_cmp(&db).then(a.0.total_cmp(&b.0))
            })
            .ok_or_else(|| last_err.unwrap_or(Error::AllPointsDropped))
    }
}

/// Bound for a fixed set at the set's own exponent.
pub fn wwb_value(
    prior: &VonMisesPrior,
    signal: &SignalConfig,
    points: &TestPointSet,
    spec: &QuadratureSpec,
) -> Result<WwbResult> {
    WwbEvaluator::new(prior, points, &[points.s()], spec)?.value(signal, points.s())
}

/// Bound maximized over `s_grid`; returns the maximizing exponent.
pub fn optimize_s(
    prior: &VonMisesPrior,
    signal: &SignalConfig,
    points: &TestPointSet,
    s_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, WwbResult)> {
    WwbEvaluator::new(prior, points, s_grid, spec)?.optimize(signal)
}

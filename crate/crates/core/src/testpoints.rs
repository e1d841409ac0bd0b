//! Test-point vectors for the Weiss-Weinstein bound.
//!
//! A set is described by a `(C, S, E)` trio: `C` offsets hugging the main lobe,
//! `S` side-lobe peaks of the noiseless kernel `D(h) = Σ_k cos(hk)`, and `E`
//! offsets evenly spaced over `[0.1π, π]`. All offsets are positive; the score
//! function uses `±h` symmetrically.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{config, Result};
use crate::numerics::dirichlet_kernel;

/// Points closer than this are treated as duplicates.
pub const DEDUP_TOL: f64 = 1e-6;

/// Side-lobe peak locations are refined to this width.
pub const PEAK_TOL: f64 = 1e-10;

const CLOSE_POINTS: [f64; 2] = [0.001 * PI, 0.01 * PI];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Close,
    SideLobe,
    Even,
}

impl Provenance {
    pub fn tag(self) -> char {
        match self {
            Provenance::Close => 'C',
            Provenance::SideLobe => 'S',
            Provenance::Even => 'E',
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

/// Counts of close, side-lobe and even points plus the shared exponent `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestPointConfig {
    pub c_count: usize,
    pub s_count: usize,
    pub e_count: usize,
    pub s_exponent: f64,
}

impl TestPointConfig {
    pub fn new(c_count: usize, s_count: usize, e_count: usize, s_exponent: f64) -> Result<Self> {
        let cfg = Self { c_count, s_count, e_count, s_exponent };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The legacy `(2, 9, 0)` configuration at `s = 0.5`.
    pub fn legacy() -> Self {
        Self { c_count: 2, s_count: 9, e_count: 0, s_exponent: 0.5 }
    }

    /// The proposed `(2, 9, 10)` configuration at `s = 0.5`.
    pub fn proposed() -> Self {
        Self { c_count: 2, s_count: 9, e_count: 10, s_exponent: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_count + self.s_count + self.e_count == 0 {
            return Err(config("test-point trio must request at least one point"));
        }
        if self.c_count > CLOSE_POINTS.len() {
            return Err(config(format!(
                "at most {} close points are available, requested {}",
                CLOSE_POINTS.len(),
                self.c_count
            )));
        }
        validate_exponent(self.s_exponent)
    }

    pub fn trio(&self) -> String {
        format!("{},{},{}", self.c_count, self.s_count, self.e_count)
    }
}

/// Parses `"C,S,E"` with `s = 0.5`.
impl FromStr for TestPointConfig {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(config(format!("expected a C,S,E trio, got {s:?}")));
        }
        let parse = |p: &str| p.parse::<usize>().map_err(|_| config(format!("invalid trio component {p:?} in {s:?}")));
        Self::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?, 0.5)
    }
}

pub(crate) fn validate_exponent(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(config(format!("exponent s must lie in (0, 1), got {s}")));
    }
    Ok(())
}

/// Ordered test offsets with their provenance and the shared exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPointSet {
    h: Vec<f64>,
    provenance: Vec<Provenance>,
    s: f64,
}

impl TestPointSet {
    /// Builds a set from explicit offsets; sorts and deduplicates.
    pub fn from_points(points: &[(f64, Provenance)], s: f64) -> Result<Self> {
        validate_exponent(s)?;
        let mut accepted: Vec<(f64, Provenance)> = Vec::with_capacity(points.len());
        for &(h, p) in points {
            if !(h > 0.0 && h <= PI) {
                return Err(config(format!("test point {h} lies outside (0, pi]")));
            }
            if accepted.iter().all(|&(a, _)| (a - h).abs() >= DEDUP_TOL) {
                accepted.push((h, p));
            }
        }
        if accepted.is_empty() {
            return Err(config("test-point set is empty"));
        }
        accepted.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { h: accepted.iter().map(|p| p.0).collect(), provenance: accepted.iter().map(|p| p.1).collect(), s })
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn with_exponent(&self, s: f64) -> Result<Self> {
        validate_exponent(s)?;
        Ok(Self { s, ..self.clone() })
    }

    /// Copy without the points at `indices` (indices into this set).
    pub fn without(&self, indices: &[usize]) -> Self {
        let keep = |i: &usize| !indices.contains(i);
        Self {
            h: (0..self.len()).filter(keep).map(|i| self.h[i]).collect(),
            provenance: (0..self.len()).filter(keep).map(|i| self.provenance[i]).collect(),
            s: self.s,
        }
    }
}

/// `{0.001π, 0.01π}`.
pub fn close_points() -> [f64; 2] {
    CLOSE_POINTS
}

/// Positive-valued local maxima of `D(h)` on `(h_null, π]`, nearest first.
///
/// `h_null = π/(K-1)` is the first zero of the kernel, so the main lobe is
/// excluded. Maxima are bracketed on a grid of step `π/(64K)` or finer and
/// refined by golden-section search.
pub fn sidelobe_points(k: usize) -> Result<Vec<f64>> {
    sidelobe_points_with_step(k, PI / (64.0 * k as f64))
}

pub(crate) fn sidelobe_points_with_step(k: usize, step: f64) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(config(format!("side lobes need K >= 2, got {k}")));
    }
    let kernel = |h: f64| dirichlet_kernel(h, k);
    let start = PI / (k as f64 - 1.0);
    let n = ((PI - start) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| start + i as f64 * (PI - start) / n as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&h| kernel(h)).collect();

    let mut peaks = Vec::new();
    for i in 1..grid.len() - 1 {
        if values[i] > values[i - 1] && values[i] >= values[i + 1] {
            let h = golden_max(&kernel, grid[i - 1], grid[i + 1]);
            if kernel(h) > 0.0 {
                peaks.push(h);
            }
        }
    }
    // D'(π) = 0 by symmetry, so π itself is a peak when the kernel rises into it.
    let last = values.len() - 1;
    if values[last] > 0.0 && values[last] > values[last - 1] {
        peaks.push(PI);
    }
    Ok(peaks)
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > PEAK_TOL {
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

/// `n` points linearly spaced over `[0.1π, π]`, endpoints included.
pub fn even_points(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.1 * PI],
        _ => {
            let step = 0.9 * PI / (n - 1) as f64;
            (0..n).map(|m| 0.1 * PI + m as f64 * step).collect()
        }
    }
}

/// Assembles the `(C, S, E)` set for `K` samples.
///
/// Close points take priority over side-lobe points, which take priority over
/// even points, when two fall within [`DEDUP_TOL`] of each other.
pub fn build(cfg: &TestPointConfig, k: usize) -> Result<TestPointSet> {
    cfg.validate()?;
    let mut points: Vec<(f64, Provenance)> =
        close_points().iter().take(cfg.c_count).map(|&h| (h, Provenance::Close)).collect();
    if cfg.s_count > 0 {
        let lobes = sidelobe_points(k)?;
        if cfg.s_count > lobes.len() {
            return Err(config(format!(
                "requested {} side-lobe points but K = {k} has only {}",
                cfg.s_count,
                lobes.len()
            )));
        }
        points.extend(lobes.iter().take(cfg.s_count).map(|&h| (h, Provenance::SideLobe)));
    }
    points.extend(even_points(cfg.e_count).into_iter().map(|h| (h, Provenance::Even)));
    TestPointSet::from_points(&points, cfg.s_exponent)
}

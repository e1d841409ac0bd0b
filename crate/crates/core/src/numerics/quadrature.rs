//! Composite Gauss-Legendre quadrature with a node-doubling convergence check.

use std::sync::OnceLock;

use crate::error::{config, Error, Result};

/// Points per panel of the composite rule.
pub const PANEL_ORDER: usize = 10;

/// Panel count and tolerance for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    node_count: usize,
    rel_tol: f64,
}

impl QuadratureSpec {
    pub const MIN_NODE_COUNT: usize = 16;
    pub const MAX_REL_TOL: f64 = 1e-6;

    pub fn new(node_count: usize, rel_tol: f64) -> Result<Self> {
        if node_count < Self::MIN_NODE_COUNT {
            return Err(config(format!("quadrature node_count must be >= {}, got {node_count}", Self::MIN_NODE_COUNT)));
        }
        if !(rel_tol > 0.0 && rel_tol <= Self::MAX_REL_TOL) {
            return Err(config(format!("quadrature rel_tol must be in (0, 1e-6], got {rel_tol}")));
        }
        Ok(Self { node_count, rel_tol })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { node_count: 32, rel_tol: 1e-10 }
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Returns `(∫f, ∫|f|)` over `[a, b]` with `panels` equal panels.
fn composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> (f64, f64) {
    let (nodes, weights) = panel_rule();
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut panel = 0.0;
        let mut panel_abs = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            let v = f(mid + half * x);
            panel += w * v;
            panel_abs += w * v.abs();
        }
        sum += panel * half;
        abs_sum += panel_abs * half;
    }
    (sum, abs_sum)
}

/// Integrates `f` over `[a, b]`.
///
/// The rule is evaluated with `node_count` panels and again with twice as many;
/// the finer value is accepted when the two agree to `rel_tol` relative to
/// `max(|∫f|, ∫|f|)`. One further doubling is tried before giving up.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!("invalid integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut panels = spec.node_count;
    let (mut coarse, _) = composite(&f, a, b, panels);
    let mut rel_change = f64::INFINITY;
    for _ in 0..2 {
        panels *= 2;
        let (fine, fine_abs) = composite(&f, a, b, panels);
        if !fine.is_finite() {
            return Err(Error::Domain(format!("integrand not finite on [{a}, {b}]")));
        }
        let scale = fine.abs().max(fine_abs);
        rel_change = if scale == 0.0 { 0.0 } else { (fine - coarse).abs() / scale };
        if rel_change <= spec.rel_tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Quadrature { a, b, rel_change })
}

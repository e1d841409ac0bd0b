//! Dense symmetric matrices and an LDLᵀ solver sized for WWB test-point sets.

use crate::error::{domain, Error, Result};

/// Largest system accepted by [`spd_solve`].
pub const MAX_DIM: usize = 64;

/// Pivots below this fraction of the largest diagonal entry count as singular.
pub const PIVOT_REL_THRESHOLD: f64 = 1e-14;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(domain("matrix rows must all have length equal to the row count"));
        }
        Ok(Self { dim, data: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * factor).collect() }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    /// Largest `|m_ij - m_ji| / max(|m_ij|, |m_ji|, tiny)`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let (a, b) = (self[(i, j)], self[(j, i)]);
                let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                worst = worst.max((a - b).abs() / scale);
            }
        }
        worst
    }

    /// Copy with row and column `index` removed.
    pub fn without(&self, index: usize) -> Self {
        let keep: Vec<usize> = (0..self.dim).filter(|&i| i != index).collect();
        let mut out = Self::zeros(keep.len());
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Solves `m x = v` for symmetric positive definite `m` via LDLᵀ.
///
/// On a pivot below `PIVOT_REL_THRESHOLD` times the largest diagonal entry
/// (or a non-positive pivot) returns [`Error::Singular`] naming the index of
/// the smallest pivot encountered.
pub fn spd_solve(m: &SquareMatrix, v: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    if n == 0 || n > MAX_DIM {
        return Err(domain(format!("spd_solve supports 1..={MAX_DIM} rows, got {n}")));
    }
    if v.len() != n {
        return Err(domain(format!("right-hand side has length {}, expected {n}", v.len())));
    }
    if m.asymmetry() > 1e-9 {
        return Err(domain(format!("matrix is not symmetric (relative asymmetry {:e})", m.asymmetry())));
    }
    let max_diag = (0..n).map(|i| m[(i, i)].abs()).fold(0.0_f64, f64::max);
    let threshold = PIVOT_REL_THRESHOLD * max_diag;

    let mut l = SquareMatrix::identity(n);
    let mut d = vec![0.0; n];
    let mut singular = false;
    for j in 0..n {
        let mut dj = m[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * d[k];
        }
        d[j] = dj;
        if !(dj > threshold) {
            // keep factoring so the smallest pivot can be reported
            singular = true;
            continue;
        }
        for i in (j + 1)..n {
            let mut lij = m[(i, j)];
            for k in 0..j {
                lij -= l[(i, k)] * l[(j, k)] * d[k];
            }
            l[(i, j)] = lij / dj;
        }
    }
    if singular || max_diag == 0.0 {
        let index = d.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
        return Err(Error::Singular { index });
    }

    let mut y = v.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
    }
    for i in 0..n {
        y[i] /= d[i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[(k, i)] * y[k];
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
        let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = (0..n).map(|k| a[i][k] * a[j][k]).sum::<f64>();
            }
            m[(i, i)] += 0.1;
        }
        m
    }

    #[test]
    fn identity_system() {
        let v = vec![1.0, -2.0, 3.5];
        assert_eq!(spd_solve(&SquareMatrix::identity(3), &v).unwrap(), v);
    }

    #[test]
    fn scaled_identity() {
        let v = vec![1.0, -2.0, 3.5, 4.0];
        let x = spd_solve(&SquareMatrix::identity(4).scaled(2.0), &v).unwrap();
        for (a, b) in x.iter().zip(&v) {
            assert!((a - b / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn random_spd_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 5, 12, 40] {
            let m = random_spd(n, &mut rng);
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = spd_solve(&m, &v).unwrap();
            let r: Vec<f64> = m.mul_vec(&x).iter().zip(&v).map(|(a, b)| a - b).collect();
            assert!(norm(&r) <= 1e-8 * norm(&v), "n = {n}");
        }
    }

    #[test]
    fn duplicate_rows_are_singular() {
        let m = SquareMatrix::from_rows(&[vec![2.0, 1.0, 1.0], vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]]).unwrap();
        match spd_solve(&m, &[1.0, 1.0, 1.0]) {
            Err(Error::Singular { index }) => assert_eq!(index, 2),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_rejected() {
        let m = SquareMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap();
        assert!(spd_solve(&m, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn without_removes_row_and_column() {
        let m = SquareMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 5.0], vec![3.0, 5.0, 6.0]]).unwrap();
        let r = m.without(1);
        assert_eq!(r, SquareMatrix::from_rows(&[vec![1.0, 3.0], vec![3.0, 6.0]]).unwrap());
    }
}

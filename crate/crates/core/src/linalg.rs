//! Small dense linear algebra: just enough for SPD factorization,
//! triangular solves, a symmetric eigendecomposition, and multivariate
//! Gaussian evaluation/sampling. Dimensions here are feature counts
//! (single digits) or waveform lengths (tens), so everything is plain
//! row-major `f64` with no blocking.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use rand::Rng;
use rand_distr::StandardNormal;

pub const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric positive-definite matrix, validated on construction:
/// symmetry within 1e-10 and a successful Cholesky factorization.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    mat: Mat,
}

impl SpdMatrix {
    pub fn new(mat: Mat) -> Result<Self> {
        if mat.rows() != mat.cols() {
            return Err(Error::DimensionMismatch { expected: mat.rows(), got: mat.cols() });
        }
        for i in 0..mat.rows() {
            for j in (i + 1)..mat.cols() {
                let delta = (mat[(i, j)] - mat[(j, i)]).abs();
                if delta > 1e-10 {
                    return Err(Error::NotSymmetric { row: i, col: j, delta });
                }
            }
        }
        cholesky(&mat)?;
        Ok(Self { mat })
    }

    pub fn identity(n: usize) -> Self {
        Self { mat: Mat::identity(n) }
    }

    /// Scale the whole matrix by a positive factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if factor <= 0.0 {
            return Err(Error::InvalidParameter(format!("scale factor must be positive, got {factor}")));
        }
        let mut m = self.mat.clone();
        for v in m.data.iter_mut() {
            *v *= factor;
        }
        Ok(Self { mat: m })
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn cholesky(&self) -> CholeskyFactor {
        // validated in the constructor
        cholesky(&self.mat).expect("SpdMatrix invariant")
    }
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = A`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    lower: Mat,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self) -> &Mat {
        &self.lower
    }

    /// Sum of log diagonal entries: ½·log det A.
    pub fn half_log_det(&self) -> f64 {
        (0..self.dim()).map(|i| self.lower[(i, i)].ln()).sum()
    }

    /// Solve `L x = b` in place.
    pub fn forward_solve(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lower[(i, j)] * b[j];
            }
            b[i] = s / self.lower[(i, i)];
        }
    }

    /// Solve `Lᵀ x = b` in place.
    pub fn backward_solve(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..n {
                s -= self.lower[(j, i)] * b[j];
            }
            b[i] = s / self.lower[(i, i)];
        }
    }

    /// Reconstruct `A = L·Lᵀ`.
    pub fn reconstruct(&self) -> Mat {
        self.lower.matmul(&self.lower.transpose())
    }

    /// `A⁻¹` via two triangular solves per column.
    pub fn inverse(&self) -> Mat {
        let n = self.dim();
        let mut inv = Mat::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            self.forward_solve(&mut col);
            self.backward_solve(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// Fails with the 1-based index of the first non-positive pivot.
pub fn cholesky(a: &Mat) -> Result<CholeskyFactor> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.cols() });
    }
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NotPositiveDefinite { pivot: i + 1 });
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(CholeskyFactor { lower: l })
}

/// Log density of `N_r(mu, Σ)` at `y`, with `Σ` given by its Cholesky
/// factor. Log-determinant from the factor diagonal, quadratic form by
/// forward solve.
pub fn mvn_logpdf(y: &[f64], mu: &[f64], chol_sigma: &CholeskyFactor) -> Result<f64> {
    let r = chol_sigma.dim();
    if y.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: y.len() });
    }
    if mu.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: mu.len() });
    }
    let mut diff: Vec<f64> = y.iter().zip(mu).map(|(a, b)| a - b).collect();
    chol_sigma.forward_solve(&mut diff);
    let quad: f64 = diff.iter().map(|v| v * v).sum();
    Ok(-0.5 * (r as f64) * LN_2PI - chol_sigma.half_log_det() - 0.5 * quad)
}

/// Draw `mu + L·ζ` with `ζ` i.i.d. standard normal.
pub fn sample_mvn(mu: &[f64], chol_sigma: &CholeskyFactor, rng: &mut RngStream) -> Result<Vec<f64>> {
    let r = chol_sigma.dim();
    if mu.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: mu.len() });
    }
    let z: Vec<f64> = (0..r).map(|_| rng.sample(StandardNormal)).collect();
    let mut out = mu.to_vec();
    for i in 0..r {
        let mut s = 0.0;
        for j in 0..=i {
            s += chol_sigma.lower[(i, j)] * z[j];
        }
        out[i] += s;
    }
    Ok(out)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending
/// eigenvalue; eigenvector `k` is column `k` of the returned matrix.
pub fn symmetric_eigen(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.cols() });
    }
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let tol = 1e-14 * m.data.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new_col)] = v[(k, old_col)];
        }
    }
    Ok((eigenvalues, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cholesky_identity() {
        let l = cholesky(&Mat::identity(3)).unwrap();
        assert_eq!(l.lower(), &Mat::identity(3));
    }

    #[test]
    fn cholesky_roundtrip_2x2() {
        let a = Mat::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let l = cholesky(&a).unwrap();
        assert!(l.reconstruct().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn cholesky_indefinite_names_pivot() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        match cholesky(&a) {
            Err(Error::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 2),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn mvn_logpdf_standard_normal_at_mode() {
        let chol = SpdMatrix::identity(1).cholesky();
        let lp = mvn_logpdf(&[0.0], &[0.0], &chol).unwrap();
        assert_relative_eq!(lp, -0.5 * LN_2PI, max_relative = 1e-12);
        assert_relative_eq!(lp, -0.918938533204673, epsilon = 1e-10);
    }

    #[test]
    fn mvn_logpdf_bivariate_mode() {
        let chol = SpdMatrix::identity(2).cholesky();
        let lp = mvn_logpdf(&[1.5, -2.0], &[1.5, -2.0], &chol).unwrap();
        assert_relative_eq!(lp, -LN_2PI, max_relative = 1e-12);
    }

    // Direct 2x2 inverse oracle: log N(y; mu, S) computed from the
    // explicit inverse and determinant, no Cholesky involved.
    fn mvn_logpdf_direct_2x2(y: &[f64], mu: &[f64], s: &Mat) -> f64 {
        let det = s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)];
        let inv = [
            [s[(1, 1)] / det, -s[(0, 1)] / det],
            [-s[(1, 0)] / det, s[(0, 0)] / det],
        ];
        let d = [y[0] - mu[0], y[1] - mu[1]];
        let quad = d[0] * (inv[0][0] * d[0] + inv[0][1] * d[1]) + d[1] * (inv[1][0] * d[0] + inv[1][1] * d[1]);
        -LN_2PI - 0.5 * det.ln() - 0.5 * quad
    }

    #[test]
    fn mvn_logpdf_matches_direct_inverse() {
        let s = Mat::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]);
        let chol = cholesky(&s).unwrap();
        let y = [1.0, 1.0];
        let mu = [0.0, 0.0];
        let got = mvn_logpdf(&y, &mu, &chol).unwrap();
        let want = mvn_logpdf_direct_2x2(&y, &mu, &s);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn sample_mvn_moments() {
        let chol = SpdMatrix::identity(2).cholesky();
        let mu = [5.0, 5.0];
        let mut rng = RngStream::new(11, 0);
        let n = 100_000;
        let mut sum = [0.0f64; 2];
        let mut draws = Vec::with_capacity(n);
        for _ in 0..n {
            let x = sample_mvn(&mu, &chol, &mut rng).unwrap();
            sum[0] += x[0];
            sum[1] += x[1];
            draws.push(x);
        }
        let mean = [sum[0] / n as f64, sum[1] / n as f64];
        assert!((mean[0] - 5.0).abs() < 0.02);
        assert!((mean[1] - 5.0).abs() < 0.02);
        // sample covariance vs identity
        let mut cov = [[0.0f64; 2]; 2];
        for x in &draws {
            let d = [x[0] - mean[0], x[1] - mean[1]];
            for i in 0..2 {
                for j in 0..2 {
                    cov[i][j] += d[i] * d[j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let c = cov[i][j] / (n as f64 - 1.0);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((c - want).abs() < 0.05, "cov[{i}][{j}] = {c}");
            }
        }
    }

    #[test]
    fn sample_mvn_reproducible() {
        let chol = SpdMatrix::identity(3).cholesky();
        let mu = [0.0, 1.0, 2.0];
        let a = sample_mvn(&mu, &chol, &mut RngStream::new(9, 3)).unwrap();
        let b = sample_mvn(&mu, &chol, &mut RngStream::new(9, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn jacobi_eigen_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 3 and 1
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        assert_relative_eq!(vals[0], 3.0, epsilon = 1e-10);
        assert_relative_eq!(vals[1], 1.0, epsilon = 1e-10);
        // A v = λ v
        for k in 0..2 {
            for i in 0..2 {
                let av: f64 = (0..2).map(|j| a[(i, j)] * vecs[(j, k)]).sum();
                assert_relative_eq!(av, vals[k] * vecs[(i, k)], epsilon = 1e-9);
            }
        }
    }
}

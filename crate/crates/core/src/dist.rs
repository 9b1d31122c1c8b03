//! Random-variate primitives shared by both samplers.
//!
//! Everything is a deterministic function of its parameters and an
//! [`RngStream`]. Dirichlet draws are generated in log space throughout
//! so that the sparse-prior regime (symmetric hyperparameter far below
//! one) keeps weights finite in log representation even when they
//! underflow to zero linearly.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, Mat, SpdMatrix};
use crate::rng::RngStream;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, Open01, StandardNormal};

/// Mixture weights: non-negative, summing to one within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector {
    weights: Vec<f64>,
}

impl SimplexVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("simplex vector must be non-empty".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidParameter("simplex entries must be non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("simplex entries sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(k: usize) -> Self {
        Self { weights: vec![1.0 / k as f64; k] }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `log Σ exp(x_k)` with max subtraction; `-∞` entries are ignored.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Gamma(shape, rate) draw. Mean shape/rate.
pub fn sample_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma shape must be positive, got {shape}")));
    }
    if !(rate > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma rate must be positive, got {rate}")));
    }
    let g = Gamma::new(shape, 1.0 / rate).expect("validated parameters");
    Ok(g.sample(rng))
}

/// log of a Gamma(shape, 1) draw, finite for arbitrarily small shapes.
///
/// For shape < 1 uses the boost identity G(a) = G(a+1)·U^{1/a}, taking
/// the power in log space so a tiny shape cannot underflow the draw to
/// zero before the logarithm.
pub fn sample_log_gamma(shape: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma shape must be positive, got {shape}")));
    }
    if shape < 1.0 {
        let g = Gamma::new(shape + 1.0, 1.0).expect("shape + 1 > 1");
        let x: f64 = g.sample(rng);
        let u: f64 = rng.sample(Open01);
        Ok(x.ln() + u.ln() / shape)
    } else {
        let g = Gamma::new(shape, 1.0).expect("validated shape");
        let x: f64 = g.sample(rng);
        Ok(x.ln())
    }
}

/// Beta(a, b) draw via two Gamma draws, clamped into the open interval.
pub fn sample_beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("beta parameters must be positive, got ({a}, {b})")));
    }
    let lg1 = sample_log_gamma(a, rng)?;
    let lg2 = sample_log_gamma(b, rng)?;
    // g1/(g1+g2) = 1/(1 + exp(lg2 - lg1)), stable for either tail
    let v = 1.0 / (1.0 + (lg2 - lg1).exp());
    Ok(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
}

/// Log-weights of a Dirichlet(alpha) draw: normalized log-Gamma draws.
///
/// Every entry is finite even when the linear weight underflows.
pub fn sample_dirichlet_log(alpha: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(Error::InvalidParameter("dirichlet needs at least one concentration".into()));
    }
    if let Some(bad) = alpha.iter().find(|&&a| !(a > 0.0)) {
        return Err(Error::InvalidParameter(format!("dirichlet concentrations must be positive, got {bad}")));
    }
    let logs: Vec<f64> = alpha
        .iter()
        .map(|&a| sample_log_gamma(a, rng))
        .collect::<Result<_>>()?;
    let norm = logsumexp(&logs);
    Ok(logs.into_iter().map(|l| l - norm).collect())
}

/// Dirichlet(alpha) draw on the simplex.
pub fn sample_dirichlet(alpha: &[f64], rng: &mut RngStream) -> Result<SimplexVector> {
    let logs = sample_dirichlet_log(alpha, rng)?;
    let weights: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
    let sum: f64 = weights.iter().sum();
    SimplexVector::new(weights.into_iter().map(|w| w / sum).collect())
}

/// Inverse-Wishart(nu, scale) draw with mean scale/(nu - dim - 1).
///
/// Bartlett decomposition of the Wishart with inverted scale, then a
/// matrix inversion back to covariance form.
pub fn sample_inverse_wishart(nu: f64, scale: &SpdMatrix, rng: &mut RngStream) -> Result<SpdMatrix> {
    let dim = scale.dim();
    if !(nu > dim as f64 - 1.0) {
        return Err(Error::ImproperPrior { nu, dim });
    }
    let scale_inv = scale.cholesky().inverse();
    let l = cholesky(&scale_inv).expect("inverse of SPD is SPD");
    // lower-triangular Bartlett factor: chi on the diagonal, normals below
    let mut a = Mat::zeros(dim, dim);
    for i in 0..dim {
        let chi = ChiSquared::new(nu - i as f64).expect("nu > dim - 1");
        let x: f64 = chi.sample(rng);
        a[(i, i)] = x.sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    // W = (L A)(L A)ᵀ ~ Wishart(nu, scale⁻¹); the draw is W⁻¹
    let la = l.lower().matmul(&a);
    let w = la.matmul(&la.transpose());
    let w_chol = cholesky(&w).map_err(|_| Error::Internal("Wishart draw lost positive definiteness".into()))?;
    let mut sigma = w_chol.inverse();
    // symmetrize rounding noise before validation
    for i in 0..dim {
        for j in (i + 1)..dim {
            let m = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
            sigma[(i, j)] = m;
            sigma[(j, i)] = m;
        }
    }
    SpdMatrix::new(sigma)
}

/// Index draw with probability `exp(logw_k − logsumexp(logw))`.
pub fn sample_categorical_log(logweights: &[f64], rng: &mut RngStream) -> Result<usize> {
    let m = logweights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m.is_nan() {
        return Err(Error::AllWeightsZero);
    }
    let probs: Vec<f64> = logweights.iter().map(|&l| (l - m).exp()).collect();
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.sample::<f64, _>(Open01) * total;
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u <= acc {
            return Ok(k);
        }
    }
    // rounding can leave u marginally above the accumulated total
    Ok(probs.iter().rposition(|&p| p > 0.0).unwrap())
}

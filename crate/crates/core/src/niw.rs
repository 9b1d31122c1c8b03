//! Normal–Inverse-Wishart prior on component parameters and its
//! conjugate posterior update, shared by both samplers.
//!
//! The prior is μ | Σ ~ N(b0, Σ/N0), Σ ~ IW(c0, C0) with
//! E[Σ] = C0/(c0 − r − 1) whenever c0 > r + 1.

use crate::data::FeatureMatrix;
use crate::dist::sample_inverse_wishart;
use crate::error::{Error, Result};
use crate::linalg::{sample_mvn, CholeskyFactor, Mat, SpdMatrix};
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct NiwHyperparams {
    pub b0: Vec<f64>,
    pub n0: f64,
    pub c0: f64,
    pub scale: SpdMatrix,
}

impl NiwHyperparams {
    pub fn new(b0: Vec<f64>, n0: f64, c0: f64, scale: SpdMatrix) -> Result<Self> {
        let r = b0.len();
        if scale.dim() != r {
            return Err(Error::DimensionMismatch { expected: r, got: scale.dim() });
        }
        if !(n0 > 0.0) {
            return Err(Error::InvalidParameter(format!("prior precision scale N0 = {n0} must be positive")));
        }
        if !(c0 > r as f64 - 1.0) {
            return Err(Error::InvalidParameter(format!(
                "inverse-Wishart degrees of freedom c0 = {c0} must exceed r - 1 = {}",
                r as f64 - 1.0
            )));
        }
        Ok(Self { b0, n0, c0, scale })
    }

    pub fn dim(&self) -> usize {
        self.b0.len()
    }

    /// Conjugate posterior given the rows allocated to one component.
    ///
    /// With n members of mean ȳ and scatter S about ȳ:
    /// N_n = N0 + n, b_n = b0 + n/(N0+n)·(ȳ − b0), c_n = c0 + n,
    /// C_n = C0 + S + (N0·n/N_n)(ȳ − b0)(ȳ − b0)ᵀ.
    /// Zero members reduce to the prior.
    pub fn posterior(&self, members: &[&[f64]]) -> Result<NiwHyperparams> {
        let r = self.dim();
        let n = members.len();
        if n == 0 {
            return Ok(self.clone());
        }
        let nf = n as f64;
        let mut ybar = vec![0.0; r];
        for row in members {
            if row.len() != r {
                return Err(Error::DimensionMismatch { expected: r, got: row.len() });
            }
            for (j, v) in row.iter().enumerate() {
                ybar[j] += v;
            }
        }
        ybar.iter_mut().for_each(|v| *v /= nf);

        let n_n = self.n0 + nf;
        let shrink = nf / n_n;
        let b_n: Vec<f64> = self
            .b0
            .iter()
            .zip(&ybar)
            .map(|(&b, &y)| b + shrink * (y - b))
            .collect();
        let c_n = self.c0 + nf;

        let mut c_mat = self.scale.mat().clone();
        for row in members {
            for a in 0..r {
                let da = row[a] - ybar[a];
                for b in 0..r {
                    c_mat[(a, b)] += da * (row[b] - ybar[b]);
                }
            }
        }
        let w = self.n0 * nf / n_n;
        for a in 0..r {
            let da = ybar[a] - self.b0[a];
            for b in 0..r {
                c_mat[(a, b)] += w * da * (ybar[b] - self.b0[b]);
            }
        }
        // symmetrize accumulated rounding before SPD validation
        for a in 0..r {
            for b in (a + 1)..r {
                let m = 0.5 * (c_mat[(a, b)] + c_mat[(b, a)]);
                c_mat[(a, b)] = m;
                c_mat[(b, a)] = m;
            }
        }
        Ok(NiwHyperparams { b0: b_n, n0: n_n, c0: c_n, scale: SpdMatrix::new(c_mat)? })
    }
}

/// One mixture component with its Cholesky factor cached for density
/// evaluation.
#[derive(Debug, Clone)]
pub struct Component {
    pub mu: Vec<f64>,
    pub sigma: SpdMatrix,
    pub chol: CholeskyFactor,
}

impl Component {
    /// Draw (Σ, μ) from a Normal–Inverse-Wishart law: Σ ~ IW(c, C),
    /// then μ ~ N(b, Σ/N).
    pub fn draw(params: &NiwHyperparams, rng: &mut RngStream) -> Result<Component> {
        let sigma = sample_inverse_wishart(params.c0, &params.scale, rng)?;
        let scaled = sigma.scaled(1.0 / params.n0)?;
        let mu = sample_mvn(&params.b0, &scaled.cholesky(), rng)?;
        let chol = sigma.cholesky();
        Ok(Component { mu, sigma, chol })
    }
}

/// Draw every component from its conjugate conditional given the
/// allocations; components with no members draw from the prior. Both
/// samplers use this same update.
pub fn draw_conditional_components(
    x: &FeatureMatrix,
    z: &[usize],
    k: usize,
    hyper: &NiwHyperparams,
    rng: &mut RngStream,
) -> Result<Vec<Component>> {
    let mut components = Vec::with_capacity(k);
    for c in 0..k {
        let members: Vec<&[f64]> = (0..x.n()).filter(|&i| z[i] == c).map(|i| x.row(i)).collect();
        let post = hyper.posterior(&members)?;
        components.push(Component::draw(&post, rng)?);
    }
    Ok(components)
}

/// Hyperparameters mirroring the reference run protocol: b0 = ȳ,
/// N0 = 0.01, c0 = 5, C0 = 0.75·cov(y).
pub fn default_hyperparams(means: Vec<f64>, covariance: &Mat) -> Result<NiwHyperparams> {
    let scale = SpdMatrix::new(covariance.clone())?.scaled(0.75)?;
    NiwHyperparams::new(means, 0.01, 5.0, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prior_2d() -> NiwHyperparams {
        NiwHyperparams::new(vec![1.0, -1.0], 0.01, 5.0, SpdMatrix::identity(2)).unwrap()
    }

    #[test]
    fn empty_component_returns_prior() {
        let prior = prior_2d();
        let post = prior.posterior(&[]).unwrap();
        assert_eq!(post.b0, prior.b0);
        assert_eq!(post.n0, prior.n0);
        assert_eq!(post.c0, prior.c0);
        assert_eq!(post.scale.mat(), prior.scale.mat());
    }

    #[test]
    fn single_observation_at_prior_mean() {
        let prior = prior_2d();
        let y = [1.0, -1.0];
        let post = prior.posterior(&[&y]).unwrap();
        // coincident observation leaves the mean and scale untouched
        assert_eq!(post.b0, prior.b0);
        assert_eq!(post.scale.mat(), prior.scale.mat());
        assert_eq!(post.n0, 1.01);
        assert_eq!(post.c0, 6.0);
    }

    #[test]
    fn posterior_shrinks_toward_data() {
        let prior = NiwHyperparams::new(vec![0.0], 1.0, 3.0, SpdMatrix::identity(1)).unwrap();
        let rows: Vec<Vec<f64>> = (0..100).map(|_| vec![10.0]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let post = prior.posterior(&refs).unwrap();
        // b_n = (1·0 + 100·10)/101
        assert!((post.b0[0] - 1000.0 / 101.0).abs() < 1e-12);
        assert_eq!(post.c0, 103.0);
    }

    #[test]
    fn prior_dof_bound_enforced() {
        let err = NiwHyperparams::new(vec![0.0; 4], 0.01, 3.0, SpdMatrix::identity(4));
        assert!(err.is_err());
    }
}

use std::f64::consts::PI;

use super::spd::{forward_sq_norm, SpdMatrix};

/// Multivariate normal log-density with the normalizer precomputed.
#[derive(Debug, Clone)]
pub struct Gaussian {
    mean: Vec<f64>,
    cov: SpdMatrix,
    log_norm: f64,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, cov: SpdMatrix) -> Self {
        assert_eq!(mean.len(), cov.dim(), "mean/covariance dimension mismatch");
        let d = mean.len() as f64;
        let log_norm = -0.5 * (d * (2.0 * PI).ln() + cov.log_det());
        Self {
            mean,
            cov,
            log_norm,
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &SpdMatrix {
        &self.cov
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        self.log_norm - 0.5 * self.mahalanobis_sq(x)
    }

    pub fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        debug_assert_eq!(x.len(), d);
        let chol = self.cov.cholesky_lower();
        if d == 1 {
            let w = (x[0] - self.mean[0]) / chol[(0, 0)];
            return w * w;
        }
        let mut buf = [0.0f64; 8];
        if d <= buf.len() {
            for i in 0..d {
                buf[i] = x[i] - self.mean[i];
            }
            forward_sq_norm(chol, &buf[..d])
        } else {
            let diff: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
            forward_sq_norm(chol, &diff)
        }
    }
}

/// `log N_d(x; mean, cov)` for one-off evaluations.
pub fn mvn_log_pdf(x: &[f64], mean: &[f64], cov: &SpdMatrix) -> f64 {
    Gaussian::new(mean.to_vec(), cov.clone()).log_pdf(x)
}

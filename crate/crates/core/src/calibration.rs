//! Choosing the repulsion strength and the default prior after
//! standardization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repulsion::NRepParams;
use crate::stats::{gamma_quantile, SpdMatrix};

/// Resolution of the tau grid.
pub const TAU_GRID_STEP: f64 = 0.01;

/// Separation target: `P[1 - C0(||theta_r - theta_s||) <= u] = p` for
/// i.i.d. standard normal locations in `d` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub d: usize,
    pub u: f64,
    pub p: f64,
}

impl CalibrationTarget {
    pub fn new(d: usize, u: f64, p: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("calibration needs d >= 1"));
        }
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("u must lie in (0,1), got {u}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("p must lie in (0,1), got {p}")));
        }
        Ok(Self { d, u, p })
    }
}

/// Tau before grid snapping: `q_p / w(u)` with `q_p` the `p`-quantile of
/// `Gamma(d/2, rate 1/2)` and `w(u) = -log(1 - u)`.
pub fn calibrate_tau_unsnapped(target: &CalibrationTarget) -> Result<f64> {
    let target = CalibrationTarget::new(target.d, target.u, target.p)?;
    let q = gamma_quantile(target.d as f64 / 2.0, 0.5, target.p)?;
    let w = -(-target.u).ln_1p();
    Ok(q / w)
}

/// Tau snapped to the nearest point of the `0.01` grid on `(0, inf)`.
pub fn calibrate_tau(target: &CalibrationTarget) -> Result<f64> {
    let raw = calibrate_tau_unsnapped(target)?;
    let snapped = (raw / TAU_GRID_STEP).round() * TAU_GRID_STEP;
    Ok(snapped.max(TAU_GRID_STEP))
}

/// Hyperparameters of the repulsive mixture prior.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub k: usize,
    pub d: usize,
    /// Dirichlet concentrations for the weights.
    pub alpha: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: SpdMatrix,
    /// Repulsion strength; unused by the i.i.d. baseline.
    pub tau: Option<f64>,
    /// Inverse-Wishart scale.
    pub psi_scale: SpdMatrix,
    /// Inverse-Wishart degrees of freedom.
    pub nu: f64,
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d == 0 {
            return Err(Error::domain("prior needs k, d >= 1"));
        }
        if self.alpha.len() != self.k {
            return Err(Error::shape(format!(
                "alpha has {} entries for k = {}",
                self.alpha.len(),
                self.k
            )));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 0.0)) {
            return Err(Error::domain(format!("alpha entries must be positive, got {a}")));
        }
        if self.mu.len() != self.d || self.sigma.dim() != self.d || self.psi_scale.dim() != self.d {
            return Err(Error::shape(format!(
                "mu, sigma and psi_scale must all be {}-dimensional",
                self.d
            )));
        }
        if !(self.nu > self.d as f64 - 1.0) {
            return Err(Error::domain(format!(
                "nu must exceed d - 1 = {}, got {}",
                self.d - 1,
                self.nu
            )));
        }
        if let Some(t) = self.tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::domain(format!("tau must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    /// The NRep prior on the locations; needs `tau` and `k >= 2`.
    pub fn nrep(&self) -> Result<NRepParams> {
        let tau = self
            .tau
            .ok_or_else(|| Error::Config("tau is not set for the repulsive prior".into()))?;
        NRepParams::new(self.k, self.mu.clone(), self.sigma.clone(), tau)
    }
}

/// Defaults for standardized data: `alpha = 1/k`, `mu = 0`, `sigma = I`,
/// `nu = d + 4`, `Psi = 3 psi I` (so each scale matrix has mean `psi I`).
/// Tau is left unset.
pub fn default_prior_spec(k: usize, d: usize, psi: f64) -> Result<PriorSpec> {
    if k < 2 {
        return Err(Error::domain(format!("default prior needs k >= 2, got {k}")));
    }
    if d == 0 {
        return Err(Error::domain("default prior needs d >= 1"));
    }
    if !(psi > 0.0 && psi.is_finite()) {
        return Err(Error::domain(format!("psi must be positive, got {psi}")));
    }
    Ok(PriorSpec {
        k,
        d,
        alpha: vec![1.0 / k as f64; k],
        mu: vec![0.0; d],
        sigma: SpdMatrix::identity(d),
        tau: None,
        psi_scale: SpdMatrix::scaled_identity(d, 3.0 * psi),
        nu: d as f64 + 4.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau(d: usize, u: f64, p: f64) -> f64 {
        calibrate_tau(&CalibrationTarget::new(d, u, p).unwrap()).unwrap()
    }

    #[test]
    fn snaps_to_grid() {
        let t = tau(1, 0.5, 0.95);
        assert!(((t * 100.0).round() - t * 100.0).abs() < 1e-9);
        assert!((t - 5.54).abs() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(CalibrationTarget::new(1, 0.0, 0.5).is_err());
        assert!(CalibrationTarget::new(1, 0.5, 1.0).is_err());
        assert!(calibrate_tau(&CalibrationTarget { d: 1, u: 1.5, p: 0.5 }).is_err());
    }

    #[test]
    fn defaults() {
        let s = default_prior_spec(10, 1, 0.02).unwrap();
        assert!(s.alpha.iter().all(|a| (a - 0.1).abs() < 1e-15));
        assert_eq!(s.nu, 5.0);
        assert!((s.psi_scale.matrix()[(0, 0)] - 0.06).abs() < 1e-15);
        assert_eq!(s.mu, vec![0.0]);
        assert_eq!(s.sigma, SpdMatrix::identity(1));

        let s2 = default_prior_spec(10, 2, 1.0).unwrap();
        assert_eq!(s2.nu, 6.0);
        assert_eq!(s2.psi_scale, SpdMatrix::scaled_identity(2, 3.0));
        assert!(s2.validate().is_ok());
        assert!(s2.nrep().is_err());
    }
}

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::calibration::PriorSpec;
use crate::error::{Error, Result};
use crate::repulsion::CoordinateBundle;
use crate::stats::SpdMatrix;

/// Prior on the component locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMode {
    /// NRep prior, updated by random-walk Metropolis within Gibbs.
    Repulsive,
    /// Independent `N_d(mu, Sigma)` locations, updated from the conjugate
    /// full conditional.
    IidBaseline,
}

impl std::fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SamplerMode::Repulsive => "repulsive",
            SamplerMode::IidBaseline => "iid-baseline",
        })
    }
}

impl std::str::FromStr for SamplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "repulsive" | "rgmm" => Ok(SamplerMode::Repulsive),
            "iid-baseline" | "iid" | "gmm" => Ok(SamplerMode::IidBaseline),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Weights, locations and scales of a `k`-component Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    pub pi: Vec<f64>,
    pub theta: CoordinateBundle,
    pub lambda: Vec<SpdMatrix>,
}

impl MixtureParams {
    pub fn new(pi: Vec<f64>, theta: CoordinateBundle, lambda: Vec<SpdMatrix>) -> Result<Self> {
        let k = theta.k();
        if pi.len() != k || lambda.len() != k {
            return Err(Error::shape(format!(
                "mixture with {k} locations has {} weights and {} scales",
                pi.len(),
                lambda.len()
            )));
        }
        if lambda.iter().any(|l| l.dim() != theta.d()) {
            return Err(Error::shape("scale dimension differs from location dimension"));
        }
        if pi.iter().any(|p| !(*p >= 0.0)) || (pi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::domain("mixture weights must lie on the simplex"));
        }
        Ok(Self { pi, theta, lambda })
    }

    pub fn k(&self) -> usize {
        self.theta.k()
    }

    pub fn d(&self) -> usize {
        self.theta.d()
    }
}

/// Full sampler state.
#[derive(Debug, Clone)]
pub struct ChainState {
    /// Zero-based component labels, one per observation.
    pub z: Vec<usize>,
    pub params: MixtureParams,
    pub iteration: usize,
    /// Running sums of `B^{-1} Omega_j` during burn-in; SPD once burn-in ends.
    pub proposal_cov: Vec<DMatrix<f64>>,
}

impl ChainState {
    pub fn counts(&self) -> Vec<usize> {
        label_counts(&self.z, self.params.k())
    }
}

pub(crate) fn label_counts(z: &[usize], k: usize) -> Vec<usize> {
    let mut c = vec![0; k];
    for &l in z {
        c[l] += 1;
    }
    c
}

/// Run-length and prior settings for one chain.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub burn_in: usize,
    pub n_saved: usize,
    pub thin: usize,
    pub seed: u64,
    /// Stream id under `seed`; replicates use distinct ids.
    pub stream_id: u64,
    pub prior: PriorSpec,
    pub mode: SamplerMode,
}

impl ChainConfig {
    pub fn k(&self) -> usize {
        self.prior.k
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in == 0 || self.n_saved == 0 || self.thin == 0 {
            return Err(Error::Config(format!(
                "burn_in, n_saved and thin must all be >= 1 (got {}, {}, {})",
                self.burn_in, self.n_saved, self.thin
            )));
        }
        self.prior.validate()?;
        if self.mode == SamplerMode::Repulsive {
            if self.prior.k < 2 {
                return Err(Error::Config("repulsive mode needs k >= 2".into()));
            }
            if self.prior.tau.is_none() {
                return Err(Error::Config("repulsive mode needs tau".into()));
            }
        }
        Ok(())
    }
}

/// One saved iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub params: MixtureParams,
    pub z: Vec<usize>,
}

impl Draw {
    pub fn occupied(&self) -> usize {
        label_counts(&self.z, self.params.k()).iter().filter(|&&c| c > 0).count()
    }
}

/// Saved draws of a chain plus the configuration that produced them.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub draws: Vec<Draw>,
    pub config: ChainConfig,
    /// Per-component acceptance rate of the location update over the
    /// sampling phase (1 for the conjugate update).
    pub acceptance_rates: Vec<f64>,
}

impl PosteriorDraws {
    pub fn k(&self) -> usize {
        self.config.k()
    }

    pub fn d(&self) -> usize {
        self.config.prior.d
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Number of observations the labels refer to.
    pub fn n(&self) -> usize {
        self.draws.first().map(|d| d.z.len()).unwrap_or(0)
    }
}

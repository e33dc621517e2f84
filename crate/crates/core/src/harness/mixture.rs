use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stats::{sample_categorical, sample_mvn, Gaussian, SpdMatrix};

/// A finite Gaussian mixture used as a known data-generating density.
#[derive(Debug, Clone)]
pub struct MixtureSpec {
    weights: Vec<f64>,
    components: Vec<Gaussian>,
}

impl MixtureSpec {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, covariances: Vec<SpdMatrix>) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != covariances.len() {
            return Err(Error::shape(format!(
                "mixture has {} weights, {} means and {} covariances",
                weights.len(),
                means.len(),
                covariances.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::domain("mixture weights must lie on the simplex"));
        }
        let d = means[0].len();
        if means.iter().any(|m| m.len() != d) || covariances.iter().any(|c| c.dim() != d) {
            return Err(Error::shape("mixture components differ in dimension"));
        }
        let components = means.into_iter().zip(covariances).map(|(m, c)| Gaussian::new(m, c)).collect();
        Ok(Self { weights, components })
    }

    /// A named built-in mixture.
    ///
    /// * `sim-study-1d`: `0.3 N(-5, 1) + 0.05 N(0, 0.3^2) + 0.25 N(1, 0.3^2) + 0.4 N(4, 0.8^2)`.
    /// * `intro-2d`: four bivariate normals with weights `(0.2, 0.3, 0.3, 0.2)`.
    pub fn builtin(id: &str) -> Result<Self> {
        match id {
            "sim-study-1d" => Self::new(
                vec![0.3, 0.05, 0.25, 0.4],
                vec![vec![-5.0], vec![0.0], vec![1.0], vec![4.0]],
                [1.0, 0.09, 0.09, 0.64]
                    .iter()
                    .map(|&v| SpdMatrix::scaled_identity(1, v))
                    .collect(),
            ),
            "intro-2d" => Self::new(
                vec![0.2, 0.3, 0.3, 0.2],
                vec![vec![0.0, 0.0], vec![3.0, 3.0], vec![-3.0, -3.0], vec![-3.0, 0.0]],
                vec![
                    SpdMatrix::identity(2),
                    SpdMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 1.0], "intro-2d component 2")?,
                    // Third covariance printed asymmetrically in the source; the
                    // symmetric reading with both off-diagonals at -1 is used.
                    SpdMatrix::from_row_slice(2, &[1.0, -1.0, -1.0, 3.0], "intro-2d component 3")?,
                    SpdMatrix::from_row_slice(2, &[3.0, -2.0, -2.0, 2.0], "intro-2d component 4")?,
                ],
            ),
            other => Err(Error::Config(format!(
                "unknown builtin `{other}` (expected sim-study-1d or intro-2d)"
            ))),
        }
    }

    pub const BUILTIN_IDS: [&'static str; 2] = ["sim-study-1d", "intro-2d"];

    pub fn d(&self) -> usize {
        self.components[0].mean().len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Gaussian] {
        &self.components
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d()];
        for (w, g) in self.weights.iter().zip(&self.components) {
            for (acc, v) in m.iter_mut().zip(g.mean()) {
                *acc += w * v;
            }
        }
        m
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, g)| w * g.log_pdf(x).exp())
            .sum()
    }

    /// `n` draws with their component labels.
    pub fn sample_labeled<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<(Dataset, Vec<usize>)> {
        let mut rows = Vec::with_capacity(n * self.d());
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let j = sample_categorical(rng, &self.weights)?;
            rows.extend(sample_mvn(rng, self.components[j].mean(), self.components[j].cov())?);
            labels.push(j);
        }
        Ok((Dataset::new(self.d(), rows)?, labels))
    }
}

/// `n` i.i.d. draws: a component label, then a normal draw from it.
pub fn generate_data<R: Rng + ?Sized>(spec: &MixtureSpec, n: usize, rng: &mut R) -> Result<Dataset> {
    spec.sample_labeled(n, rng).map(|(d, _)| d)
}

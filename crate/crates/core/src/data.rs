//! Observations and their standardization record.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-coordinate centering and scaling applied before fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardization {
    /// Maps a point on the standardized scale back to the original scale.
    pub fn to_original(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(z, (m, s))| m + s * z)
            .collect()
    }

    pub fn to_standardized(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    /// Density Jacobian `1 / prod(sd)` from standardized to original scale.
    pub fn density_jacobian(&self) -> f64 {
        1.0 / self.sd.iter().product::<f64>()
    }
}

/// `n` observations in `R^d`, row-major. An empty dataset (n = 0) is allowed
/// and makes the sampler target the prior.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    rows: Vec<f64>,
    standardization: Option<Standardization>,
}

impl Dataset {
    pub fn new(d: usize, rows: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::shape("dataset dimension must be at least 1"));
        }
        if rows.len() % d != 0 {
            return Err(Error::shape(format!(
                "{} values do not form rows of length {d}",
                rows.len()
            )));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("dataset entries must be finite"));
        }
        Ok(Self {
            n: rows.len() / d,
            d,
            rows,
            standardization: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).ok_or_else(|| Error::shape("no rows"))?;
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::shape("rows have unequal lengths"));
        }
        Self::new(d, rows.concat())
    }

    pub fn empty(d: usize) -> Self {
        assert!(d > 0);
        Self {
            n: 0,
            d,
            rows: Vec::new(),
            standardization: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.rows.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rows
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for row in self.rows() {
            for (acc, v) in m.iter_mut().zip(row) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }

    /// Sample standard deviations with the `n - 1` denominator.
    pub fn column_sds(&self) -> Vec<f64> {
        let m = self.column_means();
        let mut ss = vec![0.0; self.d];
        for row in self.rows() {
            for ((acc, v), mu) in ss.iter_mut().zip(row).zip(&m) {
                *acc += (v - mu) * (v - mu);
            }
        }
        ss.iter().map(|s| (s / (self.n as f64 - 1.0)).sqrt()).collect()
    }

    /// Centers each coordinate by its sample mean and scales it by its sample
    /// standard deviation, recording both.
    pub fn standardize(&self) -> Result<Dataset> {
        if self.n < 2 {
            return Err(Error::domain(format!(
                "standardization needs at least 2 observations, got {}",
                self.n
            )));
        }
        let mean = self.column_means();
        let sd = self.column_sds();
        if let Some(j) = sd.iter().position(|s| !(*s > 0.0)) {
            return Err(Error::domain(format!("coordinate {j} has zero variance")));
        }
        self.standardize_with(Standardization { mean, sd })
    }

    /// Applies a stored standardization record (e.g. one read from a draws file).
    pub fn standardize_with(&self, record: Standardization) -> Result<Dataset> {
        if record.mean.len() != self.d || record.sd.len() != self.d {
            return Err(Error::shape("standardization record has the wrong dimension"));
        }
        if record.sd.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::domain("standardization sds must be positive"));
        }
        let rows = self.rows().flat_map(|r| record.to_standardized(r)).collect();
        Ok(Dataset {
            n: self.n,
            d: self.d,
            rows,
            standardization: Some(record),
        })
    }
}

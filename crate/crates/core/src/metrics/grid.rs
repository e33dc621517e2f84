use serde::{Deserialize, Serialize};

use crate::data::Standardization;
use crate::error::{Error, Result};

/// Rectangular lattice: the Cartesian product of strictly increasing,
/// evenly spaced axes. Points are ordered with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    axes: Vec<Vec<f64>>,
}

impl Lattice {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::shape("lattice needs at least one axis"));
        }
        for (a, axis) in axes.iter().enumerate() {
            if axis.len() < 2 {
                return Err(Error::shape(format!("axis {a} needs at least 2 points")));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::domain(format!("axis {a} is not strictly increasing")));
            }
        }
        Ok(Self { axes })
    }

    /// `points` evenly spaced values on `[lo, hi]` per axis.
    pub fn uniform(bounds: &[(f64, f64)], points: &[usize]) -> Result<Self> {
        if bounds.len() != points.len() {
            return Err(Error::shape("bounds and point counts differ in length"));
        }
        let axes = bounds
            .iter()
            .zip(points)
            .map(|(&(lo, hi), &m)| {
                let step = (hi - lo) / (m.max(2) - 1) as f64;
                (0..m).map(|i| lo + step * i as f64).collect()
            })
            .collect();
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean step along each axis.
    pub fn spacing(&self) -> Vec<f64> {
        self.axes
            .iter()
            .map(|a| (a[a.len() - 1] - a[0]) / (a.len() - 1) as f64)
            .collect()
    }

    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (a, axis) in self.axes.iter().enumerate().rev() {
            out[a] = axis[index % axis.len()];
            index /= axis.len();
        }
        out
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Product trapezoid weights, one per point.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|a| {
                let m = a.len();
                (0..m)
                    .map(|i| {
                        let left = if i > 0 { a[i] - a[i - 1] } else { 0.0 };
                        let right = if i + 1 < m { a[i + 1] - a[i] } else { 0.0 };
                        0.5 * (left + right)
                    })
                    .collect()
            })
            .collect();
        (0..self.len())
            .map(|mut idx| {
                let mut w = 1.0;
                for axis in per_axis.iter().rev() {
                    w *= axis[idx % axis.len()];
                    idx /= axis.len();
                }
                w
            })
            .collect()
    }

    pub fn same_as(&self, other: &Lattice) -> bool {
        self.axes.len() == other.axes.len()
            && self.axes.iter().zip(&other.axes).all(|(a, b)| {
                a.len() == b.len()
                    && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0))
            })
    }
}

/// Density values on a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    lattice: Lattice,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::shape(format!(
                "{} values for a lattice of {} points",
                values.len(),
                lattice.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!("density value {v} is not a finite nonnegative number")));
        }
        Ok(Self { lattice, values })
    }

    /// Evaluates `f` at every lattice point.
    pub fn from_fn(lattice: Lattice, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..lattice.len()).map(|i| f(&lattice.point(i))).collect();
        Self::new(lattice, values)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.lattice.spacing()
    }

    /// Trapezoidal integral over the lattice.
    pub fn integral(&self) -> f64 {
        self.lattice
            .trapezoid_weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Re-expresses a density fitted on standardized data on the original
    /// scale: axes are mapped back and values carry the Jacobian `1/prod(sd)`.
    pub fn to_original_scale(&self, record: &Standardization) -> Result<DensityGrid> {
        if record.mean.len() != self.lattice.dim() {
            return Err(Error::shape("standardization record has the wrong dimension"));
        }
        let axes = self
            .lattice
            .axes
            .iter()
            .enumerate()
            .map(|(a, axis)| axis.iter().map(|z| record.mean[a] + record.sd[a] * z).collect())
            .collect();
        let jac = record.density_jacobian();
        DensityGrid::new(Lattice::new(axes)?, self.values.iter().map(|v| v * jac).collect())
    }
}

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const SYMMETRY_RTOL: f64 = 1e-12;

/// Symmetric positive-definite matrix with its lower Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl SpdMatrix {
    /// Validates symmetry (relative to the largest entry) and positive
    /// definiteness. `name` is used in the error when validation fails.
    pub fn new(matrix: DMatrix<f64>, name: &str) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::shape(format!(
                "matrix `{name}` must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotSpd { name: name.into() });
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        let d = matrix.nrows();
        for i in 0..d {
            for j in (i + 1)..d {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_RTOL * scale {
                    return Err(Error::NotSpd { name: name.into() });
                }
            }
        }
        Self::from_symmetric(symmetrize(matrix), name)
    }

    fn from_symmetric(matrix: DMatrix<f64>, name: &str) -> Result<Self> {
        let chol = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotSpd { name: name.into() })?
            .unpack();
        if chol.diagonal().iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::NotSpd { name: name.into() });
        }
        Ok(Self { matrix, chol })
    }

    /// Like [`SpdMatrix::new`] but first averages the matrix with its
    /// transpose. For results of arithmetic that is symmetric in exact math.
    pub fn symmetrized(matrix: DMatrix<f64>, name: &str) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::shape(format!("matrix `{name}` must be square")));
        }
        Self::from_symmetric(symmetrize(matrix), name)
    }

    pub fn identity(d: usize) -> Self {
        Self::scaled_identity(d, 1.0)
    }

    /// `scale * I_d`; panics if `scale <= 0`.
    pub fn scaled_identity(d: usize, scale: f64) -> Self {
        assert!(scale > 0.0 && d > 0);
        let matrix = DMatrix::from_diagonal_element(d, d, scale);
        let chol = DMatrix::from_diagonal_element(d, d, scale.sqrt());
        Self { matrix, chol }
    }

    pub fn from_row_slice(d: usize, entries: &[f64], name: &str) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::shape(format!(
                "matrix `{name}` needs {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(d, d, entries), name)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular `L` with `L L^T = self`.
    pub fn cholesky_lower(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.chol.diagonal().iter().map(|v| v.ln()).sum::<f64>()
    }

    pub fn inverse(&self) -> SpdMatrix {
        let d = self.dim();
        let linv = self
            .chol
            .solve_lower_triangular(&DMatrix::identity(d, d))
            .expect("cholesky factor has a positive diagonal");
        let inv = symmetrize(linv.transpose() * &linv);
        Self::from_symmetric(inv, "inverse").expect("inverse of an SPD matrix is SPD")
    }

    /// `x^T self^{-1} x`, by forward substitution against the Cholesky factor.
    pub fn inv_quad_form(&self, x: &[f64]) -> f64 {
        forward_sq_norm(&self.chol, x)
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.matrix[(i, j)]);
            }
        }
        out
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Squared norm of `L^{-1} x` for lower-triangular `L`.
pub(crate) fn forward_sq_norm(chol: &DMatrix<f64>, x: &[f64]) -> f64 {
    let d = x.len();
    if d == 1 {
        let w = x[0] / chol[(0, 0)];
        return w * w;
    }
    let mut buf = [0.0f64; 8];
    let mut heap;
    let w: &mut [f64] = if d <= buf.len() {
        &mut buf[..d]
    } else {
        heap = vec![0.0; d];
        &mut heap
    };
    let mut acc = 0.0;
    for i in 0..d {
        let mut v = x[i];
        for j in 0..i {
            v -= chol[(i, j)] * w[j];
        }
        v /= chol[(i, i)];
        w[i] = v;
        acc += v * v;
    }
    acc
}

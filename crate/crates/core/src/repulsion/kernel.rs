use crate::error::{Error, Result};
use crate::stats::{Gaussian, SpdMatrix};

/// Pairs closer than this (in the Σ-metric) are treated as coincident.
pub const COINCIDENT_DISTANCE: f64 = 1e-14;

/// Largest double strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// `k` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateBundle {
    k: usize,
    d: usize,
    points: Vec<f64>,
}

impl CoordinateBundle {
    pub fn new(k: usize, d: usize, points: Vec<f64>) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(Error::shape("coordinate bundle needs k, d >= 1"));
        }
        if points.len() != k * d {
            return Err(Error::shape(format!(
                "coordinate bundle {k}x{d} needs {} values, got {}",
                k * d,
                points.len()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("coordinate bundle entries must be finite"));
        }
        Ok(Self { k, d, points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::shape("rows have unequal lengths"));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    /// Row `i` of the result is row `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.k);
        let mut points = Vec::with_capacity(self.points.len());
        for &p in perm {
            points.extend_from_slice(self.row(p));
        }
        Self {
            k: self.k,
            d: self.d,
            points,
        }
    }
}

/// The NRep prior: Gaussian baseline `N_d(mu, sigma)`, Gaussian decay
/// `C0(r) = exp(-r^2 / (2 tau))` and the sigma-Mahalanobis metric.
#[derive(Debug, Clone)]
pub struct NRepParams {
    k: usize,
    mu: Vec<f64>,
    sigma: SpdMatrix,
    tau: f64,
}

impl NRepParams {
    pub fn new(k: usize, mu: Vec<f64>, sigma: SpdMatrix, tau: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain(format!("NRep needs k >= 2, got {k}")));
        }
        if mu.len() != sigma.dim() {
            return Err(Error::shape(format!(
                "mu has length {}, sigma is {}x{}",
                mu.len(),
                sigma.dim(),
                sigma.dim()
            )));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!("tau must be positive, got {tau}")));
        }
        Ok(Self { k, mu, sigma, tau })
    }

    /// `NRep_{k,d}(0, I_d, tau)`.
    pub fn standard(k: usize, d: usize, tau: f64) -> Result<Self> {
        Self::new(k, vec![0.0; d], SpdMatrix::identity(d), tau)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// `C0(r) = exp(-r^2 / (2 tau))`.
pub fn c0_gaussian(r: f64, tau: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("distance must be nonnegative, got {r}")));
    }
    if !(tau > 0.0) {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    Ok((-0.5 * r * r / tau).exp())
}

/// `{(x - y)^T sigma^{-1} (x - y)}^{1/2}` via the Cholesky factor of sigma.
pub fn mahalanobis(x: &[f64], y: &[f64], sigma: &SpdMatrix) -> Result<f64> {
    if x.len() != sigma.dim() || y.len() != sigma.dim() {
        return Err(Error::shape(format!(
            "points of length {} and {} against a {}-dimensional metric",
            x.len(),
            y.len(),
            sigma.dim()
        )));
    }
    Ok(mahalanobis_sq(x, y, sigma).sqrt())
}

pub(crate) fn mahalanobis_sq(x: &[f64], y: &[f64], sigma: &SpdMatrix) -> f64 {
    let d = x.len();
    if d == 1 {
        let w = (x[0] - y[0]) / sigma.cholesky_lower()[(0, 0)];
        return w * w;
    }
    let mut buf = [0.0f64; 8];
    if d <= buf.len() {
        for i in 0..d {
            buf[i] = x[i] - y[i];
        }
        sigma.inv_quad_form(&buf[..d])
    } else {
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        sigma.inv_quad_form(&diff)
    }
}

/// `log(1 - C0(rho))` from the squared distance; `-inf` on coincidence.
#[inline]
pub(crate) fn log_pair_factor(dist_sq: f64, tau: f64) -> f64 {
    if dist_sq < COINCIDENT_DISTANCE * COINCIDENT_DISTANCE {
        return f64::NEG_INFINITY;
    }
    (-(-0.5 * dist_sq / tau).exp_m1()).ln()
}

#[inline]
fn pair_factor(dist_sq: f64, tau: f64) -> f64 {
    if dist_sq < COINCIDENT_DISTANCE * COINCIDENT_DISTANCE {
        return 0.0;
    }
    (-(-0.5 * dist_sq / tau).exp_m1()).min(BELOW_ONE)
}

fn pair_terms(points: &CoordinateBundle, sigma: &SpdMatrix, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let k = points.k();
    let mut terms = Vec::with_capacity(k * (k - 1) / 2);
    for r in 0..k {
        for s in (r + 1)..k {
            terms.push(f(mahalanobis_sq(points.row(r), points.row(s), sigma)));
        }
    }
    // Reducing in sorted order makes the result independent of row labels.
    terms.sort_by(f64::total_cmp);
    terms
}

/// `prod_{r<s} [1 - C0(rho(x_r, x_s))]`, in `[0, 1)`.
pub fn repulsive_component(points: &CoordinateBundle, sigma: &SpdMatrix, tau: f64) -> Result<f64> {
    check_metric(points, sigma, tau)?;
    Ok(pair_terms(points, sigma, |q| pair_factor(q, tau)).iter().product())
}

/// `sum_{r<s} log[1 - C0(rho(x_r, x_s))]`.
pub fn log_repulsive_component(points: &CoordinateBundle, sigma: &SpdMatrix, tau: f64) -> Result<f64> {
    check_metric(points, sigma, tau)?;
    Ok(pair_terms(points, sigma, |q| log_pair_factor(q, tau)).iter().sum())
}

fn check_metric(points: &CoordinateBundle, sigma: &SpdMatrix, tau: f64) -> Result<()> {
    if points.k() < 2 {
        return Err(Error::domain("repulsion needs at least two points"));
    }
    if points.d() != sigma.dim() {
        return Err(Error::shape(format!(
            "points are {}-dimensional, sigma is {}x{}",
            points.d(),
            sigma.dim(),
            sigma.dim()
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// Unnormalized NRep log-density: Gaussian baseline terms plus the log
/// repulsive component. `-inf` when two rows coincide.
pub fn nrep_log_density_unnormalized(theta: &CoordinateBundle, params: &NRepParams) -> Result<f64> {
    if theta.k() != params.k() || theta.d() != params.d() {
        return Err(Error::shape(format!(
            "theta is {}x{}, params expect {}x{}",
            theta.k(),
            theta.d(),
            params.k(),
            params.d()
        )));
    }
    let log_rep = log_repulsive_component(theta, params.sigma(), params.tau())?;
    if log_rep == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let base = Gaussian::new(params.mu().to_vec(), params.sigma().clone());
    let mut terms: Vec<f64> = theta.rows().map(|row| base.log_pdf(row)).collect();
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum::<f64>() + log_rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn c0_values() {
        assert_eq!(c0_gaussian(0.0, 3.0).unwrap(), 1.0);
        assert!((c0_gaussian(SQRT2, 1.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 1..100 {
            let v = c0_gaussian(i as f64 * 0.2, 1.5).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-50);
        assert!(c0_gaussian(-1.0, 1.0).is_err());
    }

    #[test]
    fn mahalanobis_cases() {
        let i2 = SpdMatrix::identity(2);
        assert_eq!(mahalanobis(&[1.0, 2.0], &[1.0, 2.0], &i2).unwrap(), 0.0);
        assert!((mahalanobis(&[3.0, 4.0], &[0.0, 0.0], &i2).unwrap() - 5.0).abs() < 1e-15);
        let s = SpdMatrix::scaled_identity(1, 4.0);
        assert!((mahalanobis(&[2.0], &[0.0], &s).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(mahalanobis(&[1.0], &[0.0], &i2), Err(Error::Shape(_))));
    }

    #[test]
    fn repulsive_component_examples() {
        let s = SpdMatrix::identity(1);
        let same = CoordinateBundle::new(3, 1, vec![0.3, 1.0, 0.3]).unwrap();
        assert_eq!(repulsive_component(&same, &s, 1.0).unwrap(), 0.0);

        let pts = CoordinateBundle::new(2, 1, vec![0.0, SQRT2]).unwrap();
        let v = repulsive_component(&pts, &s, 1.0).unwrap();
        assert!((v - 0.632_120_558_828_557_7).abs() < 1e-15);

        let near_zero_tau = repulsive_component(&pts, &s, 1e-6).unwrap();
        assert!(near_zero_tau > 1.0 - 1e-12 && near_zero_tau < 1.0);
    }

    #[test]
    fn far_points_stay_below_one() {
        let s = SpdMatrix::identity(1);
        let pts = CoordinateBundle::new(3, 1, vec![0.0, 1e3, -1e3]).unwrap();
        assert!(repulsive_component(&pts, &s, 1.0).unwrap() < 1.0);
    }

    #[test]
    fn log_density_example() {
        let params = NRepParams::standard(2, 1, 1.0).unwrap();
        let theta = CoordinateBundle::new(2, 1, vec![0.0, SQRT2]).unwrap();
        let v = nrep_log_density_unnormalized(&theta, &params).unwrap();
        let ln_phi0 = -0.5 * (2.0 * std::f64::consts::PI).ln();
        let expect = ln_phi0 + (ln_phi0 - 1.0) + (1.0 - (-1.0f64).exp()).ln();
        assert!((v - expect).abs() < 1e-14);
        assert!((v - (-3.296_552_1)).abs() < 5e-7);

        let swapped = CoordinateBundle::new(2, 1, vec![SQRT2, 0.0]).unwrap();
        assert_eq!(
            nrep_log_density_unnormalized(&swapped, &params).unwrap().to_bits(),
            v.to_bits()
        );

        let coincident = CoordinateBundle::new(2, 1, vec![0.5, 0.5]).unwrap();
        assert_eq!(
            nrep_log_density_unnormalized(&coincident, &params).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn log_density_shape_error() {
        let params = NRepParams::standard(3, 1, 1.0).unwrap();
        let theta = CoordinateBundle::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            nrep_log_density_unnormalized(&theta, &params),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn params_validation() {
        assert!(NRepParams::standard(1, 1, 1.0).is_err());
        assert!(NRepParams::standard(2, 1, 0.0).is_err());
        assert!(NRepParams::new(2, vec![0.0; 2], SpdMatrix::identity(1), 1.0).is_err());
    }
}

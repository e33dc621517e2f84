use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

/// CDF of `Gamma(shape, rate)` via the regularized lower incomplete gamma.
pub fn gamma_cdf(shape: f64, rate: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(shape, rate * x)
    }
}

fn gamma_log_pdf(shape: f64, rate: f64, x: f64) -> f64 {
    shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)
}

/// Quantile of `Gamma(shape, rate)`.
///
/// Brackets the root by doubling, then runs Newton steps that are rejected
/// whenever they leave the current bracket (falling back to bisection).
pub fn gamma_quantile(shape: f64, rate: f64, p: f64) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) || !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!(
            "gamma_quantile needs shape, rate > 0 (got {shape}, {rate})"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("gamma_quantile needs p in (0,1), got {p}")));
    }

    let mut lo = 0.0;
    let mut hi = (shape / rate).max(1.0 / rate);
    while gamma_cdf(shape, rate, hi) < p {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical("gamma_quantile bracket diverged".into()));
        }
    }

    // Relative stopping rule: small-shape quantiles can sit far below 1e-10.
    let stop = |x: f64| (8.0 * f64::EPSILON * x).max(f64::MIN_POSITIVE);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2000 {
        let f = gamma_cdf(shape, rate, x) - p;
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = gamma_log_pdf(shape, rate, x).exp();
        let newton = x - f / dens;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= stop(x) || hi - lo <= stop(x) {
            break;
        }
    }
    Ok(x)
}

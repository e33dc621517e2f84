//! Reference computations written independently of the library.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Regularized lower incomplete gamma P(a, x): power series below `a + 1`,
/// Lentz continued fraction above.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        sum * ln_prefix.exp()
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-17 {
                break;
            }
        }
        1.0 - ln_prefix.exp() * h
    }
}

/// Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Gamma(shape, rate) quantile by plain bisection on the oracle CDF.
pub fn gamma_quantile_bisect(shape: f64, rate: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while reg_lower_gamma(shape, hi * rate) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if reg_lower_gamma(shape, mid * rate) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Standard normal CDF by quadrature of the density.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 + simpson(|s| normal_pdf(s, 0.0, 1.0), 0.0, x, 20_000)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the mean of i.i.d. values.
pub fn iid_se(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Batch-means standard error for autocorrelated chain output.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(size).take(batches).map(mean).collect();
    (variance(&means) / batches as f64).sqrt()
}

/// Product over pairs of `1 - exp(-|x_r - x_s|^2 / (2 tau))`, identity metric.
pub fn repulsion_oracle(rows: &[Vec<f64>], tau: f64) -> f64 {
    let mut r = 1.0;
    for a in 0..rows.len() {
        for b in (a + 1)..rows.len() {
            let sq: f64 = rows[a].iter().zip(&rows[b]).map(|(x, y)| (x - y).powi(2)).sum();
            r *= 1.0 - (-sq / (2.0 * tau)).exp();
        }
    }
    r
}

fn nrep_log_target(rows: &[Vec<f64>], tau: f64) -> f64 {
    let base: f64 = rows.iter().flatten().map(|x| -0.5 * x * x).sum();
    base + repulsion_oracle(rows, tau).ln()
}

/// Reference draws from `NRep_{k,d}(0, I, tau)`: single-site random-walk
/// Metropolis on the prior alone, keeping every `thin`-th sweep after
/// `burn_in` sweeps. Successive draws are correlated; use batch means.
pub fn nrep_mh_reference<R: Rng>(
    k: usize,
    d: usize,
    tau: f64,
    n: usize,
    burn_in: usize,
    thin: usize,
    rng: &mut R,
) -> Vec<Vec<Vec<f64>>> {
    let step = 1.5;
    let mut rows: Vec<Vec<f64>> = (0..k).map(|r| vec![r as f64 - (k as f64 - 1.0) / 2.0; d]).collect();
    let mut current = nrep_log_target(&rows, tau);
    let mut out = Vec::with_capacity(n);
    let mut sweep = 0;
    while out.len() < n {
        for r in 0..k {
            let old = rows[r].clone();
            for x in rows[r].iter_mut() {
                let z: f64 = StandardNormal.sample(rng);
                *x += step * z;
            }
            let proposed = nrep_log_target(&rows, tau);
            if rng.random::<f64>().ln() < proposed - current {
                current = proposed;
            } else {
                rows[r] = old;
            }
        }
        sweep += 1;
        if sweep > burn_in && (sweep - burn_in) % thin == 0 {
            out.push(rows.clone());
        }
    }
    out
}

/// Mean Euclidean distance over all pairs of rows.
pub fn mean_pairwise_distance(rows: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    let mut count = 0;
    for a in 0..rows.len() {
        for b in (a + 1)..rows.len() {
            total += rows[a].iter().zip(&rows[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            count += 1;
        }
    }
    total / count as f64
}

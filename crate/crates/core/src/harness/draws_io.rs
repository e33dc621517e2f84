//! Versioned plain-text format for saved posterior draws.
//!
//! ```text
//! rgmm-draws v1
//! mode repulsive
//! k 2
//! ...header lines...
//! draws 1
//! pi 5e-1 5e-1
//! theta -1e0 1e0
//! lambda 1e0 1e0
//! z 0 1 1
//! ```
//! Floats use the shortest round-trip form, so a written file reads back to
//! bit-identical draws.

use std::fmt::Write as _;
use std::path::Path;

use crate::calibration::PriorSpec;
use crate::data::Standardization;
use crate::error::{Error, Result};
use crate::repulsion::CoordinateBundle;
use crate::sampler::{ChainConfig, Draw, MixtureParams, PosteriorDraws};
use crate::stats::SpdMatrix;

pub const DRAWS_MAGIC: &str = "rgmm-draws v1";

fn floats(xs: impl IntoIterator<Item = f64>) -> String {
    xs.into_iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ")
}

fn line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(out, "{key} {value}").expect("writing to a String");
}

pub fn draws_to_string(draws: &PosteriorDraws, standardization: Option<&Standardization>) -> String {
    let c = &draws.config;
    let p = &c.prior;
    let mut out = String::new();
    out.push_str(DRAWS_MAGIC);
    out.push('\n');
    line(&mut out, "mode", c.mode);
    line(&mut out, "k", p.k);
    line(&mut out, "d", p.d);
    line(&mut out, "n", draws.n());
    line(&mut out, "burn_in", c.burn_in);
    line(&mut out, "n_saved", c.n_saved);
    line(&mut out, "thin", c.thin);
    line(&mut out, "seed", c.seed);
    line(&mut out, "stream_id", c.stream_id);
    line(&mut out, "alpha", floats(p.alpha.iter().copied()));
    line(&mut out, "mu", floats(p.mu.iter().copied()));
    line(&mut out, "sigma", floats(p.sigma.to_row_major()));
    line(&mut out, "tau", p.tau.map_or("none".to_string(), |t| format!("{t:e}")));
    line(&mut out, "psi_scale", floats(p.psi_scale.to_row_major()));
    line(&mut out, "nu", format!("{:e}", p.nu));
    if let Some(s) = standardization {
        line(&mut out, "std_mean", floats(s.mean.iter().copied()));
        line(&mut out, "std_sd", floats(s.sd.iter().copied()));
    }
    line(&mut out, "acceptance", floats(draws.acceptance_rates.iter().copied()));
    line(&mut out, "draws", draws.len());
    for d in &draws.draws {
        line(&mut out, "pi", floats(d.params.pi.iter().copied()));
        line(&mut out, "theta", floats(d.params.theta.as_slice().iter().copied()));
        line(
            &mut out,
            "lambda",
            floats(d.params.lambda.iter().flat_map(|l| l.to_row_major())),
        );
        line(
            &mut out,
            "z",
            d.z.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "),
        );
    }
    out
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    context: &'a str,
}

impl<'a> Reader<'a> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            context: self.context.to_string(),
            message: format!("line {}: {}", line + 1, message.into()),
        }
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (i, l) = self.lines.next().ok_or_else(|| Error::Parse {
            context: self.context.to_string(),
            message: format!("unexpected end of file, expected `{key}`"),
        })?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok((i, v)),
            None if l == key => Ok((i, "")),
            _ => Err(self.err(i, format!("expected `{key}`, found `{l}`"))),
        }
    }

    fn peek_key(&self) -> Option<&'a str> {
        self.lines.clone().next().map(|(_, l)| l.split(' ').next().unwrap_or(""))
    }

    fn scalar<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (i, v) = self.field(key)?;
        v.parse().map_err(|_| self.err(i, format!("bad value for `{key}`: `{v}`")))
    }

    fn vector<T: std::str::FromStr>(&mut self, key: &str, len: usize) -> Result<Vec<T>> {
        let (i, v) = self.field(key)?;
        let out: Vec<T> = v
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| self.err(i, format!("bad entry `{t}` in `{key}`"))))
            .collect::<Result<_>>()?;
        if out.len() != len {
            return Err(self.err(i, format!("`{key}` has {} entries, expected {len}", out.len())));
        }
        Ok(out)
    }
}

pub fn parse_draws(text: &str, context: &str) -> Result<(PosteriorDraws, Option<Standardization>)> {
    let mut r = Reader {
        lines: text.lines().enumerate(),
        context,
    };
    match r.lines.next() {
        Some((_, l)) if l == DRAWS_MAGIC => {}
        Some((i, l)) => return Err(r.err(i, format!("expected `{DRAWS_MAGIC}`, found `{l}`"))),
        None => return Err(r.err(0, "empty file")),
    }
    let mode = r.scalar("mode")?;
    let k: usize = r.scalar("k")?;
    let d: usize = r.scalar("d")?;
    let n: usize = r.scalar("n")?;
    let burn_in = r.scalar("burn_in")?;
    let n_saved = r.scalar("n_saved")?;
    let thin = r.scalar("thin")?;
    let seed = r.scalar("seed")?;
    let stream_id = r.scalar("stream_id")?;
    let alpha = r.vector("alpha", k)?;
    let mu = r.vector("mu", d)?;
    let sigma = SpdMatrix::from_row_slice(d, &r.vector::<f64>("sigma", d * d)?, "sigma")?;
    let (ti, tv) = r.field("tau")?;
    let tau = match tv {
        "none" => None,
        v => Some(v.parse().map_err(|_| r.err(ti, format!("bad tau `{v}`")))?),
    };
    let psi_scale = SpdMatrix::from_row_slice(d, &r.vector::<f64>("psi_scale", d * d)?, "psi_scale")?;
    let nu = r.scalar("nu")?;
    let standardization = if r.peek_key() == Some("std_mean") {
        Some(Standardization {
            mean: r.vector("std_mean", d)?,
            sd: r.vector("std_sd", d)?,
        })
    } else {
        None
    };
    let acceptance_rates = r.vector("acceptance", k)?;
    let count: usize = r.scalar("draws")?;

    let mut draws = Vec::with_capacity(count);
    for _ in 0..count {
        let pi = r.vector("pi", k)?;
        let theta = CoordinateBundle::new(k, d, r.vector("theta", k * d)?)?;
        let lambda_flat: Vec<f64> = r.vector("lambda", k * d * d)?;
        let lambda = lambda_flat
            .chunks(d * d)
            .map(|c| SpdMatrix::from_row_slice(d, c, "lambda"))
            .collect::<Result<Vec<_>>>()?;
        let (zi, zv) = r.field("z")?;
        let z: Vec<usize> = if zv.is_empty() {
            Vec::new()
        } else {
            zv.split_whitespace()
                .map(|t| match t.parse::<usize>() {
                    Ok(l) if l < k => Ok(l),
                    _ => Err(r.err(zi, format!("bad label `{t}`"))),
                })
                .collect::<Result<_>>()?
        };
        if z.len() != n {
            return Err(r.err(zi, format!("{} labels, expected {n}", z.len())));
        }
        draws.push(Draw {
            params: MixtureParams::new(pi, theta, lambda)?,
            z,
        });
    }
    if let Some((i, l)) = r.lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(r.err(i, format!("trailing content `{l}`")));
    }

    let config = ChainConfig {
        burn_in,
        n_saved,
        thin,
        seed,
        stream_id,
        prior: PriorSpec {
            k,
            d,
            alpha,
            mu,
            sigma,
            tau,
            psi_scale,
            nu,
        },
        mode,
    };
    Ok((
        PosteriorDraws {
            draws,
            config,
            acceptance_rates,
        },
        standardization,
    ))
}

pub fn write_draws(path: &Path, draws: &PosteriorDraws, standardization: Option<&Standardization>) -> Result<()> {
    super::io::write_file(path, draws_to_string(draws, standardization).as_bytes())
}

pub fn read_draws(path: &Path) -> Result<(PosteriorDraws, Option<Standardization>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_draws(&text, &path.display().to_string())
}

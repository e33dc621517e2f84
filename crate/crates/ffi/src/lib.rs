//! C ABI over `rgmm`.
//!
//! Every function returns an [`RgmmStatus`]; on failure the message is
//! available from [`rgmm_last_error_message`] on the same thread. Fits are
//! opaque [`RgmmFit`] handles released with [`rgmm_fit_free`]. Panics never
//! cross the boundary; they are reported as `RGMM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rgmm::calibration::{calibrate_tau, CalibrationTarget, PriorSpec};
use rgmm::data::{Dataset, Standardization};
use rgmm::metrics::{cpo_lpml, occupied_components};
use rgmm::repulsion::{nrep_constant_exact, nrep_constant_mc, repulsive_component, CoordinateBundle, NRepParams};
use rgmm::sampler::{predictive_density_at, run_chain, ChainConfig, PosteriorDraws, SamplerMode};
use rgmm::stats::{RngStream, SpdMatrix};
use rgmm::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgmmStatus {
    Ok = 0,
    NullPointer = 1,
    /// Out-of-domain or inconsistent arguments.
    InvalidArgument = 2,
    NotSpd = 3,
    Capacity = 4,
    Numerical = 5,
    Initialization = 6,
    Io = 7,
    Parse = 8,
    Panic = 9,
}

impl From<&Error> for RgmmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) | Error::Shape(_) | Error::Config(_) => RgmmStatus::InvalidArgument,
            Error::NotSpd { .. } => RgmmStatus::NotSpd,
            Error::Capacity(_) => RgmmStatus::Capacity,
            Error::Numerical(_) => RgmmStatus::Numerical,
            Error::Initialization(_) => RgmmStatus::Initialization,
            Error::Chain { source, .. } => RgmmStatus::from(source.as_ref()),
            Error::Io { .. } => RgmmStatus::Io,
            Error::Parse { .. } | Error::Json(_) => RgmmStatus::Parse,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (RgmmStatus, String)>) -> RgmmStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RgmmStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RgmmStatus::Panic
        }
    }
}

fn lib<T>(r: rgmm::Result<T>) -> Result<T, (RgmmStatus, String)> {
    r.map_err(|e| (RgmmStatus::from(&e), e.to_string()))
}

fn null(name: &str) -> (RgmmStatus, String) {
    (RgmmStatus::NullPointer, format!("`{name}` is null"))
}

fn invalid(msg: impl Into<String>) -> (RgmmStatus, String) {
    (RgmmStatus::InvalidArgument, msg.into())
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a>(ptr: *const f64, len: usize, name: &str) -> Result<&'a [f64], (RgmmStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or valid for one write.
unsafe fn write<T>(ptr: *mut T, value: T, name: &str) -> Result<(), (RgmmStatus, String)> {
    if ptr.is_null() {
        return Err(null(name));
    }
    ptr.write(value);
    Ok(())
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call into this library on this thread.
#[no_mangle]
pub extern "C" fn rgmm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Calibrated repulsion strength for dimension `d` and target `(u, p)`.
///
/// # Safety
/// `out_tau` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rgmm_calibrate_tau(d: usize, u: f64, p: f64, out_tau: *mut f64) -> RgmmStatus {
    guard(|| {
        let tau = lib(CalibrationTarget::new(d, u, p).and_then(|t| calibrate_tau(&t)))?;
        write(out_tau, tau, "out_tau")
    })
}

/// Exact normalizing constant of `NRep_{k,d}(0, I, tau)` (k <= 7).
///
/// # Safety
/// `out_value` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rgmm_constant_exact(k: usize, d: usize, tau: f64, out_value: *mut f64) -> RgmmStatus {
    guard(|| {
        let c = lib(NRepParams::standard(k, d, tau).and_then(|p| nrep_constant_exact(&p)))?;
        write(out_value, c.value, "out_value")
    })
}

/// Monte Carlo normalizing constant and its standard error.
///
/// # Safety
/// `out_value` and `out_std_error` must be valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn rgmm_constant_mc(
    k: usize,
    d: usize,
    tau: f64,
    n_draws: usize,
    seed: u64,
    out_value: *mut f64,
    out_std_error: *mut f64,
) -> RgmmStatus {
    guard(|| {
        let params = lib(NRepParams::standard(k, d, tau))?;
        let c = lib(nrep_constant_mc(&params, &mut RngStream::new(seed, 0), n_draws))?;
        write(out_value, c.value, "out_value")?;
        write(out_std_error, c.mc_std_error, "out_std_error")
    })
}

/// Repulsive component of `k` points in `R^d` (row-major) under the
/// identity metric.
///
/// # Safety
/// `points` must be valid for `k * d` reads and `out_value` for one write.
#[no_mangle]
pub unsafe extern "C" fn rgmm_repulsive_component(
    points: *const f64,
    k: usize,
    d: usize,
    tau: f64,
    out_value: *mut f64,
) -> RgmmStatus {
    guard(|| {
        let len = k.checked_mul(d).ok_or_else(|| invalid("k * d overflows"))?;
        let pts = slice(points, len, "points")?;
        let bundle = lib(CoordinateBundle::new(k, d, pts.to_vec()))?;
        let r = lib(repulsive_component(&bundle, &SpdMatrix::identity(d.max(1)), tau))?;
        write(out_value, r, "out_value")
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgmmMode {
    Repulsive = 0,
    IidBaseline = 1,
}

/// Settings for [`rgmm_fit_new`]. Start from [`rgmm_fit_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RgmmFitOptions {
    /// An `RgmmMode` value.
    pub mode: u32,
    pub k: usize,
    pub burn_in: usize,
    pub n_saved: usize,
    pub thin: usize,
    pub seed: u64,
    pub stream_id: u64,
    /// Repulsion strength; ignored by the i.i.d. baseline.
    pub tau: f64,
    /// Diagonal of the inverse-Wishart scale.
    pub psi_scale: f64,
    /// Inverse-Wishart degrees of freedom; `<= 0` selects `d + 4`.
    pub nu: f64,
    /// Dirichlet concentration per component; `<= 0` selects `1/k`.
    pub alpha: f64,
    /// Standardize the data before fitting (1) or not (0).
    pub standardize: u8,
}

/// Repulsive, k = 10, tau = 5.45, Psi = 0.06, B = 5000, S = 10000, T = 20.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rgmm_fit_options_default(out: *mut RgmmFitOptions) -> RgmmStatus {
    guard(|| {
        write(
            out,
            RgmmFitOptions {
                mode: RgmmMode::Repulsive as u32,
                k: 10,
                burn_in: 5000,
                n_saved: 10000,
                thin: 20,
                seed: 1,
                stream_id: 1,
                tau: 5.45,
                psi_scale: 0.06,
                nu: 0.0,
                alpha: 0.0,
                standardize: 1,
            },
            "out",
        )
    })
}

/// Opaque fitted model.
pub struct RgmmFit {
    draws: PosteriorDraws,
    fitted: Dataset,
    standardization: Option<Standardization>,
}

fn build_fit(data: &[f64], n: usize, d: usize, o: &RgmmFitOptions) -> rgmm::Result<RgmmFit> {
    if n == 0 || d == 0 || data.len() != n * d {
        return Err(Error::Shape(format!("data of length {} for n = {n}, d = {d}", data.len())));
    }
    let raw = Dataset::new(d, data.to_vec())?;
    let fitted = if o.standardize != 0 { raw.standardize()? } else { raw };
    let mode = match o.mode {
        m if m == RgmmMode::Repulsive as u32 => SamplerMode::Repulsive,
        m if m == RgmmMode::IidBaseline as u32 => SamplerMode::IidBaseline,
        other => return Err(Error::Config(format!("unknown mode {other}"))),
    };
    let prior = PriorSpec {
        k: o.k,
        d,
        alpha: vec![if o.alpha > 0.0 { o.alpha } else { 1.0 / o.k.max(1) as f64 }; o.k],
        mu: vec![0.0; d],
        sigma: SpdMatrix::identity(d),
        tau: (mode == SamplerMode::Repulsive).then_some(o.tau),
        psi_scale: SpdMatrix::scaled_identity(d, o.psi_scale),
        nu: if o.nu > 0.0 { o.nu } else { d as f64 + 4.0 },
    };
    let config = ChainConfig {
        burn_in: o.burn_in,
        n_saved: o.n_saved,
        thin: o.thin,
        seed: o.seed,
        stream_id: o.stream_id,
        prior,
        mode,
    };
    let draws = run_chain(&fitted, &config)?;
    Ok(RgmmFit {
        draws,
        standardization: fitted.standardization().cloned(),
        fitted,
    })
}

/// Fits `n` observations in `R^d` (row-major). On success `*out_fit` owns a
/// handle to release with [`rgmm_fit_free`]; on failure it is set to null.
///
/// # Safety
/// `data` must be valid for `n * d` reads, `options` for one read and
/// `out_fit` for one write.
#[no_mangle]
pub unsafe extern "C" fn rgmm_fit_new(
    data: *const f64,
    n: usize,
    d: usize,
    options: *const RgmmFitOptions,
    out_fit: *mut *mut RgmmFit,
) -> RgmmStatus {
    guard(|| {
        if out_fit.is_null() {
            return Err(null("out_fit"));
        }
        out_fit.write(ptr::null_mut());
        if options.is_null() {
            return Err(null("options"));
        }
        let len = n.checked_mul(d).ok_or_else(|| invalid("n * d overflows"))?;
        let values = slice(data, len, "data")?;
        let fit = lib(build_fit(values, n, d, &*options))?;
        out_fit.write(Box::into_raw(Box::new(fit)));
        Ok(())
    })
}

/// # Safety
/// `fit` must be null or a handle from [`rgmm_fit_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rgmm_fit_free(fit: *mut RgmmFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

unsafe fn handle<'a>(fit: *const RgmmFit) -> Result<&'a RgmmFit, (RgmmStatus, String)> {
    fit.as_ref().ok_or_else(|| null("fit"))
}

/// # Safety
/// `fit` must be a live handle and `out_count` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rgmm_fit_num_draws(fit: *const RgmmFit, out_count: *mut usize) -> RgmmStatus {
    guard(|| write(out_count, handle(fit)?.draws.len(), "out_count"))
}

/// Mean and population sd of the occupied-component count over saved draws.
///
/// # Safety
/// `fit` must be a live handle; outputs valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn rgmm_fit_occupied(fit: *const RgmmFit, out_mean: *mut f64, out_sd: *mut f64) -> RgmmStatus {
    guard(|| {
        let o = occupied_components(&handle(fit)?.draws);
        write(out_mean, o.mean, "out_mean")?;
        write(out_sd, o.sd, "out_sd")
    })
}

/// LPML of the data as fitted (standardized scale when standardizing).
///
/// # Safety
/// `fit` must be a live handle and `out_lpml` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rgmm_fit_lpml(fit: *const RgmmFit, out_lpml: *mut f64) -> RgmmStatus {
    guard(|| {
        let f = handle(fit)?;
        let s = lib(cpo_lpml(&f.draws, &f.fitted))?;
        write(out_lpml, s.lpml, "out_lpml")
    })
}

/// Posterior predictive density at `m` points (row-major, original scale),
/// written to `out_density[0..m]`.
///
/// # Safety
/// `fit` must be a live handle, `points` valid for `m * d` reads and
/// `out_density` for `m` writes.
#[no_mangle]
pub unsafe extern "C" fn rgmm_fit_predictive(
    fit: *const RgmmFit,
    points: *const f64,
    m: usize,
    out_density: *mut f64,
) -> RgmmStatus {
    guard(|| {
        let f = handle(fit)?;
        let d = f.draws.d();
        let len = m.checked_mul(d).ok_or_else(|| invalid("m * d overflows"))?;
        let pts = slice(points, len, "points")?;
        if m > 0 && out_density.is_null() {
            return Err(null("out_density"));
        }
        let (rows, jac): (Vec<Vec<f64>>, f64) = match &f.standardization {
            Some(s) => (pts.chunks(d).map(|x| s.to_standardized(x)).collect(), s.density_jacobian()),
            None => (pts.chunks(d).map(<[f64]>::to_vec).collect(), 1.0),
        };
        let values = lib(predictive_density_at(&f.draws, &rows))?;
        let out = std::slice::from_raw_parts_mut(out_density, m);
        for (o, v) in out.iter_mut().zip(values) {
            *o = v * jac;
        }
        Ok(())
    })
}

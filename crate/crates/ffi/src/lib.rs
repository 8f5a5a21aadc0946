//! C ABI over `ruinlab`.
//!
//! Every entry point returns an [`RlStatus`] and writes results through out
//! pointers. Models are opaque heap handles released with [`rl_model_free`].
//! On failure, [`rl_last_error_message`] describes the most recent error on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use ruinlab::asymptotics::{self, ConstantMode, PsiUMode};
use ruinlab::simulate;
use ruinlab::{ClaimModel, MCEstimate, McConfig, RiskModel, RuinError};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NetProfit = 3,
    UnsupportedFamily = 4,
    Numeric = 5,
    StepCap = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlConstantMode {
    PaperVerbatim = 0,
    HalfCorrection = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlEstimator {
    Direct = 0,
    Ladder = 1,
    Workload = 2,
}

/// Opaque risk model: claim law plus Poisson rate, unit premium.
pub struct RlModel {
    inner: RiskModel,
}

/// Terms of the second-order expansion.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RlApprox {
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub total: f64,
    pub psi_u: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlMcConfig {
    pub n: u64,
    pub seed: u64,
    pub workers: u32,
}

/// Bernoulli Monte Carlo estimate. `has_wilson` is nonzero when the
/// estimate is below 1e-5 and `wilson_lo`/`wilson_hi` hold a 95% interval;
/// otherwise both are zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RlEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
    pub has_wilson: i32,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub residual_bound: f64,
}

impl From<&MCEstimate> for RlEstimate {
    fn from(e: &MCEstimate) -> Self {
        let (lo, hi) = e.wilson.unwrap_or((0.0, 0.0));
        Self {
            value: e.value,
            std_error: e.stderr,
            n: e.n,
            has_wilson: e.wilson.is_some() as i32,
            wilson_lo: lo,
            wilson_hi: hi,
            residual_bound: e.residual_bound,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &RuinError) -> RlStatus {
    match err {
        RuinError::Domain(_) | RuinError::InvalidParameter { .. } | RuinError::MissingPlugin => {
            RlStatus::InvalidArgument
        }
        RuinError::NetProfit { .. } => RlStatus::NetProfit,
        RuinError::UnsupportedFamily { .. } => RlStatus::UnsupportedFamily,
        RuinError::Numeric { .. } => RlStatus::Numeric,
        RuinError::StepCap { .. } => RlStatus::StepCap,
    }
}

enum Failure {
    Null(&'static str),
    Lib(RuinError),
}

impl From<RuinError> for Failure {
    fn from(e: RuinError) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F>(body: F) -> RlStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RlStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer passed for `{what}`"));
            RlStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            RlStatus::Panic
        }
    }
}

unsafe fn model_ref<'a>(m: *const RlModel) -> Result<&'a RiskModel, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or(Failure::Null("model"))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    out.write(v);
    Ok(())
}

fn mc_config(cfg: *const RlMcConfig) -> Result<McConfig, Failure> {
    let cfg = unsafe { cfg.as_ref() }.ok_or(Failure::Null("config"))?;
    Ok(McConfig::new(cfg.n, cfg.seed, cfg.workers as usize)?)
}

/// Message for the last failing call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn rl_status_string(status: RlStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        RlStatus::Ok => b"ok\0",
        RlStatus::NullPointer => b"null pointer\0",
        RlStatus::InvalidArgument => b"invalid argument\0",
        RlStatus::NetProfit => b"net profit condition violated\0",
        RlStatus::UnsupportedFamily => b"unsupported claim family\0",
        RlStatus::Numeric => b"numeric failure\0",
        RlStatus::StepCap => b"simulation step cap exceeded\0",
        RlStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

fn new_model(claims: Result<ClaimModel, RuinError>, lambda: f64, out: *mut *mut RlModel) -> RlStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let inner = RiskModel::new(claims?, lambda)?;
        unsafe { out.write(Box::into_raw(Box::new(RlModel { inner }))) };
        Ok(())
    })
}

/// Lomax(alpha, theta) claims with Poisson rate `lambda`. Requires
/// `alpha > 2` and `lambda * theta / (alpha - 1) < 1`.
#[no_mangle]
pub extern "C" fn rl_model_new_lomax(
    alpha: f64,
    theta: f64,
    lambda: f64,
    out: *mut *mut RlModel,
) -> RlStatus {
    new_model(ClaimModel::lomax(alpha, theta), lambda, out)
}

/// Exponential(rate) claims. Simulation only; the asymptotic functions
/// return `UnsupportedFamily`.
#[no_mangle]
pub extern "C" fn rl_model_new_exponential(rate: f64, lambda: f64, out: *mut *mut RlModel) -> RlStatus {
    new_model(ClaimModel::exponential(rate), lambda, out)
}

/// Releases a model. NULL is a no-op.
///
/// # Safety
/// `model` must come from an `rl_model_new_*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn rl_model_free(model: *mut RlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

fn scalar<F>(model: *const RlModel, out: *mut f64, f: F) -> RlStatus
where
    F: FnOnce(&RiskModel) -> Result<f64, RuinError>,
{
    guard(|| {
        let m = unsafe { model_ref(model)? };
        let v = f(m)?;
        unsafe { write(out, v) }
    })
}

/// `ρ = λμ`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_model_rho(model: *const RlModel, out: *mut f64) -> RlStatus {
    scalar(model, out, |m| Ok(m.rho()))
}

/// Claim survival function `F̄(x)`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_claim_tail(model: *const RlModel, x: f64, out: *mut f64) -> RlStatus {
    scalar(model, out, |m| m.claims().tail(x))
}

/// Integrated-tail survival function `F̄₀(x)`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_integrated_tail(model: *const RlModel, x: f64, out: *mut f64) -> RlStatus {
    scalar(model, out, |m| m.claims().integrated_tail(x))
}

/// Laplace exponent `κ(s) = s + λ(F̂(s) − 1)` for real `s >= 0`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_kappa(model: *const RlModel, s: f64, out: *mut f64) -> RlStatus {
    scalar(model, out, |m| m.kappa_real(s))
}

/// Inverse of `κ` on `[0, ∞)`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_kappa_inverse(model: *const RlModel, s: f64, out: *mut f64) -> RlStatus {
    scalar(model, out, |m| m.kappa_inverse(s))
}

/// First-order approximation of `ψ(u, xu)`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_first_order_psi(
    model: *const RlModel,
    u: f64,
    x: f64,
    out: *mut f64,
) -> RlStatus {
    scalar(model, out, |m| asymptotics::first_order_psi(m, u, x))
}

/// `ρF̄₀(u)/(1−ρ)`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_infinite_ruin_asymptotic(
    model: *const RlModel,
    u: f64,
    out: *mut f64,
) -> RlStatus {
    scalar(model, out, |m| asymptotics::infinite_ruin_asymptotic(m, u))
}

/// Busy-period Laplace transform at `s = re + i·im`, `re >= 0`.
///
/// # Safety
/// `model` must be a live handle; `out_re` and `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_busy_period_transform(
    model: *const RlModel,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RlStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out_re.is_null() || out_im.is_null() {
            return Err(Failure::Null("out"));
        }
        let g = m.busy_period_transform(Complex64::new(re, im))?;
        write(out_re, g.re)?;
        write(out_im, g.im)
    })
}

/// Second-order expansion terms. A finite `psi_u` is used as the `ψ(u)`
/// plug-in; NaN selects the asymptotic plug-in `ρF̄₀(u)/(1−ρ)`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_second_order_psi(
    model: *const RlModel,
    u: f64,
    x: f64,
    constant_mode: RlConstantMode,
    psi_u: f64,
    out: *mut RlApprox,
) -> RlStatus {
    guard(|| {
        let m = model_ref(model)?;
        let mode = match constant_mode {
            RlConstantMode::PaperVerbatim => ConstantMode::PaperVerbatim,
            RlConstantMode::HalfCorrection => ConstantMode::HalfCorrection,
        };
        let plugin = (!psi_u.is_nan()).then_some(MCEstimate {
            value: psi_u,
            stderr: 0.0,
            n: 0,
            seed: 0,
            workers: 1,
            wilson: None,
            residual_bound: 0.0,
        });
        let psi_mode = if plugin.is_some() {
            PsiUMode::McPlugin
        } else {
            PsiUMode::AsymptoticPlugin
        };
        let b = asymptotics::second_order_psi(m, u, x, psi_mode, mode, plugin.as_ref())?;
        write(
            out,
            RlApprox {
                term1: b.term1,
                term2: b.term2,
                term3: b.term3,
                total: b.total,
                psi_u: b.psi_u,
            },
        )
    })
}

/// Monte Carlo estimate of the finite-horizon ruin probability `ψ(u, t)`.
///
/// # Safety
/// `model` and `config` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_estimate_finite_ruin(
    model: *const RlModel,
    u: f64,
    t: f64,
    estimator: RlEstimator,
    config: *const RlMcConfig,
    out: *mut RlEstimate,
) -> RlStatus {
    guard(|| {
        let m = model_ref(model)?;
        let cfg = mc_config(config)?;
        let est = match estimator {
            RlEstimator::Direct => simulate::estimate_finite_ruin_direct(m, u, t, &cfg)?,
            RlEstimator::Ladder => simulate::estimate_finite_ruin_ladder(m, u, t, &cfg)?,
            RlEstimator::Workload => simulate::estimate_workload_tail(m, u, t, &cfg)?,
        };
        write(out, RlEstimate::from(&est))
    })
}

/// Monte Carlo estimate of the infinite-horizon ruin probability `ψ(u)`.
///
/// # Safety
/// `model` and `config` must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_estimate_infinite_ruin(
    model: *const RlModel,
    u: f64,
    config: *const RlMcConfig,
    out: *mut RlEstimate,
) -> RlStatus {
    guard(|| {
        let m = model_ref(model)?;
        let cfg = mc_config(config)?;
        write(
            out,
            RlEstimate::from(&simulate::estimate_infinite_ruin(m, u, &cfg)?),
        )
    })
}

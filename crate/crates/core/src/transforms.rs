//! Transform toolkit for the compound Poisson risk process with unit premium
//! rate: the Laplace exponent `κ(s) = s + λ(F̂(s) − 1)`, its inverse, the
//! busy-period transform, the characteristic function of the centred
//! first-passage fluctuation, and Gil-Pelaez inversion.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dist::ClaimModel;
use crate::error::{ensure_nonneg, ensure_positive, Result, RuinError};

const KAPPA_INV_TOL: f64 = 1e-12;
const KAPPA_INV_MAX_ITER: usize = 200;
const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_MAX_ITER: usize = 10_000;

/// Claims arriving at Poisson rate λ against premium income at rate 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskModel {
    claims: ClaimModel,
    lambda: f64,
}

impl RiskModel {
    /// Rejects models violating the net profit condition `ρ = λμ < 1`.
    pub fn new(claims: ClaimModel, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(RuinError::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "arrival rate must be > 0",
            });
        }
        let rho = lambda * claims.mean();
        if rho >= 1.0 {
            return Err(RuinError::NetProfit { rho });
        }
        Ok(Self { claims, lambda })
    }

    pub fn claims(&self) -> &ClaimModel {
        &self.claims
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho(&self) -> f64 {
        self.lambda * self.claims.mean()
    }

    /// `E[E] = μ/(1−ρ)` for the busy period of the dual M/G/1 queue.
    pub fn busy_mean(&self) -> f64 {
        self.claims.mean() / (1.0 - self.rho())
    }

    /// `E[E²] = E[X²]/(1−ρ)³`.
    pub fn busy_second_moment(&self) -> f64 {
        self.claims.second_moment() / (1.0 - self.rho()).powi(3)
    }

    /// Asymptotic variance `λE[E²]` of the centred fluctuation `U(z)`.
    pub fn fluctuation_variance(&self) -> f64 {
        self.lambda * self.busy_second_moment()
    }

    pub fn kappa(&self, s: Complex64) -> Result<Complex64> {
        if !(s.re >= 0.0) {
            return Err(RuinError::Domain(format!("kappa needs Re(s) >= 0, got {s}")));
        }
        if s == Complex64::new(0.0, 0.0) {
            return Ok(s);
        }
        Ok(s + (self.claims.laplace(s)? - 1.0) * self.lambda)
    }

    pub fn kappa_real(&self, s: f64) -> Result<f64> {
        ensure_nonneg("s", s)?;
        Ok(self.kappa(Complex64::new(s, 0.0))?.re)
    }

    /// `κ'(s) = 1 + λF̂'(s)`, which is at least `1 − ρ`.
    pub fn kappa_derivative(&self, s: f64) -> Result<f64> {
        Ok(1.0 + self.lambda * self.claims.laplace_derivative(s)?)
    }

    /// The nonnegative root `r` of `κ(r) = s`.
    ///
    /// Safeguarded Newton on the bracket `[0, s + λ]`; a Newton step leaving
    /// the bracket is replaced by bisection.
    pub fn kappa_inverse(&self, s: f64) -> Result<f64> {
        ensure_nonneg("s", s)?;
        if s == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0, s + self.lambda);
        let mut r = s / (1.0 - self.rho()).max(1e-3);
        if r >= hi {
            r = 0.5 * hi;
        }
        let mut residual = f64::INFINITY;
        for _ in 0..KAPPA_INV_MAX_ITER {
            residual = self.kappa_real(r)? - s;
            if residual.abs() < KAPPA_INV_TOL {
                return Ok(r);
            }
            if residual > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let slope = self.kappa_derivative(r)?;
            let newton = r - residual / slope;
            r = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        if residual.abs() < KAPPA_INV_TOL {
            return Ok(r);
        }
        Err(RuinError::Numeric {
            what: "kappa_inverse",
            residual: residual.abs(),
        })
    }

    /// Busy-period transform `F̂_E(s) = E[e^{-sE}]`, the fixed point of
    /// `g = F̂(s − λ(g − 1))` started from `g = F̂(s)`.
    pub fn busy_period_transform(&self, s: Complex64) -> Result<Complex64> {
        if !(s.re >= 0.0) {
            return Err(RuinError::Domain(format!(
                "busy-period transform needs Re(s) >= 0, got {s}"
            )));
        }
        let mut g = self.claims.laplace(s)?;
        let mut step = f64::INFINITY;
        for _ in 0..FIXED_POINT_MAX_ITER {
            let arg = s - (g - 1.0) * self.lambda;
            // |g| <= 1 keeps Re(arg) >= 0; guard against rounding below zero
            let arg = Complex64::new(arg.re.max(0.0), arg.im);
            let next = self.claims.laplace(arg)?;
            step = (next - g).norm();
            g = next;
            if step < FIXED_POINT_TOL {
                return Ok(g);
            }
        }
        Err(RuinError::Numeric {
            what: "busy_period_transform",
            residual: step,
        })
    }

    /// `E[e^{itE}]`, the busy-period transform on the imaginary axis.
    pub fn busy_period_cf(&self, t: f64) -> Result<Complex64> {
        self.busy_period_transform(Complex64::new(0.0, -t))
    }

    /// Characteristic function of `U(z) = (w(z) − z/(1−ρ))/√z`:
    /// `exp(λz(χ_E(s/√z) − 1) − i√z λ E[E] s)`.
    pub fn centered_passage_cf(&self, z: f64, s: f64) -> Result<Complex64> {
        ensure_positive("z", z)?;
        if s == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let root = z.sqrt();
        let chi = self.busy_period_cf(s / root)?;
        let exponent =
            (chi - 1.0) * (self.lambda * z) - Complex64::new(0.0, root * self.lambda * self.busy_mean() * s);
        Ok(exponent.exp())
    }

    pub fn centered_passage(&self, z: f64) -> Result<CenteredPassageCf> {
        ensure_positive("z", z)?;
        Ok(CenteredPassageCf { model: *self, z })
    }
}

/// A characteristic function `s ↦ E[e^{isX}]` evaluated on `s >= 0`.
pub trait CharacteristicFunction {
    fn eval(&self, s: f64) -> Result<Complex64>;

    /// `E[X]` if known exactly; used for the `s → 0` limit of the
    /// Gil-Pelaez integrand.
    fn mean(&self) -> Option<f64> {
        None
    }
}

impl<F> CharacteristicFunction for F
where
    F: Fn(f64) -> Result<Complex64>,
{
    fn eval(&self, s: f64) -> Result<Complex64> {
        self(s)
    }
}

/// The characteristic function of `U(z)` as a callable object (mean zero).
#[derive(Debug, Clone, Copy)]
pub struct CenteredPassageCf {
    model: RiskModel,
    z: f64,
}

impl CharacteristicFunction for CenteredPassageCf {
    fn eval(&self, s: f64) -> Result<Complex64> {
        self.model.centered_passage_cf(self.z, s)
    }
    fn mean(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Frequency grid for the Gil-Pelaez integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    step: f64,
    s_max: f64,
}

impl InversionConfig {
    pub fn new(step: f64, s_max: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(RuinError::InvalidParameter {
                name: "step",
                value: step,
                reason: "grid spacing must be > 0",
            });
        }
        if !(s_max > step && s_max.is_finite()) {
            return Err(RuinError::InvalidParameter {
                name: "s_max",
                value: s_max,
                reason: "truncation frequency must exceed the grid spacing",
            });
        }
        Ok(Self { step, s_max })
    }

    /// Spacing `1e-3 · min(1, 1/|w|)` (resolves the `e^{-iws}` oscillation)
    /// with `s_max = 100`.
    pub fn default_for(w: f64) -> Self {
        let scale = if w.abs() > 1.0 { 1.0 / w.abs() } else { 1.0 };
        Self {
            step: 1e-3 * scale,
            s_max: 100.0,
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub probability: f64,
    /// The raw trapezoid value fell outside `[0, 1]` and was clamped.
    pub clamped: bool,
    pub raw: f64,
}

/// `P(X > w) = 1/2 + (1/π) ∫₀^∞ Im(e^{-iws} φ(s))/s ds`, trapezoidal rule on
/// `[0, s_max]`.
///
/// The integrand is even in `s`, so its value at 0 is the limit
/// `E[X] − w`; when the mean is not supplied it is recovered from
/// `Im φ(h)/h` at a tiny `h` (error `O(h²)`).
pub fn gil_pelaez_tail<C>(cf: &C, w: f64, cfg: &InversionConfig) -> Result<Inversion>
where
    C: CharacteristicFunction + ?Sized,
{
    let h = cfg.step;
    let steps = (cfg.s_max / h).round() as usize;
    let mean = match cf.mean() {
        Some(m) => m,
        None => {
            let tiny = 1e-6 * h.min(1.0);
            cf.eval(tiny)?.im / tiny
        }
    };
    let mut sum = 0.5 * (mean - w);
    for k in 1..=steps {
        let s = k as f64 * h;
        let phase = Complex64::new(0.0, -w * s).exp();
        let term = (phase * cf.eval(s)?).im / s;
        sum += if k == steps { 0.5 * term } else { term };
    }
    let raw = 0.5 + h * sum / PI;
    let probability = raw.clamp(0.0, 1.0);
    Ok(Inversion {
        probability,
        clamped: probability != raw,
        raw,
    })
}

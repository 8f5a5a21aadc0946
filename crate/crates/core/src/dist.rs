//! Claim-size distributions.
//!
//! Lomax (Pareto type II) is the regularly varying family used throughout: its
//! tail, density, integrated tail, moments and inverse CDFs are closed-form.
//! The exponential family exists as an oracle with classical closed-form ruin
//! probabilities; it is not regularly varying and the asymptotic formulas
//! reject it.
//!
//! The Lomax Laplace transform has no elementary closed form. For `s != 0`
//! with `Re(s) >= 0` the integral is taken along the ray `x = r * conj(s)/|s|`,
//! on which `e^{-sx} = e^{-|s| r}` decays without oscillating. The density is
//! analytic in the right half-plane and decays like `|x|^{-α-1}`, so the arc
//! at infinity contributes nothing.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{ensure_nonneg, Result, RuinError};
use crate::quadrature::{geometric_breaks, integrate, integrate_with_breaks, Tolerance};

/// Truncation remainder allowed when cutting semi-infinite integrals.
const TAIL_REMAINDER: f64 = 1e-13;
const LAPLACE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClaimFamily {
    /// Tail `(1 + x/θ)^{-α}`.
    Lomax {
        alpha: f64,
        theta: f64,
    },
    Exponential {
        rate: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimModel {
    family: ClaimFamily,
    mean: f64,
    second_moment: f64,
    tail_index: f64,
}

impl ClaimModel {
    /// Lomax claims; needs `alpha > 2` so that the second moment is finite.
    pub fn lomax(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 2.0 && alpha.is_finite()) {
            return Err(RuinError::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "Lomax tail index must be > 2 (finite second moment)",
            });
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(RuinError::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "Lomax scale must be > 0",
            });
        }
        Ok(Self {
            family: ClaimFamily::Lomax { alpha, theta },
            mean: theta / (alpha - 1.0),
            second_moment: 2.0 * theta * theta / ((alpha - 1.0) * (alpha - 2.0)),
            tail_index: alpha,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(RuinError::InvalidParameter {
                name: "rate",
                value: rate,
                reason: "exponential rate must be > 0",
            });
        }
        Ok(Self {
            family: ClaimFamily::Exponential { rate },
            mean: 1.0 / rate,
            second_moment: 2.0 / (rate * rate),
            tail_index: f64::INFINITY,
        })
    }

    pub fn family(&self) -> ClaimFamily {
        self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            ClaimFamily::Lomax { .. } => "lomax",
            ClaimFamily::Exponential { .. } => "exponential",
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// Tail index α; infinite for the exponential family.
    pub fn tail_index(&self) -> f64 {
        self.tail_index
    }

    pub fn is_regularly_varying(&self) -> bool {
        matches!(self.family, ClaimFamily::Lomax { .. })
    }

    /// Fails unless the claims are regularly varying.
    pub fn require_regularly_varying(&self) -> Result<(f64, f64)> {
        match self.family {
            ClaimFamily::Lomax { alpha, theta } => Ok((alpha, theta)),
            ClaimFamily::Exponential { .. } => Err(RuinError::UnsupportedFamily {
                family: "exponential",
                reason: "asymptotic approximations require regularly varying (Lomax) claims",
            }),
        }
    }

    /// `P(X > x)`.
    pub fn tail(&self, x: f64) -> Result<f64> {
        ensure_nonneg("x", x)?;
        Ok(self.tail_unchecked(x))
    }

    pub(crate) fn tail_unchecked(&self, x: f64) -> f64 {
        match self.family {
            ClaimFamily::Lomax { alpha, theta } => (1.0 + x / theta).powf(-alpha),
            ClaimFamily::Exponential { rate } => (-rate * x).exp(),
        }
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        ensure_nonneg("x", x)?;
        Ok(self.density_unchecked(x))
    }

    pub(crate) fn density_unchecked(&self, x: f64) -> f64 {
        match self.family {
            ClaimFamily::Lomax { alpha, theta } => alpha / theta * (1.0 + x / theta).powf(-(alpha + 1.0)),
            ClaimFamily::Exponential { rate } => rate * (-rate * x).exp(),
        }
    }

    /// Tail `F̄₀(x)` of the integrated-tail (equilibrium) distribution.
    pub fn integrated_tail(&self, x: f64) -> Result<f64> {
        ensure_nonneg("x", x)?;
        Ok(self.integrated_tail_unchecked(x))
    }

    pub(crate) fn integrated_tail_unchecked(&self, x: f64) -> f64 {
        match self.family {
            ClaimFamily::Lomax { alpha, theta } => (1.0 + x / theta).powf(-(alpha - 1.0)),
            ClaimFamily::Exponential { rate } => (-rate * x).exp(),
        }
    }

    pub fn integrated_tail_dist(&self) -> IntegratedTail {
        IntegratedTail { parent: *self }
    }

    /// Laplace transform `E[e^{-sX}]` for `Re(s) >= 0`.
    pub fn laplace(&self, s: Complex64) -> Result<Complex64> {
        if !(s.re >= 0.0) || !s.im.is_finite() || !s.re.is_finite() {
            return Err(RuinError::Domain(format!(
                "Laplace transform needs Re(s) >= 0, got {s}"
            )));
        }
        if s.re == 0.0 && s.im == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        match self.family {
            ClaimFamily::Exponential { rate } => Ok(rate / (rate + s)),
            ClaimFamily::Lomax { alpha, theta } => lomax_laplace(alpha, theta, s),
        }
    }

    /// Derivative `F̂'(s) = -E[X e^{-sX}]` at real `s >= 0`.
    pub fn laplace_derivative(&self, s: f64) -> Result<f64> {
        ensure_nonneg("s", s)?;
        if s == 0.0 {
            return Ok(-self.mean);
        }
        match self.family {
            ClaimFamily::Exponential { rate } => Ok(-rate / ((rate + s) * (rate + s))),
            ClaimFamily::Lomax { alpha, theta } => lomax_laplace_derivative(alpha, theta, s),
        }
    }

    /// Inverse CDF of the claim distribution.
    pub fn quantile(&self, p: f64) -> f64 {
        match self.family {
            ClaimFamily::Lomax { alpha, theta } => theta * ((1.0 - p).powf(-1.0 / alpha) - 1.0),
            ClaimFamily::Exponential { rate } => -(-p).ln_1p() / rate,
        }
    }

    /// Exact inverse-CDF draw of one claim.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }

    /// Exact draw from the integrated-tail distribution `F₀`.
    pub fn sample_integrated_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.integrated_tail_dist().quantile(rng.gen::<f64>())
    }

    /// Draw from the size-biased law with density `t f(t) / μ`.
    ///
    /// Lomax uses acceptance-rejection against a Lomax(α−1, θ) envelope: the
    /// density ratio is `α · t/(θ+t) <= α`, so each proposal is accepted with
    /// probability `t/(θ+t)` and the mean number of proposals is α.
    /// The exponential case is a Gamma(2, rate) draw.
    pub fn sample_size_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            ClaimFamily::Lomax { alpha, theta } => loop {
                let u: f64 = rng.gen();
                let t = theta * ((1.0 - u).powf(-1.0 / (alpha - 1.0)) - 1.0);
                let v: f64 = rng.gen();
                if v * (theta + t) < t {
                    break t;
                }
            },
            ClaimFamily::Exponential { rate } => {
                let a: f64 = rng.gen();
                let b: f64 = rng.gen();
                -((-a).ln_1p() + (-b).ln_1p()) / rate
            }
        }
    }
}

/// The integrated-tail distribution `F₀(x) = (1/μ) ∫₀ˣ F̄(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratedTail {
    parent: ClaimModel,
}

impl IntegratedTail {
    pub fn parent(&self) -> &ClaimModel {
        &self.parent
    }

    pub fn tail(&self, x: f64) -> Result<f64> {
        self.parent.integrated_tail(x)
    }

    /// Density `F̄(x)/μ`.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.parent.tail(x)? / self.parent.mean)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match self.parent.family {
            ClaimFamily::Lomax { alpha, theta } => theta * ((1.0 - p).powf(-1.0 / (alpha - 1.0)) - 1.0),
            ClaimFamily::Exponential { rate } => -(-p).ln_1p() / rate,
        }
    }

    /// `F̄₀(x)` computed as `1 - (1/μ)∫₀ˣ F̄` by adaptive quadrature,
    /// independent of the closed forms.
    pub fn tail_by_quadrature(&self, x: f64) -> Result<f64> {
        ensure_nonneg("x", x)?;
        let model = self.parent;
        let scale = match model.family {
            ClaimFamily::Lomax { theta, .. } => theta,
            ClaimFamily::Exponential { rate } => 1.0 / rate,
        };
        let breaks = geometric_breaks(scale, x);
        let r = integrate_with_breaks(
            |t| model.tail_unchecked(t),
            0.0,
            x,
            &breaks,
            Tolerance::new(1e-13, 1e-15),
        )?;
        Ok(1.0 - r.value / model.mean)
    }
}

fn lomax_laplace(alpha: f64, theta: f64, s: Complex64) -> Result<Complex64> {
    let modulus = s.norm();
    let dir = s.conj() / modulus;
    let peak = alpha / theta;
    // |f| <= (α/θ)(r/θ)^{-α-1} on the ray, and |f| <= α/θ
    let r_power = theta * TAIL_REMAINDER.powf(-1.0 / alpha);
    let r_exp = (peak / (modulus * TAIL_REMAINDER)).ln().max(1.0) / modulus;
    let end = r_power.min(r_exp);
    let scale = 0.25 * theta.min(1.0 / modulus);
    let breaks = geometric_breaks(scale, end);
    let r = integrate_with_breaks(
        |r: f64| {
            let w = Complex64::new(1.0, 0.0) + dir * (r / theta);
            w.powf(-(alpha + 1.0)) * ((-modulus * r).exp() * peak)
        },
        0.0,
        end,
        &breaks,
        Tolerance::new(LAPLACE_TOL, 1e-15),
    )?;
    Ok(r.value * dir)
}

fn lomax_laplace_derivative(alpha: f64, theta: f64, s: f64) -> Result<f64> {
    let peak = alpha / theta;
    let tol = 1e-12;
    // ∫_R^∞ x f(x) dx <= α θ^α R^{1-α} / (α-1)
    let r_power = (alpha * theta.powf(alpha) / ((alpha - 1.0) * tol)).powf(1.0 / (alpha - 1.0));
    // ∫_R^∞ x e^{-sx} (α/θ) dx = (α/θ) e^{-sR} (R/s + 1/s²)
    let mut r_exp = 1.0 / s;
    for _ in 0..4 {
        r_exp = (peak * (r_exp / s + 1.0 / (s * s)) / tol).ln().max(1.0) / s;
    }
    let end = r_power.min(r_exp);
    let breaks = geometric_breaks(0.25 * theta.min(1.0 / s), end);
    let r = integrate_with_breaks(
        |x: f64| x * (-s * x).exp() * peak * (1.0 + x / theta).powf(-(alpha + 1.0)),
        0.0,
        end,
        &breaks,
        Tolerance::new(tol, 1e-15),
    )?;
    Ok(-r.value)
}

/// `∫₀^T g` convenience used by tests of the density/tail relations.
pub fn integrate_density(model: &ClaimModel, a: f64, b: f64) -> Result<f64> {
    Ok(integrate(|x| model.density_unchecked(x), a, b, Tolerance::new(1e-14, 1e-15))?.value)
}

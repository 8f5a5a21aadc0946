//! Analytic approximations of `ψ(u, xu)` for regularly varying claims.
//!
//! Horizons are measured in units of the initial capital: `x` stands for the
//! time horizon `t = x·u`. Every function here rejects the exponential family.

use std::fmt;

use crate::dist::ClaimModel;
use crate::error::{ensure_nonneg, ensure_positive, Result, RuinError};
use crate::simulate::MCEstimate;
use crate::transforms::RiskModel;

/// Where `ψ(u)` in the third term comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiUMode {
    /// A Monte Carlo estimate supplied by the caller.
    McPlugin,
    /// `ρ F̄₀(u)/(1−ρ)`.
    AsymptoticPlugin,
}

/// Which constant multiplies `F̄(u + x(1−ρ)u)` in the second term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantMode {
    /// `3E[X²]/μ`, as printed in the theorem.
    PaperVerbatim,
    /// `3E[X²]/(2μ²)`, the value of `E[S_{n−1} + Ŝ_{n−1} + (n−1)Y_n]/μ`
    /// per ladder step when `E[Y] = E[Z] = E[X²]/(2μ)`.
    HalfCorrection,
}

impl PsiUMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PsiUMode::McPlugin => "mc_plugin",
            PsiUMode::AsymptoticPlugin => "asymptotic_plugin",
        }
    }
}

impl ConstantMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConstantMode::PaperVerbatim => "paper_verbatim",
            ConstantMode::HalfCorrection => "half_correction",
        }
    }

    /// The per-ladder-step constant for `claims`.
    pub fn constant(&self, claims: &ClaimModel) -> f64 {
        let mu = claims.mean();
        match self {
            ConstantMode::PaperVerbatim => 3.0 * claims.second_moment() / mu,
            ConstantMode::HalfCorrection => 3.0 * claims.second_moment() / (2.0 * mu * mu),
        }
    }
}

impl fmt::Display for PsiUMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for ConstantMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The three terms of the second-order expansion and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxBreakdown {
    pub term1: f64,
    pub term2: f64,
    /// Includes its leading minus sign.
    pub term3: f64,
    pub total: f64,
    pub psi_u: f64,
    pub psi_u_mode: PsiUMode,
    pub constant_mode: ConstantMode,
    pub u: f64,
    pub x: f64,
}

/// Limit variable `W` with `P(W > y) = (1+y)^{-(α−1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WLimit {
    alpha: f64,
}

impl WLimit {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 2.0 && alpha.is_finite()) {
            return Err(RuinError::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "tail index must be > 2",
            });
        }
        Ok(Self { alpha })
    }

    pub fn for_claims(claims: &ClaimModel) -> Result<Self> {
        let (alpha, _) = claims.require_regularly_varying()?;
        Self::new(alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tail(&self, y: f64) -> Result<f64> {
        ensure_nonneg("y", y)?;
        Ok((1.0 + y).powf(-(self.alpha - 1.0)))
    }
}

fn check_ux(u: f64, x: f64) -> Result<()> {
    ensure_positive("u", u)?;
    ensure_positive("x", x)
}

/// `ρ F̄₀(u)/(1−ρ) · P(W/(1−ρ) <= x)`.
pub fn first_order_psi(model: &RiskModel, u: f64, x: f64) -> Result<f64> {
    check_ux(u, x)?;
    let w = WLimit::for_claims(model.claims())?;
    let rho = model.rho();
    let cdf = 1.0 - w.tail(x * (1.0 - rho))?;
    Ok(rho / (1.0 - rho) * model.claims().integrated_tail(u)? * cdf)
}

/// `ρ F̄₀(u)/(1−ρ)`, the large-`u` equivalent of `ψ(u)`. Exceeds `ψ(u)` at
/// small `u` (equals `ρ/(1−ρ)` at zero).
pub fn infinite_ruin_asymptotic(model: &RiskModel, u: f64) -> Result<f64> {
    ensure_nonneg("u", u)?;
    model.claims().require_regularly_varying()?;
    let rho = model.rho();
    Ok(rho / (1.0 - rho) * model.claims().integrated_tail(u)?)
}

/// Second-order expansion of `ψ(u, xu)`:
///
/// ```text
/// term1 = ρ F̄₀(u + x(1−ρ)u) / (1−ρ)
/// term2 = c · ρ² F̄(u + x(1−ρ)u) / (1−ρ)²
/// term3 = −ψ(u) · λE[X²] / (2u(1−ρ)) · [(α−1)/(1+v)^α − α(α−1)v/(1+v)^{α+1}],  v = x(1−ρ)
/// ```
///
/// with `c` chosen by `constant_mode`.
pub fn second_order_psi(
    model: &RiskModel,
    u: f64,
    x: f64,
    psi_u_mode: PsiUMode,
    constant_mode: ConstantMode,
    psi_u_value: Option<&MCEstimate>,
) -> Result<ApproxBreakdown> {
    check_ux(u, x)?;
    let claims = model.claims();
    let (alpha, _) = claims.require_regularly_varying()?;
    let psi_u = match psi_u_mode {
        PsiUMode::McPlugin => psi_u_value.ok_or(RuinError::MissingPlugin)?.value,
        PsiUMode::AsymptoticPlugin => infinite_ruin_asymptotic(model, u)?,
    };
    let rho = model.rho();
    let v = x * (1.0 - rho);
    let level = u + v * u;
    let term1 = rho * claims.integrated_tail(level)? / (1.0 - rho);
    let term2 =
        constant_mode.constant(claims) * rho * rho * claims.tail(level)? / ((1.0 - rho) * (1.0 - rho));
    let bracket =
        (alpha - 1.0) / (1.0 + v).powf(alpha) - alpha * (alpha - 1.0) * v / (1.0 + v).powf(alpha + 1.0);
    let term3 = -psi_u * model.lambda() * claims.second_moment() / (2.0 * u * (1.0 - rho)) * bracket;
    Ok(ApproxBreakdown {
        term1,
        term2,
        term3,
        total: term1 + term2 + term3,
        psi_u,
        psi_u_mode,
        constant_mode,
        u,
        x,
    })
}

/// Two-term expansion `n F̄(u) + n(n−1) μ f(u)` of `P(X₁+⋯+X_n > u)`.
pub fn compound_sum_second_order(claims: &ClaimModel, n: u32, u: f64) -> Result<f64> {
    ensure_positive("u", u)?;
    claims.require_regularly_varying()?;
    if n == 0 {
        return Err(RuinError::Domain("summand count n must be >= 1".into()));
    }
    let n = f64::from(n);
    Ok(n * claims.tail(u)? + n * (n - 1.0) * claims.mean() * claims.density(u)?)
}

/// Shifted-argument form `n F̄(u − (n−1)μ)`.
pub fn compound_sum_shifted(claims: &ClaimModel, n: u32, u: f64) -> Result<f64> {
    claims.require_regularly_varying()?;
    if n == 0 {
        return Err(RuinError::Domain("summand count n must be >= 1".into()));
    }
    let shift = f64::from(n - 1) * claims.mean();
    if !(u > shift) {
        return Err(RuinError::Domain(format!(
            "u = {u} must exceed (n-1)·mean = {shift}"
        )));
    }
    Ok(f64::from(n) * claims.tail(u - shift)?)
}

/// Approximation of `P(S_n > u, S_{n−1} <= u, Ŝ_n > xu)` for ladder heights
/// `S` and pre-ladder deficits `Ŝ`: `F̄₀(u+xu) + c(n−1) F̄(u+xu)`.
pub fn ladder_sum_second_order(
    model: &RiskModel,
    n: u32,
    u: f64,
    x: f64,
    constant_mode: ConstantMode,
) -> Result<f64> {
    check_ux(u, x)?;
    let claims = model.claims();
    claims.require_regularly_varying()?;
    if n == 0 {
        return Err(RuinError::Domain("ladder count n must be >= 1".into()));
    }
    let level = u + x * u;
    Ok(claims.integrated_tail(level)?
        + constant_mode.constant(claims) * f64::from(n - 1) * claims.tail(level)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> RiskModel {
        RiskModel::new(ClaimModel::lomax(3.0, 2.0).unwrap(), 0.5).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn w_limit_examples() {
        let w = WLimit::new(3.0).unwrap();
        assert_eq!(w.tail(0.0).unwrap(), 1.0);
        assert!((w.tail(1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(w.tail(-1.0).is_err());
        assert!(WLimit::new(2.0).is_err());
        let m = ClaimModel::lomax(3.0, 2.0).unwrap();
        let u = 1e4;
        let ratio = m.integrated_tail(2.0 * u).unwrap() / m.integrated_tail(u).unwrap();
        assert!(rel(ratio, 0.25) < 1e-3);
    }

    #[test]
    fn first_order_examples() {
        let m = model();
        let v = first_order_psi(&m, 100.0, 1.0).unwrap();
        assert!(rel(v, 5.0 / (9.0 * 2601.0)) < 1e-12);
        let big = first_order_psi(&m, 100.0, 1e12).unwrap();
        assert!(rel(big, 1.0 / 2601.0) < 1e-10);
        assert!(first_order_psi(&m, 100.0, 1e-12).unwrap() < 1e-15);
    }

    #[test]
    fn infinite_asymptotic_examples() {
        let m = model();
        assert!(rel(infinite_ruin_asymptotic(&m, 100.0).unwrap(), 1.0 / 2601.0) < 1e-12);
        assert!((infinite_ruin_asymptotic(&m, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn second_order_terms() {
        let m = model();
        let b = second_order_psi(
            &m,
            100.0,
            1.0,
            PsiUMode::AsymptoticPlugin,
            ConstantMode::PaperVerbatim,
            None,
        )
        .unwrap();
        assert!(rel(b.term1, 1.0 / 5776.0) < 1e-12);
        assert!(rel(b.term2, 12.0 / 76f64.powi(3)) < 1e-12);
        // bracket vanishes at x(1−ρ) = 1/(α−1)
        assert!(b.term3.abs() < 1e-18, "{}", b.term3);
        assert_eq!(b.total, b.term1 + b.term2 + b.term3);
        let h = second_order_psi(
            &m,
            100.0,
            1.0,
            PsiUMode::AsymptoticPlugin,
            ConstantMode::HalfCorrection,
            None,
        )
        .unwrap();
        assert!(rel(h.term2, 6.0 / 76f64.powi(3)) < 1e-12);
    }

    #[test]
    fn third_term_sign() {
        let m = model();
        // small x: bracket positive, so term3 negative
        let b = second_order_psi(
            &m,
            100.0,
            0.2,
            PsiUMode::AsymptoticPlugin,
            ConstantMode::PaperVerbatim,
            None,
        )
        .unwrap();
        assert!(b.term3 < 0.0);
        let est = MCEstimate {
            value: 4e-4,
            stderr: 1e-5,
            n: 1,
            seed: 0,
            workers: 1,
            wilson: None,
            residual_bound: 0.0,
        };
        let p = second_order_psi(
            &m,
            100.0,
            0.2,
            PsiUMode::McPlugin,
            ConstantMode::PaperVerbatim,
            Some(&est),
        )
        .unwrap();
        assert_eq!(p.psi_u, 4e-4);
        assert!(matches!(
            second_order_psi(
                &m,
                100.0,
                0.2,
                PsiUMode::McPlugin,
                ConstantMode::PaperVerbatim,
                None
            ),
            Err(RuinError::MissingPlugin)
        ));
    }

    #[test]
    fn exponential_rejected() {
        let m = RiskModel::new(ClaimModel::exponential(1.0).unwrap(), 0.5).unwrap();
        assert!(matches!(
            first_order_psi(&m, 10.0, 1.0),
            Err(RuinError::UnsupportedFamily { .. })
        ));
        assert!(infinite_ruin_asymptotic(&m, 10.0).is_err());
        assert!(compound_sum_second_order(m.claims(), 2, 10.0).is_err());
        assert!(ladder_sum_second_order(&m, 2, 10.0, 1.0, ConstantMode::PaperVerbatim).is_err());
    }

    #[test]
    fn compound_sum_examples() {
        let c = ClaimModel::lomax(3.0, 2.0).unwrap();
        assert_eq!(
            compound_sum_second_order(&c, 1, 20.0).unwrap(),
            c.tail(20.0).unwrap()
        );
        let v = compound_sum_second_order(&c, 2, 20.0).unwrap();
        assert!(rel(v, 2.0 / 1331.0 + 3.0 / 14641.0) < 1e-12);
        assert!((v - 1.7076e-3).abs() < 1e-7);
        assert_eq!(compound_sum_shifted(&c, 1, 20.0).unwrap(), c.tail(20.0).unwrap());
        let s = compound_sum_shifted(&c, 2, 20.0).unwrap();
        assert!(rel(s, 2.0 / 10.5f64.powi(3)) < 1e-12);
        assert!(compound_sum_shifted(&c, 3, 1.5).is_err());
    }

    #[test]
    fn shifted_and_two_term_forms_are_equivalent() {
        let c = ClaimModel::lomax(3.0, 2.0).unwrap();
        let ratios: Vec<f64> = [50.0, 100.0, 200.0]
            .iter()
            .map(|&u| {
                (compound_sum_shifted(&c, 2, u).unwrap() - compound_sum_second_order(&c, 2, u).unwrap()).abs()
                    / c.density(u).unwrap()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
        assert!(ratios[2] < 0.05);
    }

    #[test]
    fn ladder_sum_examples() {
        let m = model();
        let one = ladder_sum_second_order(&m, 1, 100.0, 1.0, ConstantMode::PaperVerbatim).unwrap();
        assert_eq!(one, m.claims().integrated_tail(200.0).unwrap());
        let two = ladder_sum_second_order(&m, 2, 100.0, 1.0, ConstantMode::PaperVerbatim).unwrap();
        assert!(rel(two, 101f64.powi(-2) + 12.0 * 101f64.powi(-3)) < 1e-12);
    }

    #[test]
    fn term_orders_along_u() {
        let m = model();
        let x = 1.0;
        let w = WLimit::for_claims(m.claims()).unwrap();
        let v = x * (1.0 - m.rho());
        let limit = w.tail(v).unwrap() / (1.0 - w.tail(v).unwrap());
        let (mut to_first, mut to_complement) = (0.0, 0.0);
        let mut scaled = Vec::new();
        for &u in &[1e2, 1e3, 1e4] {
            let b = second_order_psi(
                &m,
                u,
                x,
                PsiUMode::AsymptoticPlugin,
                ConstantMode::PaperVerbatim,
                None,
            )
            .unwrap();
            assert!(b.term1 > 0.0 && b.term1 < 1.0 && b.total.is_finite());
            let first = first_order_psi(&m, u, x).unwrap();
            to_first = b.term1 / first;
            to_complement = b.term1 / (infinite_ruin_asymptotic(&m, u).unwrap() - first);
            let alpha = m.claims().tail_index();
            scaled.push((u.powf(alpha) * b.term2.abs(), u.powf(alpha) * b.term3.abs()));
        }
        // u^α·|term| settles to a constant (the bracket of term3 vanishes here)
        assert!((scaled[2].0 / scaled[1].0 - 1.0).abs() < 0.01, "{scaled:?}");
        assert!(scaled.iter().all(|&(a, b)| a < 50.0 && b < 50.0), "{scaled:?}");
        // term1 is the first-order size of P(xu <= τ_u < ∞), so its ratio to
        // the ψ(u, xu) first order settles at P(W > v)/P(W <= v), not 1
        assert!((to_first / limit - 1.0).abs() < 0.02, "{to_first} vs {limit}");
        assert!((to_complement - 1.0).abs() < 0.02, "{to_complement}");
    }
}

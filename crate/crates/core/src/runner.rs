//! Experiment runners behind the `ruinlab` subcommands.

use std::fmt::Write as _;
use std::io::{self, Write};

use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::asymptotics::{
    first_order_psi, infinite_ruin_asymptotic, second_order_psi, ConstantMode, PsiUMode,
};
use crate::config::ExperimentConfig;
use crate::error::{Result, RuinError};
use crate::ladder::{sample_busy_period, sample_first_passage};
use crate::rng::derive_seed;
use crate::simulate::{
    estimate_finite_ruin_direct, estimate_finite_ruin_ladder, estimate_infinite_ruin, estimate_ruin_split,
    estimate_workload_tail, mc_mean, mc_probability, MCEstimate, McConfig,
};
use crate::transforms::{gil_pelaez_tail, InversionConfig, RiskModel};

/// Numeric CSV cell with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn escape_free_text(s: &str) -> String {
    s.replace([',', '\n', '\r'], "|")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

pub const APPROX_HEADER: [&str; 9] = [
    "u",
    "x",
    "first_order",
    "term1",
    "term2",
    "term3",
    "second_order_total",
    "fbar_u",
    "fbar0_u",
];

/// One row per `(u, x)` with the terms of the second-order expansion.
pub fn run_approx(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let model = &cfg.model;
    model.claims().require_regularly_varying()?;
    let mut table = CsvTable::new(APPROX_HEADER.to_vec());
    for (iu, &u) in cfg.u.iter().enumerate() {
        let plugin = match cfg.psi_u_mode {
            PsiUMode::McPlugin => Some(estimate_infinite_ruin(
                model,
                u,
                &cfg.mc.with_seed(derive_seed(cfg.mc.seed(), iu as u64)),
            )?),
            PsiUMode::AsymptoticPlugin => None,
        };
        for &x in &cfg.x {
            let b = second_order_psi(model, u, x, cfg.psi_u_mode, cfg.constant_mode, plugin.as_ref())?;
            table.rows.push(
                [
                    u,
                    x,
                    first_order_psi(model, u, x)?,
                    b.term1,
                    b.term2,
                    b.term3,
                    b.total,
                    model.claims().tail(u)?,
                    model.claims().integrated_tail(u)?,
                ]
                .iter()
                .map(|&v| fmt_num(v))
                .collect(),
            );
        }
    }
    Ok(table)
}

pub const CONVERGENCE_HEADER: [&str; 21] = [
    "u",
    "x",
    "t",
    "psi_mc",
    "psi_mc_stderr",
    "psi_u_mc",
    "first_order",
    "second_order_verbatim",
    "second_order_half",
    "ratio1",
    "ratio2_verbatim",
    "ratio2_half",
    "late_mc",
    "late_mc_stderr",
    "late_first_order",
    "late_ratio1",
    "late_ratio2_verbatim",
    "late_ratio2_half",
    "fbar_u",
    "noise",
    "error",
];

/// One evaluated grid point of the convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub u: f64,
    pub x: f64,
    /// Ladder-conditional estimate of `ψ(u, xu)`.
    pub psi: MCEstimate,
    /// Ladder-conditional estimate of `P(xu <= τ_u < ∞)` from the same runs.
    pub late: MCEstimate,
    pub psi_u: MCEstimate,
    pub first_order: f64,
    /// Three-term totals under `paper_verbatim` and `half_correction`.
    pub second_order_verbatim: f64,
    pub second_order_half: f64,
    pub fbar_u: f64,
}

impl ConvergencePoint {
    /// `(ψ̂ − first_order)/F̄(u)`.
    pub fn ratio1(&self) -> f64 {
        (self.psi.value - self.first_order) / self.fbar_u
    }

    pub fn ratio2(&self, mode: ConstantMode) -> f64 {
        (self.psi.value - self.second_order(mode)) / self.fbar_u
    }

    pub fn second_order(&self, mode: ConstantMode) -> f64 {
        match mode {
            ConstantMode::PaperVerbatim => self.second_order_verbatim,
            ConstantMode::HalfCorrection => self.second_order_half,
        }
    }

    /// First-order approximation of `P(xu <= τ_u < ∞)`:
    /// `ρF̄₀(u)/(1−ρ) · P(W/(1−ρ) > x)`.
    pub fn late_first_order(&self, model: &RiskModel) -> Result<f64> {
        Ok(infinite_ruin_asymptotic(model, self.u)? - self.first_order)
    }

    pub fn late_ratio1(&self, model: &RiskModel) -> Result<f64> {
        Ok((self.late.value - self.late_first_order(model)?) / self.fbar_u)
    }

    pub fn late_ratio2(&self, mode: ConstantMode) -> f64 {
        (self.late.value - self.second_order(mode)) / self.fbar_u
    }

    /// Monte Carlo noise on the ratio scale, `2·stderr/F̄(u)`.
    pub fn noise(&self) -> f64 {
        2.0 * self.psi.stderr / self.fbar_u
    }
}

/// Evaluates one convergence grid point with the given Monte Carlo budget.
pub fn convergence_point(
    model: &RiskModel,
    u: f64,
    x: f64,
    psi_u_mode: PsiUMode,
    mc: &McConfig,
) -> Result<ConvergencePoint> {
    let split = estimate_ruin_split(model, u, x * u, mc)?;
    let plugin = Some(&split.total);
    let verbatim = second_order_psi(model, u, x, psi_u_mode, ConstantMode::PaperVerbatim, plugin)?;
    let half = second_order_psi(model, u, x, psi_u_mode, ConstantMode::HalfCorrection, plugin)?;
    Ok(ConvergencePoint {
        u,
        x,
        psi: split.before,
        late: split.after,
        psi_u: split.total,
        first_order: first_order_psi(model, u, x)?,
        second_order_verbatim: verbatim.total,
        second_order_half: half.total,
        fbar_u: model.claims().tail(u)?,
    })
}

/// Monte Carlo versus first- and second-order approximations per `(u, x)`.
///
/// Columns `psi_*`/`ratio*` compare against `ψ(u, xu)`; the `late_*`
/// columns compare the same expansion against `P(xu <= τ_u < ∞)`. Per-row
/// failures land in the `error` column and the run continues.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let model = &cfg.model;
    model.claims().require_regularly_varying()?;
    let mut table = CsvTable::new(CONVERGENCE_HEADER.to_vec());
    let mut row_index = 0u64;
    for &u in &cfg.u {
        for &x in &cfg.x {
            let mc = cfg.mc.with_seed(derive_seed(cfg.mc.seed(), row_index));
            row_index += 1;
            let row = match convergence_point(model, u, x, cfg.psi_u_mode, &mc).and_then(|p| {
                Ok(vec![
                    u,
                    x,
                    x * u,
                    p.psi.value,
                    p.psi.stderr,
                    p.psi_u.value,
                    p.first_order,
                    p.second_order_verbatim,
                    p.second_order_half,
                    p.ratio1(),
                    p.ratio2(ConstantMode::PaperVerbatim),
                    p.ratio2(ConstantMode::HalfCorrection),
                    p.late.value,
                    p.late.stderr,
                    p.late_first_order(model)?,
                    p.late_ratio1(model)?,
                    p.late_ratio2(ConstantMode::PaperVerbatim),
                    p.late_ratio2(ConstantMode::HalfCorrection),
                    p.fbar_u,
                    p.noise(),
                ])
            }) {
                Ok(values) => {
                    let mut cells: Vec<String> = values.into_iter().map(fmt_num).collect();
                    cells.push(String::new());
                    cells
                }
                Err(e) => {
                    let mut cells = vec![fmt_num(u), fmt_num(x), fmt_num(x * u)];
                    cells.extend((3..CONVERGENCE_HEADER.len() - 1).map(|_| fmt_num(f64::NAN)));
                    cells.push(escape_free_text(&e.to_string()));
                    cells
                }
            };
            eprintln!("convergence: u={u} x={x} done");
            table.rows.push(row);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            name,
            measured,
            tolerance,
            passed: measured.is_finite() && measured <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {:<28} measured={:.6e} tolerance={:.6e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance
            );
        }
        let _ = writeln!(
            s,
            "{} of {} checks passed",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        );
        s
    }
}

fn standard_normal_tail(w: f64) -> f64 {
    0.5 * erfc(w / std::f64::consts::SQRT_2)
}

/// Cross-module invariant checks, one line each.
pub fn run_selftest(cfg: &ExperimentConfig) -> Result<SelftestReport> {
    let model = &cfg.model;
    let seed = cfg.mc.seed();
    let mc = |label: u64| cfg.mc.with_seed(derive_seed(seed, label));
    let mut report = SelftestReport::default();

    let roundtrip = [0.1, 1.0, 10.0]
        .iter()
        .map(|&s| Ok((model.kappa_inverse(model.kappa_real(s)?)? - s).abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    report
        .checks
        .push(CheckResult::new("kappa_roundtrip", roundtrip, 1e-10));

    let mut residual: f64 = 0.0;
    for re in [0.0, 0.05, 0.5, 2.0] {
        for im in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let s = Complex64::new(re, im);
            let g = model.busy_period_transform(s)?;
            let again = model.claims().laplace(s - (g - 1.0) * model.lambda())?;
            residual = residual.max((g - again).norm());
        }
    }
    report
        .checks
        .push(CheckResult::new("busy_fixed_point_residual", residual, 1e-11));

    let limits = cfg.mc.limits();
    let busy = mc_mean(&mc(1), |rng| sample_busy_period(model, rng, limits))?;
    report.checks.push(CheckResult::new(
        "busy_mean_zscore",
        (busy.mean - model.busy_mean()).abs() / busy.stderr,
        3.0,
    ));

    let (u, t) = (5.0, 20.0);
    let direct = estimate_finite_ruin_direct(model, u, t, &mc(2))?;
    let ladder = estimate_finite_ruin_ladder(model, u, t, &mc(3))?;
    let workload = estimate_workload_tail(model, u, t, &mc(4))?;
    let z = |a: &MCEstimate, b: &MCEstimate| {
        (a.value - b.value).abs() / (a.stderr.powi(2) + b.stderr.powi(2)).sqrt().max(1e-300)
    };
    report.checks.push(CheckResult::new(
        "direct_vs_ladder_zscore",
        z(&direct, &ladder),
        3.0,
    ));
    report.checks.push(CheckResult::new(
        "direct_vs_workload_zscore",
        z(&direct, &workload),
        3.0,
    ));
    report.checks.push(CheckResult::new(
        "ladder_vs_workload_zscore",
        z(&ladder, &workload),
        3.0,
    ));

    let normal = |s: f64| -> Result<Complex64> { Ok(Complex64::new((-0.5 * s * s).exp(), 0.0)) };
    let grid = InversionConfig::new(1e-3, 50.0)?;
    let mut gp_err: f64 = 0.0;
    for k in 0..=24 {
        let w = -3.0 + 0.25 * k as f64;
        let p = gil_pelaez_tail(&normal, w, &grid)?.probability;
        gp_err = gp_err.max((p - standard_normal_tail(w)).abs());
    }
    report
        .checks
        .push(CheckResult::new("gil_pelaez_normal_max_error", gp_err, 1e-6));

    let z_level = 200.0;
    let sd = model.fluctuation_variance().sqrt();
    let centre = z_level / (1.0 - model.rho());
    let root = z_level.sqrt();
    let empirical = mc_probability(&mc(5), |rng| {
        let w = sample_first_passage(model, z_level, rng, limits)?.time;
        Ok((w - centre) / root > 1.0)
    })?;
    let normal_tail = standard_normal_tail(1.0 / sd);
    report.checks.push(CheckResult::new(
        "clt_tail_vs_normal",
        (empirical.value - normal_tail).abs(),
        0.02,
    ));
    let inversion = cfg.inversion.unwrap_or(InversionConfig::new(0.01, 8.0)?);
    let cf = model.centered_passage(z_level)?;
    let inverted = gil_pelaez_tail(&cf, 1.0, &inversion)?.probability;
    report.checks.push(CheckResult::new(
        "clt_tail_inverted_vs_mc",
        (empirical.value - inverted).abs(),
        0.02,
    ));

    Ok(report)
}

/// Exit status for a library error surfaced by a runner.
pub fn exit_code_for(err: &RuinError) -> i32 {
    match err {
        RuinError::Numeric { .. } | RuinError::StepCap { .. } => 2,
        _ => 1,
    }
}

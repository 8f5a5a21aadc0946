//! Monte Carlo estimators of finite- and infinite-horizon ruin probabilities
//! and of the dual workload tail.
//!
//! Replication `i` always draws from `substream(seed, i)`; workers take
//! contiguous index blocks and their partial results are reduced in worker
//! order. Bernoulli estimates are therefore identical for any worker count;
//! moment estimates can differ in the last bits through summation order.

use std::thread;

use rand::{Rng, SeedableRng};

use crate::error::{Result, RuinError};
use crate::ladder::{exp_gap, first_passage_within, ladder_walk_deficit, SimLimits};
use crate::rng::{substream, StreamRng};
use crate::transforms::RiskModel;

/// Below this value a Wilson interval accompanies the normal-approximation
/// standard error.
pub const WILSON_THRESHOLD: f64 = 1e-5;
const WILSON_Z: f64 = 1.959_963_984_540_054;
/// Default bound on the ruin probability left behind when a direct path is
/// abandoned at the escape level.
pub const DEFAULT_ESCAPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    n: u64,
    seed: u64,
    workers: usize,
    limits: SimLimits,
    escape_tol: f64,
}

impl McConfig {
    pub fn new(n: u64, seed: u64, workers: usize) -> Result<Self> {
        if n == 0 {
            return Err(RuinError::Domain("sample count n must be >= 1".into()));
        }
        if workers == 0 {
            return Err(RuinError::Domain("worker count must be >= 1".into()));
        }
        Ok(Self {
            n,
            seed,
            workers,
            limits: SimLimits::default(),
            escape_tol: DEFAULT_ESCAPE_TOL,
        })
    }

    pub fn with_limits(mut self, limits: SimLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn with_escape_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(RuinError::Domain(format!(
                "escape tolerance must be in (0,1), got {tol}"
            )));
        }
        self.escape_tol = tol;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn workers(&self) -> usize {
        self.workers
    }
    pub fn limits(&self) -> SimLimits {
        self.limits
    }
}

/// A Monte Carlo probability estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub value: f64,
    /// `√(value(1−value)/n)`.
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    pub workers: usize,
    /// 95% Wilson interval, reported when `value < 1e-5`.
    pub wilson: Option<(f64, f64)>,
    /// Upper bound on the bias from truncating paths at a finite level.
    pub residual_bound: f64,
}

impl MCEstimate {
    fn from_counts(hits: u64, cfg: &McConfig, residual_bound: f64) -> Self {
        let n = cfg.n as f64;
        let value = hits as f64 / n;
        let stderr = (value * (1.0 - value) / n).sqrt();
        let wilson = (value < WILSON_THRESHOLD).then(|| wilson_interval(value, n, WILSON_Z));
        Self {
            value,
            stderr,
            n: cfg.n,
            seed: cfg.seed,
            workers: cfg.workers,
            wilson,
            residual_bound,
        }
    }
}

pub fn wilson_interval(p: f64, n: f64, z: f64) -> (f64, f64) {
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if p == 0.0 { 0.0 } else { (center - half).max(0.0) };
    (lo, (center + half).min(1.0))
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

/// Runs `body` for every replication index, fanned out over `cfg.workers`
/// threads; partial accumulators come back in worker order.
fn run_replications<A, I, F>(cfg: &McConfig, init: I, body: F) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &mut StreamRng) -> Result<()> + Sync,
{
    let n = cfg.n;
    let workers = cfg.workers as u64;
    let block = |w: u64| (w * n / workers, (w + 1) * n / workers);
    let work = |w: u64| -> Result<A> {
        let (lo, hi) = block(w);
        let mut acc = init();
        for i in lo..hi {
            let mut rng = substream(cfg.seed, i);
            body(&mut acc, &mut rng)?;
        }
        Ok(acc)
    };
    if workers == 1 {
        return Ok(vec![work(0)?]);
    }
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers).map(|w| scope.spawn(move || work(w))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("Monte Carlo worker panicked"))
            .collect()
    })
}

/// Frequency of `event` over `cfg.n` replications.
pub fn mc_probability<F>(cfg: &McConfig, event: F) -> Result<MCEstimate>
where
    F: Fn(&mut StreamRng) -> Result<bool> + Sync,
{
    let parts = run_replications(
        cfg,
        || 0u64,
        |hits, rng| {
            if event(rng)? {
                *hits += 1;
            }
            Ok(())
        },
    )?;
    Ok(MCEstimate::from_counts(parts.into_iter().sum(), cfg, 0.0))
}

#[derive(Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        Welford { n, mean, m2 }
    }
}

/// Sample mean of `sample` over `cfg.n` replications.
pub fn mc_mean<F>(cfg: &McConfig, sample: F) -> Result<MeanEstimate>
where
    F: Fn(&mut StreamRng) -> Result<f64> + Sync,
{
    let parts = run_replications(cfg, Welford::default, |acc, rng| {
        acc.push(sample(rng)?);
        Ok(())
    })?;
    let w = parts.into_iter().fold(Welford::default(), Welford::merge);
    let var = if w.n > 1 { w.m2 / (w.n - 1) as f64 } else { 0.0 };
    Ok(MeanEstimate {
        mean: w.mean,
        stderr: (var / w.n as f64).sqrt(),
        n: w.n,
    })
}

/// Upper bound on `ψ(y)`.
///
/// Exact for exponential claims. Otherwise uses the ladder representation
/// `ψ(y) = Σ_k (1−ρ)ρ^k P(Y₁+⋯+Y_k > y)` with the union bound
/// `P(Y₁+⋯+Y_k > y) <= k F̄₀(y/k)`.
pub fn psi_upper_bound(model: &RiskModel, y: f64) -> f64 {
    let rho = model.rho();
    let claims = model.claims();
    if !claims.is_regularly_varying() {
        return rho * (-(1.0 - rho) * y.max(0.0) / claims.mean()).exp();
    }
    let mut total: f64 = 0.0;
    let mut weight = (1.0 - rho) * rho;
    let mut k = 1.0;
    // Σ_{j>k} (1−ρ)ρ^j = ρ^{k+1} bounds the remainder
    while weight / (1.0 - rho) > 1e-18 * total.max(1e-300) && k < 10_000.0 {
        let tail = (k * claims.integrated_tail_unchecked(y.max(0.0) / k)).min(1.0);
        total += weight * tail;
        weight *= rho;
        k += 1.0;
    }
    (total + weight / (1.0 - rho)).min(1.0)
}

/// Smallest (up to bisection precision) reserve level `L` with
/// `psi_upper_bound(L) <= tol`.
pub fn escape_level(model: &RiskModel, tol: f64) -> f64 {
    let mut hi = model.claims().mean().max(1.0);
    while psi_upper_bound(model, hi) > tol {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if psi_upper_bound(model, mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn check_inputs(u: f64, t: Option<f64>) -> Result<()> {
    if !(u >= 0.0 && u.is_finite()) {
        return Err(RuinError::Domain(format!("capital u must be >= 0, got {u}")));
    }
    if let Some(t) = t {
        if !(t > 0.0) {
            return Err(RuinError::Domain(format!("horizon t must be > 0, got {t}")));
        }
    }
    Ok(())
}

/// `ψ(u, t)` by simulating the claim surplus path claim by claim up to the
/// horizon. A path whose reserve `u − S` climbs above the escape level is
/// abandoned as non-ruined; the bias this introduces is reported in
/// `residual_bound`.
pub fn estimate_finite_ruin_direct(model: &RiskModel, u: f64, t: f64, cfg: &McConfig) -> Result<MCEstimate> {
    check_inputs(u, Some(t))?;
    let escape = escape_level(model, cfg.escape_tol);
    let lambda = model.lambda();
    let claims = *model.claims();
    let cap = cfg.limits.step_cap;
    let parts = run_replications(
        cfg,
        || (0u64, 0u64),
        |acc, rng| {
            let (mut surplus, mut clock) = (0.0, 0.0);
            let mut events = 0u64;
            loop {
                let gap = exp_gap(rng, lambda);
                clock += gap;
                if clock >= t {
                    return Ok(());
                }
                surplus += claims.sample(rng) - gap;
                if surplus > u {
                    acc.0 += 1;
                    return Ok(());
                }
                if u - surplus > escape {
                    acc.1 += 1;
                    return Ok(());
                }
                events += 1;
                if events >= cap {
                    return Err(RuinError::StepCap {
                        what: "direct surplus path",
                        cap,
                    });
                }
            }
        },
    )?;
    let (hits, escaped) = parts.into_iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let residual = escaped as f64 / cfg.n as f64 * psi_upper_bound(model, escape);
    Ok(MCEstimate::from_counts(hits, cfg, residual))
}

/// `ψ(u, t) = E[1{ruin} · 1{w(Z₁+⋯+Z_K) < t}]`: a ladder walk decides ruin
/// and, on ruin, a first passage to the summed pre-ladder deficits gives the
/// ruin time.
///
/// The first passage runs on its own stream keyed from the replication's
/// first draw, so for a fixed seed the indicator is pathwise monotone in
/// both `u` and `t`.
pub fn estimate_finite_ruin_ladder(model: &RiskModel, u: f64, t: f64, cfg: &McConfig) -> Result<MCEstimate> {
    check_inputs(u, Some(t))?;
    let limits = cfg.limits;
    mc_probability(cfg, |rng| {
        let passage_key: u64 = rng.gen();
        match ladder_walk_deficit(model, u, rng) {
            None => Ok(false),
            Some(deficit) => {
                let mut passage_rng = StreamRng::seed_from_u64(passage_key);
                first_passage_within(model, deficit, t, &mut passage_rng, limits)
            }
        }
    })
}

/// One ladder-conditional pass split by ruin time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinSplit {
    /// `ψ(u, t) = P(τ_u < t)`.
    pub before: MCEstimate,
    /// `ψ(u) − ψ(u, t) = P(t <= τ_u < ∞)`.
    pub after: MCEstimate,
    /// `ψ(u)`.
    pub total: MCEstimate,
}

/// Ladder-conditional estimates of `ψ(u, t)`, its complement within
/// `ψ(u)`, and `ψ(u)` from the same replications. `before` is bit-identical
/// to [`estimate_finite_ruin_ladder`] and `total` to
/// [`estimate_infinite_ruin`] under the same configuration.
pub fn estimate_ruin_split(model: &RiskModel, u: f64, t: f64, cfg: &McConfig) -> Result<RuinSplit> {
    check_inputs(u, Some(t))?;
    let limits = cfg.limits;
    let parts = run_replications(
        cfg,
        || (0u64, 0u64),
        |acc, rng| {
            let passage_key: u64 = rng.gen();
            if let Some(deficit) = ladder_walk_deficit(model, u, rng) {
                let mut passage_rng = StreamRng::seed_from_u64(passage_key);
                if first_passage_within(model, deficit, t, &mut passage_rng, limits)? {
                    acc.0 += 1;
                } else {
                    acc.1 += 1;
                }
            }
            Ok(())
        },
    )?;
    let (before, after) = parts.into_iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(RuinSplit {
        before: MCEstimate::from_counts(before, cfg, 0.0),
        after: MCEstimate::from_counts(after, cfg, 0.0),
        total: MCEstimate::from_counts(before + after, cfg, 0.0),
    })
}

/// `ψ(u)` as the frequency of ruined ladder walks; no time horizon.
///
/// Consumes randomness like [`estimate_finite_ruin_ladder`], so with a
/// shared seed the two agree exactly once the horizon is never binding.
pub fn estimate_infinite_ruin(model: &RiskModel, u: f64, cfg: &McConfig) -> Result<MCEstimate> {
    check_inputs(u, None)?;
    mc_probability(cfg, |rng| {
        let _passage_key: u64 = rng.gen();
        Ok(ladder_walk_deficit(model, u, rng).is_some())
    })
}

/// `P(V_t > u)` for the M/G/1 workload started empty (drift −1 reflected at
/// zero, claims as upward jumps at rate λ). Equals `ψ(u, t)` by duality.
pub fn estimate_workload_tail(model: &RiskModel, u: f64, t: f64, cfg: &McConfig) -> Result<MCEstimate> {
    check_inputs(u, Some(t))?;
    let lambda = model.lambda();
    let claims = *model.claims();
    let cap = cfg.limits.step_cap;
    mc_probability(cfg, |rng| {
        let (mut work, mut clock) = (0.0f64, 0.0);
        let mut events = 0u64;
        loop {
            let gap = exp_gap(rng, lambda);
            if clock + gap >= t {
                return Ok((work - (t - clock)).max(0.0) > u);
            }
            clock += gap;
            work = (work - gap).max(0.0) + claims.sample(rng);
            events += 1;
            if events >= cap {
                return Err(RuinError::StepCap {
                    what: "workload path",
                    cap,
                });
            }
        }
    })
}

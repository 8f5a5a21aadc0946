//! Exact samplers for the ladder structure of the claim surplus process and
//! for first passages of the dual process `R_t` (unit upward drift, claims as
//! downward jumps at rate λ).

use rand::Rng;

use crate::error::{ensure_nonneg, ensure_positive, Result, RuinError};
use crate::transforms::RiskModel;

pub const DEFAULT_STEP_CAP: u64 = 100_000_000;

/// One ladder step: overshoot `y` and the surplus `z` just before it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderPair {
    pub y: f64,
    pub z: f64,
}

/// Ladder steps up to and including the one that crosses `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct RuinLadderPath {
    pub ys: Vec<f64>,
    pub zs: Vec<f64>,
}

impl RuinLadderPath {
    /// Number of ladder epochs `K(u)`.
    pub fn k(&self) -> usize {
        self.ys.len()
    }

    pub fn deficit_sum(&self) -> f64 {
        self.zs.iter().sum()
    }

    pub fn height_sum(&self) -> f64 {
        self.ys.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPassageSample {
    pub time: f64,
    /// Poisson arrivals consumed before the level was hit.
    pub jumps: u64,
}

/// Event caps turning almost-surely finite loops into checkable failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimLimits {
    pub step_cap: u64,
}

impl Default for SimLimits {
    fn default() -> Self {
        Self {
            step_cap: DEFAULT_STEP_CAP,
        }
    }
}

#[inline]
pub(crate) fn exp_gap<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -(-rng.gen::<f64>()).ln_1p() / rate
}

/// Draws `(Y, Z)` with `P(Y > y, Z > z) = F̄₀(y + z)`.
///
/// The joint density is `f(y+z)/μ`, so `T = Y + Z` is size-biased and the
/// split is uniform given `T`.
pub fn sample_ladder_pair<R: Rng + ?Sized>(model: &RiskModel, rng: &mut R) -> LadderPair {
    let t = model.claims().sample_size_biased(rng);
    let u: f64 = rng.gen();
    LadderPair {
        y: u * t,
        z: (1.0 - u) * t,
    }
}

/// Runs the ladder walk: each step exists with probability ρ; returns the
/// path once cumulative heights exceed `u`, or `None` if the walk dies first.
/// `P(result is Some) = ψ(u)`.
pub fn sample_ruin_ladder_walk<R: Rng + ?Sized>(
    model: &RiskModel,
    u: f64,
    rng: &mut R,
) -> Result<Option<RuinLadderPath>> {
    ensure_nonneg("u", u)?;
    let rho = model.rho();
    let mut path = RuinLadderPath {
        ys: Vec::new(),
        zs: Vec::new(),
    };
    let mut height = 0.0;
    loop {
        if rng.gen::<f64>() >= rho {
            return Ok(None);
        }
        let pair = sample_ladder_pair(model, rng);
        height += pair.y;
        path.ys.push(pair.y);
        path.zs.push(pair.z);
        if height > u {
            return Ok(Some(path));
        }
    }
}

/// Allocation-free ladder walk returning `Σ Z` on ruin.
pub(crate) fn ladder_walk_deficit<R: Rng + ?Sized>(model: &RiskModel, u: f64, rng: &mut R) -> Option<f64> {
    let rho = model.rho();
    let (mut height, mut deficit) = (0.0, 0.0);
    loop {
        if rng.gen::<f64>() >= rho {
            return None;
        }
        let pair = sample_ladder_pair(model, rng);
        height += pair.y;
        deficit += pair.z;
        if height > u {
            return Some(deficit);
        }
    }
}

/// First-passage time `w(z)` of `R_t` to level `z`, event by event: with
/// level `ℓ` and next gap `G`, finish at `t + (z − ℓ)` if `ℓ + G >= z`,
/// otherwise move to `ℓ + G − X`.
pub fn sample_first_passage<R: Rng + ?Sized>(
    model: &RiskModel,
    z: f64,
    rng: &mut R,
    limits: SimLimits,
) -> Result<FirstPassageSample> {
    ensure_positive("z", z)?;
    first_passage_from(model, z, rng, limits)
}

fn first_passage_from<R: Rng + ?Sized>(
    model: &RiskModel,
    z: f64,
    rng: &mut R,
    limits: SimLimits,
) -> Result<FirstPassageSample> {
    let lambda = model.lambda();
    let claims = model.claims();
    let (mut level, mut time) = (0.0, 0.0);
    let mut jumps = 0u64;
    loop {
        let gap = exp_gap(rng, lambda);
        if level + gap >= z {
            return Ok(FirstPassageSample {
                time: time + (z - level),
                jumps,
            });
        }
        time += gap;
        level += gap - claims.sample(rng);
        jumps += 1;
        if jumps >= limits.step_cap {
            return Err(RuinError::StepCap {
                what: "first passage",
                cap: limits.step_cap,
            });
        }
    }
}

/// Whether `w(z) <= horizon`, stopping as soon as the answer is known.
/// Consumes randomness identically to [`sample_first_passage`] up to the
/// stopping point.
pub fn first_passage_within<R: Rng + ?Sized>(
    model: &RiskModel,
    z: f64,
    horizon: f64,
    rng: &mut R,
    limits: SimLimits,
) -> Result<bool> {
    ensure_nonneg("z", z)?;
    if z > horizon {
        return Ok(false);
    }
    let lambda = model.lambda();
    let claims = model.claims();
    let (mut level, mut time) = (0.0, 0.0);
    let mut jumps = 0u64;
    loop {
        let gap = exp_gap(rng, lambda);
        if level + gap >= z {
            return Ok(time + (z - level) <= horizon);
        }
        time += gap;
        level += gap - claims.sample(rng);
        // drift is at most 1, so the level still to climb bounds the time left
        if time + (z - level) > horizon {
            return Ok(false);
        }
        jumps += 1;
        if jumps >= limits.step_cap {
            return Err(RuinError::StepCap {
                what: "first passage",
                cap: limits.step_cap,
            });
        }
    }
}

/// Busy period `E = w(X)` of the dual M/G/1 queue.
pub fn sample_busy_period<R: Rng + ?Sized>(model: &RiskModel, rng: &mut R, limits: SimLimits) -> Result<f64> {
    let x = model.claims().sample(rng);
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(first_passage_from(model, x, rng, limits)?.time)
}

/// Busy period via the branching identity `E = X + Σ_{i ≤ N(X)} E_i`, run
/// with a pending-work counter instead of recursion. Kept as a cross-check
/// of [`sample_busy_period`].
pub fn sample_busy_period_branching<R: Rng + ?Sized>(
    model: &RiskModel,
    rng: &mut R,
    limits: SimLimits,
) -> Result<f64> {
    let lambda = model.lambda();
    let mut total = 0.0;
    let mut pending: u64 = 1;
    let mut events = 0u64;
    while pending > 0 {
        pending -= 1;
        let x = model.claims().sample(rng);
        total += x;
        // arrivals during this service
        let mut clock = exp_gap(rng, lambda);
        while clock < x {
            pending += 1;
            clock += exp_gap(rng, lambda);
        }
        events += 1;
        if events >= limits.step_cap {
            return Err(RuinError::StepCap {
                what: "busy period (branching)",
                cap: limits.step_cap,
            });
        }
    }
    Ok(total)
}

//! Distributional invariants of the ladder and first-passage samplers,
//! checked by Monte Carlo against closed forms and against each other.

use rand::SeedableRng;

use ruinlab::asymptotics::{ladder_sum_second_order, ConstantMode};
use ruinlab::ladder::{
    sample_busy_period, sample_first_passage, sample_ladder_pair, sample_ruin_ladder_walk, SimLimits,
};
use ruinlab::rng::{substream, StreamRng};
use ruinlab::simulate::{estimate_finite_ruin_direct, estimate_infinite_ruin, mc_mean, mc_probability};
use ruinlab::{ClaimModel, McConfig, RiskModel};

const KS_CRITICAL_1PCT: f64 = 1.627_61;

fn lomax32() -> RiskModel {
    RiskModel::new(ClaimModel::lomax(3.0, 2.0).unwrap(), 0.5).unwrap()
}

fn cfg(n: u64, seed: u64) -> McConfig {
    McConfig::new(n, seed, 2).unwrap()
}

fn two_sample_ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

fn ks_critical(n: usize, m: usize) -> f64 {
    KS_CRITICAL_1PCT * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// Mean and batch-means standard error of the sample variance; the plain
/// delta-method error needs a fourth moment heavy-tailed passages lack.
fn variance_with_error(xs: &[f64], batches: usize) -> (f64, f64) {
    let var = |s: &[f64]| {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (s.len() - 1) as f64
    };
    let per: Vec<f64> = xs.chunks(xs.len() / batches).map(var).collect();
    let mean = per.iter().sum::<f64>() / per.len() as f64;
    let sd = (per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (per.len() - 1) as f64).sqrt();
    (var(xs), sd / (per.len() as f64).sqrt())
}

#[test]
fn ladder_heights_and_deficits_are_exchangeable() {
    let m = lomax32();
    let n = 200_000;
    let (mut ys, mut zs) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n as u64 {
        let p = sample_ladder_pair(&m, &mut substream(1, i));
        ys.push(p.y);
        zs.push(p.z);
    }
    let y_mean = ys.iter().sum::<f64>() / n as f64;
    let d = two_sample_ks(ys, zs);
    assert!(d < ks_critical(n, n), "D = {d}");
    // E[Y] = ∫F̄₀ = 2; the variance of Y is infinite, so allow a wide band
    assert!((y_mean - 2.0).abs() < 0.1, "{y_mean}");
}

#[test]
fn first_passage_mean_and_variance_at_unit_level() {
    let m = lomax32();
    let n = 1_000_000u64;
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            sample_first_passage(&m, 1.0, &mut substream(2, i), SimLimits::default())
                .unwrap()
                .time
        })
        .collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!((mean - 2.0).abs() < 3.0 * sd / (n as f64).sqrt(), "{mean}");
    let (var, err) = variance_with_error(&xs, 100);
    assert!((var - 16.0).abs() < 3.0 * err, "{var} ± {err}");
    assert!(xs.iter().all(|&w| w >= 1.0));
}

#[test]
fn first_passage_is_additive_in_level() {
    let m = lomax32();
    let limits = SimLimits::default();
    let n = 400_000u64;
    let whole: Vec<f64> = (0..n)
        .map(|i| {
            sample_first_passage(&m, 2.0, &mut substream(3, i), limits)
                .unwrap()
                .time
        })
        .collect();
    let split: Vec<f64> = (0..n)
        .map(|i| {
            let rng = &mut substream(4, i);
            sample_first_passage(&m, 1.0, rng, limits).unwrap().time
                + sample_first_passage(&m, 1.0, rng, limits).unwrap().time
        })
        .collect();
    let stats = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let (var, var_err) = variance_with_error(xs, 100);
        (mean, (var / xs.len() as f64).sqrt(), var, var_err)
    };
    let (m1, e1, v1, ve1) = stats(&whole);
    let (m2, e2, v2, ve2) = stats(&split);
    assert!((m1 - m2).abs() < 3.0 * (e1 * e1 + e2 * e2).sqrt(), "{m1} vs {m2}");
    assert!(
        (v1 - v2).abs() < 3.0 * (ve1 * ve1 + ve2 * ve2).sqrt(),
        "{v1} vs {v2}"
    );
    assert!(two_sample_ks(whole, split) < ks_critical(n as usize, n as usize));
}

#[test]
fn laplace_functional_of_first_passage() {
    let m = lomax32();
    let s = 0.3;
    let est = mc_mean(&cfg(1_000_000, 5), |rng| {
        Ok((-s * sample_first_passage(&m, 1.0, rng, SimLimits::default())?.time).exp())
    })
    .unwrap();
    let exact = (-m.kappa_inverse(s).unwrap()).exp();
    assert!(
        (est.mean - exact).abs() < 3.0 * est.stderr,
        "{} vs {exact}",
        est.mean
    );
}

#[test]
fn busy_period_without_arrivals_is_the_claim() {
    let m = RiskModel::new(ClaimModel::lomax(3.0, 2.0).unwrap(), 1e-9).unwrap();
    for i in 0..1000 {
        let e = sample_busy_period(&m, &mut substream(6, i), SimLimits::default()).unwrap();
        let x = m.claims().sample(&mut substream(6, i));
        assert!((e - x).abs() < 1e-6, "{e} vs {x}");
    }
}

#[test]
fn ladder_walk_matches_direct_path_at_infinite_horizon() {
    let m = lomax32();
    for (k, u) in [1.0, 5.0].into_iter().enumerate() {
        let walk = estimate_infinite_ruin(&m, u, &cfg(1_000_000, 10 + k as u64)).unwrap();
        // truncation level chosen so the bias bound stays below 0.1·stderr
        let direct_cfg = cfg(200_000, 20 + k as u64).with_escape_tol(2e-5).unwrap();
        let direct = estimate_finite_ruin_direct(&m, u, f64::INFINITY, &direct_cfg).unwrap();
        assert!(direct.residual_bound < 0.1 * direct.stderr, "{direct:?}");
        let z = (walk.value - direct.value).abs() / (walk.stderr.powi(2) + direct.stderr.powi(2)).sqrt();
        assert!(z < 3.0, "u={u}: {} vs {} (z = {z})", walk.value, direct.value);
    }
}

#[test]
fn conditional_ruin_time_sum_and_summed_forms_agree() {
    // given a ruinous ladder path, compare w(Z₁+⋯+Z_K) with Σ w_i(Z_i)
    let m = lomax32();
    let limits = SimLimits::default();
    let (mut summed, mut sum_of) = (Vec::new(), Vec::new());
    let mut i = 0u64;
    while summed.len() < 100_000 {
        let rng = &mut substream(30, i);
        i += 1;
        let Some(path) = sample_ruin_ladder_walk(&m, 5.0, rng).unwrap() else {
            continue;
        };
        let mut passage = StreamRng::seed_from_u64(i);
        summed.push(
            sample_first_passage(&m, path.deficit_sum(), &mut passage, limits)
                .unwrap()
                .time,
        );
        let mut passage = StreamRng::seed_from_u64(i ^ 0x9e37_79b9_7f4a_7c15);
        let pieces: f64 = path
            .zs
            .iter()
            .map(|&z| sample_first_passage(&m, z, &mut passage, limits).unwrap().time)
            .sum();
        sum_of.push(pieces);
    }
    let n = summed.len();
    assert!(two_sample_ks(summed, sum_of) < ks_critical(n, n));
}

#[test]
fn ladder_sum_expansion_against_monte_carlo() {
    // P(Y₁ <= u, Y₁+Y₂ > u, Z₁+Z₂ > xu) = F̄₀(u+xu) + c·F̄(u+xu) + o(F̄(u))
    let m = lomax32();
    let (u, x) = (50.0, 1.0);
    let est = mc_probability(&cfg(10_000_000, 40), |rng| {
        let a = sample_ladder_pair(&m, rng);
        let b = sample_ladder_pair(&m, rng);
        Ok(a.y <= u && a.y + b.y > u && a.z + b.z > x * u)
    })
    .unwrap();
    let level = u + x * u;
    let first = m.claims().integrated_tail(level).unwrap();
    let fbar = m.claims().tail(level).unwrap();
    let verbatim = ladder_sum_second_order(&m, 2, u, x, ConstantMode::PaperVerbatim).unwrap();
    let half = ladder_sum_second_order(&m, 2, u, x, ConstantMode::HalfCorrection).unwrap();
    // the correction is real and positive, and the MC sits between the
    // first-order value and the larger constant
    assert!(est.value - first > 3.0 * est.stderr);
    assert!(est.value < verbatim + 3.0 * est.stderr);
    let implied = (est.value - first) / fbar;
    let (c_verbatim, c_half) = ((verbatim - first) / fbar, (half - first) / fbar);
    assert!(
        (implied - c_half).abs() < (implied - c_verbatim).abs(),
        "implied constant {implied} vs {c_half} / {c_verbatim}"
    );
}

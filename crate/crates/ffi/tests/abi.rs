use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use ruinlab_ffi::*;

fn lomax() -> *mut RlModel {
    let mut m = ptr::null_mut();
    assert_eq!(rl_model_new_lomax(3.0, 2.0, 0.5, &mut m), RlStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    let p = rl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions_match_closed_forms() {
    let m = lomax();
    let mut v = 0.0;
    unsafe {
        assert_eq!(rl_model_rho(m, &mut v), RlStatus::Ok);
        assert_eq!(v, 0.5);
        assert_eq!(rl_claim_tail(m, 2.0, &mut v), RlStatus::Ok);
        assert!((v - 0.125).abs() < 1e-15);
        assert_eq!(rl_integrated_tail(m, 98.0, &mut v), RlStatus::Ok);
        assert!((v - 1.0 / 2500.0).abs() < 1e-18);
        assert_eq!(rl_first_order_psi(m, 100.0, 1.0, &mut v), RlStatus::Ok);
        assert!((v - 5.0 / 9.0 / 2601.0).abs() / v < 1e-12);
        assert_eq!(rl_infinite_ruin_asymptotic(m, 100.0, &mut v), RlStatus::Ok);
        assert!((v - 1.0 / 2601.0).abs() / v < 1e-12);

        let mut k = 0.0;
        assert_eq!(rl_kappa(m, 1.0, &mut k), RlStatus::Ok);
        assert_eq!(rl_kappa_inverse(m, k, &mut v), RlStatus::Ok);
        assert!((v - 1.0).abs() < 1e-10);

        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(
            rl_busy_period_transform(m, 0.0, 0.0, &mut re, &mut im),
            RlStatus::Ok
        );
        assert_eq!((re, im), (1.0, 0.0));
        rl_model_free(m);
    }
}

#[test]
fn second_order_terms() {
    let m = lomax();
    let mut a = RlApprox::default();
    unsafe {
        let s = rl_second_order_psi(m, 100.0, 1.0, RlConstantMode::PaperVerbatim, f64::NAN, &mut a);
        assert_eq!(s, RlStatus::Ok);
        assert!((a.term1 - 1.0 / 5776.0).abs() / a.term1 < 1e-12);
        assert!((a.term2 - 12.0 / 76f64.powi(3)).abs() / a.term2 < 1e-12);
        assert!((a.psi_u - 1.0 / 2601.0).abs() < 1e-15);
        assert_eq!(a.total, a.term1 + a.term2 + a.term3);

        let s = rl_second_order_psi(m, 100.0, 1.0, RlConstantMode::HalfCorrection, 3e-4, &mut a);
        assert_eq!(s, RlStatus::Ok);
        assert!((a.term2 - 6.0 / 76f64.powi(3)).abs() / a.term2 < 1e-12);
        assert_eq!(a.psi_u, 3e-4);
        rl_model_free(m);
    }
}

#[test]
fn estimators_are_deterministic_and_consistent() {
    let m = lomax();
    let cfg = RlMcConfig {
        n: 20_000,
        seed: 5,
        workers: 2,
    };
    let mut est = [RlEstimate::default(); 3];
    unsafe {
        for (slot, which) in
            est.iter_mut()
                .zip([RlEstimator::Direct, RlEstimator::Ladder, RlEstimator::Workload])
        {
            assert_eq!(
                rl_estimate_finite_ruin(m, 5.0, 20.0, which, &cfg, slot),
                RlStatus::Ok
            );
        }
        let mut again = RlEstimate::default();
        assert_eq!(
            rl_estimate_finite_ruin(m, 5.0, 20.0, RlEstimator::Ladder, &cfg, &mut again),
            RlStatus::Ok
        );
        assert_eq!(again, est[1]);
        for pair in [(0, 1), (0, 2), (1, 2)] {
            let (a, b) = (est[pair.0], est[pair.1]);
            let z = (a.value - b.value).abs() / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!(z < 4.0, "{pair:?}: {a:?} {b:?}");
        }
        let mut inf = RlEstimate::default();
        assert_eq!(rl_estimate_infinite_ruin(m, 0.0, &cfg, &mut inf), RlStatus::Ok);
        assert!((inf.value - 0.5).abs() < 4.0 * inf.std_error);
        assert_eq!(inf.n, 20_000);
        assert_eq!(inf.has_wilson, 0);
        rl_model_free(m);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut m = ptr::null_mut();
    assert_eq!(rl_model_new_lomax(3.0, 2.0, 1.0, &mut m), RlStatus::NetProfit);
    assert!(m.is_null());
    assert!(last_error().contains("net profit condition"));

    assert_eq!(
        rl_model_new_lomax(1.5, 2.0, 0.1, &mut m),
        RlStatus::InvalidArgument
    );
    assert_eq!(
        rl_model_new_lomax(3.0, 2.0, 0.5, ptr::null_mut()),
        RlStatus::NullPointer
    );
    assert!(last_error().contains("null pointer"));

    assert_eq!(rl_model_new_exponential(1.0, 0.5, &mut m), RlStatus::Ok);
    let mut v = 0.0;
    unsafe {
        assert_eq!(
            rl_first_order_psi(m, 10.0, 1.0, &mut v),
            RlStatus::UnsupportedFamily
        );
        assert!(last_error().contains("exponential"));
        assert_eq!(rl_claim_tail(m, -1.0, &mut v), RlStatus::InvalidArgument);
        assert_eq!(rl_claim_tail(m, 1.0, ptr::null_mut()), RlStatus::NullPointer);
        assert_eq!(rl_claim_tail(ptr::null(), 1.0, &mut v), RlStatus::NullPointer);
        let mut e = RlEstimate::default();
        assert_eq!(
            rl_estimate_infinite_ruin(m, 1.0, ptr::null(), &mut e),
            RlStatus::NullPointer
        );
        let bad = RlMcConfig {
            n: 0,
            seed: 1,
            workers: 1,
        };
        assert_eq!(
            rl_estimate_infinite_ruin(m, 1.0, &bad, &mut e),
            RlStatus::InvalidArgument
        );
        rl_model_free(m);
        rl_model_free(ptr::null_mut());
    }
}

#[test]
fn status_strings_are_static() {
    for s in [RlStatus::Ok, RlStatus::NetProfit, RlStatus::Panic] {
        let text = unsafe { CStr::from_ptr(rl_status_string(s)) }.to_str().unwrap();
        assert!(!text.is_empty());
    }
}

#[test]
fn generated_header_compiles_as_c() {
    let header_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(header_dir.join("ruinlab.h").exists());
    let src = std::env::temp_dir().join(format!("ruinlab_header_check_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include <stdio.h>\n#include \"ruinlab.h\"\n\
         int main(void) { RlModel *m = NULL; RlEstimate e; (void)e.std_error;\n\
         return rl_model_new_lomax(3.0, 2.0, 0.5, &m) == RL_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = match Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler on PATH; skipping header check");
            return;
        }
    };
    let _ = std::fs::remove_file(&src);
    assert!(status.success());
}

use std::ffi::CStr;
use std::ptr;

use steklov_ffi::*;

fn last_error() -> String {
    let p = stk_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// K(k) from its hypergeometric power series.
fn k_series(k: f64) -> f64 {
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for n in 1..20000 {
        let r = (2 * n - 1) as f64 / (2 * n) as f64;
        term *= r * r * k * k;
        sum += term;
        if term < 1e-18 {
            break;
        }
    }
    std::f64::consts::FRAC_PI_2 * sum
}

/// Eigenvalues of the quadratic family, 1 + sech(2πnτ) with τ = K(k)/K(k′)
/// and k = (C − 1)/(C + 1).
fn quadratic_lambda(c: f64, n: u32) -> f64 {
    let k = (c - 1.0) / (c + 1.0);
    let tau = k_series(k) / k_series((1.0 - k * k).sqrt());
    1.0 + 1.0 / (2.0 * std::f64::consts::PI * tau * n as f64).cosh()
}

#[test]
fn map_round_trip() {
    let mut m = ptr::null_mut();
    let num = [-0.1, 1.0, 0.1];
    let den = [1.0];
    let st = unsafe { stk_map_new(num.as_ptr(), 3, den.as_ptr(), 1, &mut m) };
    assert_eq!(st, StkStatus::Ok);
    assert_eq!(unsafe { stk_map_degree(m) }, 2);
    let mut y = 0.0;
    assert_eq!(unsafe { stk_map_eval(m, 0.5, &mut y) }, StkStatus::Ok);
    assert!((y - (-0.1 + 0.5 + 0.025)).abs() < 1e-15);
    unsafe { stk_map_free(m) };
}

#[test]
fn errors_are_reported() {
    let mut m = ptr::null_mut();
    let st = unsafe { stk_map_quadratic(0.5, &mut m) };
    assert_eq!(st, StkStatus::InvalidInput);
    assert!(m.is_null());
    assert!(last_error().contains("C > 1"));

    let st = unsafe { stk_map_new(ptr::null(), 2, ptr::null(), 0, &mut m) };
    assert_eq!(st, StkStatus::NullPointer);

    let mut y = 0.0;
    assert_eq!(unsafe { stk_map_eval(ptr::null(), 0.0, &mut y) }, StkStatus::NullPointer);
    unsafe {
        stk_map_free(ptr::null_mut());
        stk_spectrum_free(ptr::null_mut());
        stk_string_free(ptr::null_mut());
    }
}

#[test]
fn quadratic_spectrum_through_handles() {
    let c = 3.0;
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { stk_map_quadratic(c, &mut m) }, StkStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { stk_spectrum_solve(m, 24, &mut s) }, StkStatus::Ok);
    let len = unsafe { stk_spectrum_len(s) };
    assert!(len >= 4);

    for n in 1..=4u32 {
        let mut l = 0.0;
        assert_eq!(unsafe { stk_spectrum_lambda(s, n as usize - 1, &mut l) }, StkStatus::Ok);
        let exact = quadratic_lambda(c, n);
        assert!((l - exact).abs() < 1e-8 * exact, "n = {n}: {l} vs {exact}");
    }

    let mut n = 0usize;
    assert_eq!(unsafe { stk_spectrum_coefficients(s, 0, ptr::null_mut(), 0, &mut n) }, StkStatus::Ok);
    assert_eq!(n, 24);
    let mut buf = vec![0.0; n];
    assert_eq!(unsafe { stk_spectrum_coefficients(s, 0, buf.as_mut_ptr(), n, &mut n) }, StkStatus::Ok);
    let maxabs = buf.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!((maxabs - 1.0).abs() < 1e-12);

    // u(x) = Σ c_k sin(kθ) evaluated directly.
    let x: f64 = 0.3;
    let th = x.acos();
    let direct: f64 = buf.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * th).sin()).sum();
    let mut u = 0.0;
    assert_eq!(unsafe { stk_spectrum_eval(s, 0, x, &mut u) }, StkStatus::Ok);
    assert!((u - direct).abs() < 1e-12);

    assert_eq!(unsafe { stk_spectrum_eval(s, 0, 1.5, &mut u) }, StkStatus::InvalidInput);
    let mut l = 0.0;
    assert_eq!(unsafe { stk_spectrum_lambda(s, len, &mut l) }, StkStatus::IndexOutOfRange);
    unsafe {
        stk_spectrum_free(s);
        stk_map_free(m);
    }
}

#[test]
fn cubic_analysis_and_moduli() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { stk_map_ps3(5.0, 0.8, 0.99, &mut m) }, StkStatus::Ok);
    assert_eq!(unsafe { stk_map_degree(m) }, 3);
    let mut t = [0.0f64; 3];
    assert_eq!(unsafe { stk_pants_moduli(m, t.as_mut_ptr()) }, StkStatus::Ok);
    assert!(t.iter().all(|v| v.is_finite()));

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { stk_spectrum_solve(m, 48, &mut s) }, StkStatus::Ok);
    let len = unsafe { stk_spectrum_len(s) };
    let mut idx = None;
    for i in 0..len {
        let (mut l, mut sym) = (0.0, 0);
        unsafe {
            stk_spectrum_lambda(s, i, &mut l);
            stk_spectrum_symmetry(s, i, &mut sym);
        }
        if sym == 1 && (l - 1.0).abs() > 1e-4 {
            idx = Some(i);
            break;
        }
    }
    let i = idx.expect("an antisymmetric converged pair");
    let mut json = ptr::null_mut();
    let st = unsafe { stk_spectrum_analyze(s, i, &mut json) };
    assert_eq!(st, StkStatus::Ok, "{}", if st == StkStatus::Ok { String::new() } else { last_error() });
    let text = unsafe { CStr::from_ptr(json) }.to_string_lossy().into_owned();
    assert!(text.contains("\"symmetry\": \"antisymmetric\""));
    unsafe {
        stk_string_free(json);
        stk_spectrum_free(s);
        stk_map_free(m);
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(stk_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_symbol() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/steklov.h")).unwrap();
    for sym in [
        "stk_last_error_message",
        "stk_version",
        "stk_map_new",
        "stk_map_quadratic",
        "stk_map_ps3",
        "stk_map_degree",
        "stk_map_eval",
        "stk_map_free",
        "stk_spectrum_solve",
        "stk_spectrum_len",
        "stk_spectrum_convergence_warning",
        "stk_spectrum_lambda",
        "stk_spectrum_symmetry",
        "stk_spectrum_coefficients",
        "stk_spectrum_eval",
        "stk_spectrum_analyze",
        "stk_spectrum_free",
        "stk_pants_moduli",
        "stk_string_free",
    ] {
        assert!(h.contains(&format!("{sym}(")), "{sym} missing from header");
    }
    assert!(h.contains("typedef struct StkMap StkMap;"));
    assert!(h.contains("STK_STATUS_INVARIANT_VIOLATION = 4"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let dir = tempdir();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        "#include \"steklov.h\"\nint main(void) { StkMap *m = 0; StkStatus s = stk_map_quadratic(3.0, &m); (void)s; return 0; }\n",
    )
    .unwrap();
    let out = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc);
        }
    }
    Err(())
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("steklov-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

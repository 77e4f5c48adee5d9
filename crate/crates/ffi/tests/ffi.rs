use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use homoclinic_ffi::*;

fn desk_json() -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/d1.json");
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn last_error() -> String {
    let p = hc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn desk_problem() -> *mut HcProblem {
    let mut pr = ptr::null_mut();
    assert_eq!(unsafe { hc_problem_from_json(desk_json().as_ptr(), &mut pr) }, HcStatus::Ok);
    assert!(!pr.is_null());
    pr
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(hc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn solve_desk_levels() {
    let pr = desk_problem();
    let mut levels = 0;
    assert_eq!(unsafe { hc_problem_levels(pr, &mut levels) }, HcStatus::Ok);
    assert_eq!(levels, 5);
    let mut prev = f64::INFINITY;
    for n in 1..=levels {
        let mut sol = ptr::null_mut();
        assert_eq!(unsafe { hc_solve_level(pr, n, &mut sol) }, HcStatus::Ok, "{}", last_error());
        let mut s = HcSummary::default();
        assert_eq!(unsafe { hc_solution_summary(sol, &mut s) }, HcStatus::Ok);
        assert_eq!(s.n, n);
        assert_eq!(s.certified, 1);
        assert!(s.eta <= prev);
        prev = s.eta;

        // too short a buffer reports the needed length
        let mut written = 0;
        let status = unsafe { hc_solution_values(sol, ptr::null_mut(), 0, &mut written) };
        assert_eq!(status, HcStatus::BufferTooSmall);
        assert_eq!(written as i64, s.window_hi - s.window_lo + 1);
        let mut buf = vec![0.0; written];
        assert_eq!(unsafe { hc_solution_values(sol, buf.as_mut_ptr(), buf.len(), &mut written) }, HcStatus::Ok);
        assert!(buf.iter().fold(0.0f64, |m, v| m.max(v.abs())) == s.u_max);

        // the returned values reproduce eta
        let mut j = 0.0;
        assert_eq!(unsafe { hc_energy(pr, s.window_lo, buf.as_ptr(), buf.len(), &mut j) }, HcStatus::Ok);
        assert!((j - s.eta).abs() <= 1e-9 * s.eta.abs().max(1.0));
        unsafe { hc_solution_free(sol) };
    }
    assert!(prev < -300.0);
    unsafe { hc_problem_free(pr) };
}

#[test]
fn energy_and_gradient() {
    let pr = desk_problem();
    // single spike of height 2 at site 0: (1/2)(1 + 1 + 2) 4 - 17
    let mut j = 0.0;
    assert_eq!(unsafe { hc_energy(pr, 0, [2.0].as_ptr(), 1, &mut j) }, HcStatus::Ok);
    assert_eq!(j, -9.0);

    let vals = [0.3, 1.7, 0.4];
    let mut g = [0.0; 5];
    assert_eq!(unsafe { hc_gradient(pr, -1, vals.as_ptr(), 3, g.as_mut_ptr(), 5) }, HcStatus::Ok);
    // the padding sites feel only the neighbouring difference
    assert!((g[0] + 0.3).abs() < 1e-15);
    assert!((g[4] + 0.4).abs() < 1e-15);
    let h = 1e-6;
    for i in 0..3 {
        let mut e = [0.0; 2];
        for (s, out) in [h, -h].iter().zip(e.iter_mut()) {
            let mut v = vals;
            v[i] += s;
            assert_eq!(unsafe { hc_energy(pr, -1, v.as_ptr(), 3, out) }, HcStatus::Ok);
        }
        let fd = (e[0] - e[1]) / (2.0 * h);
        assert!((fd - g[i + 1]).abs() < 1e-6, "site {i}: {fd} vs {}", g[i + 1]);
    }
    assert_eq!(unsafe { hc_gradient(pr, -1, vals.as_ptr(), 3, g.as_mut_ptr(), 4) }, HcStatus::BufferTooSmall);
    unsafe { hc_problem_free(pr) };
}

#[test]
fn error_codes() {
    let mut pr = ptr::null_mut();
    assert_eq!(unsafe { hc_problem_from_json(ptr::null(), &mut pr) }, HcStatus::NullPointer);

    let bad = CString::new("{\"p\": 2.0}").unwrap();
    assert_eq!(unsafe { hc_problem_from_json(bad.as_ptr(), &mut pr) }, HcStatus::Config);
    assert!(pr.is_null());
    assert!(!last_error().is_empty());

    let text = desk_json().into_string().unwrap().replace("\"lambda\": 1.0", "\"lambda\": -1.0");
    let neg = CString::new(text).unwrap();
    assert_eq!(unsafe { hc_problem_from_json(neg.as_ptr(), &mut pr) }, HcStatus::Config);
    assert!(last_error().contains("λ is a positive real parameter"));

    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { hc_problem_from_json(invalid.as_ptr().cast(), &mut pr) }, HcStatus::InvalidUtf8);

    let pr = desk_problem();
    assert!(hc_last_error().is_null());
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { hc_solve_level(pr, 0, &mut sol) }, HcStatus::OutOfRange);
    assert_eq!(unsafe { hc_solve_level(pr, 6, &mut sol) }, HcStatus::OutOfRange);
    assert!(sol.is_null());
    let mut j = 0.0;
    assert_eq!(unsafe { hc_energy(pr, 0, [f64::NAN].as_ptr(), 1, &mut j) }, HcStatus::InvalidArgument);
    assert_eq!(unsafe { hc_energy(pr, 0, [1.0].as_ptr(), 0, &mut j) }, HcStatus::InvalidArgument);
    unsafe { hc_problem_free(pr) };
    unsafe { hc_problem_free(ptr::null_mut()) };
    unsafe { hc_solution_free(ptr::null_mut()) };
}

#[test]
fn solver_failure_is_reported() {
    let text = desk_json().into_string().unwrap().replace(
        "\"N\": 5,",
        "\"N\": 5, \"solver\": { \"max_iter\": 1, \"greedy_sweeps\": 0 },",
    );
    let cfg = CString::new(text).unwrap();
    let mut pr = ptr::null_mut();
    assert_eq!(unsafe { hc_problem_from_json(cfg.as_ptr(), &mut pr) }, HcStatus::Ok, "{}", last_error());
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { hc_solve_level(pr, 3, &mut sol) }, HcStatus::Solver);
    assert!(sol.is_null());
    assert!(!last_error().is_empty());
    unsafe { hc_problem_free(pr) };
}

#[test]
fn phi_p_values() {
    let mut v = 0.0;
    assert_eq!(unsafe { hc_phi_p(-2.0, 3.0, &mut v) }, HcStatus::Ok);
    assert_eq!(v, -4.0);
    assert_eq!(unsafe { hc_phi_p(2.0, 1.0, &mut v) }, HcStatus::InvalidArgument);
    assert_eq!(unsafe { hc_phi_p(2.0, 2.0, ptr::null_mut()) }, HcStatus::NullPointer);
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/homoclinic.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["hc_problem_from_json", "hc_solve_level", "hc_solution_values", "HC_STATUS_BUFFER_TOO_SMALL"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"homoclinic.h\"\n\
         int main(void) {\n\
           HcProblem *p = NULL; HcSolution *s = NULL; HcSummary sum; double buf[8]; size_t w;\n\
           if (hc_problem_from_json(\"{}\", &p) != HC_STATUS_OK) return (int)hc_last_error()[0];\n\
           hc_solve_level(p, 1, &s); hc_solution_summary(s, &sum); hc_solution_values(s, buf, 8, &w);\n\
           hc_solution_free(s); hc_problem_free(p); return hc_version()[0];\n\
         }\n",
    )
    .unwrap();
    for (compiler, extra) in [("cc", vec!["-x", "c", "-std=c99"]), ("c++", vec!["-x", "c++"])] {
        let out = match Command::new(compiler)
            .args(&extra)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
            .arg(dir.join("include"))
            .arg(&src)
            .output()
        {
            Ok(o) => o,
            Err(_) => {
                eprintln!("{compiler} not found, skipping");
                continue;
            }
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

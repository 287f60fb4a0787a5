use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use nuspec_ffi::*;

const TRIG: &str = r#"{"family":"trig-scarf","variant":"base","params":{"A":-2.0,"alpha":1.0}}"#;

fn potential(json: &str) -> *mut NuPotential {
    let c = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    let status = unsafe { nu_potential_from_json(c.as_ptr(), &mut p) };
    assert_eq!(status, NuStatus::Ok, "{}", last_error());
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(nu_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn closed_form_levels_through_handles() {
    let p = potential(TRIG);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { nu_spectrum_closed_form(p, 3, &mut s) }, NuStatus::Ok);
    let mut len = 0usize;
    assert_eq!(unsafe { nu_spectrum_len(s, &mut len) }, NuStatus::Ok);
    assert_eq!(len, 4);
    for (i, expect) in [4.0, 9.0, 16.0, 25.0].iter().enumerate() {
        let mut z = NuComplex::default();
        assert_eq!(unsafe { nu_spectrum_energy(s, i, &mut z) }, NuStatus::Ok);
        assert!((z.re - expect).abs() < 1e-12 && z.im == 0.0);
    }
    let mut z = NuComplex::default();
    assert_eq!(unsafe { nu_spectrum_energy(s, 4, &mut z) }, NuStatus::IndexOutOfRange);
    assert!(last_error().contains("out of range"));
    let mut flag = NuRealityFlag::Complex;
    assert_eq!(unsafe { nu_spectrum_reality_flag(s, &mut flag) }, NuStatus::Ok);
    assert_eq!(flag, NuRealityFlag::AllReal);
    unsafe {
        nu_spectrum_free(s);
        nu_potential_free(p);
    }
}

#[test]
fn numeric_pipeline_matches_closed_form() {
    let p = potential(TRIG);
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(nu_spectrum_closed_form(p, 5, &mut a), NuStatus::Ok);
        assert_eq!(nu_spectrum_numeric(p, 5, &mut b), NuStatus::Ok);
        for i in 0..6 {
            let (mut x, mut y) = (NuComplex::default(), NuComplex::default());
            nu_spectrum_energy(a, i, &mut x);
            nu_spectrum_energy(b, i, &mut y);
            assert!((x.re - y.re).abs() <= 1e-8 * x.re.abs());
        }
        nu_spectrum_free(a);
        nu_spectrum_free(b);
        nu_potential_free(p);
    }
}

#[test]
fn json_round_trip_is_canonical() {
    let p = potential(TRIG);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { nu_potential_to_json(p, &mut out) }, NuStatus::Ok);
    let first = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { nu_string_free(out) };
    let q = potential(&first);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { nu_potential_to_json(q, &mut out) }, NuStatus::Ok);
    let second = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    assert_eq!(first, second);
    unsafe {
        nu_string_free(out);
        nu_potential_free(p);
        nu_potential_free(q);
    }
}

#[test]
fn spectrum_json_parses() {
    let p = potential(TRIG);
    let mut s = ptr::null_mut();
    let mut out = ptr::null_mut();
    unsafe {
        nu_spectrum_closed_form(p, 2, &mut s);
        assert_eq!(nu_spectrum_to_json(s, &mut out), NuStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(out).to_str().unwrap()).unwrap();
        assert_eq!(v["entries"].as_array().unwrap().len(), 3);
        assert_eq!(v["reality_flag"], "AllReal");
        nu_string_free(out);
        nu_spectrum_free(s);
        nu_potential_free(p);
    }
}

#[test]
fn errors_set_status_and_message() {
    let bad = CString::new(r#"{"family":"trig-scarf","variant":"base","params":{"alpha":1.0}}"#).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { nu_potential_from_json(bad.as_ptr(), &mut p) }, NuStatus::InvalidSpec);
    assert!(p.is_null());
    assert!(last_error().contains("requires parameter A"));

    assert_eq!(unsafe { nu_potential_from_json(ptr::null(), &mut p) }, NuStatus::NullPointer);

    let q = potential(TRIG);
    let mut z = NuComplex::default();
    assert_eq!(unsafe { nu_potential_evaluate(q, 0.0, &mut z) }, NuStatus::Singularity);
    assert_eq!(unsafe { nu_potential_evaluate(q, std::f64::consts::FRAC_PI_2, &mut z) }, NuStatus::Ok);
    assert!((z.re - 2.0).abs() < 1e-14);
    unsafe { nu_potential_free(q) };
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        nu_potential_free(ptr::null_mut());
        nu_spectrum_free(ptr::null_mut());
        nu_string_free(ptr::null_mut());
    }
}

#[test]
fn no_admissible_branch_status() {
    let p = potential(
        r#"{"family":"trig-scarf","variant":"pt","params":{"A":0.5,"alpha":1.0}}"#,
    );
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { nu_spectrum_numeric(p, 0, &mut s) }, NuStatus::NoAdmissibleBranch);
    assert!(s.is_null());
    unsafe { nu_potential_free(p) };
}

#[test]
fn oracle_eigenvalues_fill_buffer() {
    let p = potential(TRIG);
    let mut buf = [NuComplex::default(); 4];
    let mut total = 0usize;
    let status = unsafe { nu_oracle_eigenvalues(p, 1000, 20.0, buf.as_mut_ptr(), buf.len(), &mut total) };
    assert_eq!(status, NuStatus::Ok, "{}", last_error());
    assert_eq!(total, 1000);
    for (z, expect) in buf.iter().zip([4.0, 9.0, 16.0, 25.0]) {
        assert!((z.re - expect).abs() / expect < 1e-3);
    }
    let mut count_only = 0usize;
    let status = unsafe { nu_oracle_eigenvalues(p, 100, 20.0, ptr::null_mut(), 0, &mut count_only) };
    assert_eq!(status, NuStatus::Ok);
    assert_eq!(count_only, 100);
    unsafe { nu_potential_free(p) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(nu_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/nuspec.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "typedef struct NuPotential NuPotential;",
        "typedef struct NuSpectrum NuSpectrum;",
        "nu_potential_from_json",
        "nu_spectrum_closed_form",
        "nu_oracle_eigenvalues",
        "nu_last_error_message",
        "NuStatus_NoAdmissibleBranch = 8",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // Compile-check the header as C when a compiler is on PATH.
    if let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99", "-Wall", "-Werror"])
        .arg(&header)
        .output()
    {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

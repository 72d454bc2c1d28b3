use std::ffi::{c_char, c_int, CStr, CString};
use std::ptr;

use glauber_ffi::*;

const FREE: &str = "
[potential]
dim = 1
z = 1.0

[box]
side = 4.0

[lattice]
m = 6
cap = 1
state_limit = 1048576
";

fn experiment(toml: &str) -> *mut GlauberExperiment {
    let text = CString::new(toml).unwrap();
    let mut exp = ptr::null_mut();
    let st = unsafe { glauber_experiment_from_toml(text.as_ptr(), &mut exp) };
    assert_eq!(st, GlauberStatus::Ok);
    assert!(!exp.is_null());
    exp
}

fn last_error() -> String {
    let p = glauber_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn free_lattice_gap_through_handles() {
    let exp = experiment(FREE);
    let mut lat = ptr::null_mut();
    unsafe {
        assert_eq!(glauber_lattice_new(exp, &mut lat), GlauberStatus::Ok);
        let mut n = 0usize;
        assert_eq!(glauber_lattice_state_count(lat, &mut n), GlauberStatus::Ok);
        assert_eq!(n, 64);
        let mut gap = 0.0;
        assert_eq!(glauber_lattice_gap(lat, &mut gap), GlauberStatus::Ok);
        // 1 + z v with v = 4 / 6
        assert!((gap - (1.0 + 4.0 / 6.0)).abs() < 1e-10);
        let mut c = 0.0;
        assert_eq!(glauber_lattice_certificate(lat, &mut c), GlauberStatus::Ok);
        assert_eq!(c, 1.0);
        glauber_lattice_free(lat);
        glauber_experiment_free(exp);
    }
}

#[test]
fn bad_config_sets_status_and_message() {
    let text = CString::new("potential = [").unwrap();
    let mut exp = ptr::null_mut();
    let st = unsafe { glauber_experiment_from_toml(text.as_ptr(), &mut exp) };
    assert_eq!(st, GlauberStatus::Config);
    assert!(exp.is_null());
    assert!(last_error().contains("TOML"));
    let st = unsafe { glauber_experiment_from_toml(ptr::null(), &mut exp) };
    assert_eq!(st, GlauberStatus::NullPointer);
}

#[test]
fn null_handles_are_rejected() {
    let mut gap = 0.0;
    assert_eq!(
        unsafe { glauber_lattice_gap(ptr::null(), &mut gap) },
        GlauberStatus::NullPointer
    );
    unsafe {
        glauber_lattice_free(ptr::null_mut());
        glauber_experiment_free(ptr::null_mut());
        glauber_string_free(ptr::null_mut());
    }
}

#[test]
fn run_gap_command_returns_json() {
    let dir = tempfile::tempdir().unwrap();
    let toml = format!("output = {:?}\n{FREE}", dir.path().to_string_lossy());
    let exp = experiment(&toml);
    let cmd = CString::new("gap").unwrap();
    let mut json: *mut c_char = ptr::null_mut();
    let mut passed: c_int = 0;
    unsafe {
        assert_eq!(
            glauber_run(exp, cmd.as_ptr(), &mut json, &mut passed),
            GlauberStatus::Ok
        );
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        glauber_string_free(json);
        assert_eq!(passed, 1);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["verdict"], "pass");
        let mut hash = [0 as c_char; 65];
        assert_eq!(
            glauber_experiment_hash(exp, hash.as_mut_ptr(), hash.len()),
            GlauberStatus::Ok
        );
        let h = CStr::from_ptr(hash.as_ptr()).to_str().unwrap();
        assert_eq!(v["config_sha256"], h);
        assert_eq!(
            glauber_experiment_hash(exp, hash.as_mut_ptr(), 10),
            GlauberStatus::InvalidArgument
        );
        let bad = CString::new("bogus").unwrap();
        assert_eq!(
            glauber_run(exp, bad.as_ptr(), &mut json, &mut passed),
            GlauberStatus::InvalidArgument
        );
        glauber_experiment_free(exp);
    }
    assert!(dir.path().join("gap.json").exists());
}

#[test]
fn positive_definite_samples() {
    let n = 1024usize;
    let length = 32.0;
    let h = length / n as f64;
    let x = |k: usize| -0.5 * length + k as f64 * h;
    let gauss: Vec<f64> = (0..n).map(|k| (-x(k) * x(k)).exp() * (2.0 * x(k)).cos()).collect();
    let box_: Vec<f64> = (0..n).map(|k| if x(k).abs() <= 1.0 { 1.0 } else { 0.0 }).collect();
    let (mut passed, mut min_real) = (0, 0.0);
    unsafe {
        assert_eq!(
            glauber_check_positive_definite(gauss.as_ptr(), n, length, 1e-8, &mut passed, &mut min_real),
            GlauberStatus::Ok
        );
        assert_eq!(passed, 1);
        assert_eq!(
            glauber_check_positive_definite(box_.as_ptr(), n, length, 1e-8, &mut passed, &mut min_real),
            GlauberStatus::Ok
        );
        assert_eq!(passed, 0);
        assert!(min_real < 0.0);
        assert_eq!(
            glauber_check_positive_definite(gauss.as_ptr(), 1000, length, 1e-8, &mut passed, &mut min_real),
            GlauberStatus::InvalidArgument
        );
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(glauber_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/glauber.h")).unwrap();
    for name in [
        "glauber_experiment_from_toml",
        "glauber_run",
        "glauber_lattice_gap",
        "glauber_last_error",
        "GLAUBER_STATUS_OK",
        "typedef struct GlauberLattice GlauberLattice",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

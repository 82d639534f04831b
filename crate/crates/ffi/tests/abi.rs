use std::ffi::{CStr, CString};
use std::ptr;

use finjet_ffi::*;

const MODEL: &str = r#"{"kind": "riemannian", "dim": 2, "metric": [["1", "0"], ["0", "1"]]}"#;

fn last_error() -> String {
    unsafe { CStr::from_ptr(finjet_last_error()) }.to_string_lossy().into_owned()
}

fn scenario(model: &str) -> *mut FinjetScenario {
    let json = CString::new(model).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { finjet_scenario_from_model(json.as_ptr(), &mut h) }, FinjetStatus::Ok, "{}", last_error());
    h
}

fn eval(h: *const FinjetScenario, q: &str, x: &[f64], y: &[f64]) -> (FinjetStatus, Vec<f64>) {
    let q = CString::new(q).unwrap();
    let mut buf = vec![0.0; 64];
    let mut len = 0;
    let s = unsafe { finjet_eval(h, q.as_ptr(), x.as_ptr(), y.as_ptr(), x.len(), buf.as_mut_ptr(), buf.len(), &mut len) };
    buf.truncate(len.min(64));
    (s, buf)
}

#[test]
fn eval_through_the_abi() {
    let h = scenario(MODEL);
    assert_eq!(unsafe { finjet_scenario_dim(h) }, 2);
    let (s, g) = eval(h, "g", &[0.1, 0.2], &[1.0, 0.5]);
    assert_eq!(s, FinjetStatus::Ok);
    assert_eq!(g, vec![1.0, 0.0, 0.0, 1.0]);
    let (s, f) = eval(h, "F", &[0.1, 0.2], &[3.0, 4.0]);
    assert_eq!(s, FinjetStatus::Ok);
    assert!((f[0] - 5.0).abs() < 1e-14);
    unsafe { finjet_scenario_free(h) };
}

#[test]
fn status_codes_follow_the_cli() {
    let h = scenario(MODEL);
    let (s, _) = eval(h, "g", &[0.1, 0.2], &[0.0, 0.0]);
    assert_eq!(s, FinjetStatus::Numeric);
    assert!(!last_error().is_empty());
    let (s, _) = eval(h, "nonsense", &[0.1, 0.2], &[1.0, 0.0]);
    assert_eq!(s, FinjetStatus::Config);
    assert!(last_error().contains("unknown quantity"));

    let q = CString::new("chern").unwrap();
    let mut len = 0;
    let mut small = [0.0; 3];
    let s = unsafe { finjet_eval(h, q.as_ptr(), [0.1, 0.2].as_ptr(), [1.0, 0.0].as_ptr(), 2, small.as_mut_ptr(), 3, &mut len) };
    assert_eq!(s, FinjetStatus::BufferTooSmall);
    assert_eq!(len, 8);

    let bad = CString::new("{\"model\": 1}").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { finjet_scenario_load(bad.as_ptr(), &mut out) }, FinjetStatus::Config);
    assert!(out.is_null());
    assert_eq!(unsafe { finjet_scenario_load(ptr::null(), &mut out) }, FinjetStatus::NullPointer);
    unsafe { finjet_scenario_free(h) };
}

#[test]
fn verify_and_diff_reports() {
    let path = CString::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/riemannian2.json")).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { finjet_scenario_load_file(path.as_ptr(), &mut h) }, FinjetStatus::Ok, "{}", last_error());
    let suites = CString::new("homogeneity, connection-compat").unwrap();
    let mut report = ptr::null_mut();
    let s = unsafe { finjet_verify(h, suites.as_ptr(), 7, 1, f64::NAN, &mut report) };
    assert_eq!(s, FinjetStatus::Ok, "{}", last_error());
    let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_owned();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["seed"], 7);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));

    let mut strict = ptr::null_mut();
    assert_eq!(unsafe { finjet_verify(h, suites.as_ptr(), 7, 1, 0.0, &mut strict) }, FinjetStatus::CheckFailed);

    let mut lines = ptr::null_mut();
    let s = unsafe { finjet_report_diff(report, strict, &mut lines) };
    assert_eq!(s, FinjetStatus::CheckFailed);
    assert!(unsafe { CStr::from_ptr(lines) }.to_str().unwrap().contains("REGRESSED"));
    unsafe {
        finjet_string_free(lines);
        finjet_string_free(strict);
        finjet_string_free(report);
        finjet_scenario_free(h);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(finjet_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

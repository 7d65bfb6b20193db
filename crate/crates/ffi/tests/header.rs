use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn header() -> String {
    std::fs::read_to_string(crate_dir().join("include/evcopula.h")).expect("header generated")
}

#[test]
fn header_declares_api() {
    let h = header();
    assert!(h.starts_with("#ifndef EVCOPULA_H"));
    assert!(h.contains("typedef struct EvcCopula EvcCopula;"));
    for name in [
        "evc_status_message",
        "evc_copula_mo",
        "evc_copula_gumbel",
        "evc_copula_pareto",
        "evc_copula_piecewise_linear",
        "evc_copula_free",
        "evc_pickands",
        "evc_copula_cdf",
        "evc_copula_partial_u",
        "evc_coefficients",
        "evc_rho_bounds",
        "evc_tau_bounds",
        "evc_sample",
        "evc_sample_mo",
        "evc_version",
        "EVC_STATUS_OK = 0",
        "EVC_STATUS_PANIC = 7",
    ] {
        assert!(h.contains(name), "{name}");
    }
}

fn static_lib() -> PathBuf {
    let target = crate_dir().join("../../target/ffi-smoke");
    let status = Command::new(env!("CARGO"))
        .args(["build", "--quiet", "-p", "evcopula-ffi", "--target-dir"])
        .arg(&target)
        .current_dir(crate_dir())
        .status()
        .expect("cargo runs");
    assert!(status.success());
    target.join("debug/libevcopula_ffi.a")
}

#[test]
fn c_program_links_and_runs() {
    let lib = static_lib();
    assert!(lib.exists(), "{}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let vals: Vec<f64> = String::from_utf8(out.stdout)
        .unwrap()
        .split_whitespace()
        .map(|x| x.parse().unwrap())
        .collect();
    let expected = [
        3.0 / 7.0,
        1.0 / 3.0,
        0.5,
        0.5f64.powf(1.5),
        3.0 / 7.0,
        33.0 / 49.0,
    ];
    for (x, e) in vals.iter().zip(expected) {
        assert!((x - e).abs() < 1e-11, "{x} vs {e}");
    }
    assert_eq!(vals.len(), 6);
}

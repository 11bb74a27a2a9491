use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use dirac_cavity_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(dc_last_error_message()) }.to_string_lossy().into_owned()
}

fn small_config() -> DcFieldConfig {
    let mut cfg = DcFieldConfig {
        mass_times_r: 0.0,
        split_fraction: 0.0,
        n_local: 0,
        n_global: 0,
        root_tol: 0.0,
        quad_tol: 0.0,
        degeneracy_tol: 0.0,
    };
    assert_eq!(unsafe { dc_config_default(&mut cfg) }, DcStatus::Ok);
    cfg.n_local = 5;
    cfg.n_global = 200;
    cfg
}

fn build(cfg: &DcFieldConfig) -> *mut DcBogoliubovSet {
    let mut set = ptr::null_mut();
    let status = unsafe { dc_set_build(cfg, &mut set) };
    assert_eq!(status, DcStatus::Ok, "{}", last_error());
    assert!(!set.is_null());
    set
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(dc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn massless_roots_are_half_odd_multiples_of_pi() {
    let mut roots = [0.0; 4];
    let status = unsafe { dc_solve_spectrum(0.0, 1.0, 4, 1e-12, roots.as_mut_ptr()) };
    assert_eq!(status, DcStatus::Ok);
    for (k, p) in roots.iter().enumerate() {
        let expected = (k as f64 + 0.5) * std::f64::consts::PI;
        assert!((p - expected).abs() < 1e-14, "{p} vs {expected}");
    }
}

#[test]
fn spectrum_rejects_bad_arguments() {
    let mut roots = [0.0; 2];
    let status = unsafe { dc_solve_spectrum(-1.0, 1.0, 2, 1e-12, roots.as_mut_ptr()) };
    assert_eq!(status, DcStatus::InvalidArgument);
    assert!(!last_error().is_empty());
    let status = unsafe { dc_solve_spectrum(1.0, 1.0, 2, 1e-12, ptr::null_mut()) };
    assert_eq!(status, DcStatus::NullPointer);
}

#[test]
fn coefficient_set_round_trip() {
    let cfg = small_config();
    let set = build(&cfg);
    let (mut nl, mut ng) = (0usize, 0usize);
    assert_eq!(unsafe { dc_set_dimensions(set, &mut nl, &mut ng) }, DcStatus::Ok);
    assert_eq!((nl, ng), (5, 200));

    let mut a = DcComplex::default();
    let mut b = DcComplex::default();
    unsafe {
        assert_eq!(dc_set_coefficient(set, DcRegion::Left as u32, DcCoefficientKind::Alpha as u32, 1, 1, &mut a), DcStatus::Ok);
        assert_eq!(dc_set_coefficient(set, DcRegion::Left as u32, DcCoefficientKind::Beta as u32, 1, 1, &mut b), DcStatus::Ok);
    }
    assert_eq!(a.im, 0.0);
    assert_eq!(b.re, 0.0);
    assert!(a.re.abs() > 0.0 && b.im.abs() > 0.0);

    let mut occ = vec![0.0; 5];
    assert_eq!(unsafe { dc_set_local_occupation(set, 0, occ.as_mut_ptr(), occ.len()) }, DcStatus::Ok);
    assert!(occ.iter().all(|&n| (0.0..=1.0).contains(&n)));

    let mut mirror = vec![0.0; 200];
    assert_eq!(
        unsafe { dc_set_removed_mirror_spectrum(set, mirror.as_mut_ptr(), mirror.len()) },
        DcStatus::Ok
    );
    assert!(mirror.iter().all(|&n| n >= 0.0));

    let mut report = DcConditionReport::default();
    assert_eq!(unsafe { dc_set_check_conditions(set, 5, &mut report) }, DcStatus::Ok);
    assert!(report.cond2_max_err < 1e-2, "{report:?}");

    unsafe { dc_set_free(set) };
}

#[test]
fn invalid_indices_and_buffers_are_reported() {
    let cfg = small_config();
    let set = build(&cfg);
    let mut z = DcComplex::default();
    unsafe {
        assert_eq!(dc_set_coefficient(set, 0, 0, 0, 1, &mut z), DcStatus::InvalidArgument);
        assert_eq!(dc_set_coefficient(set, 0, 0, 6, 1, &mut z), DcStatus::InvalidArgument);
        assert_eq!(dc_set_coefficient(set, 2, 0, 1, 1, &mut z), DcStatus::InvalidArgument);
        assert_eq!(dc_set_coefficient(set, 0, 9, 1, 1, &mut z), DcStatus::InvalidArgument);
        assert_eq!(dc_set_coefficient(ptr::null(), 0, 0, 1, 1, &mut z), DcStatus::NullPointer);
        let mut short = [0.0; 3];
        assert_eq!(dc_set_local_occupation(set, 0, short.as_mut_ptr(), 3), DcStatus::InvalidArgument);
        assert!(last_error().contains("needed"));
        dc_set_free(set);
        dc_set_free(ptr::null_mut());
    }
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = small_config();
    cfg.split_fraction = 1.5;
    let mut set = ptr::null_mut();
    assert_eq!(unsafe { dc_set_build(&cfg, &mut set) }, DcStatus::InvalidArgument);
    assert!(set.is_null());
    assert!(last_error().contains("split_fraction"));
}

#[test]
fn cache_store_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("c.csv").to_str().unwrap()).unwrap();
    let cfg = small_config();
    let set = build(&cfg);
    assert_eq!(unsafe { dc_set_cache_store(set, path.as_ptr()) }, DcStatus::Ok);

    let mut loaded = ptr::null_mut();
    assert_eq!(unsafe { dc_set_cache_load(path.as_ptr(), &cfg, &mut loaded) }, DcStatus::Ok);
    for (i, big_i) in [(1, 1), (3, 17), (5, 200)] {
        for kind in [0, 1] {
            for region in [0, 1] {
                let (mut x, mut y) = (DcComplex::default(), DcComplex::default());
                unsafe {
                    dc_set_coefficient(set, region, kind, i, big_i, &mut x);
                    dc_set_coefficient(loaded, region, kind, i, big_i, &mut y);
                }
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    let mut other = cfg;
    other.mass_times_r = 2.0;
    let mut rejected = ptr::null_mut();
    assert_eq!(unsafe { dc_set_cache_load(path.as_ptr(), &other, &mut rejected) }, DcStatus::CacheInvalid);
    assert!(rejected.is_null());

    let missing = CString::new(dir.path().join("none.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { dc_set_cache_load(missing.as_ptr(), &cfg, &mut rejected) }, DcStatus::Io);
    unsafe {
        dc_set_free(set);
        dc_set_free(loaded);
    }
}

fn profile_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

fn which(tool: &str) -> bool {
    Command::new(tool).arg("--version").output().is_ok()
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn header_links_from_c() {
    let lib = profile_dir().join("libdirac_cavity_ffi.a");
    let header_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    if !which("cc") || !lib.exists() {
        eprintln!("skipping: C compiler or {} not available", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "dirac_cavity.h"

int main(void) {
    DcFieldConfig cfg;
    DcBogoliubovSet *set = NULL;
    DcComplex beta;
    double roots[3];
    if (dc_config_default(&cfg) != DC_STATUS_OK) return 10;
    cfg.n_local = 3;
    cfg.n_global = 50;
    if (dc_solve_spectrum(0.0, 1.0, 3, 1e-12, roots) != DC_STATUS_OK) return 11;
    if (dc_set_build(&cfg, &set) != DC_STATUS_OK) return 12;
    if (dc_set_coefficient(set, DC_REGION_RIGHT, DC_COEFFICIENT_KIND_BETA, 2, 5, &beta) != DC_STATUS_OK) return 13;
    if (dc_set_coefficient(set, 7, DC_COEFFICIENT_KIND_BETA, 2, 5, &beta) != DC_STATUS_INVALID_ARGUMENT) return 14;
    printf("%s %.15f %s\n", dc_version(), roots[0], dc_last_error_message());
    dc_set_free(set);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8_lossy(&run.stdout);
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")), "{text}");
    assert!(text.contains("1.570796326794897"), "{text}");
    assert!(text.contains("unknown region 7"), "{text}");
}

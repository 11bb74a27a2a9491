//! C ABI for `dirac-cavity`.
//!
//! Every function returns a [`DcStatus`]; on failure the message is available
//! from [`dc_last_error_message`] on the same thread. Coefficient sets are
//! opaque handles created by [`dc_set_build`] or [`dc_set_cache_load`] and
//! released with [`dc_set_free`]. Mode indices are 1-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use dirac_cavity::bogoliubov::{build_matrices, check_conditions, BogoliubovSet, Region};
use dirac_cavity::io::{cache_load, cache_store};
use dirac_cavity::observables::{local_occupation, removed_mirror_spectrum};
use dirac_cavity::spectrum::solve_spectrum;
use dirac_cavity::{Error, FieldConfig};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericalFailure = 2,
    Io = 3,
    CacheInvalid = 4,
    Parse = 5,
    NullPointer = 6,
    Panic = 7,
}

/// Values accepted by the `region` parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcRegion {
    Left = 0,
    Right = 1,
}

/// Values accepted by the `kind` parameter of [`dc_set_coefficient`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcCoefficientKind {
    Alpha = 0,
    Beta = 1,
}

/// Mirror of the library configuration. Fill it with [`dc_config_default`]
/// before changing individual fields.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcFieldConfig {
    pub mass_times_r: f64,
    pub split_fraction: f64,
    pub n_local: usize,
    pub n_global: usize,
    pub root_tol: f64,
    pub quad_tol: f64,
    pub degeneracy_tol: f64,
}

impl From<DcFieldConfig> for FieldConfig {
    fn from(c: DcFieldConfig) -> Self {
        FieldConfig {
            mass_times_r: c.mass_times_r,
            split_fraction: c.split_fraction,
            n_local: c.n_local,
            n_global: c.n_global,
            root_tol: c.root_tol,
            quad_tol: c.quad_tol,
            degeneracy_tol: c.degeneracy_tol,
        }
    }
}

impl From<FieldConfig> for DcFieldConfig {
    fn from(c: FieldConfig) -> Self {
        DcFieldConfig {
            mass_times_r: c.mass_times_r,
            split_fraction: c.split_fraction,
            n_local: c.n_local,
            n_global: c.n_global,
            root_tol: c.root_tol,
            quad_tol: c.quad_tol,
            degeneracy_tol: c.degeneracy_tol,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DcComplex {
    pub re: f64,
    pub im: f64,
}

/// Maximum deviations of the truncated unitarity sums.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DcConditionReport {
    pub cond1_max_err: f64,
    pub cond2_max_err: f64,
    pub cond3_combined_max_err: f64,
    pub cond4_max_err: f64,
    pub cond3_unprimed_diagonal_max: f64,
}

/// Opaque coefficient set.
pub struct DcBogoliubovSet {
    inner: BogoliubovSet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> DcStatus {
    match err {
        Error::Domain(_) => DcStatus::InvalidArgument,
        Error::SolverFailure { .. } | Error::QuadratureFailure { .. } => DcStatus::NumericalFailure,
        Error::Io(_) => DcStatus::Io,
        Error::CacheInvalid { .. } => DcStatus::CacheInvalid,
        Error::Parse { .. } | Error::Json(_) => DcStatus::Parse,
    }
}

struct Failure(DcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(DcStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            DcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            DcStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(DcStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, needed: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure(DcStatus::NullPointer, format!("{name} is null")));
    }
    if len < needed {
        return Err(invalid(format!("{name} holds {len} values, {needed} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure(DcStatus::NullPointer, "path is null".into()));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

fn region_arg(region: u32) -> Result<Region, Failure> {
    match region {
        0 => Ok(Region::Left),
        1 => Ok(Region::Right),
        r => Err(invalid(format!("unknown region {r}"))),
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Writes the default configuration into `out`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `DcFieldConfig`.
#[no_mangle]
pub unsafe extern "C" fn dc_config_default(out: *mut DcFieldConfig) -> DcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(DcStatus::NullPointer, "out is null".into()));
        }
        out.write(FieldConfig::default().into());
        Ok(())
    })
}

/// First `count` roots `P_I` of the spectrum condition on an interval of
/// length `length`, written to `out_roots[0..count]`.
///
/// # Safety
/// `out_roots` must point to `count` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dc_solve_spectrum(
    mass_times_r: f64,
    length: f64,
    count: usize,
    tol: f64,
    out_roots: *mut f64,
) -> DcStatus {
    guard(|| {
        let out = out_slice(out_roots, count, count, "out_roots")?;
        let table = solve_spectrum(mass_times_r, length, count, tol)?;
        out.copy_from_slice(table.roots());
        Ok(())
    })
}

/// Builds the coefficient matrices for `config` and stores a new handle in
/// `*out`.
///
/// # Safety
/// `config` must point to a valid `DcFieldConfig` and `out` to writable
/// memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn dc_set_build(config: *const DcFieldConfig, out: *mut *mut DcBogoliubovSet) -> DcStatus {
    guard(|| {
        let cfg = FieldConfig::from(*non_null(config, "config")?);
        if out.is_null() {
            return Err(Failure(DcStatus::NullPointer, "out is null".into()));
        }
        let inner = build_matrices(&cfg)?;
        out.write(Box::into_raw(Box::new(DcBogoliubovSet { inner })));
        Ok(())
    })
}

/// Releases a handle. Null is accepted.
///
/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_set_free(set: *mut DcBogoliubovSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Truncations of a set.
///
/// # Safety
/// `set` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_set_dimensions(
    set: *const DcBogoliubovSet,
    out_n_local: *mut usize,
    out_n_global: *mut usize,
) -> DcStatus {
    guard(|| {
        let s = &non_null(set, "set")?.inner;
        if out_n_local.is_null() || out_n_global.is_null() {
            return Err(Failure(DcStatus::NullPointer, "output pointer is null".into()));
        }
        out_n_local.write(s.n_local());
        out_n_global.write(s.n_global());
        Ok(())
    })
}

/// Coefficient `α` or `β` (primed for the right region) for local index `i`
/// and global index `big_i`, both 1-based.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dc_set_coefficient(
    set: *const DcBogoliubovSet,
    region: u32,
    kind: u32,
    i: usize,
    big_i: usize,
    out: *mut DcComplex,
) -> DcStatus {
    guard(|| {
        let s = &non_null(set, "set")?.inner;
        let region = region_arg(region)?;
        if out.is_null() {
            return Err(Failure(DcStatus::NullPointer, "out is null".into()));
        }
        if i == 0 || i > s.n_local() || big_i == 0 || big_i > s.n_global() {
            return Err(invalid(format!(
                "index ({i}, {big_i}) outside 1..={} x 1..={}",
                s.n_local(),
                s.n_global()
            )));
        }
        let m = match kind {
            0 => s.alpha(region),
            1 => s.beta(region),
            k => return Err(invalid(format!("unknown coefficient kind {k}"))),
        };
        let z = m[[i - 1, big_i - 1]];
        out.write(DcComplex { re: z.re, im: z.im });
        Ok(())
    })
}

/// Vacuum occupations `⟨n_i⟩` of the local modes of `region`; `len` must be
/// at least `n_local`.
///
/// # Safety
/// `set` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dc_set_local_occupation(
    set: *const DcBogoliubovSet,
    region: u32,
    out: *mut f64,
    len: usize,
) -> DcStatus {
    guard(|| {
        let s = &non_null(set, "set")?.inner;
        let region = region_arg(region)?;
        let dst = out_slice(out, len, s.n_local(), "out")?;
        dst.copy_from_slice(&local_occupation(s, region));
        Ok(())
    })
}

/// Occupations `⟨N_I⟩` of the global modes in the local vacuum; `len` must be
/// at least `n_global`.
///
/// # Safety
/// `set` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dc_set_removed_mirror_spectrum(set: *const DcBogoliubovSet, out: *mut f64, len: usize) -> DcStatus {
    guard(|| {
        let s = &non_null(set, "set")?.inner;
        let dst = out_slice(out, len, s.n_global(), "out")?;
        dst.copy_from_slice(&removed_mirror_spectrum(s));
        Ok(())
    })
}

/// Unitarity condition errors for indices up to `index_range`.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dc_set_check_conditions(
    set: *const DcBogoliubovSet,
    index_range: usize,
    out: *mut DcConditionReport,
) -> DcStatus {
    guard(|| {
        let s = &non_null(set, "set")?.inner;
        if out.is_null() {
            return Err(Failure(DcStatus::NullPointer, "out is null".into()));
        }
        let r = check_conditions(s, index_range)?;
        out.write(DcConditionReport {
            cond1_max_err: r.cond1_max_err,
            cond2_max_err: r.cond2_max_err,
            cond3_combined_max_err: r.cond3_combined_max_err,
            cond4_max_err: r.cond4_max_err,
            cond3_unprimed_diagonal_max: r.cond3_unprimed_diagonal_max,
        });
        Ok(())
    })
}

/// Writes the coefficient cache for `set` to `path`.
///
/// # Safety
/// `set` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dc_set_cache_store(set: *const DcBogoliubovSet, path: *const c_char) -> DcStatus {
    guard(|| {
        let s = &non_null(set, "set")?.inner;
        cache_store(&path_arg(path)?, s)?;
        Ok(())
    })
}

/// Loads a cache written for exactly `config`; returns `CacheInvalid` when
/// the file belongs to another configuration.
///
/// # Safety
/// `path` must be a NUL-terminated string, `config` valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dc_set_cache_load(
    path: *const c_char,
    config: *const DcFieldConfig,
    out: *mut *mut DcBogoliubovSet,
) -> DcStatus {
    guard(|| {
        let path = path_arg(path)?;
        let cfg = FieldConfig::from(*non_null(config, "config")?);
        if out.is_null() {
            return Err(Failure(DcStatus::NullPointer, "out is null".into()));
        }
        let inner = cache_load(&path, &cfg)?;
        out.write(Box::into_raw(Box::new(DcBogoliubovSet { inner })));
        Ok(())
    })
}

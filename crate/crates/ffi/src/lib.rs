//! C ABI for neckstack.
//!
//! Objects are opaque handles created by `ns_*_new`/`ns_*_from_*` functions and
//! released with the matching `ns_*_free`. Every fallible call returns an
//! [`NsStatus`]; on failure a message is kept per thread and can be read with
//! [`ns_last_error_message`]. Complex numbers cross the boundary as interleaved
//! `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use neckstack::balance::{certify, newton_balance, Builtin, FiniteConfiguration, NewtonOptions};
use neckstack::periods::chart::{limit_balance, ChartSet};
use neckstack::surfacegen::embed::{embeddedness_report, DEFAULT_SAMPLE, DEFAULT_SEED};
use neckstack::surfacegen::mesh::{build_mesh, export_mesh, SurfaceMesh};
use neckstack::surfacegen::neck::{build_necks, DEFAULT_ROWS, GLUING_TOLERANCE};
use neckstack::surfacegen::sheet::{build_sheets_unchecked, SheetOptions};
use neckstack::verify::{verify_paper, VerifyOptions};
use neckstack::{Configuration, Error, C64};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8, or an index out of range.
    InvalidArgument = 1,
    /// Input rejected by the library (malformed JSON, wrong shapes, unknown builtin).
    InvalidInput = 2,
    /// Coincident points.
    Degenerate = 3,
    /// Newton or quadrature failed to converge, or a Jacobian was singular.
    NoConvergence = 4,
    /// Any other numerical failure (poles, t out of range, gluing mismatch).
    Numerical = 5,
    Io = 6,
    /// A caller-provided buffer is too short; the required length is reported.
    BufferTooSmall = 7,
    /// Internal panic caught at the boundary.
    Panic = 8,
}

/// Opaque configuration of points per level.
pub struct NsConfiguration(Configuration);

/// Opaque finite block.
pub struct NsBlock(FiniteConfiguration);

/// Opaque triangulated surface.
pub struct NsMesh {
    mesh: SurfaceMesh,
    genus: i64,
    embedded: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NsStatus {
    match e {
        Error::InvalidInput(_) | Error::UnknownBuiltin(_) | Error::Json(_) | Error::Uncoverable { .. } => {
            NsStatus::InvalidInput
        }
        Error::Degenerate { .. } => NsStatus::Degenerate,
        Error::NoConvergence { .. } | Error::SingularJacobian { .. } | Error::QuadratureNonConvergence { .. } => {
            NsStatus::NoConvergence
        }
        Error::Io(_) => NsStatus::Io,
        _ => NsStatus::Numerical,
    }
}

fn fail(status: NsStatus, msg: impl Into<String>) -> NsStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), NsStatus>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(NsStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: neckstack::Result<T>) -> Result<T, NsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, NsStatus> {
    if p.is_null() {
        return Err(fail(NsStatus::InvalidArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(NsStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, NsStatus> {
    p.as_ref().ok_or_else(|| fail(NsStatus::InvalidArgument, format!("{name} is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, NsStatus> {
    p.as_mut().ok_or_else(|| fail(NsStatus::InvalidArgument, format!("{name} is null")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Copies `s` plus a terminating NUL into `buf`. With `buf` null or too short,
/// writes the needed size (including the NUL) to `needed` and returns
/// `BufferTooSmall` (or `Ok` when only querying with a null buffer).
unsafe fn copy_string(s: &[u8], buf: *mut c_char, len: usize, needed: *mut usize) -> NsStatus {
    if let Some(n) = needed.as_mut() {
        *n = s.len() + 1;
    }
    if buf.is_null() {
        return NsStatus::Ok;
    }
    if len < s.len() + 1 {
        return NsStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    NsStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread. Pass a null `buf` to query the size.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes; `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ns_last_error_message(buf: *mut c_char, len: usize, needed: *mut usize) -> NsStatus {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map(|c| c.as_bytes()).unwrap_or(b"");
        copy_string(bytes, buf, len, needed)
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Configuration from JSON `{"levels": [{"k": int, "points": [[re, im], ...]}, ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_configuration_from_json(json: *const c_char, result: *mut *mut NsConfiguration) -> NsStatus {
    guard(|| {
        let s = str_arg(json, "json")?;
        let result = out(result, "result")?;
        *result = boxed(NsConfiguration(lib(Configuration::from_json_str(s))?));
        Ok(())
    })
}

/// Configuration from level sizes and interleaved points, levels `first ..`.
///
/// # Safety
/// `sizes` must hold `num_levels` entries and `points` `2 Σ sizes` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_configuration_new(
    first: i64,
    sizes: *const usize,
    num_levels: usize,
    points: *const f64,
    result: *mut *mut NsConfiguration,
) -> NsStatus {
    guard(|| {
        if sizes.is_null() || points.is_null() || num_levels == 0 {
            return Err(fail(NsStatus::InvalidArgument, "sizes/points are null or empty"));
        }
        let result = out(result, "result")?;
        let sizes = std::slice::from_raw_parts(sizes, num_levels);
        let total: usize = sizes.iter().sum();
        let pts = std::slice::from_raw_parts(points, 2 * total);
        let mut levels = Vec::with_capacity(num_levels);
        let mut at = 0;
        for &n in sizes {
            levels.push((0..n).map(|i| C64::new(pts[2 * (at + i)], pts[2 * (at + i) + 1])).collect());
            at += n;
        }
        *result = boxed(NsConfiguration(lib(Configuration::new(first, levels))?));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ns_configuration_free(cfg: *mut NsConfiguration) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// First level index and number of levels.
///
/// # Safety
/// `cfg` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ns_configuration_levels(
    cfg: *const NsConfiguration,
    first: *mut i64,
    count: *mut usize,
) -> NsStatus {
    guard(|| {
        let c = &handle(cfg, "cfg")?.0;
        *out(first, "first")? = c.first_level();
        *out(count, "count")? = (c.last_level() - c.first_level() + 1) as usize;
        Ok(())
    })
}

/// Number of points on level `k`.
///
/// # Safety
/// `cfg` must be a live handle; `n` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_configuration_level_size(cfg: *const NsConfiguration, k: i64, n: *mut usize) -> NsStatus {
    guard(|| {
        let c = &handle(cfg, "cfg")?.0;
        if k < c.first_level() || k > c.last_level() {
            return Err(fail(NsStatus::InvalidArgument, format!("level {k} outside the window")));
        }
        *out(n, "n")? = c.n(k);
        Ok(())
    })
}

/// Forces of level `k` as `2 n_k` interleaved doubles.
///
/// # Safety
/// `cfg` must be a live handle; `forces` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_configuration_forces(
    cfg: *const NsConfiguration,
    k: i64,
    forces: *mut f64,
    len: usize,
) -> NsStatus {
    guard(|| {
        let c = &handle(cfg, "cfg")?.0;
        if k < c.first_level() || k > c.last_level() {
            return Err(fail(NsStatus::InvalidArgument, format!("level {k} outside the window")));
        }
        if forces.is_null() {
            return Err(fail(NsStatus::InvalidArgument, "forces is null"));
        }
        let fs = neckstack::configspace::forces(c);
        let level = fs.level(k);
        if len < 2 * level.len() {
            return Err(fail(NsStatus::BufferTooSmall, format!("need {} doubles", 2 * level.len())));
        }
        let dst = std::slice::from_raw_parts_mut(forces, 2 * level.len());
        for (i, f) in level.iter().enumerate() {
            dst[2 * i] = f.re;
            dst[2 * i + 1] = f.im;
        }
        Ok(())
    })
}

/// Largest |F| over levels with neighbours on both sides.
///
/// # Safety
/// `cfg` must be a live handle; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_configuration_max_interior_force(cfg: *const NsConfiguration, value: *mut f64) -> NsStatus {
    guard(|| {
        let c = &handle(cfg, "cfg")?.0;
        *out(value, "value")? = neckstack::configspace::forces(c).max_interior_force();
        Ok(())
    })
}

/// Largest deviation of the residue limit of the balancing periods from 4πi F.
///
/// # Safety
/// `cfg` must be a live handle; `deviation` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_configuration_limit_balance(cfg: *const NsConfiguration, deviation: *mut f64) -> NsStatus {
    guard(|| {
        let c = &handle(cfg, "cfg")?.0;
        let charts = lib(ChartSet::central(c))?;
        *out(deviation, "deviation")? = lib(limit_balance(&charts, c))?.max_deviation;
        Ok(())
    })
}

/// JSON form of the configuration; free with [`ns_string_free`].
///
/// # Safety
/// `cfg` must be a live handle; `json` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_configuration_to_json(cfg: *const NsConfiguration, json: *mut *mut c_char) -> NsStatus {
    guard(|| {
        let c = &handle(cfg, "cfg")?.0;
        let s = lib(serde_json::to_string(&c.to_json_file()).map_err(Error::from))?;
        *out(json, "json")? = into_c_string(s);
        Ok(())
    })
}

/// Builtin block: `fan:n=3`, `ladder22`, `chain:a=1,b=0,h=2`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_block_builtin(spec: *const c_char, result: *mut *mut NsBlock) -> NsStatus {
    guard(|| {
        let s = str_arg(spec, "spec")?;
        let result = out(result, "result")?;
        let b = lib(Builtin::parse(s).and_then(|b| b.build()))?;
        *result = boxed(NsBlock(b));
        Ok(())
    })
}

/// # Safety
/// `block` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ns_block_free(block: *mut NsBlock) {
    if !block.is_null() {
        drop(Box::from_raw(block));
    }
}

/// Residual force F_C of the block.
///
/// # Safety
/// `block` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ns_block_residual_force(block: *const NsBlock, re: *mut f64, im: *mut f64) -> NsStatus {
    guard(|| {
        let f = handle(block, "block")?.0.residual_force();
        *out(re, "re")? = f.re;
        *out(im, "im")? = f.im;
        Ok(())
    })
}

/// |det| and smallest singular value of the non-degeneracy matrix.
///
/// # Safety
/// `block` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ns_block_certify(block: *const NsBlock, det_abs: *mut f64, sigma_min: *mut f64) -> NsStatus {
    guard(|| {
        let cert = lib(certify(&handle(block, "block")?.0))?;
        *out(det_abs, "det_abs")? = cert.determinant.norm();
        *out(sigma_min, "sigma_min")? = cert.sigma_min;
        Ok(())
    })
}

/// Shifts the interior points by `perturb (1 + i)` and rebalances with the
/// endpoints fixed. Writes the new block and the Newton iteration count.
///
/// # Safety
/// `block` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ns_block_rebalance(
    block: *const NsBlock,
    perturb: f64,
    result: *mut *mut NsBlock,
    iterations: *mut usize,
) -> NsStatus {
    guard(|| {
        let b = &handle(block, "block")?.0;
        let result = out(result, "result")?;
        let cfg = b.configuration();
        let h = cfg.last_level();
        let shifted = cfg
            .levels()
            .map(|k| {
                cfg.level(k)
                    .iter()
                    .map(|p| if k == 0 || k == h { *p } else { p + C64::new(perturb, perturb) })
                    .collect()
            })
            .collect();
        let guess = lib(FiniteConfiguration::new(shifted))?;
        let (fc, rep) = lib(newton_balance(
            b.level_type(),
            (b.first_point(), b.last_point()),
            &guess,
            NewtonOptions::default(),
        ))?;
        if let Some(it) = iterations.as_mut() {
            *it = rep.iterations;
        }
        *result = boxed(NsBlock(fc));
        Ok(())
    })
}

/// Copy of the block's points as a configuration handle.
///
/// # Safety
/// `block` must be a live handle; `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_block_configuration(block: *const NsBlock, result: *mut *mut NsConfiguration) -> NsStatus {
    guard(|| {
        let c = handle(block, "block")?.0.configuration().clone();
        *out(result, "result")? = boxed(NsConfiguration(c));
        Ok(())
    })
}

/// Builds the first-order mesh of `cfg` at `t` (grid points per side, gluing
/// radius `epsilon`). Slab overlap is not an error here; it shows up through
/// [`ns_mesh_info`].
///
/// # Safety
/// `cfg` must be a live handle; `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_mesh_build(
    cfg: *const NsConfiguration,
    t: f64,
    epsilon: f64,
    grid: usize,
    result: *mut *mut NsMesh,
) -> NsStatus {
    guard(|| {
        let c = &handle(cfg, "cfg")?.0;
        let result = out(result, "result")?;
        let opts = SheetOptions { epsilon, grid, ..Default::default() };
        let sheets = lib(build_sheets_unchecked(c, t, opts))?;
        let necks = lib(build_necks(&sheets, DEFAULT_ROWS, GLUING_TOLERANCE))?;
        let mesh = lib(build_mesh(&sheets, &necks))?;
        let rep = embeddedness_report(&sheets, &necks, &mesh, t, DEFAULT_SAMPLE, DEFAULT_SEED);
        let genus = mesh.topology().genus;
        *result = boxed(NsMesh { mesh, genus, embedded: rep.embedded });
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ns_mesh_free(mesh: *mut NsMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Vertex and triangle counts, genus after capping boundaries, and the
/// embeddedness verdict (1 or 0). Any output pointer may be null.
///
/// # Safety
/// `mesh` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_mesh_info(
    mesh: *const NsMesh,
    vertices: *mut usize,
    triangles: *mut usize,
    genus: *mut i64,
    embedded: *mut i32,
) -> NsStatus {
    guard(|| {
        let m = handle(mesh, "mesh")?;
        if let Some(v) = vertices.as_mut() {
            *v = m.mesh.vertices.len();
        }
        if let Some(v) = triangles.as_mut() {
            *v = m.mesh.triangles.len();
        }
        if let Some(v) = genus.as_mut() {
            *v = m.genus;
        }
        if let Some(v) = embedded.as_mut() {
            *v = m.embedded as i32;
        }
        Ok(())
    })
}

/// Writes the mesh as OBJ.
///
/// # Safety
/// `mesh` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ns_mesh_write_obj(mesh: *const NsMesh, path: *const c_char) -> NsStatus {
    guard(|| {
        let m = handle(mesh, "mesh")?;
        let p = str_arg(path, "path")?;
        lib(export_mesh(&m.mesh, Path::new(p)))
    })
}

/// Runs the closed-form and identity suite. `passed` receives 1 or 0; `json`
/// (optional) receives the full report, to be freed with [`ns_string_free`].
///
/// # Safety
/// `passed` writable; `json` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ns_verify_paper(seed: u64, cases: usize, passed: *mut i32, json: *mut *mut c_char) -> NsStatus {
    guard(|| {
        let passed = out(passed, "passed")?;
        let rep = lib(verify_paper(VerifyOptions { seed, cases, tolerance_scale: 1.0 }))?;
        *passed = rep.pass as i32;
        if let Some(j) = json.as_mut() {
            *j = into_c_string(lib(serde_json::to_string(&rep).map_err(Error::from))?);
        }
        Ok(())
    })
}

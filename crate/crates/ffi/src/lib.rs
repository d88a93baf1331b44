//! C interface to the engine, the snapshot format and the metrics.
//!
//! Every function returns a [`CpmStatus`]. On failure a message is kept per
//! thread and can be read with [`cpm_last_error`]. Handles are opaque and
//! must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::slice;

use cpm_core::morphometrics::{dice, emd_1d, lacunae_areas_with, Connectivity, LacunaeOptions, Mask};
use cpm_core::pipeline::init_state;
use cpm_core::snapshot::{export_state, import_snapshot, read_header};
use cpm_core::{Error, ParamSet, SimState};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    BadMagic = 4,
    UnsupportedVersion = 5,
    Truncated = 6,
    TrailingData = 7,
    InvalidDimensions = 8,
    InvalidField = 9,
    DimensionMismatch = 10,
    EmptyDistribution = 11,
    BufferTooSmall = 12,
    Panic = 13,
    Other = 14,
}

/// Fixed-size header fields of a snapshot file.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CpmSnapshotInfo {
    pub width: u32,
    pub height: u32,
    pub mcs: u64,
    pub seed: u64,
}

/// A running simulation together with its parameters.
pub struct CpmSim {
    state: SimState,
    params: ParamSet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CpmStatus {
    match e.root() {
        Error::Io { .. } => CpmStatus::Io,
        Error::BadMagic(_) => CpmStatus::BadMagic,
        Error::UnsupportedVersion(_) => CpmStatus::UnsupportedVersion,
        Error::Truncated { .. } => CpmStatus::Truncated,
        Error::TrailingData { .. } => CpmStatus::TrailingData,
        Error::InvalidDimensions { .. } | Error::LatticeTooSmall { .. } => CpmStatus::InvalidDimensions,
        Error::InvalidField { .. } | Error::NegativeConcentration { .. } => CpmStatus::InvalidField,
        Error::DimensionMismatch { .. } => CpmStatus::DimensionMismatch,
        Error::EmptyDistribution => CpmStatus::EmptyDistribution,
        Error::InvalidParams(_)
        | Error::Config { .. }
        | Error::InvalidOrder(_)
        | Error::CapacityExceeded { .. } => CpmStatus::InvalidArgument,
        _ => CpmStatus::Other,
    }
}

enum Failure {
    Status(CpmStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(CpmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CpmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CpmStatus::Ok,
        Ok(Err(Failure::Status(status, msg))) => {
            set_error(msg);
            status
        }
        Ok(Err(Failure::Core(e))) => {
            let mut msg = e.to_string();
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                msg.push_str(": ");
                msg.push_str(&s.to_string());
                source = s.source();
            }
            set_error(msg);
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            CpmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(CpmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn params_arg(toml: *const c_char) -> Result<ParamSet, Failure> {
    if toml.is_null() {
        return Ok(ParamSet::default());
    }
    Ok(ParamSet::from_toml_str(str_arg(toml, "config")?)?)
}

unsafe fn sim_ref<'a>(sim: *const CpmSim) -> Result<&'a CpmSim, Failure> {
    sim.as_ref().ok_or_else(|| null("sim"))
}

unsafe fn sim_mut<'a>(sim: *mut CpmSim) -> Result<&'a mut CpmSim, Failure> {
    sim.as_mut().ok_or_else(|| null("sim"))
}

unsafe fn mask_arg(bits: *const u8, width: usize, height: usize, what: &str) -> Result<Mask, Failure> {
    if bits.is_null() {
        return Err(null(what));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Failure::Status(CpmStatus::InvalidDimensions, "mask too large".into()))?;
    let bits = slice::from_raw_parts(bits, n).iter().map(|&b| b != 0).collect();
    Ok(Mask::new(width, height, bits)?)
}

unsafe fn f64_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn cpm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a simulation from a TOML parameter string (null for defaults),
/// seeded with `cell_count` cells from the parameters.
///
/// # Safety
/// `toml` must be null or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cpm_sim_new(toml: *const c_char, seed: u64, out: *mut *mut CpmSim) -> CpmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = params_arg(toml)?;
        let state = init_state(&params, seed, params.cell_count)?;
        *out = Box::into_raw(Box::new(CpmSim { state, params }));
        Ok(())
    })
}

/// Loads a simulation from a snapshot; the stream continues exactly as the
/// run that wrote it, given the same parameters.
///
/// # Safety
/// `path` must be a NUL-terminated string, `toml` null or NUL-terminated,
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cpm_sim_import(
    path: *const c_char,
    toml: *const c_char,
    out: *mut *mut CpmSim,
) -> CpmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = PathBuf::from(str_arg(path, "path")?);
        let params = params_arg(toml)?;
        let state = import_snapshot(&path)?.to_state()?;
        *out = Box::into_raw(Box::new(CpmSim { state, params }));
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cpm_sim_free(sim: *mut CpmSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances by `steps` Monte-Carlo steps.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cpm_sim_run(sim: *mut CpmSim, steps: u64) -> CpmStatus {
    guard(|| {
        let sim = sim_mut(sim)?;
        sim.state.advance(&sim.params, steps);
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cpm_sim_info(sim: *const CpmSim, out: *mut CpmSnapshotInfo) -> CpmStatus {
    guard(|| {
        let sim = sim_ref(sim)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = CpmSnapshotInfo {
            width: sim.state.width() as u32,
            height: sim.state.height() as u32,
            mcs: sim.state.mcs(),
            seed: sim.state.seed(),
        };
        Ok(())
    })
}

/// Copies the row-major cell ids into `buf` of `len` entries.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cpm_sim_copy_cell_ids(sim: *const CpmSim, buf: *mut u32, len: usize) -> CpmStatus {
    guard(|| {
        let ids = sim_ref(sim)?.state.lattice().ids();
        copy_out(ids, buf, len)
    })
}

/// Copies the row-major field into `buf` of `len` entries.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cpm_sim_copy_field(sim: *const CpmSim, buf: *mut f64, len: usize) -> CpmStatus {
    guard(|| {
        let values = sim_ref(sim)?.state.field().values();
        copy_out(values, buf, len)
    })
}

unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        return Err(Failure::Status(
            CpmStatus::BufferTooSmall,
            format!("buffer holds {len}, need {}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Writes the current state as a snapshot file.
///
/// # Safety
/// `sim` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cpm_sim_export(sim: *const CpmSim, path: *const c_char) -> CpmStatus {
    guard(|| {
        let sim = sim_ref(sim)?;
        let path = str_arg(path, "path")?;
        export_state(&sim.state, path)?;
        Ok(())
    })
}

/// Validates a snapshot file fully and returns its header.
///
/// # Safety
/// `path` must be NUL-terminated and `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn cpm_snapshot_validate(path: *const c_char, out: *mut CpmSnapshotInfo) -> CpmStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let header = read_header(path)?;
        import_snapshot(path)?;
        if let Some(out) = out.as_mut() {
            *out = CpmSnapshotInfo {
                width: header.width,
                height: header.height,
                mcs: header.mcs,
                seed: header.seed,
            };
        }
        Ok(())
    })
}

/// Dice coefficient of two 0/1 masks of `width * height` bytes.
///
/// # Safety
/// `a` and `b` must be valid for `width * height` reads; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cpm_dice(
    a: *const u8,
    b: *const u8,
    width: usize,
    height: usize,
    out: *mut f64,
) -> CpmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let a = mask_arg(a, width, height, "a")?;
        let b = mask_arg(b, width, height, "b")?;
        *out = dice(&a, &b)?;
        Ok(())
    })
}

/// 1-D earth mover's distance between two samples.
///
/// # Safety
/// `a` and `b` must be valid for `na` and `nb` reads; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cpm_emd_1d(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    out: *mut f64,
) -> CpmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = emd_1d(f64_slice(a, na, "a")?, f64_slice(b, nb, "b")?)?;
        Ok(())
    })
}

/// Sorted areas of the closed medium regions of a periodic vessel mask
/// (nonzero bytes are vessel). `connectivity` is 4 or 8. `*count` receives
/// the number of areas; if it exceeds `cap`, nothing is written and
/// `BufferTooSmall` is returned.
///
/// # Safety
/// `mask` must be valid for `width * height` reads, `buf` for `cap` writes
/// (or null when `cap` is 0), and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn cpm_lacunae_areas(
    mask: *const u8,
    width: usize,
    height: usize,
    connectivity: u32,
    min_area: usize,
    buf: *mut u64,
    cap: usize,
    count: *mut usize,
) -> CpmStatus {
    guard(|| {
        let count = count.as_mut().ok_or_else(|| null("count"))?;
        let connectivity = match connectivity {
            4 => Connectivity::Four,
            8 => Connectivity::Eight,
            c => {
                return Err(Failure::Status(
                    CpmStatus::InvalidArgument,
                    format!("connectivity must be 4 or 8, got {c}"),
                ))
            }
        };
        let m = mask_arg(mask, width, height, "mask")?;
        let areas: Vec<u64> = lacunae_areas_with(&m, &LacunaeOptions { connectivity, min_area })
            .into_iter()
            .map(|a| a as u64)
            .collect();
        *count = areas.len();
        if areas.is_empty() {
            return Ok(());
        }
        if areas.len() > cap {
            return Err(Failure::Status(
                CpmStatus::BufferTooSmall,
                format!("{} areas, buffer holds {cap}", areas.len()),
            ));
        }
        copy_out(&areas, buf, cap)
    })
}

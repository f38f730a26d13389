//! C ABI for the Hermite-DG Vlasov-Poisson solver.
//!
//! A simulation lives behind an opaque [`HvSimulation`] handle created from
//! the text of a TOML run configuration. Every call returns an [`HvStatus`];
//! on failure [`hv_last_error_message`] describes the most recent error on
//! the calling thread. Handles are not thread safe; use one per thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hermite_vlasov::app::build_simulation;
use hermite_vlasov::config::RunConfig;
use hermite_vlasov::timestepper::Simulation;
use hermite_vlasov::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidArgument = 4,
    /// Non-finite state, singular field solve or similar solver failure.
    Numerical = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque simulation handle.
pub struct HvSimulation {
    sim: Simulation,
}

/// Invariants and field norms at the current time. Deviations are relative
/// to `t = 0`; the momentum deviation is scaled by initial mass times `v_th`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HvDiagnostics {
    pub t: f64,
    pub step_index: u64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub mass_dev: f64,
    pub momentum_dev: f64,
    pub energy_dev: f64,
    pub e_l2: f64,
    pub e_max: f64,
}

/// Sizes needed to copy coefficients out of a handle.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HvLayout {
    pub n_modes: usize,
    pub n_cells: usize,
    /// Legendre coefficients per cell (degree + 1).
    pub n_basis: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(err: &Error) -> HvStatus {
    match err {
        Error::Config { .. } | Error::Io(_) => HvStatus::Config,
        Error::InvalidParameter { .. } | Error::CellOutOfRange { .. } | Error::QuadratureTooSmall { .. } => {
            HvStatus::InvalidArgument
        }
        _ => HvStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (HvStatus, String)>) -> HvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HvStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HvStatus::Panic
        }
    }
}

fn solver(err: Error) -> (HvStatus, String) {
    (status_of(&err), err.to_string())
}

unsafe fn handle<'a>(sim: *mut HvSimulation) -> Result<&'a mut HvSimulation, (HvStatus, String)> {
    sim.as_mut()
        .ok_or((HvStatus::NullPointer, "simulation handle is null".to_string()))
}

/// Creates a simulation from NUL-terminated TOML text and stores the handle
/// in `*out`. Runs single-threaded.
///
/// # Safety
/// `config_toml` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hv_simulation_create(config_toml: *const c_char, out: *mut *mut HvSimulation) -> HvStatus {
    guard(|| {
        if config_toml.is_null() || out.is_null() {
            return Err((HvStatus::NullPointer, "null argument".into()));
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(config_toml)
            .to_str()
            .map_err(|e| (HvStatus::InvalidUtf8, e.to_string()))?;
        let cfg = RunConfig::from_toml_str(text).map_err(solver)?;
        let sim = build_simulation(&cfg, false).map_err(solver)?;
        *out = Box::into_raw(Box::new(HvSimulation { sim }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must come from [`hv_simulation_create`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hv_simulation_free(sim: *mut HvSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Takes one step of size `dt`; `dt <= 0` uses the CFL step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hv_simulation_step(sim: *mut HvSimulation, dt: f64) -> HvStatus {
    guard(|| {
        let h = handle(sim)?;
        let dt = if dt > 0.0 { dt } else { h.sim.nominal_dt() };
        if !dt.is_finite() {
            return Err((HvStatus::InvalidArgument, "dt must be finite".into()));
        }
        h.sim.step(dt).map_err(solver)
    })
}

/// Advances to exactly `t_end`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hv_simulation_advance_to(sim: *mut HvSimulation, t_end: f64) -> HvStatus {
    guard(|| {
        let h = handle(sim)?;
        h.sim.advance_to(t_end, |_| {}).map_err(solver)
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hv_simulation_time(sim: *const HvSimulation, out: *mut f64) -> HvStatus {
    guard(|| {
        let h = handle(sim as *mut HvSimulation)?;
        let out = out.as_mut().ok_or((HvStatus::NullPointer, "null output".to_string()))?;
        *out = h.sim.time().t;
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hv_simulation_diagnostics(sim: *const HvSimulation, out: *mut HvDiagnostics) -> HvStatus {
    guard(|| {
        let h = handle(sim as *mut HvSimulation)?;
        let out = out.as_mut().ok_or((HvStatus::NullPointer, "null output".to_string()))?;
        let r = h.sim.diagnostics();
        *out = HvDiagnostics {
            t: r.t,
            step_index: h.sim.time().step_index,
            mass: r.mass,
            momentum: r.momentum,
            energy: r.energy,
            mass_dev: r.mass_dev,
            momentum_dev: r.momentum_dev,
            energy_dev: r.energy_dev,
            e_l2: r.e_l2,
            e_max: r.e_max,
        };
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hv_simulation_layout(sim: *const HvSimulation, out: *mut HvLayout) -> HvStatus {
    guard(|| {
        let h = handle(sim as *mut HvSimulation)?;
        let out = out.as_mut().ok_or((HvStatus::NullPointer, "null output".to_string()))?;
        let mesh = h.sim.mesh();
        *out = HvLayout {
            n_modes: h.sim.state().n_modes(),
            n_cells: mesh.n_cells(),
            n_basis: mesh.n_basis(),
        };
        Ok(())
    })
}

/// Copies the coefficients of Hermite mode `mode` (cell-major,
/// `n_cells * n_basis` values) into `buf`.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn hv_simulation_copy_mode(
    sim: *const HvSimulation,
    mode: usize,
    buf: *mut f64,
    len: usize,
) -> HvStatus {
    guard(|| {
        let h = handle(sim as *mut HvSimulation)?;
        if buf.is_null() {
            return Err((HvStatus::NullPointer, "null buffer".into()));
        }
        let state = h.sim.state();
        if mode >= state.n_modes() {
            return Err((
                HvStatus::InvalidArgument,
                format!("mode {mode} out of range ({} modes)", state.n_modes()),
            ));
        }
        let coeffs = state.mode(mode).coeffs();
        if len < coeffs.len() {
            return Err((
                HvStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", coeffs.len()),
            ));
        }
        ptr::copy_nonoverlapping(coeffs.as_ptr(), buf, coeffs.len());
        Ok(())
    })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

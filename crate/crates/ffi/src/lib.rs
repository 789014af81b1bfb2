//! C ABI for the facloc toolkit: opaque handles, integer status codes, and
//! JSON strings at the boundary so other languages can bind without
//! mirroring the Rust types.
//!
//! Ownership: handles returned through out-pointers are owned by the caller
//! and must be released with the matching `flc_*_free`; strings returned as
//! `char*` must be released with `flc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use facloc::distsim::{Cluster, SimConfig, SimTranscript};
use facloc::error::FaclocError;
use facloc::harness::{run_sequential, run_simulated};
use facloc::metric::Backend;
use facloc::model::{Instance, Solution, Variant};
use facloc::oracle::{opt_penalty, opt_robust};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum FlcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidJson = 2,
    InvalidInstance = 3,
    Infeasible = 4,
    SizeGuard = 5,
    Internal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error message").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &FaclocError) -> FlcStatus {
    match err {
        FaclocError::Json(_) => FlcStatus::InvalidJson,
        FaclocError::InvalidInstance(_) => FlcStatus::InvalidInstance,
        FaclocError::Infeasible(_) => FlcStatus::Infeasible,
        FaclocError::SizeGuard(_) => FlcStatus::SizeGuard,
        _ => FlcStatus::Internal,
    }
}

fn catch<F: FnOnce() -> Result<FlcStatus, FaclocError>>(f: F) -> FlcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic across FFI boundary".into());
            FlcStatus::Internal
        }
    }
}

/// Opaque instance handle.
pub struct FlcInstance {
    inst: Instance,
}

/// Opaque result handle: the solution plus certificate and, for simulator
/// runs, the transcript.
pub struct FlcSolution {
    solution: Solution,
    certificate_json: String,
    transcript: Option<SimTranscript>,
}

/// Last error message for this thread, or NULL when the previous call
/// succeeded. The pointer stays valid until the next failing call.
#[no_mangle]
pub extern "C" fn flc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Parses an instance from its JSON document.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flc_instance_from_json(
    json: *const c_char,
    out: *mut *mut FlcInstance,
) -> FlcStatus {
    if json.is_null() || out.is_null() {
        set_error("null argument".into());
        return FlcStatus::NullArgument;
    }
    catch(|| {
        let text = CStr::from_ptr(json).to_string_lossy();
        let inst = Instance::from_json(&text)?;
        *out = Box::into_raw(Box::new(FlcInstance { inst }));
        Ok(FlcStatus::Ok)
    })
}

/// # Safety
/// `inst` must come from `flc_instance_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn flc_instance_free(inst: *mut FlcInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Facility count of the instance; 0 on a null handle.
///
/// # Safety
/// `inst` must be a live instance handle or null.
#[no_mangle]
pub unsafe extern "C" fn flc_instance_facilities(inst: *const FlcInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inst.facilities)
}

/// # Safety
/// `inst` must be a live instance handle or null.
#[no_mangle]
pub unsafe extern "C" fn flc_instance_clients(inst: *const FlcInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.inst.clients)
}

/// Runs the sequential solver for the instance's variant and returns a
/// solution handle carrying the dual certificate.
///
/// # Safety
/// `inst` must be a live instance handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flc_solve(
    inst: *const FlcInstance,
    eps: f64,
    out: *mut *mut FlcSolution,
) -> FlcStatus {
    let (Some(h), false) = (inst.as_ref(), out.is_null()) else {
        set_error("null argument".into());
        return FlcStatus::NullArgument;
    };
    catch(|| {
        let arts = run_sequential(&h.inst, "ffi", 0, eps, false)?;
        *out = Box::into_raw(Box::new(FlcSolution {
            solution: arts.solution,
            certificate_json: serde_json::to_string_pretty(&arts.certificate)?,
            transcript: None,
        }));
        Ok(FlcStatus::Ok)
    })
}

/// Runs the k-machine simulator (random vertex partition, exact distance
/// backend) and returns the solution with its transcript.
///
/// # Safety
/// `inst` must be a live instance handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flc_simulate(
    inst: *const FlcInstance,
    k: usize,
    bandwidth_words: u64,
    eps: f64,
    cohen_c: f64,
    seed: u64,
    out: *mut *mut FlcSolution,
) -> FlcStatus {
    let (Some(h), false) = (inst.as_ref(), out.is_null()) else {
        set_error("null argument".into());
        return FlcStatus::NullArgument;
    };
    catch(|| {
        let mut cluster = Cluster::random(h.inst.n_vertices(), k, seed)?;
        cluster.bandwidth_words = bandwidth_words.max(1);
        let cfg = SimConfig {
            eps,
            seed,
            cohen_c,
            ..Default::default()
        };
        let arts = run_simulated(&h.inst, "ffi", &cluster, &cfg, Backend::Exact, false)?;
        *out = Box::into_raw(Box::new(FlcSolution {
            solution: arts.solution,
            certificate_json: serde_json::to_string_pretty(&arts.certificate)?,
            transcript: arts.transcript,
        }));
        Ok(FlcStatus::Ok)
    })
}

/// Exact optimum by enumeration (robust or penalty variant, |F| <= 20).
///
/// # Safety
/// `inst` must be a live instance handle and `out_cost` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flc_oracle_cost(
    inst: *const FlcInstance,
    out_cost: *mut f64,
) -> FlcStatus {
    let (Some(h), false) = (inst.as_ref(), out_cost.is_null()) else {
        set_error("null argument".into());
        return FlcStatus::NullArgument;
    };
    catch(|| {
        let res = match h.inst.variant {
            Variant::Robust => opt_robust(&h.inst)?,
            Variant::Penalty => opt_penalty(&h.inst)?,
            Variant::Plain => {
                return Err(FaclocError::BadArgument(
                    "oracle needs a robust or penalty instance".into(),
                ))
            }
        };
        *out_cost = res.opt_cost;
        Ok(FlcStatus::Ok)
    })
}

/// # Safety
/// `sol` must be a live solution handle or null.
#[no_mangle]
pub unsafe extern "C" fn flc_solution_cost(sol: *const FlcSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.solution.cost)
}

/// # Safety
/// `sol` must be a live solution handle or null.
#[no_mangle]
pub unsafe extern "C" fn flc_solution_open_count(sol: *const FlcSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.solution.open.len())
}

fn string_out(s: String, out: *mut *mut c_char) -> Result<FlcStatus, FaclocError> {
    let c = CString::new(s)
        .map_err(|_| FaclocError::BadArgument("interior NUL in output".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(FlcStatus::Ok)
}

/// Serializes the solution (open set, served set, outliers, assignment,
/// cost) as JSON.
///
/// # Safety
/// `sol` must be a live solution handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flc_solution_to_json(
    sol: *const FlcSolution,
    out: *mut *mut c_char,
) -> FlcStatus {
    let (Some(s), false) = (sol.as_ref(), out.is_null()) else {
        set_error("null argument".into());
        return FlcStatus::NullArgument;
    };
    catch(|| string_out(serde_json::to_string_pretty(&s.solution)?, out))
}

/// Dual certificate (construction inputs and feasibility report) as JSON.
///
/// # Safety
/// `sol` must be a live solution handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flc_solution_certificate_json(
    sol: *const FlcSolution,
    out: *mut *mut c_char,
) -> FlcStatus {
    let (Some(s), false) = (sol.as_ref(), out.is_null()) else {
        set_error("null argument".into());
        return FlcStatus::NullArgument;
    };
    catch(|| string_out(s.certificate_json.clone(), out))
}

/// Round/bandwidth transcript as JSON; fails on sequential solutions.
///
/// # Safety
/// `sol` must be a live solution handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn flc_solution_transcript_json(
    sol: *const FlcSolution,
    out: *mut *mut c_char,
) -> FlcStatus {
    let (Some(s), false) = (sol.as_ref(), out.is_null()) else {
        set_error("null argument".into());
        return FlcStatus::NullArgument;
    };
    match &s.transcript {
        Some(t) => catch(|| string_out(t.to_json(), out)),
        None => {
            set_error("sequential solutions carry no transcript".into());
            FlcStatus::Internal
        }
    }
}

/// # Safety
/// `sol` must come from a solve/simulate call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn flc_solution_free(sol: *mut FlcSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `s` must be a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn flc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

//! C ABI over the `msqite` library.
//!
//! Objects cross the boundary as opaque handles that must be released with
//! the matching `*_free` function. Every fallible call returns an
//! [`MsqStatus`]; on failure the message is available from
//! [`msq_last_error_message`] on the same thread. Strings handed out by a
//! handle live as long as the handle.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use msqite::driver::{self, RunConfig, RunOutput};
use msqite::operators::{build_spin_operators, parse_hamiltonian_file, parse_hamiltonian_str, HamiltonianBundle};
use msqite::oracle::ReferenceOracle;
use msqite::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed config, Hamiltonian text or other input.
    InvalidInput = 3,
    Io = 4,
    /// Numerical failure or violated contract during a run.
    Numerical = 5,
    /// System too large for the exact oracle.
    TooLarge = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Parsed qubit Hamiltonian.
pub struct MsqHamiltonian {
    bundle: HamiltonianBundle,
}

/// Outcome of a completed run.
pub struct MsqResult {
    energies: Vec<f64>,
    csv: CString,
    summary: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(err: &Error) -> MsqStatus {
    match driver::exit_code(err) {
        2 => MsqStatus::InvalidInput,
        3 => MsqStatus::Io,
        5 => MsqStatus::TooLarge,
        _ => MsqStatus::Numerical,
    }
}

fn fail(err: Error) -> MsqStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn guard(f: impl FnOnce() -> MsqStatus) -> MsqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            MsqStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, MsqStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(MsqStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        MsqStatus::InvalidUtf8
    })
}

fn null_error(what: &str) -> MsqStatus {
    set_error(format!("null {what}"));
    MsqStatus::NullPointer
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn msq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn box_hamiltonian(bundle: HamiltonianBundle, out: *mut *mut MsqHamiltonian) -> MsqStatus {
    unsafe { *out = Box::into_raw(Box::new(MsqHamiltonian { bundle })) };
    MsqStatus::Ok
}

/// Parse a Hamiltonian text file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn msq_hamiltonian_from_file(
    path: *const c_char,
    out: *mut *mut MsqHamiltonian,
) -> MsqStatus {
    guard(|| {
        if out.is_null() {
            return null_error("output pointer");
        }
        let path = match str_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match parse_hamiltonian_file(path) {
            Ok(b) => box_hamiltonian(b, out),
            Err(e) => fail(e),
        }
    })
}

/// Parse Hamiltonian text held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn msq_hamiltonian_from_text(
    text: *const c_char,
    out: *mut *mut MsqHamiltonian,
) -> MsqStatus {
    guard(|| {
        if out.is_null() {
            return null_error("output pointer");
        }
        let text = match str_arg(text) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match parse_hamiltonian_str(text, "<text>") {
            Ok(b) => box_hamiltonian(b, out),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `h` must come from `msq_hamiltonian_from_*`; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn msq_hamiltonian_n_qubits(h: *const MsqHamiltonian, out: *mut usize) -> MsqStatus {
    if h.is_null() || out.is_null() {
        return null_error("argument");
    }
    *out = (*h).bundle.n_qubits;
    MsqStatus::Ok
}

/// # Safety
/// `h` must come from `msq_hamiltonian_from_*` or be null.
#[no_mangle]
pub unsafe extern "C" fn msq_hamiltonian_free(h: *mut MsqHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Exact eigenvalues in ascending order. Writes at most `capacity` values
/// to `values` (and, if `spins` is non-null, the matching `<S^2>` labels)
/// and the full spectrum size to `total`.
///
/// # Safety
/// `values` and `spins` must hold `capacity` doubles; `total` must be valid.
#[no_mangle]
pub unsafe extern "C" fn msq_spectrum(
    h: *const MsqHamiltonian,
    values: *mut f64,
    spins: *mut f64,
    capacity: usize,
    total: *mut usize,
) -> MsqStatus {
    guard(|| {
        if h.is_null() || total.is_null() || (values.is_null() && capacity > 0) {
            return null_error("argument");
        }
        let bundle = &(*h).bundle;
        let s2 = if spins.is_null() {
            None
        } else {
            match build_spin_operators(bundle.n_qubits) {
                Ok(ops) => Some(ops.s2),
                Err(e) => return fail(e),
            }
        };
        let spec = match ReferenceOracle::default().exact_spectrum(&bundle.h, s2.as_ref()) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        *total = spec.eigenvalues.len();
        let n = capacity.min(spec.eigenvalues.len());
        if n == 0 {
            return MsqStatus::Ok;
        }
        ptr::copy_nonoverlapping(spec.eigenvalues.as_ptr(), values, n);
        if let Some(labels) = &spec.spin_labels {
            ptr::copy_nonoverlapping(labels.as_ptr(), spins, n);
        }
        MsqStatus::Ok
    })
}

/// Execute a run described by a JSON config. Nothing is written to disk;
/// the `output` field is ignored. Relative paths resolve against the
/// process working directory.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn msq_run_config_json(json: *const c_char, out: *mut *mut MsqResult) -> MsqStatus {
    guard(|| {
        if out.is_null() {
            return null_error("output pointer");
        }
        let text = match str_arg(json) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let res: msqite::Result<RunOutput> = RunConfig::from_json(text).and_then(|c| driver::execute(&c));
        match res {
            Ok(r) => {
                let summary = serde_json::to_string_pretty(&r.summary).unwrap_or_default();
                let result = MsqResult {
                    energies: r.summary.final_energies.clone(),
                    csv: CString::new(r.csv).unwrap_or_default(),
                    summary: CString::new(summary).unwrap_or_default(),
                };
                *out = Box::into_raw(Box::new(result));
                MsqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of final energies, or 0 for a null handle.
///
/// # Safety
/// `r` must come from `msq_run_config_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn msq_result_n_energies(r: *const MsqResult) -> usize {
    if r.is_null() {
        0
    } else {
        (*r).energies.len()
    }
}

/// # Safety
/// `r` must come from `msq_run_config_json`; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn msq_result_energy(r: *const MsqResult, index: usize, out: *mut f64) -> MsqStatus {
    if r.is_null() || out.is_null() {
        return null_error("argument");
    }
    let r = &*r;
    match r.energies.get(index) {
        Some(e) => {
            *out = *e;
            MsqStatus::Ok
        }
        None => {
            set_error(format!("energy index {index} out of range"));
            MsqStatus::OutOfRange
        }
    }
}

/// Trajectory CSV; owned by the handle.
///
/// # Safety
/// `r` must come from `msq_run_config_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn msq_result_trajectory_csv(r: *const MsqResult) -> *const c_char {
    if r.is_null() {
        ptr::null()
    } else {
        (*r).csv.as_ptr()
    }
}

/// JSON summary; owned by the handle.
///
/// # Safety
/// `r` must come from `msq_run_config_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn msq_result_summary_json(r: *const MsqResult) -> *const c_char {
    if r.is_null() {
        ptr::null()
    } else {
        (*r).summary.as_ptr()
    }
}

/// # Safety
/// `r` must come from `msq_run_config_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn msq_result_free(r: *mut MsqResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

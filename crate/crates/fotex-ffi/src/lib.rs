//! C ABI for the fotex library.
//!
//! Tensors cross the boundary as opaque handles created and destroyed here;
//! every fallible call returns a [`FotexStatus`] and writes results through
//! out-pointers. `fotex_last_error` returns a thread-local message for the
//! most recent failure. All functions are panic-safe: internal panics are
//! caught and surfaced as `FOTEX_STATUS_INTERNAL_ERROR`.
//!
//! The matching header (`include/fotex.h`) is generated by cbindgen at
//! build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fotex::error::Error;
use fotex::fot;
use fotex::param::SymmetryClass;
use fotex::realize::{RealizeOptions, SosOutcome};
use fotex::tensor::{Direction, Frame, Km66, Sym4, Vec3};

/// Status codes shared by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FotexStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    NotCandidate = 3,
    SolverFailure = 4,
    ToleranceNotReached = 5,
    InternalError = 6,
}

/// Material-symmetry restriction for the extremal programs.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FotexSymmetry {
    Triclinic = 0,
    Orthotropic = 1,
}

/// Outcome of a candidate-set membership test.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct FotexCandidateReport {
    /// Worst violation of the Kelvin-Mandel redundancy relations.
    pub symmetry_residual: f64,
    /// Matrix eigenvalues, descending.
    pub km_eigenvalues: [f64; 6],
    /// Smallest eigenvalue before clamping.
    pub min_eigenvalue: f64,
    /// Double trace.
    pub trace: f64,
    /// 1 when the tensor is a realizable orientation tensor.
    pub is_candidate: i32,
}

/// Atomic decomposition with at most 15 weighted unit directions.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct FotexRealization {
    pub weights: [f64; 15],
    /// Unit directions, one (x, y, z) triple per atom.
    pub directions: [[f64; 3]; 15],
    pub atom_count: usize,
    /// Frobenius distance between the reconstruction and the input.
    pub residual: f64,
}

/// Opaque completely symmetric fourth-order tensor.
pub struct FotexTensor {
    inner: Sym4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> FotexStatus {
    match err {
        Error::NotCandidate { .. } => FotexStatus::NotCandidate,
        Error::Solver { .. } => FotexStatus::SolverFailure,
        Error::ToleranceNotReached { .. } => FotexStatus::ToleranceNotReached,
        Error::NullSpaceNotFound => FotexStatus::SolverFailure,
        _ => FotexStatus::InvalidArgument,
    }
}

fn guarded(f: impl FnOnce() -> FotexStatus) -> FotexStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            FotexStatus::InternalError
        }
    }
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fotex_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fotex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a tensor from its 15 independent coefficients in the canonical
/// multi-index order (1111, 1112, 1113, 1122, 1123, 1133, 1222, 1223, 1233,
/// 1333, 2222, 2223, 2233, 2333, 3333). Returns null on a null argument.
///
/// # Safety
/// `coefficients` must point to 15 readable doubles.
#[no_mangle]
pub unsafe extern "C" fn fotex_tensor_from_coefficients(
    coefficients: *const f64,
) -> *mut FotexTensor {
    if coefficients.is_null() {
        set_error("coefficients pointer is null");
        return std::ptr::null_mut();
    }
    let mut c = [0.0; 15];
    unsafe { std::ptr::copy_nonoverlapping(coefficients, c.as_mut_ptr(), 15) };
    Box::into_raw(Box::new(FotexTensor {
        inner: Sym4::from_coeffs(c),
    }))
}

/// Builds a tensor from a row-major 6x6 Kelvin-Mandel matrix. The matrix
/// must be symmetric and satisfy the complete-symmetry redundancies within
/// `tol`.
///
/// # Safety
/// `matrix` must point to 36 readable doubles; `out` to a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fotex_tensor_from_km(
    matrix: *const f64,
    tol: f64,
    out: *mut *mut FotexTensor,
) -> FotexStatus {
    if matrix.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FotexStatus::NullArgument;
    }
    let mut entries = [0.0; 36];
    unsafe { std::ptr::copy_nonoverlapping(matrix, entries.as_mut_ptr(), 36) };
    guarded(|| {
        let km = match Km66::from_entries(entries, Frame::Fixed, 1e-12) {
            Ok(km) => km,
            Err(err) => {
                set_error(&err.to_string());
                return FotexStatus::InvalidArgument;
            }
        };
        match Sym4::from_km(&km, tol) {
            Ok(tensor) => {
                unsafe { *out = Box::into_raw(Box::new(FotexTensor { inner: tensor })) };
                FotexStatus::Ok
            }
            Err(err) => {
                set_error(&err.to_string());
                FotexStatus::InvalidArgument
            }
        }
    })
}

/// The isotropic orientation tensor.
#[no_mangle]
pub extern "C" fn fotex_tensor_isotropic() -> *mut FotexTensor {
    Box::into_raw(Box::new(FotexTensor {
        inner: fotex::param::iso4(),
    }))
}

/// Deterministic random extreme candidate (maximizer of a seeded random
/// linear objective over the candidate set).
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fotex_tensor_sample_extreme(
    seed: u64,
    out: *mut *mut FotexTensor,
) -> FotexStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return FotexStatus::NullArgument;
    }
    guarded(|| match fot::sample_extreme_candidate(seed) {
        Ok(tensor) => {
            unsafe { *out = Box::into_raw(Box::new(FotexTensor { inner: tensor })) };
            FotexStatus::Ok
        }
        Err(err) => {
            set_error(&err.to_string());
            status_of(&err)
        }
    })
}

/// Releases a tensor handle. Null is ignored.
///
/// # Safety
/// `tensor` must be a pointer previously returned by this library and not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn fotex_tensor_free(tensor: *mut FotexTensor) {
    if !tensor.is_null() {
        drop(unsafe { Box::from_raw(tensor) });
    }
}

/// Copies the 15 coefficients out of a handle.
///
/// # Safety
/// `tensor` must be a live handle; `out` must point to 15 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fotex_tensor_coefficients(
    tensor: *const FotexTensor,
    out: *mut f64,
) -> FotexStatus {
    if tensor.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FotexStatus::NullArgument;
    }
    let t = unsafe { &*tensor };
    unsafe { std::ptr::copy_nonoverlapping(t.inner.coeffs().as_ptr(), out, 15) };
    FotexStatus::Ok
}

/// Copies the row-major Kelvin-Mandel matrix out of a handle.
///
/// # Safety
/// `tensor` must be a live handle; `out` must point to 36 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fotex_tensor_km(
    tensor: *const FotexTensor,
    out: *mut f64,
) -> FotexStatus {
    if tensor.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FotexStatus::NullArgument;
    }
    let t = unsafe { &*tensor };
    let km = t.inner.to_km(Frame::Fixed);
    unsafe { std::ptr::copy_nonoverlapping(km.entries().as_ptr(), out, 36) };
    FotexStatus::Ok
}

/// Evaluates the quartic form of the tensor at a vector.
///
/// # Safety
/// `tensor` must be a live handle; `q` must point to 3 readable doubles and
/// `out` to a writable double.
#[no_mangle]
pub unsafe extern "C" fn fotex_quartic_eval(
    tensor: *const FotexTensor,
    q: *const f64,
    out: *mut f64,
) -> FotexStatus {
    if tensor.is_null() || q.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FotexStatus::NullArgument;
    }
    let t = unsafe { &*tensor };
    let v = unsafe { Vec3::new(*q, *q.add(1), *q.add(2)) };
    unsafe { *out = t.inner.quartic_eval(&v) };
    FotexStatus::Ok
}

/// Candidate-set membership test.
///
/// # Safety
/// `tensor` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fotex_check_candidate(
    tensor: *const FotexTensor,
    tol: f64,
    out: *mut FotexCandidateReport,
) -> FotexStatus {
    if tensor.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FotexStatus::NullArgument;
    }
    let t = unsafe { &*tensor };
    guarded(|| {
        let report = fot::check_candidate(&t.inner, tol);
        unsafe {
            *out = FotexCandidateReport {
                symmetry_residual: report.symmetry_residual,
                km_eigenvalues: report.km_eigenvalues,
                min_eigenvalue: report.min_eigenvalue_raw,
                trace: report.trace,
                is_candidate: report.is_candidate as i32,
            };
        }
        FotexStatus::Ok
    })
}

/// Maximal quartic projection onto the direction given by spherical angles
/// (degrees) over candidates with the prescribed second-order eigenvalues.
/// `maximizer` may be null when only the value is wanted.
///
/// # Safety
/// `value` must be writable; `maximizer`, when non-null, receives a new
/// handle owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn fotex_extremize(
    lambda1: f64,
    lambda2: f64,
    phi_deg: f64,
    theta_deg: f64,
    symmetry: FotexSymmetry,
    value: *mut f64,
    maximizer: *mut *mut FotexTensor,
) -> FotexStatus {
    if value.is_null() {
        set_error("value pointer is null");
        return FotexStatus::NullArgument;
    }
    let sym = match symmetry {
        FotexSymmetry::Triclinic => SymmetryClass::Triclinic,
        FotexSymmetry::Orthotropic => SymmetryClass::Orthotropic,
    };
    let n = Direction::from_angles(phi_deg.to_radians(), theta_deg.to_radians());
    guarded(|| match fotex::sdp::extremize(lambda1, lambda2, &n, sym) {
        Ok((v, tensor)) => {
            unsafe {
                *value = v;
                if !maximizer.is_null() {
                    *maximizer = Box::into_raw(Box::new(FotexTensor { inner: tensor }));
                }
            }
            FotexStatus::Ok
        }
        Err(err) => {
            set_error(&err.to_string());
            match err {
                Error::OrderingViolation { .. } => FotexStatus::InvalidArgument,
                other => status_of(&other),
            }
        }
    })
}

/// Decomposes a candidate tensor into at most 15 weighted unit fibers.
/// `grid_size` of 0 selects the default dictionary; `tol` of 0 the default
/// target residual.
///
/// # Safety
/// `tensor` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fotex_realize(
    tensor: *const FotexTensor,
    grid_size: usize,
    tol: f64,
    out: *mut FotexRealization,
) -> FotexStatus {
    if tensor.is_null() || out.is_null() {
        set_error("null pointer argument");
        return FotexStatus::NullArgument;
    }
    let t = unsafe { &*tensor };
    let defaults = RealizeOptions::default();
    let opts = RealizeOptions {
        grid_size: if grid_size == 0 { defaults.grid_size } else { grid_size },
        tol: if tol == 0.0 { defaults.tol } else { tol },
        ..defaults
    };
    guarded(|| {
        let (result, status) = match fotex::realize::realize(&t.inner, &opts) {
            Ok(result) => (result, FotexStatus::Ok),
            Err(Error::ToleranceNotReached { best, residual, tol }) => {
                set_error(&format!(
                    "residual {residual:e} above tolerance {tol:e}; best effort returned"
                ));
                (*best, FotexStatus::ToleranceNotReached)
            }
            Err(err) => {
                set_error(&err.to_string());
                return status_of(&err);
            }
        };
        let mut packed = FotexRealization {
            weights: [0.0; 15],
            directions: [[0.0; 3]; 15],
            atom_count: result.atom_count.min(15),
            residual: result.residual,
        };
        for (slot, atom) in result.measure.atoms().iter().take(15).enumerate() {
            packed.weights[slot] = atom.weight;
            packed.directions[slot] = atom.direction.vector().as_array();
        }
        unsafe { *out = packed };
        status
    })
}

/// Sum-of-squares decision for the quartic form of `tensor`. On a feasible
/// outcome `*feasible` is 1 and `gram` (when non-null) receives the PSD
/// Gram matrix; otherwise `*feasible` is 0 and `witness` (when non-null)
/// receives a separating candidate tensor with `A :: B < 0`.
///
/// # Safety
/// `tensor` must be a live handle; `feasible` must be writable; `gram`,
/// when non-null, must point to 36 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fotex_sos_certificate(
    tensor: *const FotexTensor,
    tol: f64,
    feasible: *mut i32,
    gram: *mut f64,
    witness: *mut *mut FotexTensor,
) -> FotexStatus {
    if tensor.is_null() || feasible.is_null() {
        set_error("null pointer argument");
        return FotexStatus::NullArgument;
    }
    let t = unsafe { &*tensor };
    guarded(|| match fotex::realize::sos_certificate(&t.inner, tol) {
        Ok(SosOutcome::Certificate(cert)) => {
            unsafe {
                *feasible = 1;
                if !gram.is_null() {
                    std::ptr::copy_nonoverlapping(cert.gram.entries().as_ptr(), gram, 36);
                }
            }
            FotexStatus::Ok
        }
        Ok(SosOutcome::Infeasible(w)) => {
            unsafe {
                *feasible = 0;
                if !witness.is_null() {
                    *witness = Box::into_raw(Box::new(FotexTensor { inner: w.candidate }));
                }
            }
            FotexStatus::Ok
        }
        Err(err) => {
            set_error(&err.to_string());
            status_of(&err)
        }
    })
}

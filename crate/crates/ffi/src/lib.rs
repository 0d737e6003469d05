//! C interface to `nscert`.
//!
//! Objects are opaque handles created by `nscert_*_new`/`*_from_json`
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`NscertStatus`]; on failure `nscert_last_error` describes the
//! problem until the next call on the same thread. Strings returned through
//! `char **` out-parameters are owned by the caller and released with
//! `nscert_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nscert::assemblage::{self, Assemblage, Inflexibility, SteeringFunctional};
use nscert::exact::to_f64;
use nscert::orthograph::{build_graph, constraint_cliques};
use nscert::polytope::{self, BoxVector, Membership};
use nscert::thetabody::{theta_membership, ThetaOptions, ThetaStatus};
use nscert::{io, Error};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NscertStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Schema = 3,
    Io = 4,
    InvalidInput = 5,
    SolverUndecided = 6,
    HypothesisFailed = 7,
    Panic = 8,
}

/// Theta-body membership outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NscertTheta {
    Feasible = 0,
    Infeasible = 1,
    Undecided = 2,
}

/// Opaque box handle.
pub struct NscertBox(BoxVector);

/// Opaque assemblage handle.
pub struct NscertAssemblage(Assemblage);

/// Opaque steering functional handle.
pub struct NscertFunctional(SteeringFunctional);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> NscertStatus {
    match e {
        Error::Schema { .. } => NscertStatus::Schema,
        Error::Io(_) => NscertStatus::Io,
        Error::SolverUndecided | Error::Diverged(_) => NscertStatus::SolverUndecided,
        Error::HypothesisFailed(_) | Error::NotGenuine | Error::SearchExhausted(_) => NscertStatus::HypothesisFailed,
        _ => NscertStatus::InvalidInput,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (NscertStatus, String)>) -> NscertStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NscertStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NscertStatus::Panic
        }
    }
}

fn lib<T>(r: nscert::Result<T>) -> Result<T, (NscertStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (NscertStatus, String) {
    (NscertStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (NscertStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NscertStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NscertStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), (NscertStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn nscert_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn nscert_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn nscert_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nscert_box_from_json(json: *const c_char, out: *mut *mut NscertBox) -> NscertStatus {
    guard(|| {
        let b = lib(io::box_from_json(text(json, "json")?))?;
        put(out, Box::into_raw(Box::new(NscertBox(b))), "out")
    })
}

/// The PR box of the CHSH scenario.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nscert_box_pr(out: *mut *mut NscertBox) -> NscertStatus {
    guard(|| put(out, Box::into_raw(Box::new(NscertBox(BoxVector::pr_box()))), "out"))
}

/// # Safety
/// `b` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nscert_box_free(b: *mut NscertBox) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Canonical JSON; release with `nscert_string_free`.
///
/// # Safety
/// `b` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nscert_box_to_json(b: *const NscertBox, out: *mut *mut c_char) -> NscertStatus {
    guard(|| {
        let b = borrow(b, "box")?;
        put(out, owned_string(io::box_to_json(&b.0)), "out")
    })
}

/// Tight-row rank test.
///
/// # Safety
/// `b` must be a live handle; `is_vertex` and `rank` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nscert_vertex_check(b: *const NscertBox, is_vertex: *mut bool, rank: *mut usize) -> NscertStatus {
    guard(|| {
        let b = borrow(b, "box")?;
        let cs = lib(polytope::build_constraints(b.0.scenario()))?;
        let r = lib(polytope::is_vertex(&cs, &b.0))?;
        put(is_vertex, r.is_vertex, "is_vertex")?;
        put(rank, r.rank, "rank")
    })
}

/// Exact local-polytope membership. When separated, `value` and
/// `classical_bound` describe the certificate; otherwise both are zero.
///
/// # Safety
/// `b` must be a live rational box; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nscert_local_check(
    b: *const NscertBox,
    is_local: *mut bool,
    value: *mut f64,
    classical_bound: *mut f64,
) -> NscertStatus {
    guard(|| {
        let b = borrow(b, "box")?;
        let ldbs = lib(polytope::enumerate_deterministic(b.0.scenario()))?;
        let (local, v, c) = match lib(polytope::local_membership(&b.0, &ldbs))? {
            Membership::InHull(_) => (true, 0.0, 0.0),
            Membership::Separated {
                value, classical_bound, ..
            } => (false, to_f64(&value), to_f64(&classical_bound)),
        };
        put(is_local, local, "is_local")?;
        put(value, v, "value")?;
        put(classical_bound, c, "classical_bound")
    })
}

/// Theta-body membership with default solver settings, overridden by
/// positive `tol` and nonzero `max_iter`.
///
/// # Safety
/// `b` must be a live handle; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nscert_theta_check(
    b: *const NscertBox,
    tol: f64,
    max_iter: usize,
    status: *mut NscertTheta,
    residual: *mut f64,
) -> NscertStatus {
    guard(|| {
        let b = borrow(b, "box")?;
        let mut opts = ThetaOptions::default();
        if tol > 0.0 {
            opts.tol = tol;
        }
        if max_iter > 0 {
            opts.max_iter = max_iter;
        }
        let g = lib(build_graph(b.0.scenario()))?;
        let cs = lib(polytope::build_constraints(b.0.scenario()))?;
        let cliques = lib(constraint_cliques(&cs, &g))?;
        let cert = lib(theta_membership(&g, &cliques, &b.0, &opts))?;
        let s = match cert.status {
            ThetaStatus::Feasible => NscertTheta::Feasible,
            ThetaStatus::Infeasible => NscertTheta::Infeasible,
            ThetaStatus::Undecided => NscertTheta::Undecided,
        };
        put(status, s, "status")?;
        put(residual, cert.residual, "residual")
    })
}

/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nscert_assemblage_from_json(json: *const c_char, out: *mut *mut NscertAssemblage) -> NscertStatus {
    guard(|| {
        let s = lib(io::assemblage_from_json(text(json, "json")?))?;
        put(out, Box::into_raw(Box::new(NscertAssemblage(s))), "out")
    })
}

/// The exact GHZ assemblage.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nscert_assemblage_ghz(out: *mut *mut NscertAssemblage) -> NscertStatus {
    guard(|| put(out, Box::into_raw(Box::new(NscertAssemblage(assemblage::ghz_assemblage()))), "out"))
}

/// # Safety
/// `s` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nscert_assemblage_free(s: *mut NscertAssemblage) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nscert_assemblage_to_json(s: *const NscertAssemblage, out: *mut *mut c_char) -> NscertStatus {
    guard(|| {
        let s = borrow(s, "assemblage")?;
        put(out, owned_string(io::assemblage_to_json(&s.0)), "out")
    })
}

/// # Safety
/// `s` must be a live handle; `valid` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nscert_assemblage_validate(s: *const NscertAssemblage, valid: *mut bool) -> NscertStatus {
    guard(|| {
        let s = borrow(s, "assemblage")?;
        put(valid, assemblage::validate_assemblage(&s.0).is_valid(), "valid")
    })
}

/// Structural line-type test and exhaustive similarity check.
///
/// # Safety
/// `s` must be a live handle; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nscert_assemblage_inflexible(
    s: *const NscertAssemblage,
    structural: *mut bool,
    unique: *mut bool,
) -> NscertStatus {
    guard(|| {
        let s = borrow(s, "assemblage")?;
        let st = lib(assemblage::inflexible_structural(&s.0))?;
        let un = lib(assemblage::inflexible_oracle(&s.0))? == Inflexibility::Unique;
        put(structural, st, "structural")?;
        put(unique, un, "unique")
    })
}

/// # Safety
/// `s` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nscert_functional_build(s: *const NscertAssemblage, out: *mut *mut NscertFunctional) -> NscertStatus {
    guard(|| {
        let s = borrow(s, "assemblage")?;
        let f = lib(assemblage::build_functional(&s.0))?;
        put(out, Box::into_raw(Box::new(NscertFunctional(f))), "out")
    })
}

/// # Safety
/// `f` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nscert_functional_free(f: *mut NscertFunctional) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// Both handles must be live and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nscert_functional_evaluate(
    f: *const NscertFunctional,
    s: *const NscertAssemblage,
    value: *mut f64,
) -> NscertStatus {
    guard(|| {
        let f = borrow(f, "functional")?;
        let s = borrow(s, "assemblage")?;
        put(value, lib(assemblage::evaluate_functional(&f.0, &s.0))?, "value")
    })
}

/// # Safety
/// `f` must be a live handle and `bound` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nscert_functional_lhs_bound(f: *const NscertFunctional, bound: *mut f64) -> NscertStatus {
    guard(|| {
        let f = borrow(f, "functional")?;
        put(bound, f.0.lhs_bound, "bound")
    })
}

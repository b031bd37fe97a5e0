//! C ABI for rankscatter.
//!
//! Objects are opaque handles created by `rs_*_new` style functions and
//! released with the matching `rs_*_free`. Every fallible call returns an
//! `RsStatus`; on failure `rs_last_error` describes the problem. Field
//! elements cross the boundary as their index in field-element order
//! (the coefficient vector read as a base-p number, constant term lowest).

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rankscatter::cli::recheck;
use rankscatter::codes::{generalized_weights, WeightMode, WeightOptions};
use rankscatter::construction::{
    build_line, build_pseudoregulus, build_v, census, direct_sum_baseline, is_in_a, ConstructionParams, QSystem,
};
use rankscatter::report::Report;
use rankscatter::verify::{verify_evasive, verify_h_scattered, Mode, Status, VerifyOptions};
use rankscatter::{Error, Fe, FieldDescriptor, FieldTower};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// the system does not span the ambient space
    Degenerate = 3,
    TooLarge = 4,
    OutsideFamily = 5,
    TowerMismatch = 6,
    Io = 7,
    Parse = 8,
    BufferTooSmall = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsMode {
    Exhaustive = 0,
    WitnessSpan = 1,
    Sampled = 2,
    SampledTuples = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RsVerdictStatus {
    Holds = 0,
    Violated = 1,
    Inconclusive = 2,
}

/// Summary of a verification.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RsVerdict {
    pub status: RsVerdictStatus,
    /// weight of the witness, 0 without one
    pub witness_weight: u64,
    pub subspaces_checked: u64,
    pub total: u64,
}

/// A finite field F_{q^n} with q = p^s.
pub struct RsField {
    inner: FieldTower,
}

/// An F_q-subspace of F_{q^n}^k.
pub struct RsSystem {
    field: FieldDescriptor,
    inner: QSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> RsStatus {
    match e {
        Error::Degenerate => RsStatus::Degenerate,
        Error::TooLarge(_) => RsStatus::TooLarge,
        Error::OutsideFamily(_) => RsStatus::OutsideFamily,
        Error::TowerMismatch => RsStatus::TowerMismatch,
        Error::Io(_) => RsStatus::Io,
        Error::Parse(_) => RsStatus::Parse,
        _ => RsStatus::InvalidArgument,
    }
}

/// Runs `body`, turning errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), (RsStatus, String)>) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RsStatus::Internal
        }
    }
}

fn lib(e: Error) -> (RsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RsStatus, String) {
    (RsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (RsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (RsStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn same_field(f: &RsField, s: &RsSystem) -> Result<(), (RsStatus, String)> {
    if f.inner.descriptor() != s.field {
        return Err(lib(Error::TowerMismatch));
    }
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rs_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates F_{p^(s n)} over F_{p^s} with the default modulus.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_field_new(p: u32, s: u32, n: u32, out: *mut *mut RsField) -> RsStatus {
    guard(|| {
        let inner = FieldTower::new(p, s, n, None).map_err(lib)?;
        write(out, Box::into_raw(Box::new(RsField { inner })), "out")
    })
}

/// # Safety
/// `field` must be null or a handle from `rs_field_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_field_free(field: *mut RsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of elements, 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_field_order(field: *const RsField) -> u64 {
    field.as_ref().map_or(0, |f| f.inner.order())
}

/// Index of the generator z of the field.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_field_generator(field: *const RsField) -> u64 {
    field.as_ref().map_or(0, |f| f.inner.generator().index())
}

/// `out = a * b`.
///
/// # Safety
/// `field` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_field_mul(field: *const RsField, a: u64, b: u64, out: *mut u64) -> RsStatus {
    guard(|| {
        let f = &deref(field, "field")?.inner;
        let a = f.from_index(a).map_err(lib)?;
        let b = f.from_index(b).map_err(lib)?;
        write(out, f.mul(a, b).index(), "out")
    })
}

fn new_system(field: &RsField, inner: QSystem, out: *mut *mut RsSystem) -> Result<(), (RsStatus, String)> {
    let handle = Box::into_raw(Box::new(RsSystem { field: field.inner.descriptor(), inner }));
    // SAFETY: callers pass the pointer they received from C
    unsafe {
        if out.is_null() {
            drop(Box::from_raw(handle));
            return Err(null("out"));
        }
        out.write(handle);
    }
    Ok(())
}

/// V_{A,h} for alphas given as `m` element indices.
///
/// # Safety
/// `field` must be live, `alphas` must point to `m` values, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_system_family(
    field: *const RsField,
    m: u32,
    h: u32,
    alphas: *const u64,
    out: *mut *mut RsSystem,
) -> RsStatus {
    guard(|| {
        let rf = deref(field, "field")?;
        let f = &rf.inner;
        if alphas.is_null() {
            return Err(null("alphas"));
        }
        let alphas = std::slice::from_raw_parts(alphas, m as usize)
            .iter()
            .map(|&a| f.from_index(a))
            .collect::<rankscatter::Result<Vec<Fe>>>()
            .map_err(lib)?;
        let params = ConstructionParams::new(f, m, h, alphas).map_err(lib)?;
        new_system(rf, build_v(f, &params), out)
    })
}

/// Whether the alphas of `rs_system_family` lie in the admissible set.
///
/// # Safety
/// As for `rs_system_family`; `in_a` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rs_family_admissible(
    field: *const RsField,
    m: u32,
    h: u32,
    alphas: *const u64,
    in_a: *mut bool,
) -> RsStatus {
    guard(|| {
        let f = &deref(field, "field")?.inner;
        if alphas.is_null() {
            return Err(null("alphas"));
        }
        let alphas = std::slice::from_raw_parts(alphas, m as usize)
            .iter()
            .map(|&a| f.from_index(a))
            .collect::<rankscatter::Result<Vec<Fe>>>()
            .map_err(lib)?;
        let params = ConstructionParams::new(f, m, h, alphas).map_err(lib)?;
        write(in_a, is_in_a(f, &params), "in_a")
    })
}

/// {(x, x^q, ..., x^{q^h})}.
///
/// # Safety
/// `field` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_system_pseudoregulus(field: *const RsField, h: u32, out: *mut *mut RsSystem) -> RsStatus {
    guard(|| {
        let rf = deref(field, "field")?;
        new_system(rf, build_pseudoregulus(&rf.inner, h).map_err(lib)?, out)
    })
}

/// `copies` copies of the pseudoregulus in block-diagonal position.
///
/// # Safety
/// `field` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_system_direct_sum(
    field: *const RsField,
    h: u32,
    copies: usize,
    out: *mut *mut RsSystem,
) -> RsStatus {
    guard(|| {
        let rf = deref(field, "field")?;
        new_system(rf, direct_sum_baseline(&rf.inner, h, copies).map_err(lib)?, out)
    })
}

/// The F_q-expansion of the line through e_1 in F_{q^n}^k.
///
/// # Safety
/// `field` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_system_line(field: *const RsField, k: usize, out: *mut *mut RsSystem) -> RsStatus {
    guard(|| {
        let rf = deref(field, "field")?;
        new_system(rf, build_line(&rf.inner, k).map_err(lib)?, out)
    })
}

/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_system_free(system: *mut RsSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Ambient dimension k and F_q-dimension t.
///
/// # Safety
/// `system` must be live; `k` and `t` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_system_dims(system: *const RsSystem, k: *mut usize, t: *mut usize) -> RsStatus {
    guard(|| {
        let s = &deref(system, "system")?.inner;
        write(k, s.k(), "k")?;
        write(t, s.t(), "t")
    })
}

fn mode_of(m: RsMode) -> Mode {
    match m {
        RsMode::Exhaustive => Mode::Exhaustive,
        RsMode::WitnessSpan => Mode::WitnessSpan,
        RsMode::Sampled => Mode::Sampled,
        RsMode::SampledTuples => Mode::SampledTuples,
    }
}

fn options(mode: RsMode, budget: u64, seed: u64, workers: usize) -> VerifyOptions {
    let mut o = VerifyOptions::new(mode_of(mode)).seed(seed).workers(workers);
    if budget > 0 {
        o = o.budget(budget);
    }
    o
}

fn verdict_of(v: &rankscatter::verify::Verdict) -> RsVerdict {
    RsVerdict {
        status: match v.status {
            Status::Holds => RsVerdictStatus::Holds,
            Status::Violated => RsVerdictStatus::Violated,
            Status::Inconclusive => RsVerdictStatus::Inconclusive,
        },
        witness_weight: v.witness.as_ref().map_or(0, |w| w.weight as u64),
        subspaces_checked: v.subspaces_checked,
        total: v.total,
    }
}

/// (hdim, r)-evasiveness. A budget of 0 means none; workers 0 means default.
///
/// # Safety
/// `field` and `system` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_verify_evasive(
    field: *const RsField,
    system: *const RsSystem,
    hdim: usize,
    r: usize,
    mode: RsMode,
    budget: u64,
    seed: u64,
    workers: usize,
    out: *mut RsVerdict,
) -> RsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let s = deref(system, "system")?;
        same_field(f, s)?;
        let v = verify_evasive(&f.inner, &s.inner.space, hdim, r, &options(mode, budget, seed, workers)).map_err(lib)?;
        write(out, verdict_of(&v), "out")
    })
}

/// h-scatteredness. A system that does not span, but has no heavy
/// subspace, yields `RS_STATUS_DEGENERATE`.
///
/// # Safety
/// `field` and `system` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_verify_scattered(
    field: *const RsField,
    system: *const RsSystem,
    h: usize,
    mode: RsMode,
    budget: u64,
    seed: u64,
    workers: usize,
    out: *mut RsVerdict,
) -> RsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let s = deref(system, "system")?;
        same_field(f, s)?;
        let v = verify_h_scattered(&f.inner, &s.inner.space, h, &options(mode, budget, seed, workers)).map_err(lib)?;
        write(out, verdict_of(&v), "out")
    })
}

/// Exact generalized rank weights d_1..d_k written to `out` (length `len`,
/// at least k).
///
/// # Safety
/// `field` and `system` must be live; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn rs_generalized_weights(
    field: *const RsField,
    system: *const RsSystem,
    workers: usize,
    out: *mut u64,
    len: usize,
) -> RsStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let s = deref(system, "system")?;
        same_field(f, s)?;
        let k = s.inner.k();
        if out.is_null() {
            return Err(null("out"));
        }
        if len < k {
            return Err((RsStatus::BufferTooSmall, format!("need room for {k} weights, got {len}")));
        }
        let mut opts = WeightOptions::new(WeightMode::Exhaustive);
        opts.workers = workers;
        let rhos: Vec<usize> = (1..=k).collect();
        let p = generalized_weights(&f.inner, &s.inner.space, &rhos, &opts).map_err(lib)?;
        let out = std::slice::from_raw_parts_mut(out, k);
        for (o, e) in out.iter_mut().zip(&p.entries) {
            *o = e.value.unwrap_or(0) as u64;
        }
        Ok(())
    })
}

/// Counts alpha tuples of length m and those in the admissible set.
///
/// # Safety
/// `field` must be live; `tuples` and `in_a` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_census(
    field: *const RsField,
    m: u32,
    h: u32,
    tuples: *mut u64,
    in_a: *mut u64,
) -> RsStatus {
    guard(|| {
        let f = &deref(field, "field")?.inner;
        let c = census(f, m, h, false).map_err(lib)?;
        write(tuples, c.tuples, "tuples")?;
        write(in_a, c.in_a, "in_a")
    })
}

/// Re-verifies a report file; `confirmed` is false when it is corrupt.
///
/// # Safety
/// `path` must be a NUL-terminated string; `confirmed` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_recheck_report(path: *const c_char, workers: usize, confirmed: *mut bool) -> RsStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (RsStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let report = Report::read(std::path::Path::new(path)).map_err(lib)?;
        let outcome = recheck(&report, workers).map_err(lib)?;
        if !outcome.confirmed() {
            set_error(outcome.issues.join("; "));
        }
        write(confirmed, outcome.confirmed(), "confirmed")
    })
}

//! C ABI for `polycycle`.
//!
//! Maps, cycles and search results are opaque heap handles owned by the
//! caller and released with the matching `*_free` function. Big integers
//! cross the boundary as NUL-terminated decimal strings; strings returned by
//! this library must be released with [`pc_string_free`].
//!
//! Every fallible call returns a [`PcStatus`]. On failure a message is
//! available from [`pc_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_bigint::BigInt;
use polycycle::certify::{self, CertificateReport, Outcome};
use polycycle::mapdsl::{parse_mapfile, print_map};
use polycycle::orbit::{canonicalize, detect_cycle};
use polycycle::search::{search_range, SearchConfig, SearchResult};
use polycycle::{builtin, padic, BranchTag, Cycle, IntegerMap, Limits, Map};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    MapError = 4,
    NotACycle = 5,
    UnsupportedMap = 6,
    NotFound = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcBranch {
    Divisible = 0,
    NonDivisible = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcCheck {
    Rotation = 0,
    Sum = 1,
    Eq1 = 2,
    InverseIdentity = 3,
    InverseInequality = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcOutcome {
    Pass = 0,
    Fail = 1,
    NotApplicable = 2,
    Unresolved = 3,
}

impl From<Outcome> for PcOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Pass => PcOutcome::Pass,
            Outcome::Fail => PcOutcome::Fail,
            Outcome::NotApplicable => PcOutcome::NotApplicable,
            Outcome::Unresolved => PcOutcome::Unresolved,
        }
    }
}

/// Opaque map handle.
pub struct PcMap(Map);

/// Opaque cycle handle (canonical rotation).
pub struct PcCycle(Cycle);

/// Opaque search result handle.
pub struct PcSearchResult(SearchResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let msg = CString::new(message.into().replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Error(PcStatus, String);

type FfiResult<T> = Result<T, Error>;

fn err<T>(status: PcStatus, message: impl Into<String>) -> FfiResult<T> {
    Err(Error(status, message.into()))
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err(Error(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return err(PcStatus::NullPointer, format!("{what} is null"));
    }
    // SAFETY: caller passes a valid NUL-terminated string.
    unsafe { CStr::from_ptr(p) }.to_str().or_else(|_| err(PcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn big_arg(p: *const c_char, what: &str) -> FfiResult<BigInt> {
    let s = unsafe { str_arg(p, what)? };
    s.trim().parse().or_else(|_| err(PcStatus::InvalidArgument, format!("{what} `{s}` is not a decimal integer")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    // SAFETY: caller passes a live handle created by this library.
    unsafe { p.as_ref() }.ok_or_else(|| Error(PcStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return err(PcStatus::NullPointer, "output pointer is null");
    }
    // SAFETY: non-null out pointer supplied by the caller.
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> FfiResult<()> {
    let c = CString::new(s).expect("no interior NUL");
    unsafe { write_out(out, c.into_raw()) }
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: originated from CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Looks up `collatz` or `inverse-collatz`.
///
/// # Safety
/// `name` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_map_builtin(name: *const c_char, out: *mut *mut PcMap) -> PcStatus {
    guard(|| {
        let name = unsafe { str_arg(name, "name")? };
        let map = builtin(name).or_else(|e| err(PcStatus::MapError, e.to_string()))?;
        unsafe { write_out(out, Box::into_raw(Box::new(PcMap(map)))) }
    })
}

/// Parses the map file format (`p = ...`, `divisible = ...`, `otherwise = ...`).
///
/// # Safety
/// `text` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_map_parse(text: *const c_char, out: *mut *mut PcMap) -> PcStatus {
    guard(|| {
        let text = unsafe { str_arg(text, "text")? };
        let map = parse_mapfile(text).or_else(|e| err(PcStatus::MapError, e.to_string()))?;
        unsafe { write_out(out, Box::into_raw(Box::new(PcMap(map.into())))) }
    })
}

/// # Safety
/// `map` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_map_free(map: *mut PcMap) {
    if !map.is_null() {
        drop(unsafe { Box::from_raw(map) });
    }
}

/// Canonical file text of a piecewise map.
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_map_to_string(map: *const PcMap, out: *mut *mut c_char) -> PcStatus {
    guard(|| {
        let map = unsafe { ref_arg(map, "map")? };
        let Some(pw) = map.0.as_piecewise() else {
            return err(PcStatus::UnsupportedMap, "special maps have no file form");
        };
        unsafe { write_string(out, print_map(pw)) }
    })
}

/// Evaluates the map once. `out_branch` may be NULL.
///
/// # Safety
/// `map` must be a live handle, `x` a valid C string, `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_map_eval(
    map: *const PcMap,
    x: *const c_char,
    out_value: *mut *mut c_char,
    out_branch: *mut PcBranch,
) -> PcStatus {
    guard(|| {
        let map = unsafe { ref_arg(map, "map")? };
        let x = unsafe { big_arg(x, "x")? };
        let (y, tag) = map.0.eval(&x);
        if !out_branch.is_null() {
            let b = match tag {
                BranchTag::Divisible => PcBranch::Divisible,
                BranchTag::NonDivisible => PcBranch::NonDivisible,
            };
            unsafe { write_out(out_branch, b)? };
        }
        unsafe { write_string(out_value, y.to_string()) }
    })
}

/// Builds a canonical cycle from comma-separated members.
///
/// # Safety
/// `map` must be a live handle, `members` a valid C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_cycle_new(map: *const PcMap, members: *const c_char, out: *mut *mut PcCycle) -> PcStatus {
    guard(|| {
        let map = unsafe { ref_arg(map, "map")? };
        let text = unsafe { str_arg(members, "members")? };
        let values = text
            .split(',')
            .map(|s| s.trim().parse::<BigInt>())
            .collect::<Result<Vec<_>, _>>()
            .or_else(|_| err(PcStatus::InvalidArgument, format!("bad member list `{text}`")))?;
        let cycle = canonicalize(&map.0, &values).or_else(|e| err(PcStatus::NotACycle, e.to_string()))?;
        unsafe { write_out(out, Box::into_raw(Box::new(PcCycle(cycle)))) }
    })
}

/// Detects the cycle reached from `seed`; `PC_STATUS_NOT_FOUND` when the
/// orbit does not repeat within `max_steps` (0 selects the default).
///
/// # Safety
/// `map` must be a live handle, `seed` a valid C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_cycle_detect(
    map: *const PcMap,
    seed: *const c_char,
    max_steps: u64,
    out: *mut *mut PcCycle,
) -> PcStatus {
    guard(|| {
        let map = unsafe { ref_arg(map, "map")? };
        let seed = unsafe { big_arg(seed, "seed")? };
        let mut limits = Limits::default();
        if max_steps > 0 {
            limits.max_steps = max_steps;
        }
        let cycle = detect_cycle(&map.0, &seed, &limits).or_else(|e| err(PcStatus::NotFound, e.to_string()))?;
        unsafe { write_out(out, Box::into_raw(Box::new(PcCycle(cycle)))) }
    })
}

/// # Safety
/// `cycle` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_cycle_len(cycle: *const PcCycle) -> usize {
    unsafe { cycle.as_ref() }.map_or(0, |c| c.0.len())
}

/// Member `index` of the canonical rotation, as a decimal string.
///
/// # Safety
/// `cycle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_cycle_member(cycle: *const PcCycle, index: usize, out: *mut *mut c_char) -> PcStatus {
    guard(|| {
        let cycle = unsafe { ref_arg(cycle, "cycle")? };
        let Some(v) = cycle.0.members().get(index) else {
            return err(PcStatus::InvalidArgument, format!("index {index} out of range"));
        };
        unsafe { write_string(out, v.to_string()) }
    })
}

/// # Safety
/// `cycle` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_cycle_free(cycle: *mut PcCycle) {
    if !cycle.is_null() {
        drop(unsafe { Box::from_raw(cycle) });
    }
}

fn run_check(map: &Map, cycle: &Cycle, check: PcCheck) -> FfiResult<CertificateReport> {
    let mapped = |r: Result<CertificateReport, certify::CertifyError>| {
        r.or_else(|e| match e {
            certify::CertifyError::UnsupportedMap(m) => err(PcStatus::UnsupportedMap, m),
            other => err(PcStatus::NotACycle, other.to_string()),
        })
    };
    match check {
        PcCheck::Rotation => mapped(certify::verify_rotation_identity(map, cycle)),
        PcCheck::Sum => mapped(certify::verify_sum_identity(map, cycle)),
        PcCheck::Eq1 => mapped(certify::verify_eq1(cycle)),
        PcCheck::InverseIdentity | PcCheck::InverseInequality => {
            let inv = certify::verify_inverse_identities(cycle).or_else(|e| err(PcStatus::NotACycle, e.to_string()))?;
            Ok(if check == PcCheck::InverseIdentity { inv.identity } else { inv.inequality })
        }
    }
}

/// Runs one certificate. `out_json` may be NULL; otherwise it receives the
/// full report as JSON.
///
/// # Safety
/// `map` and `cycle` must be live handles; `out_outcome` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_verify(
    map: *const PcMap,
    cycle: *const PcCycle,
    check: PcCheck,
    out_outcome: *mut PcOutcome,
    out_json: *mut *mut c_char,
) -> PcStatus {
    guard(|| {
        let map = unsafe { ref_arg(map, "map")? };
        let cycle = unsafe { ref_arg(cycle, "cycle")? };
        let report = run_check(&map.0, &cycle.0, check)?;
        if !out_json.is_null() {
            let json = serde_json::to_string(&report).expect("report serializes");
            unsafe { write_string(out_json, json)? };
        }
        unsafe { write_out(out_outcome, report.outcome.into()) }
    })
}

/// Correspondence residual of `n` modulo `p^precision` as a decimal string;
/// `"0"` when the correspondence holds.
///
/// # Safety
/// `map` must be a live handle, `n` a valid C string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_padic_residual(
    map: *const PcMap,
    n: *const c_char,
    precision: u32,
    out: *mut *mut c_char,
) -> PcStatus {
    guard(|| {
        let map = unsafe { ref_arg(map, "map")? };
        let n = unsafe { big_arg(n, "n")? };
        let r = padic::correspondence_residual(&map.0, &n, precision).or_else(|e| match e {
            padic::PadicError::UnsupportedMap(m) => err(PcStatus::UnsupportedMap, m),
            other => err(PcStatus::InvalidArgument, other.to_string()),
        })?;
        unsafe { write_string(out, r.residue().to_string()) }
    })
}

/// Orbit identity for the Collatz orbit of `n` down to 2.
///
/// # Safety
/// `n` must be a valid C string; `out_outcome` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_orbit_identity(n: *const c_char, out_outcome: *mut PcOutcome) -> PcStatus {
    guard(|| {
        let n = unsafe { big_arg(n, "n")? };
        let report = certify::orbit_identity_check(&n, &Limits::default());
        unsafe { write_out(out_outcome, report.outcome.into()) }
    })
}

/// Searches seeds `lo..=hi`. `max_steps == 0` selects the default.
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_search(
    map: *const PcMap,
    lo: i64,
    hi: i64,
    workers: usize,
    max_steps: u64,
    out: *mut *mut PcSearchResult,
) -> PcStatus {
    guard(|| {
        let map = unsafe { ref_arg(map, "map")? };
        let mut limits = Limits::default();
        if max_steps > 0 {
            limits.max_steps = max_steps;
        }
        let config = SearchConfig::new(lo, hi).with_workers(workers).with_limits(limits);
        let result = search_range(&map.0, &config).or_else(|e| err(PcStatus::InvalidArgument, e.to_string()))?;
        unsafe { write_out(out, Box::into_raw(Box::new(PcSearchResult(result)))) }
    })
}

/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_search_result_cycle_count(result: *const PcSearchResult) -> usize {
    unsafe { result.as_ref() }.map_or(0, |r| r.0.cycles.len())
}

/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_search_result_unresolved(result: *const PcSearchResult) -> u64 {
    unsafe { result.as_ref() }.map_or(0, |r| r.0.unresolved)
}

/// Copies cycle `index` into a new handle (free with `pc_cycle_free`).
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_search_result_cycle(
    result: *const PcSearchResult,
    index: usize,
    out: *mut *mut PcCycle,
) -> PcStatus {
    guard(|| {
        let result = unsafe { ref_arg(result, "result")? };
        let Some(found) = result.0.cycles.get(index) else {
            return err(PcStatus::InvalidArgument, format!("index {index} out of range"));
        };
        unsafe { write_out(out, Box::into_raw(Box::new(PcCycle(found.cycle.clone())))) }
    })
}

/// The whole result, including certificates, as JSON.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_search_result_to_json(result: *const PcSearchResult, out: *mut *mut c_char) -> PcStatus {
    guard(|| {
        let result = unsafe { ref_arg(result, "result")? };
        let json = serde_json::to_string(&result.0).expect("search result serializes");
        unsafe { write_string(out, json) }
    })
}

/// # Safety
/// `result` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_search_result_free(result: *mut PcSearchResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

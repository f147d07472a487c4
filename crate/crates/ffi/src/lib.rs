//! C interface to `grsc-core`.
//!
//! Objects are opaque handles created by `*_parse`/`*_run` functions and
//! released with the matching `*_free`. Functions returning `GrscStatus`
//! write their result through an out pointer; on failure the message is
//! available from `grsc_last_error` until the next call on the same thread.
//! Strings returned as `char *` are owned by the caller and released with
//! `grsc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use grsc::cancel::{check_gr_metric, check_gr_p, ConditionVerdict};
use grsc::comerford::{comerford_transform, CosetAction};
use grsc::pipeline::{run_theorem_pipeline, PipelineConfig, PipelineRun};
use grsc::ripssegev::{build_rips_segev, CoefficientSystem};
use grsc::{Error, LabelledGraph, LengthFunction};
use num_rational::Ratio;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrscStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    NotReduced = 5,
    ActionNotFactoring = 6,
    Resource = 7,
    Io = 8,
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrscLength {
    Word = 0,
    FreeProduct = 1,
}

/// Pipeline outcome, numerically equal to the CLI exit code.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrscRunStatus {
    Verified = 0,
    Failed = 1,
    Exhausted = 2,
}

pub struct GrscGraph(LabelledGraph);
pub struct GrscCoefficients(CoefficientSystem);
pub struct GrscVerdict(ConditionVerdict);
pub struct GrscRun(PipelineRun);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_of(e: &Error) -> GrscStatus {
    match e {
        Error::Parse { .. } => GrscStatus::Parse,
        Error::NotReduced { .. } => GrscStatus::NotReduced,
        Error::ActionNotFactoring { .. } => GrscStatus::ActionNotFactoring,
        Error::Resource(_) => GrscStatus::Resource,
        Error::Io(_) => GrscStatus::Io,
        Error::Internal(_) => GrscStatus::Internal,
        _ => GrscStatus::InvalidInput,
    }
}

struct Fail(GrscStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(code_of(&e), e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GrscStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GrscStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside grsc".into());
            GrscStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(GrscStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(GrscStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(GrscStatus::NullArgument, format!("{name} is null")))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(GrscStatus::NullArgument, "out is null".into()));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap().into_raw()
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library.
#[no_mangle]
pub extern "C" fn grsc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn grsc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a graph in the `.grsc` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn grsc_graph_parse(
    text: *const c_char,
    out: *mut *mut GrscGraph,
) -> GrscStatus {
    guard(|| {
        let g = LabelledGraph::parse(str_arg(text, "text")?)?;
        put(out, GrscGraph(g))
    })
}

/// # Safety
/// `g` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn grsc_graph_free(g: *mut GrscGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn grsc_graph_num_vertices(g: *const GrscGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_vertices())
}

/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn grsc_graph_num_edges(g: *const GrscGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_edges())
}

/// `.grsc` text of the graph, or null if `g` is null.
///
/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn grsc_graph_to_text(g: *const GrscGraph) -> *mut c_char {
    g.as_ref().map_or(ptr::null_mut(), |g| owned(g.0.to_text()))
}

/// Graphviz rendering of the graph, or null if `g` is null.
///
/// # Safety
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn grsc_graph_to_dot(g: *const GrscGraph) -> *mut c_char {
    g.as_ref()
        .map_or(ptr::null_mut(), |g| owned(grsc::dot::export_dot(&g.0, "G")))
}

/// Checks `Gr'(num/den)` for the chosen length function.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn grsc_check_metric(
    g: *const GrscGraph,
    num: u64,
    den: u64,
    length: GrscLength,
    out: *mut *mut GrscVerdict,
) -> GrscStatus {
    guard(|| {
        let g = &ref_arg(g, "graph")?.0;
        if den == 0 {
            return Err(Fail(GrscStatus::InvalidInput, "zero denominator".into()));
        }
        let lf = match length {
            GrscLength::Word => LengthFunction::WordLength,
            GrscLength::FreeProduct => LengthFunction::free_product(g.alphabet()),
        };
        let v = check_gr_metric(g, Ratio::new(num, den), &lf)?;
        put(out, GrscVerdict(v))
    })
}

/// Checks `Gr(p)`, failing with `GRSC_STATUS_RESOURCE` past `cycle_cap`
/// simple cycles.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn grsc_check_gr_p(
    g: *const GrscGraph,
    p: usize,
    cycle_cap: usize,
    out: *mut *mut GrscVerdict,
) -> GrscStatus {
    guard(|| {
        let v = check_gr_p(&ref_arg(g, "graph")?.0, p, cycle_cap)?;
        put(out, GrscVerdict(v))
    })
}

/// # Safety
/// `v` must be a live verdict handle.
#[no_mangle]
pub unsafe extern "C" fn grsc_verdict_satisfied(v: *const GrscVerdict) -> bool {
    v.as_ref().is_some_and(|v| v.0.satisfied())
}

/// # Safety
/// `v` must be a live verdict handle.
#[no_mangle]
pub unsafe extern "C" fn grsc_verdict_num_violations(v: *const GrscVerdict) -> usize {
    v.as_ref().map_or(0, |v| v.0.violations.len())
}

/// Text report of the verdict against the graph it was computed on.
///
/// # Safety
/// `v` and `g` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn grsc_verdict_report(
    v: *const GrscVerdict,
    g: *const GrscGraph,
) -> *mut c_char {
    match (v.as_ref(), g.as_ref()) {
        (Some(v), Some(g)) => owned(v.0.report(&g.0)),
        _ => ptr::null_mut(),
    }
}

/// # Safety
/// `v` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn grsc_verdict_free(v: *mut GrscVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Transformed graph for a finite-index coset action given as text
/// (`degree h` followed by one `perm` line per generator).
///
/// # Safety
/// `g` must be a live graph handle, `action` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn grsc_comerford(
    g: *const GrscGraph,
    action: *const c_char,
    out: *mut *mut GrscGraph,
) -> GrscStatus {
    guard(|| {
        let g = &ref_arg(g, "graph")?.0;
        let act = CosetAction::parse(str_arg(action, "action")?, g.alphabet())?;
        let gh = comerford_transform(g, &act)?;
        put(out, GrscGraph(gh.graph))
    })
}

/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn grsc_coefficients_parse(
    text: *const c_char,
    out: *mut *mut GrscCoefficients,
) -> GrscStatus {
    guard(|| {
        let cs = CoefficientSystem::parse(str_arg(text, "text")?)?;
        put(out, GrscCoefficients(cs))
    })
}

/// # Safety
/// `cs` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn grsc_coefficients_free(cs: *mut GrscCoefficients) {
    if !cs.is_null() {
        drop(Box::from_raw(cs));
    }
}

/// Graph built from a coefficient system.
///
/// # Safety
/// `cs` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn grsc_build_graph(
    cs: *const GrscCoefficients,
    out: *mut *mut GrscGraph,
) -> GrscStatus {
    guard(|| {
        let r = build_rips_segev(&ref_arg(cs, "coefficients")?.0)?;
        put(out, GrscGraph(r.graph))
    })
}

/// Runs the full pipeline for subgroups of index up to `k`. With `cs`
/// null the coefficient system is searched for with `seed` and `budget`.
///
/// # Safety
/// `cs` must be null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn grsc_pipeline_run(
    k: usize,
    seed: u64,
    budget: u64,
    cs: *const GrscCoefficients,
    continue_on_failure: bool,
    out: *mut *mut GrscRun,
) -> GrscStatus {
    guard(|| {
        let mut cfg = PipelineConfig::new(k, seed, budget);
        cfg.coefficients = cs.as_ref().map(|c| c.0.clone());
        cfg.halt_on_failure = !continue_on_failure;
        put(out, GrscRun(run_theorem_pipeline(&cfg)?))
    })
}

/// # Safety
/// `run` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn grsc_run_status(run: *const GrscRun) -> GrscRunStatus {
    use grsc::pipeline::RunStatus;
    match run.as_ref().map(|r| r.0.report.status) {
        Some(RunStatus::Verified) => GrscRunStatus::Verified,
        Some(RunStatus::Failed) | None => GrscRunStatus::Failed,
        Some(RunStatus::Exhausted) => GrscRunStatus::Exhausted,
    }
}

/// # Safety
/// `run` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn grsc_run_report(run: *const GrscRun) -> *mut c_char {
    run.as_ref()
        .map_or(ptr::null_mut(), |r| owned(r.0.report.to_text()))
}

/// Writes every artifact of the run below `dir`.
///
/// # Safety
/// `run` must be a live handle and `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn grsc_run_write(run: *const GrscRun, dir: *const c_char) -> GrscStatus {
    guard(|| {
        let r = ref_arg(run, "run")?;
        r.0.write(std::path::Path::new(str_arg(dir, "dir")?))?;
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn grsc_run_free(run: *mut GrscRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

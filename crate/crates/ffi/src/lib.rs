//! C ABI for the simulator.
//!
//! Workloads and results are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns a [`DpStatus`];
//! on failure [`dp_last_error_message`] describes the error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use dagpreempt::engine::run_simulation_unchecked;
use dagpreempt::gantt::to_gantt_json;
use dagpreempt::workloads::parse_workflow_json;
use dagpreempt::{
    validate_schedule, Error, MetricVector, PreemptionPolicy, SchedulerKind, SimulationResult, Workload,
    WorkloadSpec,
};

pub const DP_SCHEDULER_HEFT: u32 = 0;
pub const DP_SCHEDULER_CPOP: u32 = 1;
pub const DP_SCHEDULER_MINMIN: u32 = 2;
pub const DP_SCHEDULER_MAXMIN: u32 = 3;
pub const DP_SCHEDULER_RANDOM: u32 = 4;

pub const DP_POLICY_PREEMPTIVE: u32 = 0;
pub const DP_POLICY_NON_PREEMPTIVE: u32 = 1;
pub const DP_POLICY_LAST_K: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    SimulationError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

pub struct DpWorkload {
    inner: Arc<Workload>,
}

pub struct DpResult {
    workload: Arc<Workload>,
    result: SimulationResult,
    metrics: MetricVector,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DpMetrics {
    pub total_makespan: f64,
    pub mean_makespan: f64,
    pub mean_flowtime: f64,
    pub mean_utilization: f64,
    /// Wall-clock seconds.
    pub scheduler_runtime: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> DpStatus {
    match e.root() {
        Error::Parse { .. } | Error::Cycle(_) | Error::InvalidGraph(_) | Error::InvalidNetwork(_) => {
            DpStatus::ParseError
        }
        Error::Parameter(_) | Error::Config(_) => DpStatus::InvalidArgument,
        _ => DpStatus::SimulationError,
    }
}

fn fail(status: DpStatus, message: impl Into<String>) -> DpStatus {
    set_error(message);
    status
}

fn guard(body: impl FnOnce() -> DpStatus) -> DpStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|_| fail(DpStatus::Panic, "panic inside dagpreempt"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, DpStatus> {
    if s.is_null() {
        return Err(fail(DpStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(DpStatus::InvalidUtf8, e.to_string()))
}

fn scheduler_from(code: u32) -> Option<SchedulerKind> {
    match code {
        DP_SCHEDULER_HEFT => Some(SchedulerKind::Heft),
        DP_SCHEDULER_CPOP => Some(SchedulerKind::Cpop),
        DP_SCHEDULER_MINMIN => Some(SchedulerKind::MinMin),
        DP_SCHEDULER_MAXMIN => Some(SchedulerKind::MaxMin),
        DP_SCHEDULER_RANDOM => Some(SchedulerKind::Random),
        _ => None,
    }
}

fn policy_from(code: u32, k: usize) -> Option<PreemptionPolicy> {
    match code {
        DP_POLICY_PREEMPTIVE => Some(PreemptionPolicy::FullyPreemptive),
        DP_POLICY_NON_PREEMPTIVE => Some(PreemptionPolicy::NonPreemptive),
        DP_POLICY_LAST_K => Some(PreemptionPolicy::last_k(k)),
        _ => None,
    }
}

fn boxed_workload(w: Workload, out: *mut *mut DpWorkload) -> DpStatus {
    let handle = Box::new(DpWorkload { inner: Arc::new(w) });
    unsafe { *out = Box::into_raw(handle) };
    DpStatus::Ok
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn dp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses workflow JSON into a new workload handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dp_workload_from_json(json: *const c_char, out: *mut *mut DpWorkload) -> DpStatus {
    guard(|| {
        if out.is_null() {
            return fail(DpStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_workflow_json(text) {
            Ok(w) => boxed_workload(w, out),
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Generates a workload from a JSON generator spec, or from the defaults
/// when `spec_json` is NULL. `seed` replaces the spec's seed.
///
/// # Safety
/// `spec_json` must be NULL or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dp_workload_generate(
    spec_json: *const c_char,
    seed: u64,
    out: *mut *mut DpWorkload,
) -> DpStatus {
    guard(|| {
        if out.is_null() {
            return fail(DpStatus::NullPointer, "null output pointer");
        }
        let mut spec = if spec_json.is_null() {
            WorkloadSpec::default()
        } else {
            let text = match read_str(spec_json) {
                Ok(t) => t,
                Err(s) => return s,
            };
            match serde_json::from_str::<WorkloadSpec>(text) {
                Ok(spec) => spec,
                Err(e) => return fail(DpStatus::ParseError, e.to_string()),
            }
        };
        spec.seed = seed;
        match spec.generate() {
            Ok(w) => boxed_workload(w, out),
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `workload` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dp_workload_free(workload: *mut DpWorkload) {
    if !workload.is_null() {
        drop(Box::from_raw(workload));
    }
}

/// Number of task graphs, or 0 for NULL.
///
/// # Safety
/// `workload` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dp_workload_graph_count(workload: *const DpWorkload) -> usize {
    workload.as_ref().map_or(0, |w| w.inner.graphs.len())
}

/// Number of network nodes, or 0 for NULL.
///
/// # Safety
/// `workload` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dp_workload_node_count(workload: *const DpWorkload) -> usize {
    workload.as_ref().map_or(0, |w| w.inner.network.len())
}

/// Runs a simulation. `k` is only read for `DP_POLICY_LAST_K`; `seed` only
/// affects the random scheduler. The result keeps the workload alive.
///
/// # Safety
/// `workload` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dp_simulate(
    workload: *const DpWorkload,
    scheduler: u32,
    policy: u32,
    k: usize,
    seed: u64,
    out: *mut *mut DpResult,
) -> DpStatus {
    guard(|| {
        let Some(w) = workload.as_ref() else {
            return fail(DpStatus::NullPointer, "null workload");
        };
        if out.is_null() {
            return fail(DpStatus::NullPointer, "null output pointer");
        }
        let Some(scheduler) = scheduler_from(scheduler) else {
            return fail(DpStatus::InvalidArgument, format!("unknown scheduler code {scheduler}"));
        };
        let Some(policy) = policy_from(policy, k) else {
            return fail(DpStatus::InvalidArgument, format!("unknown policy code {policy}"));
        };
        let wl = &w.inner;
        let run = run_simulation_unchecked(&wl.graphs, &wl.network, policy, scheduler, seed)
            .and_then(|r| MetricVector::compute(&r, &wl.graphs, &wl.network).map(|m| (r, m)));
        match run {
            Ok((result, metrics)) => {
                let handle = Box::new(DpResult {
                    workload: Arc::clone(wl),
                    result,
                    metrics,
                });
                *out = Box::into_raw(handle);
                DpStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dp_result_metrics(result: *const DpResult, out: *mut DpMetrics) -> DpStatus {
    let (Some(r), Some(out)) = (result.as_ref(), out.as_mut()) else {
        return fail(DpStatus::NullPointer, "null argument");
    };
    let m = &r.metrics;
    *out = DpMetrics {
        total_makespan: m.total_makespan,
        mean_makespan: m.mean_makespan,
        mean_flowtime: m.mean_flowtime,
        mean_utilization: m.mean_utilization,
        scheduler_runtime: m.scheduler_runtime,
    };
    DpStatus::Ok
}

/// Copies per-node utilization into `buf`, which must hold at least
/// `dp_workload_node_count` values.
///
/// # Safety
/// `result` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn dp_result_utilization(result: *const DpResult, buf: *mut f64, len: usize) -> DpStatus {
    let Some(r) = result.as_ref() else {
        return fail(DpStatus::NullPointer, "null result");
    };
    let values = &r.metrics.utilization;
    if len < values.len() {
        return fail(DpStatus::BufferTooSmall, format!("need {} slots, got {len}", values.len()));
    }
    if buf.is_null() {
        return fail(DpStatus::NullPointer, "null buffer");
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    DpStatus::Ok
}

/// Number of validity violations in the final schedule; 0 means valid.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dp_result_violation_count(result: *const DpResult, out: *mut usize) -> DpStatus {
    let (Some(r), Some(out)) = (result.as_ref(), out.as_mut()) else {
        return fail(DpStatus::NullPointer, "null argument");
    };
    let report = validate_schedule(&r.result.schedule, &r.workload.graphs, &r.workload.network);
    *out = report.violations.len();
    DpStatus::Ok
}

/// Gantt JSON of the final schedule. Free the string with [`dp_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dp_result_gantt_json(result: *const DpResult, out: *mut *mut c_char) -> DpStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(DpStatus::NullPointer, "null result");
        };
        if out.is_null() {
            return fail(DpStatus::NullPointer, "null output pointer");
        }
        let json = match to_gantt_json(&r.result.schedule, &r.workload.graphs, &r.workload.network) {
            Ok(j) => j,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        match CString::new(json) {
            Ok(s) => {
                *out = s.into_raw();
                DpStatus::Ok
            }
            Err(e) => fail(DpStatus::SimulationError, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `result` must be NULL or a handle from [`dp_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dp_result_free(result: *mut DpResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

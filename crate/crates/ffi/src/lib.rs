//! C interface. Objects are opaque handles created by `*_new`/`*_load`-style
//! calls and released with the matching `*_destroy`. Fallible calls return a
//! status code (0 on success) and, when `err` is non-null, store a
//! heap-allocated `CclError` that the caller frees with `ccl_error_destroy`.

#![allow(clippy::missing_safety_doc)]

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use cclsim::device::{get_info, load_registry, DeviceType, InfoKey, Registry};
use cclsim::error::{code, error_string, Error, ErrorInfo, Result};
use cclsim::prng::{run_pipeline, PipelineConfig};
use cclsim::profiler::{export_table, summary, AggSort, OverlapSort, ProfReport, Profiler, SortOrder};
use cclsim::selector::{apply_filter_chain, builtin_type_filter, builtin_vendor_filter, FilterChain};
use cclsim::sim::{ClockMode, TraceRecord};
use cclsim::worksize::suggest_worksizes;

pub const CCL_SUCCESS: i32 = 0;
pub const CCL_INVALID_VALUE: i32 = -30;
pub const CCL_INVARIANT_VIOLATION: i32 = 10002;
pub const CCL_INVALID_HANDLE: i32 = 10013;

pub const CCL_CLOCK_VIRTUAL: i32 = 0;
pub const CCL_CLOCK_HOST: i32 = 1;

pub const CCL_DEVICE_ANY: i32 = -1;
pub const CCL_DEVICE_CPU: i32 = 0;
pub const CCL_DEVICE_GPU: i32 = 1;
pub const CCL_DEVICE_ACCEL: i32 = 2;
pub const CCL_DEVICE_OTHER: i32 = 3;

pub const CCL_INFO_NAME: u32 = 0;
pub const CCL_INFO_VENDOR: u32 = 1;
pub const CCL_INFO_TYPE: u32 = 2;
pub const CCL_INFO_COMPUTE_UNITS: u32 = 3;
pub const CCL_INFO_MAX_WG_TOTAL: u32 = 4;
pub const CCL_INFO_MAX_WG_PER_DIM: u32 = 5;
pub const CCL_INFO_PREFERRED_MULTIPLE: u32 = 6;
pub const CCL_INFO_VERSION: u32 = 7;

pub struct CclError {
    code: i32,
    message: CString,
    origin: CString,
}

pub struct CclRegistry(Registry);

pub struct CclReport(ProfReport);

#[derive(Default)]
pub struct CclProfiler {
    queues: Vec<(String, Vec<TraceRecord>)>,
    elapsed_ns: Option<u64>,
}

fn to_cstring(s: String) -> CString {
    CString::new(s.replace('\0', " ")).expect("interior NULs replaced")
}

/// Runs `f`, converting errors and panics into a status code and an
/// optional error object.
fn guard(err: *mut *mut CclError, origin: &str, f: impl FnOnce() -> Result<()>) -> i32 {
    if !err.is_null() {
        unsafe { *err = ptr::null_mut() };
    }
    let info = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return CCL_SUCCESS,
        Ok(Err(e)) => e.info(origin),
        Err(_) => ErrorInfo {
            code: code::INVARIANT_VIOLATION,
            message: "internal panic".into(),
            origin: origin.into(),
        },
    };
    if !err.is_null() {
        let boxed = Box::new(CclError {
            code: info.code,
            message: to_cstring(info.message),
            origin: to_cstring(info.origin),
        });
        unsafe { *err = Box::into_raw(boxed) };
    }
    info.code
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T> {
    p.as_ref().ok_or(Error::InvalidHandle(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T> {
    p.as_mut().ok_or(Error::InvalidHandle(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T> {
    p.as_mut().ok_or_else(|| Error::InvariantViolation(format!("{what} must not be null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str> {
    if p.is_null() {
        return Err(Error::InvariantViolation(format!("{what} must not be null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Error::InvalidName(format!("{what} is not UTF-8")))
}

/// Copies `s` into `buf` (truncated, always NUL-terminated when `len > 0`)
/// and returns the size needed to hold all of it including the NUL.
unsafe fn copy_text(s: &str, buf: *mut c_char, len: usize) -> usize {
    if !buf.is_null() && len > 0 {
        let n = s.len().min(len - 1);
        ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
    }
    s.len() + 1
}

fn device_type(v: i32) -> Result<Option<DeviceType>> {
    Ok(Some(match v {
        CCL_DEVICE_ANY => return Ok(None),
        CCL_DEVICE_CPU => DeviceType::Cpu,
        CCL_DEVICE_GPU => DeviceType::Gpu,
        CCL_DEVICE_ACCEL => DeviceType::Accel,
        CCL_DEVICE_OTHER => DeviceType::Other,
        _ => return Err(Error::UnknownKey(format!("device type {v}"))),
    }))
}

fn device_at(reg: &Registry, index: usize) -> Result<&cclsim::device::DeviceDescriptor> {
    let count = reg.devices().count();
    reg.devices()
        .nth(index)
        .ok_or_else(|| Error::InvariantViolation(format!("device index {index} out of range ({count} devices)")))
}

// ---- errors ---------------------------------------------------------------

/// Writes the description of `code` into `buf`; returns the size needed.
#[no_mangle]
pub unsafe extern "C" fn ccl_error_string(code: i32, buf: *mut c_char, len: usize) -> usize {
    copy_text(&error_string(code), buf, len)
}

#[no_mangle]
pub unsafe extern "C" fn ccl_error_code(err: *const CclError) -> i32 {
    err.as_ref().map_or(CCL_INVALID_HANDLE, |e| e.code)
}

/// Valid until the error is destroyed.
#[no_mangle]
pub unsafe extern "C" fn ccl_error_message(err: *const CclError) -> *const c_char {
    err.as_ref().map_or(ptr::null(), |e| e.message.as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn ccl_error_origin(err: *const CclError) -> *const c_char {
    err.as_ref().map_or(ptr::null(), |e| e.origin.as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn ccl_error_destroy(err: *mut CclError) {
    if !err.is_null() {
        drop(Box::from_raw(err));
    }
}

// ---- registry -------------------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn ccl_registry_builtin(reg: *mut *mut CclRegistry) -> i32 {
    guard(ptr::null_mut(), "ccl_registry_builtin", || {
        *out(reg, "reg")? = Box::into_raw(Box::new(CclRegistry(Registry::builtin())));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ccl_registry_load(
    path: *const c_char,
    reg: *mut *mut CclRegistry,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_registry_load", || {
        let r = load_registry(text(path, "path")?)?;
        *out(reg, "reg")? = Box::into_raw(Box::new(CclRegistry(r)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ccl_registry_from_json(
    json: *const c_char,
    reg: *mut *mut CclRegistry,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_registry_from_json", || {
        let r = Registry::from_json(text(json, "json")?)?;
        *out(reg, "reg")? = Box::into_raw(Box::new(CclRegistry(r)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ccl_registry_destroy(reg: *mut CclRegistry) {
    if !reg.is_null() {
        drop(Box::from_raw(reg));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ccl_registry_device_count(reg: *const CclRegistry, count: *mut usize) -> i32 {
    guard(ptr::null_mut(), "ccl_registry_device_count", || {
        *out(count, "count")? = handle(reg, "registry")?.0.devices().count();
        Ok(())
    })
}

/// Formats one info key of the device at `index` (registry order). `needed`,
/// if non-null, receives the buffer size required for the full value.
#[no_mangle]
pub unsafe extern "C" fn ccl_device_info(
    reg: *const CclRegistry,
    index: usize,
    key: u32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_device_info", || {
        let reg = &handle(reg, "registry")?.0;
        let value = get_info(device_at(reg, index)?, InfoKey::from_index(key)?).to_string();
        let n = copy_text(&value, buf, len);
        if let Some(needed) = needed.as_mut() {
            *needed = n;
        }
        Ok(())
    })
}

/// Applies the type and vendor filters (either may be skipped with
/// `CCL_DEVICE_ANY` / NULL) and writes matching registry indices. `count`
/// receives the number of matches even when it exceeds `cap`.
#[no_mangle]
pub unsafe extern "C" fn ccl_select_devices(
    reg: *const CclRegistry,
    dev_type: i32,
    vendor: *const c_char,
    indices: *mut usize,
    cap: usize,
    count: *mut usize,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_select_devices", || {
        let reg = &handle(reg, "registry")?.0;
        let mut chain = FilterChain::new();
        if let Some(t) = device_type(dev_type)? {
            chain.push(builtin_type_filter(t));
        }
        if !vendor.is_null() {
            chain.push(builtin_vendor_filter(text(vendor, "vendor")?));
        }
        let all: Vec<_> = reg.devices().collect();
        let picked: Vec<usize> = apply_filter_chain(reg, &chain)
            .iter()
            .map(|d| all.iter().position(|a| a.same_device(d)).expect("selected device is in the registry"))
            .collect();
        if !indices.is_null() {
            let dst = slice::from_raw_parts_mut(indices, cap);
            for (slot, &i) in dst.iter_mut().zip(&picked) {
                *slot = i;
            }
        }
        *out(count, "count")? = picked.len();
        Ok(())
    })
}

/// `real_ws`, `gws` and `lws` each hold `dims` elements.
#[no_mangle]
pub unsafe extern "C" fn ccl_suggest_worksizes(
    reg: *const CclRegistry,
    index: usize,
    dims: usize,
    real_ws: *const u64,
    gws: *mut u64,
    lws: *mut u64,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_suggest_worksizes", || {
        let reg = &handle(reg, "registry")?.0;
        if real_ws.is_null() || gws.is_null() || lws.is_null() || !(1..=3).contains(&dims) {
            return Err(Error::BadDims(format!("{dims} dims or null size array")));
        }
        let ws = suggest_worksizes(device_at(reg, index)?, dims, slice::from_raw_parts(real_ws, dims))?;
        slice::from_raw_parts_mut(gws, dims).copy_from_slice(ws.gws());
        slice::from_raw_parts_mut(lws, dims).copy_from_slice(ws.lws());
        Ok(())
    })
}

// ---- generator ------------------------------------------------------------

/// Runs the double-buffered generator on device `index`, writing
/// `8 * n * iterations` bytes to `out_buf`. When `report` is non-null it
/// receives the profile of the run.
#[no_mangle]
pub unsafe extern "C" fn ccl_run_pipeline(
    reg: *const CclRegistry,
    index: usize,
    n: u32,
    iterations: u64,
    clock: i32,
    out_buf: *mut u8,
    out_len: usize,
    report: *mut *mut CclReport,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_run_pipeline", || {
        let reg = &handle(reg, "registry")?.0;
        let clock = match clock {
            CCL_CLOCK_VIRTUAL => ClockMode::Virtual,
            CCL_CLOCK_HOST => ClockMode::Host,
            other => return Err(Error::UnknownKey(format!("clock mode {other}"))),
        };
        let cfg = PipelineConfig { n, iterations, clock, device: device_at(reg, index)?.clone() };
        let total = usize::try_from(cfg.total_bytes()).unwrap_or(usize::MAX);
        if out_buf.is_null() || out_len < total {
            return Err(Error::OutOfBounds { offset: 0, nbytes: total, size: if out_buf.is_null() { 0 } else { out_len } });
        }
        let mut sink = slice::from_raw_parts_mut(out_buf, total);
        let res = run_pipeline(&cfg, &mut sink)?;
        if !report.is_null() {
            *report = Box::into_raw(Box::new(CclReport(res.profile()?)));
        }
        Ok(())
    })
}

// ---- profiler -------------------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn ccl_profiler_new(prof: *mut *mut CclProfiler) -> i32 {
    guard(ptr::null_mut(), "ccl_profiler_new", || {
        *out(prof, "prof")? = Box::into_raw(Box::<CclProfiler>::default());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ccl_profiler_destroy(prof: *mut CclProfiler) {
    if !prof.is_null() {
        drop(Box::from_raw(prof));
    }
}

/// Adds one completed event. Queues are created on first use.
#[no_mangle]
pub unsafe extern "C" fn ccl_profiler_add_event(
    prof: *mut CclProfiler,
    queue: *const c_char,
    event: *const c_char,
    start_ns: u64,
    end_ns: u64,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_profiler_add_event", || {
        let p = handle_mut(prof, "profiler")?;
        let (queue, event) = (text(queue, "queue")?, text(event, "event")?);
        if end_ns < start_ns {
            return Err(Error::InvariantViolation(format!("event {event} ends before it starts")));
        }
        let rec = TraceRecord {
            queue_name: queue.into(),
            event_name: event.into(),
            queued_ns: start_ns,
            submitted_ns: start_ns,
            start_ns,
            end_ns,
        };
        match p.queues.iter_mut().find(|(n, _)| n == queue) {
            Some((_, recs)) => recs.push(rec),
            None => p.queues.push((queue.into(), vec![rec])),
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ccl_profiler_set_elapsed(prof: *mut CclProfiler, elapsed_ns: u64) -> i32 {
    guard(ptr::null_mut(), "ccl_profiler_set_elapsed", || {
        handle_mut(prof, "profiler")?.elapsed_ns = Some(elapsed_ns);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ccl_profiler_calc(
    prof: *const CclProfiler,
    report: *mut *mut CclReport,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_profiler_calc", || {
        let p = handle(prof, "profiler")?;
        let mut calc = Profiler::new();
        for (name, recs) in &p.queues {
            calc.add_records(name, recs)?;
        }
        if let Some(e) = p.elapsed_ns {
            calc.set_elapsed(e);
        }
        *out(report, "report")? = Box::into_raw(Box::new(CclReport(calc.calc()?)));
        Ok(())
    })
}

// ---- reports --------------------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn ccl_report_destroy(report: *mut CclReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Any of the out-pointers may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ccl_report_totals(
    report: *const CclReport,
    total_events_ns: *mut u64,
    effective_ns: *mut u64,
    elapsed_ns: *mut u64,
    device_fraction: *mut f64,
) -> i32 {
    guard(ptr::null_mut(), "ccl_report_totals", || {
        let r = &handle(report, "report")?.0;
        if let Some(v) = total_events_ns.as_mut() {
            *v = r.total_events_ns;
        }
        if let Some(v) = effective_ns.as_mut() {
            *v = r.effective_ns;
        }
        if let Some(v) = elapsed_ns.as_mut() {
            *v = r.elapsed_ns;
        }
        if let Some(v) = device_fraction.as_mut() {
            *v = r.device_fraction;
        }
        Ok(())
    })
}

/// Relative share of all event time taken by events named `event`.
#[no_mangle]
pub unsafe extern "C" fn ccl_report_rel_duration(
    report: *const CclReport,
    event: *const c_char,
    rel: *mut f64,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_report_rel_duration", || {
        let r = &handle(report, "report")?.0;
        let name = text(event, "event")?;
        let agg = r.agg(name).ok_or_else(|| Error::UnknownKey(name.into()))?;
        *out(rel, "rel")? = agg.rel_duration;
        Ok(())
    })
}

/// Summed overlap of two event names in either order; 0 when they never overlap.
#[no_mangle]
pub unsafe extern "C" fn ccl_report_overlap(
    report: *const CclReport,
    a: *const c_char,
    b: *const c_char,
    overlap_ns: *mut u64,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_report_overlap", || {
        let r = &handle(report, "report")?.0;
        *out(overlap_ns, "overlap_ns")? = r.overlap(text(a, "a")?, text(b, "b")?).map_or(0, |o| o.overlap_ns);
        Ok(())
    })
}

/// Writes the text summary (aggregates by time descending, overlaps by
/// duration descending); returns the size needed, 0 on a bad handle.
#[no_mangle]
pub unsafe extern "C" fn ccl_report_summary(report: *const CclReport, buf: *mut c_char, len: usize) -> usize {
    match report.as_ref() {
        Some(r) => {
            let s = summary(&r.0, (AggSort::Time, SortOrder::Desc), (OverlapSort::Duration, SortOrder::Desc));
            copy_text(&s, buf, len)
        }
        None => 0,
    }
}

#[no_mangle]
pub unsafe extern "C" fn ccl_report_export(
    report: *const CclReport,
    path: *const c_char,
    err: *mut *mut CclError,
) -> i32 {
    guard(err, "ccl_report_export", || export_table(&handle(report, "report")?.0, text(path, "path")?))
}

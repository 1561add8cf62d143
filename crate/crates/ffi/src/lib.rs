//! C ABI over `leoqnet`.
//!
//! Every function returns an [`LqStatus`]; results go through out-pointers.
//! On failure a message is kept per thread and can be read with
//! [`lq_last_error`]. Handles are opaque and must be released with their
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use leoqnet::config::Config;
use leoqnet::linkphys::{outage_downlink_at, outage_isl_by_quadrature, snr_threshold, LinkEvaluator, LinkPhysics};
use leoqnet::protocol::{round_schedule, success_probability, ProtocolParams};
use leoqnet::router::{optimal_entanglement_path, PathQuery, PathSolution};
use leoqnet::simkit::{point_graph, run_point, Scenario, Strategy};
use leoqnet::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Config = 3,
    UnknownNode = 4,
    Numeric = 5,
    BufferTooSmall = 6,
    Internal = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqStrategy {
    Stbd = 0,
    Baseline = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqProtocolParams {
    pub rate: f64,
    pub p_s: f64,
    pub p_b: f64,
    pub p_m: f64,
    pub modes: u32,
    pub t_bsm: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LqMetrics {
    pub transmission_time: f64,
    pub drop_rate: f64,
    pub throughput: f64,
    pub mean_fidelity: f64,
    pub path_found: bool,
    /// -1 when no path was found.
    pub end_slot: i64,
    pub hop_count: usize,
}

/// Opaque scenario handle.
pub struct LqScenario {
    inner: Scenario,
}

/// Opaque routed-path handle.
pub struct LqPath {
    inner: PathSolution,
    dump: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LqStatus {
    match e {
        Error::InvalidArgument(_) | Error::Empty(_) | Error::Schedule(_) | Error::Parse(_) => LqStatus::InvalidArgument,
        Error::UnknownNode(_) => LqStatus::UnknownNode,
        Error::InfiniteSnr | Error::Quadrature { .. } => LqStatus::Numeric,
        Error::Config { .. } => LqStatus::Config,
    }
}

type Outcome = Result<(), LqStatus>;

fn fail(status: LqStatus, msg: impl Into<String>) -> LqStatus {
    set_error(msg);
    status
}

fn lib(e: Error) -> LqStatus {
    fail(status_of(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> Outcome) -> LqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LqStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(LqStatus::Panic, "internal panic"),
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, LqStatus> {
    p.as_mut()
        .ok_or_else(|| fail(LqStatus::NullPointer, "null output pointer"))
}

unsafe fn input<'a, T>(p: *const T) -> Result<&'a T, LqStatus> {
    p.as_ref()
        .ok_or_else(|| fail(LqStatus::NullPointer, "null input pointer"))
}

unsafe fn string<'a>(p: *const c_char) -> Result<&'a str, LqStatus> {
    if p.is_null() {
        return Err(fail(LqStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LqStatus::InvalidArgument, "string is not valid UTF-8"))
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn lq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// SNR threshold matching a fidelity threshold in [1/4, 1).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_snr_threshold(fidelity: f64, out_value: *mut f64) -> LqStatus {
    guard(|| {
        let o = out(out_value)?;
        *o = snr_threshold(fidelity).map_err(lib)?;
        Ok(())
    })
}

/// Inter-satellite outage `P(h^2 < eta)` for `h^2 ~ Gamma(n/2, omega)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_outage_isl(eta: f64, n: u32, omega: f64, out_value: *mut f64) -> LqStatus {
    guard(|| {
        let o = out(out_value)?;
        *o = outage_isl_by_quadrature(eta, n, omega).map_err(lib)?;
        Ok(())
    })
}

/// Downlink outage `P(h^2 Y < eta)` with gamma-gamma turbulence `Y`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_outage_downlink(
    eta: f64,
    n: u32,
    omega: f64,
    alpha: f64,
    beta: f64,
    out_value: *mut f64,
) -> LqStatus {
    guard(|| {
        let o = out(out_value)?;
        let phys = LinkPhysics {
            chi_n: n,
            omega,
            alpha_turb: alpha,
            beta_turb: beta,
            ..LinkPhysics::reference()
        };
        phys.validate().map_err(lib)?;
        *o = outage_downlink_at(eta, &phys).map_err(lib)?;
        Ok(())
    })
}

/// Writes the per-round repeater counts into `buf`. `len` always receives
/// the number of rounds; `LQ_STATUS_BUFFER_TOO_SMALL` is returned when
/// `capacity` is smaller.
///
/// # Safety
/// `buf` must be valid for `capacity` writes (or NULL with `capacity == 0`);
/// `len` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_round_schedule(
    n_repeater: usize,
    buf: *mut usize,
    capacity: usize,
    len: *mut usize,
) -> LqStatus {
    guard(|| {
        let len = out(len)?;
        let s = round_schedule(n_repeater, 0.0).map_err(lib)?;
        let c = s.configurations();
        *len = c.len();
        if c.len() > capacity {
            return Err(fail(
                LqStatus::BufferTooSmall,
                format!("{} rounds, capacity {capacity}", c.len()),
            ));
        }
        if !c.is_empty() {
            if buf.is_null() {
                return Err(fail(LqStatus::NullPointer, "null buffer"));
            }
            ptr::copy_nonoverlapping(c.as_ptr(), buf, c.len());
        }
        Ok(())
    })
}

/// Reference protocol parameters.
#[no_mangle]
pub extern "C" fn lq_protocol_params_default() -> LqProtocolParams {
    let p = ProtocolParams::reference();
    LqProtocolParams {
        rate: p.rate,
        p_s: p.p_s,
        p_b: p.p_b,
        p_m: p.p_m,
        modes: p.modes,
        t_bsm: p.t_bsm,
    }
}

/// End-to-end success probability for a chain of `n_nodes`.
///
/// # Safety
/// `params` must point to a valid struct and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_success_probability(
    n_nodes: usize,
    params: *const LqProtocolParams,
    out_value: *mut f64,
) -> LqStatus {
    guard(|| {
        let p = input(params)?;
        let o = out(out_value)?;
        let params = ProtocolParams {
            rate: p.rate,
            p_s: p.p_s,
            p_b: p.p_b,
            p_m: p.p_m,
            modes: p.modes,
            t_bsm: p.t_bsm,
        };
        params.validate().map_err(lib)?;
        *o = success_probability(n_nodes, &params).map_err(lib)?;
        Ok(())
    })
}

/// Built-in reference scenario.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_scenario_new_default(out_handle: *mut *mut LqScenario) -> LqStatus {
    guard(|| {
        let o = out(out_handle)?;
        let inner = Config::reference().scenario().map_err(lib)?;
        *o = Box::into_raw(Box::new(LqScenario { inner }));
        Ok(())
    })
}

/// Scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_scenario_from_toml(toml: *const c_char, out_handle: *mut *mut LqScenario) -> LqStatus {
    guard(|| {
        let text = string(toml)?;
        let o = out(out_handle)?;
        let cfg = Config::from_toml(text).map_err(lib)?;
        let inner = cfg.scenario().map_err(lib)?;
        *o = Box::into_raw(Box::new(LqScenario { inner }));
        Ok(())
    })
}

/// Overrides attempts per point and the seed.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lq_scenario_set_sampling(scenario: *mut LqScenario, attempts: usize, seed: u64) -> LqStatus {
    guard(|| {
        let s = out(scenario)?;
        if attempts == 0 {
            return Err(fail(LqStatus::InvalidArgument, "attempts must be at least 1"));
        }
        s.inner.attempts = attempts;
        s.inner.seed = seed;
        Ok(())
    })
}

/// Releases a scenario; NULL is ignored.
///
/// # Safety
/// `scenario` must come from a constructor above and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lq_scenario_free(scenario: *mut LqScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs one transmission time for one strategy.
///
/// # Safety
/// `scenario` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_run_point(
    scenario: *const LqScenario,
    t_start: f64,
    strategy: LqStrategy,
    out_metrics: *mut LqMetrics,
) -> LqStatus {
    guard(|| {
        let s = input(scenario)?;
        let o = out(out_metrics)?;
        let strategy = match strategy {
            LqStrategy::Stbd => Strategy::Stbd,
            LqStrategy::Baseline => Strategy::BaselineDynamic,
        };
        let r = run_point(&s.inner, t_start, strategy).map_err(lib)?.record;
        *o = LqMetrics {
            transmission_time: r.transmission_time,
            drop_rate: r.drop_rate,
            throughput: r.throughput,
            mean_fidelity: r.mean_fidelity,
            path_found: r.path_found,
            end_slot: r.end_slot.map_or(-1, |m| m as i64),
            hop_count: r.hop_count,
        };
        Ok(())
    })
}

/// Best entanglement path within the coherence horizon. `*out` is set to
/// NULL when no path exists; that is not an error.
///
/// # Safety
/// `scenario` must be a live handle, the names NUL-terminated strings and
/// `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_route(
    scenario: *const LqScenario,
    source: *const c_char,
    destination: *const c_char,
    t_start: f64,
    out_handle: *mut *mut LqPath,
) -> LqStatus {
    guard(|| {
        let s = &input(scenario)?.inner;
        let src = string(source)?;
        let dst = string(destination)?;
        let o = out(out_handle)?;
        *o = ptr::null_mut();
        let a = s.network.parse_node(src).map_err(lib)?;
        let b = s.network.parse_node(dst).map_err(lib)?;
        let q = PathQuery::new(a, b, t_start, s.memory.coherence_time)
            .map_err(lib)?
            .with_min_link_fidelity(s.physics.fidelity_threshold);
        let evaluator = LinkEvaluator::new(s.physics.clone()).map_err(lib)?;
        let graph = point_graph(s, &evaluator, t_start).map_err(lib)?;
        if let Some(p) = optimal_entanglement_path(&q, &graph).map_err(lib)? {
            let dump = p.dump(&|n| s.network.node_name(n));
            *o = Box::into_raw(Box::new(LqPath { inner: p, dump }));
        }
        Ok(())
    })
}

/// Product of edge utilities along the path.
///
/// # Safety
/// `path` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_path_utility(path: *const LqPath, out_value: *mut f64) -> LqStatus {
    guard(|| {
        let p = input(path)?;
        *out(out_value)? = p.inner.utility;
        Ok(())
    })
}

/// Number of entanglement links on the path.
///
/// # Safety
/// `path` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_path_hop_count(path: *const LqPath, out_value: *mut usize) -> LqStatus {
    guard(|| {
        let p = input(path)?;
        *out(out_value)? = p.inner.hop_count();
        Ok(())
    })
}

/// Copies the text dump, NUL-terminated, into `buf`. `len` receives the dump
/// length without the terminator; `LQ_STATUS_BUFFER_TOO_SMALL` is returned
/// when `capacity <= len`.
///
/// # Safety
/// `path` must be a live handle, `buf` valid for `capacity` writes and `len`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lq_path_dump(
    path: *const LqPath,
    buf: *mut c_char,
    capacity: usize,
    len: *mut usize,
) -> LqStatus {
    guard(|| {
        let p = input(path)?;
        let len = out(len)?;
        let bytes = p.dump.as_bytes();
        *len = bytes.len();
        if capacity <= bytes.len() {
            return Err(fail(
                LqStatus::BufferTooSmall,
                format!("dump needs {} bytes", bytes.len() + 1),
            ));
        }
        if buf.is_null() {
            return Err(fail(LqStatus::NullPointer, "null buffer"));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
        *buf.add(bytes.len()) = 0;
        Ok(())
    })
}

/// Releases a path; NULL is ignored.
///
/// # Safety
/// `path` must come from [`lq_route`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lq_path_free(path: *mut LqPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

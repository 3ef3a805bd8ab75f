//! C ABI over the edge reconnecting model: opaque multigraph and chain
//! handles, status codes, and the scalar kernels of the limit objects.
//!
//! Every function returns an [`ErStatus`]; outputs go through pointers.
//! The message of the last failure on the calling thread is available
//! from [`er_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use edge_reconnect::distributions::{cir_transition_density, queue_kernel, CirParams, QueueKernelParams};
use edge_reconnect::dynamics::{step, ChainParams};
use edge_reconnect::limits::w_hat_infty_eval;
use edge_reconnect::multigraph::{snapshot_load, snapshot_save, MultigraphState, SnapshotMeta};
use edge_reconnect::rngcore::RngStream;
use edge_reconnect::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    VertexOutOfRange = 3,
    NoEdges = 4,
    Io = 5,
    Parse = 6,
    Numeric = 7,
    Internal = 8,
}

/// Opaque multigraph.
pub struct ErState {
    inner: MultigraphState,
}

/// Opaque running chain: a multigraph, its parameters and random stream.
pub struct ErChain {
    state: MultigraphState,
    params: ChainParams,
    rng: RngStream,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn remember(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> ErStatus {
    let status = match &e {
        Error::VertexOutOfRange { .. } | Error::WindowTooLarge { .. } => ErStatus::VertexOutOfRange,
        Error::NoEdges => ErStatus::NoEdges,
        Error::Io { .. } => ErStatus::Io,
        Error::MalformedSnapshot { .. } | Error::ChecksumMismatch { .. } | Error::Config(_) | Error::Csv(_) | Error::Json(_) => {
            ErStatus::Parse
        }
        Error::Normalization { .. } | Error::OutsideStableRange(_) => ErStatus::Numeric,
        Error::InvalidParameter(_) | Error::InvalidMotif(_) => ErStatus::InvalidArgument,
        _ => ErStatus::Internal,
    };
    remember(e.to_string());
    status
}

fn null(what: &str) -> ErStatus {
    remember(format!("{what} is null"));
    ErStatus::NullPointer
}

fn guarded(f: impl FnOnce() -> ErStatus) -> ErStatus {
    std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| {
        remember("internal panic".into());
        ErStatus::Internal
    })
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, ErStatus> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        remember("path is not UTF-8".into());
        ErStatus::InvalidArgument
    })
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, or 0 if none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn er_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Build a multigraph on `n` vertices from `m` edges given as `2m`
/// zero-based endpoint labels.
///
/// # Safety
/// `ends` must be valid for `2 * m` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn er_state_from_ends(n: usize, ends: *const u32, m: usize, out: *mut *mut ErState) -> ErStatus {
    guarded(|| {
        if out.is_null() {
            return null("out");
        }
        if ends.is_null() && m > 0 {
            return null("ends");
        }
        let v = if m == 0 { Vec::new() } else { std::slice::from_raw_parts(ends, 2 * m).to_vec() };
        match MultigraphState::from_ends(n, v) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(ErState { inner: s }));
                ErStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn er_state_load(path: *const c_char, out: *mut *mut ErState) -> ErStatus {
    guarded(|| {
        if out.is_null() {
            return null("out");
        }
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match snapshot_load(path) {
            Ok((s, _)) => {
                *out = Box::into_raw(Box::new(ErState { inner: s }));
                ErStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `state` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn er_state_save(state: *const ErState, path: *const c_char) -> ErStatus {
    guarded(|| {
        let Some(s) = state.as_ref() else { return null("state") };
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(st) => return st,
        };
        match snapshot_save(&s.inner, SnapshotMeta::default(), path) {
            Ok(()) => ErStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `state` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn er_state_free(state: *mut ErState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must come from this library; `n` and `m` must be writable.
#[no_mangle]
pub unsafe extern "C" fn er_state_size(state: *const ErState, n: *mut usize, m: *mut usize) -> ErStatus {
    let Some(s) = state.as_ref() else { return null("state") };
    if n.is_null() || m.is_null() {
        return null("n or m");
    }
    *n = s.inner.n();
    *m = s.inner.m();
    ErStatus::Ok
}

/// Copy the degree vector (loops count twice) into `out[0..len]`.
///
/// # Safety
/// `state` must come from this library; `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn er_state_degrees(state: *const ErState, out: *mut u32, len: usize) -> ErStatus {
    let Some(s) = state.as_ref() else { return null("state") };
    if out.is_null() {
        return null("out");
    }
    let d = s.inner.degree();
    if len < d.len() {
        remember(format!("buffer holds {len} degrees, graph has {}", d.len()));
        return ErStatus::InvalidArgument;
    }
    ptr::copy_nonoverlapping(d.as_ptr(), out, d.len());
    ErStatus::Ok
}

/// Adjacency entry `B(a, b)`, zero-based; the diagonal counts loops twice.
///
/// # Safety
/// `state` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn er_state_adjacency(state: *const ErState, a: u32, b: u32, out: *mut u32) -> ErStatus {
    let Some(s) = state.as_ref() else { return null("state") };
    if out.is_null() {
        return null("out");
    }
    let n = s.inner.n();
    for v in [a, b] {
        if v as usize >= n {
            return fail(Error::VertexOutOfRange { index: v as usize, n });
        }
    }
    *out = s.inner.adjacency(a, b);
    ErStatus::Ok
}

/// Start a chain from a copy of `state`.
///
/// # Safety
/// `state` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn er_chain_new(state: *const ErState, kappa: f64, seed: u64, out: *mut *mut ErChain) -> ErStatus {
    guarded(|| {
        let Some(s) = state.as_ref() else { return null("state") };
        if out.is_null() {
            return null("out");
        }
        if s.inner.m() == 0 {
            return fail(Error::NoEdges);
        }
        match ChainParams::new(kappa, s.inner.rho(), seed) {
            Ok(params) => {
                let chain = ErChain { state: s.inner.clone(), params, rng: RngStream::new(seed, 0) };
                *out = Box::into_raw(Box::new(chain));
                ErStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Advance the chain by `steps` transitions.
///
/// # Safety
/// `chain` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn er_chain_step(chain: *mut ErChain, steps: u64) -> ErStatus {
    guarded(|| {
        let Some(c) = chain.as_mut() else { return null("chain") };
        for _ in 0..steps {
            if let Err(e) = step(&mut c.state, &c.params, &mut c.rng) {
                return fail(e);
            }
        }
        ErStatus::Ok
    })
}

/// Steps taken so far.
///
/// # Safety
/// `chain` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn er_chain_steps(chain: *const ErChain, out: *mut u64) -> ErStatus {
    let Some(c) = chain.as_ref() else { return null("chain") };
    if out.is_null() {
        return null("out");
    }
    *out = c.state.steps();
    ErStatus::Ok
}

/// Copy the chain's current multigraph into a new state handle.
///
/// # Safety
/// `chain` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn er_chain_state(chain: *const ErChain, out: *mut *mut ErState) -> ErStatus {
    let Some(c) = chain.as_ref() else { return null("chain") };
    if out.is_null() {
        return null("out");
    }
    *out = Box::into_raw(Box::new(ErState { inner: c.state.clone() }));
    ErStatus::Ok
}

/// # Safety
/// `chain` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn er_chain_free(chain: *mut ErChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// M/M/inf transition probability `q(t, h, k, mu)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn er_queue_kernel(t: f64, h: u64, k: u64, mu: f64, out: *mut f64) -> ErStatus {
    if out.is_null() {
        return null("out");
    }
    match QueueKernelParams::new(t, h, mu) {
        Ok(p) => {
            *out = queue_kernel(p, k);
            ErStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// CIR transition density from `z` to `y` over time `t`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn er_cir_density(kappa: f64, rho: f64, t: f64, z: f64, y: f64, out: *mut f64) -> ErStatus {
    if out.is_null() {
        return null("out");
    }
    let r = CirParams::new(kappa, rho).and_then(|p| cir_transition_density(p, t, z, y));
    match r {
        Ok(v) => {
            *out = v;
            ErStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Stationary degree-scale multigraphon `W-hat_inf(x, y, k)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn er_w_hat_infty(kappa: f64, rho: f64, x: f64, y: f64, k: u64, out: *mut f64) -> ErStatus {
    if out.is_null() {
        return null("out");
    }
    match w_hat_infty_eval(kappa, rho, x, y, k) {
        Ok(v) => {
            *out = v;
            ErStatus::Ok
        }
        Err(e) => fail(e),
    }
}

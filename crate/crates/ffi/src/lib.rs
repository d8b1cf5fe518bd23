//! C ABI over `gda-core`.
//!
//! Graphs and sampling results are opaque heap handles created by
//! `gda_*_new`-style calls and released with the matching `*_free`. Every
//! fallible call returns a [`GdaStatus`]; on failure the message is kept
//! per thread and can be read with [`gda_last_error_message`]. Panics never
//! cross the boundary.
//!
//! The header `include/gda.h` is regenerated by the build script.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gda_core::sampler::{bfis, best_start_bs_bfis, bs_bfis, BsBfisResult};
use gda_core::{disc_view, glr_solve, Error, Graph, Observation, SolveOptions};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGraph = 3,
    Domain = 4,
    Singular = 5,
    NotConverged = 6,
    BufferTooSmall = 7,
    Internal = 8,
}

impl From<&Error> for GdaStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidGraph(_) => GdaStatus::InvalidGraph,
            Error::InvalidArgument(_) | Error::Parse { .. } | Error::Geometry(_) => GdaStatus::InvalidArgument,
            Error::Domain(_) | Error::TooLargeForDense { .. } => GdaStatus::Domain,
            Error::Singular(_) => GdaStatus::Singular,
            Error::NotConverged { .. } => GdaStatus::NotConverged,
            Error::Io { .. } => GdaStatus::Internal,
        }
    }
}

/// Opaque undirected weighted graph.
pub struct GdaGraph {
    graph: Graph,
}

/// Opaque result of a BFIS or BS-BFIS run.
pub struct GdaSampling {
    result: BsBfisResult,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: GdaStatus, msg: impl Into<String>) -> GdaStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), GdaStatus>) -> GdaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GdaStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(GdaStatus::Internal, "internal panic"),
    }
}

fn core_err(e: Error) -> GdaStatus {
    let status = GdaStatus::from(&e);
    fail(status, e.to_string())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], GdaStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(GdaStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], GdaStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(GdaStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn graph_ref<'a>(g: *const GdaGraph) -> Result<&'a Graph, GdaStatus> {
    g.as_ref()
        .map(|h| &h.graph)
        .ok_or_else(|| fail(GdaStatus::NullPointer, "graph handle is null"))
}

unsafe fn sampling_ref<'a>(s: *const GdaSampling) -> Result<&'a BsBfisResult, GdaStatus> {
    s.as_ref()
        .map(|h| &h.result)
        .ok_or_else(|| fail(GdaStatus::NullPointer, "sampling handle is null"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), GdaStatus> {
    if out.is_null() {
        return Err(fail(GdaStatus::NullPointer, "output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gda_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a validated graph from `edge_count` undirected edges
/// `(src[k], dst[k], weight[k])` over nodes `0..node_count`.
///
/// # Safety
/// The three arrays must each hold `edge_count` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gda_graph_from_edges(
    node_count: usize,
    src: *const usize,
    dst: *const usize,
    weight: *const f64,
    edge_count: usize,
    out: *mut *mut GdaGraph,
) -> GdaStatus {
    guard(|| {
        let (s, d, w) = (
            slice(src, edge_count, "src")?,
            slice(dst, edge_count, "dst")?,
            slice(weight, edge_count, "weight")?,
        );
        let edges: Vec<_> = (0..edge_count).map(|k| (s[k], d[k], w[k])).collect();
        let graph = Graph::from_edges(node_count, &edges).map_err(core_err)?;
        put(out, GdaGraph { graph })
    })
}

/// Unweighted path graph on `n >= 2` nodes.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gda_graph_line(n: usize, out: *mut *mut GdaGraph) -> GdaStatus {
    guard(|| {
        let graph = gda_core::datasets::gen_line_graph(n).map_err(core_err)?;
        put(out, GdaGraph { graph })
    })
}

/// # Safety
/// `g` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gda_graph_free(g: *mut GdaGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn gda_graph_node_count(g: *const GdaGraph) -> usize {
    g.as_ref().map_or(0, |h| h.graph.node_count())
}

/// Number of undirected edges, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn gda_graph_edge_count(g: *const GdaGraph) -> usize {
    g.as_ref().map_or(0, |h| h.graph.edge_count())
}

/// One BFIS pass at a fixed threshold in `[0, 1)`.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gda_bfis(
    g: *const GdaGraph,
    threshold: f64,
    start: usize,
    mu: f64,
    out: *mut *mut GdaSampling,
) -> GdaStatus {
    guard(|| {
        let graph = graph_ref(g)?;
        let run = bfis(graph, threshold, start, mu).map_err(core_err)?;
        let result = BsBfisResult {
            run,
            threshold,
            start,
            iterations: 0,
            bfis_calls: 1,
            trace: Vec::new(),
        };
        put(out, GdaSampling { result })
    })
}

/// Bisection on the threshold for budget `k` from a fixed start node.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gda_bs_bfis(
    g: *const GdaGraph,
    k: usize,
    epsilon: f64,
    start: usize,
    mu: f64,
    out: *mut *mut GdaSampling,
) -> GdaStatus {
    guard(|| {
        let graph = graph_ref(g)?;
        let result = bs_bfis(graph, k, epsilon, start, mu).map_err(core_err)?;
        put(out, GdaSampling { result })
    })
}

/// Bisection from every start node, keeping the largest threshold.
///
/// # Safety
/// `g` must be a live graph handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gda_best_start_bs_bfis(
    g: *const GdaGraph,
    k: usize,
    epsilon: f64,
    mu: f64,
    out: *mut *mut GdaSampling,
) -> GdaStatus {
    guard(|| {
        let graph = graph_ref(g)?;
        let result = best_start_bs_bfis(graph, k, epsilon, mu).map_err(core_err)?;
        put(out, GdaSampling { result })
    })
}

/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gda_sampling_free(s: *mut GdaSampling) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Threshold the run aligned to (the bisection result for BS-BFIS), NaN for null.
///
/// # Safety
/// `s` must be null or a live sampling handle.
#[no_mangle]
pub unsafe extern "C" fn gda_sampling_threshold(s: *const GdaSampling) -> f64 {
    s.as_ref().map_or(f64::NAN, |h| h.result.threshold)
}

/// # Safety
/// `s` must be null or a live sampling handle.
#[no_mangle]
pub unsafe extern "C" fn gda_sampling_count(s: *const GdaSampling) -> usize {
    s.as_ref().map_or(0, |h| h.result.sample_count())
}

/// # Safety
/// `s` must be null or a live sampling handle.
#[no_mangle]
pub unsafe extern "C" fn gda_sampling_node_count(s: *const GdaSampling) -> usize {
    s.as_ref().map_or(0, |h| h.result.state().len())
}

/// # Safety
/// `s` must be null or a live sampling handle.
#[no_mangle]
pub unsafe extern "C" fn gda_sampling_start(s: *const GdaSampling) -> usize {
    s.as_ref().map_or(0, |h| h.result.start)
}

/// # Safety
/// `s` must be null or a live sampling handle.
#[no_mangle]
pub unsafe extern "C" fn gda_sampling_bfis_calls(s: *const GdaSampling) -> usize {
    s.as_ref().map_or(0, |h| h.result.bfis_calls)
}

/// Number of sampled nodes whose scale factor stayed below one.
///
/// # Safety
/// `s` must be null or a live sampling handle.
#[no_mangle]
pub unsafe extern "C" fn gda_sampling_sub_unit_count(s: *const GdaSampling) -> usize {
    s.as_ref().map_or(0, |h| h.result.run.sub_unit_after_sampling.len())
}

/// Writes the 0/1 sample indicator into `out[0..len]`; `len` must be at
/// least the node count.
///
/// # Safety
/// `s` must be a live sampling handle; `out` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gda_sampling_copy_sampled(s: *const GdaSampling, out: *mut u8, len: usize) -> GdaStatus {
    guard(|| {
        let state = sampling_ref(s)?.state();
        if len < state.len() {
            return Err(fail(
                GdaStatus::BufferTooSmall,
                format!("need {} entries, got {len}", state.len()),
            ));
        }
        let dst = slice_mut(out, state.len(), "out")?;
        for (d, &v) in dst.iter_mut().zip(&state.sampled) {
            *d = v as u8;
        }
        Ok(())
    })
}

/// Writes the per-node scale factors into `out[0..len]`.
///
/// # Safety
/// `s` must be a live sampling handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gda_sampling_copy_scales(s: *const GdaSampling, out: *mut f64, len: usize) -> GdaStatus {
    guard(|| {
        let state = sampling_ref(s)?.state();
        if len < state.len() {
            return Err(fail(
                GdaStatus::BufferTooSmall,
                format!("need {} entries, got {len}", state.len()),
            ));
        }
        slice_mut(out, state.len(), "out")?.copy_from_slice(&state.scale);
        Ok(())
    })
}

/// Smallest Gershgorin left end of `S (A + mu L) S^-1` for the sampling
/// result: a certified lower bound on the smallest eigenvalue.
///
/// # Safety
/// `g` and `s` must be live handles for the same graph; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gda_sampling_min_left_end(
    g: *const GdaGraph,
    s: *const GdaSampling,
    mu: f64,
    out: *mut f64,
) -> GdaStatus {
    guard(|| {
        let graph = graph_ref(g)?;
        let state = sampling_ref(s)?.state();
        if out.is_null() {
            return Err(fail(GdaStatus::NullPointer, "output pointer is null"));
        }
        *out = disc_view(graph, state, mu).map_err(core_err)?.min_left_end();
        Ok(())
    })
}

/// Solves `(H^T H + mu L) x = H^T y` for observations `values[k]` at
/// `nodes[k]`. `max_iter == 0` selects the default `10 N`. The estimate is
/// written to `out[0..len]` (`len >= N`), the CG iteration count to
/// `iterations` when non-null.
///
/// # Safety
/// `g` must be a live graph handle; `nodes`/`values` must hold `count`
/// elements; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gda_glr_solve(
    g: *const GdaGraph,
    nodes: *const usize,
    values: *const f64,
    count: usize,
    mu: f64,
    tol: f64,
    max_iter: usize,
    out: *mut f64,
    len: usize,
    iterations: *mut usize,
) -> GdaStatus {
    guard(|| {
        let graph = graph_ref(g)?;
        let n = graph.node_count();
        if len < n {
            return Err(fail(GdaStatus::BufferTooSmall, format!("need {n} entries, got {len}")));
        }
        let obs = Observation {
            nodes: slice(nodes, count, "nodes")?.to_vec(),
            values: slice(values, count, "values")?.to_vec(),
            noise_sigma: 0.0,
            seed: 0,
        };
        let opts = SolveOptions {
            mu,
            tol,
            max_iter: (max_iter > 0).then_some(max_iter),
            jacobi: false,
        };
        let report = glr_solve(graph, &obs, &opts).map_err(core_err)?;
        slice_mut(out, n, "out")?.copy_from_slice(report.estimate.values());
        if let Some(it) = iterations.as_mut() {
            *it = report.iterations;
        }
        Ok(())
    })
}

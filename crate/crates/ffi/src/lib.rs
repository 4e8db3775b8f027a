//! C ABI for `gedqubo`.
//!
//! Objects are handed out as opaque pointers and released with the matching
//! `*_free`. Every fallible function returns a [`GedqStatus`]; on failure the
//! message is kept per thread and read with [`gedq_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gedqubo::graph::{exact_ged, pad_pair, random_graph};
use gedqubo::metrics;
use gedqubo::qsim::{run_variational, Method, VariationalConfig};
use gedqubo::qubo::build_qubo_padded;
use gedqubo::sa::{anneal, best, SaParams};
use gedqubo::{Assignment, Error, Graph, QuboProblem};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GedqStatus {
    Ok = 0,
    NullPointer = 1,
    Parameter = 2,
    Capacity = 3,
    Parse = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GedqMethod {
    Vqe = 0,
    Qaoa = 1,
}

/// Opaque graph handle.
pub struct GedqGraph(Graph);

/// Opaque QUBO handle.
pub struct GedqQubo(QuboProblem);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(e: Error) -> GedqStatus {
    let status = match e {
        Error::Parameter(_) => GedqStatus::Parameter,
        Error::Capacity(_) => GedqStatus::Capacity,
        Error::Parse(_) => GedqStatus::Parse,
        Error::Io(_) => GedqStatus::Io,
    };
    set_error(e.to_string());
    status
}

fn null(what: &str) -> GedqStatus {
    set_error(format!("null pointer: {what}"));
    GedqStatus::NullPointer
}

fn guard<F: FnOnce() -> GedqStatus>(f: F) -> GedqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == GedqStatus::Ok {
                set_error(String::new());
            }
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GedqStatus::Panic
        }
    }
}

/// Copies the last error message of this thread into `buf` (NUL terminated,
/// truncated to `cap`). Returns the full message length plus one.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn gedq_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len() + 1
    })
}

/// Builds a graph on `n` vertices from `num_edges` pairs stored flat in `edges`.
///
/// # Safety
/// `edges` must hold `2 * num_edges` values (may be null when `num_edges == 0`);
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gedq_graph_new(
    n: usize,
    edges: *const usize,
    num_edges: usize,
    out: *mut *mut GedqGraph,
) -> GedqStatus {
    guard(|| {
        if out.is_null() || (edges.is_null() && num_edges > 0) {
            return null("edges/out");
        }
        let flat: &[usize] = if num_edges == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(edges, 2 * num_edges)
        };
        match Graph::from_edges(n, flat.chunks(2).map(|c| (c[0], c[1]))) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(GedqGraph(g)));
                GedqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Samples `G(n, p)` deterministically from `seed`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gedq_graph_random(
    n: usize,
    p: f64,
    seed: u64,
    out: *mut *mut GedqGraph,
) -> GedqStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match random_graph(n, p, seed) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(GedqGraph(g)));
                GedqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parses a graph from JSON or edge-list text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gedq_graph_parse(
    text: *const c_char,
    out: *mut *mut GedqGraph,
) -> GedqStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return null("text/out");
        }
        let s = match CStr::from_ptr(text).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("graph text is not UTF-8".into());
                return GedqStatus::Parse;
            }
        };
        match Graph::parse(s) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(GedqGraph(g)));
                GedqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gedq_graph_num_vertices(g: *const GedqGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n())
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gedq_graph_num_edges(g: *const GedqGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_edges())
}

/// # Safety
/// `g` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn gedq_graph_free(g: *mut GedqGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Exact GED. When `mapping` is non-null, the optimal bijection of the padded
/// pair is written to it (`mapping_len` must equal the larger vertex count).
///
/// # Safety
/// Handles must be live; `distance` valid for a write; `mapping` null or valid
/// for `mapping_len` writes.
#[no_mangle]
pub unsafe extern "C" fn gedq_exact_ged(
    g1: *const GedqGraph,
    g2: *const GedqGraph,
    distance: *mut usize,
    mapping: *mut usize,
    mapping_len: usize,
) -> GedqStatus {
    guard(|| {
        let (Some(a), Some(b)) = (g1.as_ref(), g2.as_ref()) else {
            return null("graph");
        };
        if distance.is_null() {
            return null("distance");
        }
        match exact_ged(&a.0, &b.0) {
            Ok((d, pi)) => {
                if !mapping.is_null() {
                    if mapping_len != pi.len() {
                        set_error(format!(
                            "mapping buffer holds {mapping_len}, need {}",
                            pi.len()
                        ));
                        return GedqStatus::Parameter;
                    }
                    ptr::copy_nonoverlapping(pi.as_slice().as_ptr(), mapping, pi.len());
                }
                *distance = d;
                GedqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Builds the GED QUBO for a graph pair, padding the smaller graph.
///
/// # Safety
/// Handles must be live; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gedq_qubo_build(
    g1: *const GedqGraph,
    g2: *const GedqGraph,
    alpha: f64,
    beta: f64,
    out: *mut *mut GedqQubo,
) -> GedqStatus {
    guard(|| {
        let (Some(a), Some(b)) = (g1.as_ref(), g2.as_ref()) else {
            return null("graph");
        };
        if out.is_null() {
            return null("out");
        }
        let (a, b, k) = pad_pair(&a.0, &b.0);
        match build_qubo_padded(&a, &b, alpha, beta, k) {
            Ok(q) => {
                *out = Box::into_raw(Box::new(GedqQubo(q)));
                GedqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `q` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gedq_qubo_num_vars(q: *const GedqQubo) -> usize {
    q.as_ref().map_or(0, |q| q.0.num_vars())
}

/// Energy of the 0/1 assignment `bits`.
///
/// # Safety
/// `q` must be live; `bits` valid for `len` reads; `energy` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gedq_qubo_energy(
    q: *const GedqQubo,
    bits: *const u8,
    len: usize,
    energy: *mut f64,
) -> GedqStatus {
    guard(|| {
        let Some(q) = q.as_ref() else {
            return null("qubo");
        };
        if energy.is_null() || (bits.is_null() && len > 0) {
            return null("bits/energy");
        }
        let bits = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(bits, len).to_vec()
        };
        match Assignment::from_bits(bits).and_then(|x| q.0.energy(&x)) {
            Ok(e) => {
                *energy = e;
                GedqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `q` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn gedq_qubo_free(q: *mut GedqQubo) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

unsafe fn write_solution(
    q: &QuboProblem,
    x: &Assignment,
    e: f64,
    bits: *mut u8,
    bits_len: usize,
    energy: *mut f64,
    ged: *mut i64,
) -> GedqStatus {
    if !bits.is_null() {
        if bits_len != x.len() {
            set_error(format!("bit buffer holds {bits_len}, need {}", x.len()));
            return GedqStatus::Parameter;
        }
        ptr::copy_nonoverlapping(x.bits().as_ptr(), bits, x.len());
    }
    *energy = e;
    if !ged.is_null() {
        *ged = q.ged_from_solution(x).map_or(-1, |g| g as i64);
    }
    GedqStatus::Ok
}

/// Simulated annealing with the default schedule. Writes the best sample,
/// its energy and the decoded distance (`-1` when it is not a bijection).
///
/// # Safety
/// `q` must be live; `bits` null or valid for `bits_len` writes; `energy` valid
/// for a write; `ged` null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gedq_sa_best(
    q: *const GedqQubo,
    shots: usize,
    seed: u64,
    bits: *mut u8,
    bits_len: usize,
    energy: *mut f64,
    ged: *mut i64,
) -> GedqStatus {
    guard(|| {
        let Some(q) = q.as_ref() else {
            return null("qubo");
        };
        if energy.is_null() {
            return null("energy");
        }
        let params = SaParams::for_problem(&q.0, shots, seed);
        match anneal(&q.0, &params) {
            Ok(ss) => {
                let (x, e) = best(&ss).expect("shots >= 1");
                write_solution(&q.0, x, e, bits, bits_len, energy, ged)
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs VQE or QAOA with `restarts` random starts. `max_qubits == 0` keeps the
/// default cap.
///
/// # Safety
/// Same contract as [`gedq_sa_best`].
#[no_mangle]
pub unsafe extern "C" fn gedq_variational(
    q: *const GedqQubo,
    method: GedqMethod,
    p: usize,
    restarts: usize,
    shots: usize,
    seed: u64,
    max_qubits: usize,
    bits: *mut u8,
    bits_len: usize,
    energy: *mut f64,
    ged: *mut i64,
) -> GedqStatus {
    guard(|| {
        let Some(q) = q.as_ref() else {
            return null("qubo");
        };
        if energy.is_null() {
            return null("energy");
        }
        let m = match method {
            GedqMethod::Vqe => Method::Vqe,
            GedqMethod::Qaoa => Method::Qaoa,
        };
        let mut cfg = VariationalConfig {
            restarts,
            shots,
            seed,
            ..VariationalConfig::new(m, p)
        };
        if max_qubits > 0 {
            cfg.max_qubits = max_qubits;
        }
        match run_variational(&q.0, &cfg) {
            Ok(o) => write_solution(&q.0, &o.best, o.best_energy, bits, bits_len, energy, ged),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gedq_relative_difference(
    s: i64,
    s_approx: i64,
    out: *mut f64,
) -> GedqStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match metrics::relative_difference(s, s_approx) {
            Ok(v) => {
                *out = v;
                GedqStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Time to solution; writes NaN when `hq_prob` is zero.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gedq_tts(
    runs: usize,
    time_per_run: f64,
    hq_prob: f64,
    out: *mut f64,
) -> GedqStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        if !(0.0..=1.0).contains(&hq_prob) {
            set_error(format!("probability {hq_prob} outside [0, 1]"));
            return GedqStatus::Parameter;
        }
        *out = metrics::tts(runs, time_per_run, hq_prob).unwrap_or(f64::NAN);
        GedqStatus::Ok
    })
}

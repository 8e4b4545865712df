//! C ABI over the plap library.
//!
//! Graphs are opaque handles. Every call returns a [`PlapStatus`]; on failure
//! the message is kept per thread and read with [`plap_last_error_message`].
//! Array outputs take a capacity and always report the required length.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use plap::cheeger::{minmax_lambda_delta1, multiway_cheeger, CheegerError};
use plap::complex::ComplexError;
use plap::exactalg::Rational;
use plap::graph::{catalog, Graph, GraphError};
use plap::one_lap::{enumerate_delta1_spectrum, OneLapError};
use plap::p_solver::{eigen_residual, spectrum_p2, PSolverError};
use plap::verify::{run_suite, Suite};

/// Opaque graph handle.
pub struct PlapGraph(Graph);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlapStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    CapExceeded = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Overflow = 6,
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: PlapStatus, msg: impl Into<String>) -> PlapStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

trait Status {
    fn status(&self) -> PlapStatus;
}

impl Status for GraphError {
    fn status(&self) -> PlapStatus {
        PlapStatus::InvalidInput
    }
}

impl Status for ComplexError {
    fn status(&self) -> PlapStatus {
        match self {
            ComplexError::CapExceeded { .. } => PlapStatus::CapExceeded,
            _ => PlapStatus::InvalidInput,
        }
    }
}

impl Status for OneLapError {
    fn status(&self) -> PlapStatus {
        match self {
            OneLapError::Graph(_) => PlapStatus::InvalidInput,
            _ => PlapStatus::CapExceeded,
        }
    }
}

impl Status for PSolverError {
    fn status(&self) -> PlapStatus {
        match self {
            PSolverError::Graph(_) | PSolverError::BadP(_) | PSolverError::BadGrid | PSolverError::BadIndex { .. } => {
                PlapStatus::InvalidInput
            }
            _ => PlapStatus::Numerical,
        }
    }
}

impl Status for CheegerError {
    fn status(&self) -> PlapStatus {
        match self {
            CheegerError::Complex(c) => c.status(),
            CheegerError::OneLap(o) => o.status(),
            CheegerError::PSolver(p) => p.status(),
            CheegerError::CapExceeded { .. } => PlapStatus::CapExceeded,
            _ => PlapStatus::InvalidInput,
        }
    }
}

fn guard(f: impl FnOnce() -> PlapStatus) -> PlapStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(PlapStatus::Internal, "panic inside plap"))
}

fn check<T, E: Status + std::fmt::Display>(r: Result<T, E>) -> Result<T, PlapStatus> {
    r.map_err(|e| fail(e.status(), e.to_string()))
}

unsafe fn graph<'a>(g: *const PlapGraph) -> Result<&'a Graph, PlapStatus> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| fail(PlapStatus::NullPointer, "null graph handle"))
}

/// Copies `values` into `out` when `cap` allows; always stores the length.
unsafe fn write_slice<T: Copy>(values: &[T], out: *mut T, cap: usize, len_out: *mut usize) -> PlapStatus {
    if len_out.is_null() {
        return fail(PlapStatus::NullPointer, "null length pointer");
    }
    *len_out = values.len();
    if values.len() > cap {
        return fail(PlapStatus::BufferTooSmall, format!("need {} entries", values.len()));
    }
    if !values.is_empty() {
        if out.is_null() {
            return fail(PlapStatus::NullPointer, "null output buffer");
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    }
    PlapStatus::Ok
}

unsafe fn write_rationals(
    values: &[Rational],
    num: *mut i64,
    den: *mut i64,
    cap: usize,
    len_out: *mut usize,
) -> PlapStatus {
    let Some(pairs) = values.iter().map(Rational::to_i64_pair).collect::<Option<Vec<_>>>() else {
        return fail(PlapStatus::Overflow, "rational does not fit in i64");
    };
    let (n, d): (Vec<i64>, Vec<i64>) = pairs.into_iter().unzip();
    match write_slice(&n, num, cap, len_out) {
        PlapStatus::Ok => write_slice(&d, den, cap, len_out),
        s => s,
    }
}

unsafe fn put<T>(out: *mut T, v: T) -> PlapStatus {
    match out.as_mut() {
        Some(o) => {
            *o = v;
            PlapStatus::Ok
        }
        None => fail(PlapStatus::NullPointer, "null output pointer"),
    }
}

unsafe fn put_graph(out: *mut *mut PlapGraph, g: Graph) -> PlapStatus {
    put(out, Box::into_raw(Box::new(PlapGraph(g))))
}

/// Builds a graph on vertices 1..=n from `edge_count` pairs stored flat in `edges`.
#[no_mangle]
pub unsafe extern "C" fn plap_graph_new(
    n: usize,
    edges: *const usize,
    edge_count: usize,
    out: *mut *mut PlapGraph,
) -> PlapStatus {
    guard(|| {
        if edges.is_null() && edge_count > 0 {
            return fail(PlapStatus::NullPointer, "null edge array");
        }
        let flat = if edge_count == 0 { &[][..] } else { std::slice::from_raw_parts(edges, 2 * edge_count) };
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        match check(Graph::new(n, &pairs)) {
            Ok(g) => put_graph(out, g),
            Err(s) => s,
        }
    })
}

/// Looks up a built-in graph such as "g6", "p6", "c8" or "k5".
#[no_mangle]
pub unsafe extern "C" fn plap_graph_from_catalog(name: *const c_char, out: *mut *mut PlapGraph) -> PlapStatus {
    guard(|| {
        if name.is_null() {
            return fail(PlapStatus::NullPointer, "null name");
        }
        let Ok(name) = CStr::from_ptr(name).to_str() else {
            return fail(PlapStatus::InvalidInput, "name is not UTF-8");
        };
        match check(catalog::by_name(name)) {
            Ok(g) => put_graph(out, g),
            Err(s) => s,
        }
    })
}

/// Releases a handle; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn plap_graph_free(g: *mut PlapGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

#[no_mangle]
pub unsafe extern "C" fn plap_graph_vertex_count(g: *const PlapGraph, out: *mut usize) -> PlapStatus {
    guard(|| match graph(g) {
        Ok(g) => put(out, g.n()),
        Err(s) => s,
    })
}

/// Certified 1-Laplacian eigenvalues as numerator/denominator arrays.
#[no_mangle]
pub unsafe extern "C" fn plap_delta1_spectrum(
    g: *const PlapGraph,
    num: *mut i64,
    den: *mut i64,
    cap: usize,
    len_out: *mut usize,
) -> PlapStatus {
    guard(|| {
        let r = graph(g).and_then(|g| check(enumerate_delta1_spectrum(g)));
        match r {
            Ok(spec) => {
                let v: Vec<Rational> = spec.into_iter().map(|e| e.lambda).collect();
                write_rationals(&v, num, den, cap, len_out)
            }
            Err(s) => s,
        }
    })
}

/// Min-max eigenvalues λ_1..λ_n of the 1-Laplacian.
#[no_mangle]
pub unsafe extern "C" fn plap_minmax_delta1(
    g: *const PlapGraph,
    num: *mut i64,
    den: *mut i64,
    cap: usize,
    len_out: *mut usize,
) -> PlapStatus {
    guard(|| match graph(g).and_then(|g| check(minmax_lambda_delta1(g))) {
        Ok(v) => write_rationals(&v, num, den, cap, len_out),
        Err(s) => s,
    })
}

/// Multi-way Cheeger constant h_k.
#[no_mangle]
pub unsafe extern "C" fn plap_multiway_cheeger(
    g: *const PlapGraph,
    k: usize,
    num: *mut i64,
    den: *mut i64,
) -> PlapStatus {
    guard(|| match graph(g).and_then(|g| check(multiway_cheeger(g, k))) {
        Ok(h) => {
            let mut len = 0;
            let (mut a, mut b) = (0i64, 0i64);
            let s = write_rationals(&[h], &mut a, &mut b, 1, &mut len);
            if s != PlapStatus::Ok {
                return s;
            }
            match put(num, a) {
                PlapStatus::Ok => put(den, b),
                s => s,
            }
        }
        Err(s) => s,
    })
}

/// Eigenvalues at p = 2 in ascending order.
#[no_mangle]
pub unsafe extern "C" fn plap_spectrum_p2(
    g: *const PlapGraph,
    out: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> PlapStatus {
    guard(|| match graph(g).and_then(|g| check(spectrum_p2(g))) {
        Ok(v) => write_slice(&v, out, cap, len_out),
        Err(s) => s,
    })
}

/// Sup-norm residual of the p-Laplacian eigen-equation at (λ, x).
#[no_mangle]
pub unsafe extern "C" fn plap_eigen_residual(
    g: *const PlapGraph,
    lambda: f64,
    x: *const f64,
    len: usize,
    p: f64,
    out: *mut f64,
) -> PlapStatus {
    guard(|| {
        if x.is_null() {
            return fail(PlapStatus::NullPointer, "null vector");
        }
        let x = std::slice::from_raw_parts(x, len);
        match graph(g).and_then(|g| check(eigen_residual(g, lambda, x, p))) {
            Ok(r) => put(out, r),
            Err(s) => s,
        }
    })
}

/// Runs a verification suite ("exact", "homology", "numeric" or "all").
#[no_mangle]
pub unsafe extern "C" fn plap_verify(
    suite: *const c_char,
    seed: u64,
    passed: *mut usize,
    total: *mut usize,
) -> PlapStatus {
    guard(|| {
        if suite.is_null() {
            return fail(PlapStatus::NullPointer, "null suite name");
        }
        let parsed = CStr::from_ptr(suite).to_str().ok().and_then(|s| s.parse::<Suite>().ok());
        let Some(suite) = parsed else {
            return fail(PlapStatus::InvalidInput, "unknown suite");
        };
        let results = run_suite(suite, seed);
        match put(passed, results.iter().filter(|r| r.passed).count()) {
            PlapStatus::Ok => put(total, results.len()),
            s => s,
        }
    })
}

/// Length in bytes of the last error message on this thread.
#[no_mangle]
pub extern "C" fn plap_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message, NUL-terminated and truncated to `cap`.
/// Returns the number of bytes written without the terminator.
#[no_mangle]
pub unsafe extern "C" fn plap_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    if buf.is_null() || cap == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let n = e.len().min(cap - 1);
        ptr::copy_nonoverlapping(e.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn plap_status_string(status: PlapStatus) -> *const c_char {
    let s: &'static CStr = match status {
        PlapStatus::Ok => c"ok",
        PlapStatus::NullPointer => c"null pointer",
        PlapStatus::InvalidInput => c"invalid input",
        PlapStatus::CapExceeded => c"size cap exceeded",
        PlapStatus::Numerical => c"numerical failure",
        PlapStatus::BufferTooSmall => c"buffer too small",
        PlapStatus::Overflow => c"value does not fit",
        PlapStatus::Internal => c"internal error",
    };
    s.as_ptr()
}

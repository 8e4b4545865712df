use std::ffi::{c_char, CStr};
use std::path::Path;
use std::process::Command;
use std::ptr;

use plap_ffi::*;

fn catalog(name: &CStr) -> *mut PlapGraph {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { plap_graph_from_catalog(name.as_ptr(), &mut g) }, PlapStatus::Ok);
    assert!(!g.is_null());
    g
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { plap_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn g6_delta1_spectrum() {
    let g = catalog(c"g6");
    let (mut num, mut den, mut len) = ([0i64; 16], [0i64; 16], 0usize);
    let s = unsafe { plap_delta1_spectrum(g, num.as_mut_ptr(), den.as_mut_ptr(), 16, &mut len) };
    assert_eq!(s, PlapStatus::Ok);
    let got: Vec<(i64, i64)> = num[..len].iter().copied().zip(den[..len].iter().copied()).collect();
    let want = [(0, 1), (2, 5), (5, 9), (3, 5), (2, 3), (5, 7), (3, 4), (7, 9), (1, 1)];
    assert_eq!(got, want);
    unsafe { plap_graph_free(g) };
}

#[test]
fn buffer_too_small_reports_length() {
    let g = catalog(c"g6");
    let (mut num, mut den, mut len) = ([0i64; 2], [0i64; 2], 0usize);
    let s = unsafe { plap_minmax_delta1(g, num.as_mut_ptr(), den.as_mut_ptr(), 2, &mut len) };
    assert_eq!(s, PlapStatus::BufferTooSmall);
    assert_eq!(len, 6);
    unsafe { plap_graph_free(g) };
}

#[test]
fn graph_from_edges_and_cheeger() {
    let edges: [usize; 10] = [1, 2, 2, 3, 3, 4, 4, 5, 5, 6];
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { plap_graph_new(6, edges.as_ptr(), 5, &mut g) }, PlapStatus::Ok);
    let mut n = 0;
    assert_eq!(unsafe { plap_graph_vertex_count(g, &mut n) }, PlapStatus::Ok);
    assert_eq!(n, 6);
    let (mut a, mut b) = (0, 0);
    assert_eq!(unsafe { plap_multiway_cheeger(g, 2, &mut a, &mut b) }, PlapStatus::Ok);
    assert_eq!((a, b), (1, 5));
    unsafe { plap_graph_free(g) };
}

#[test]
fn p2_spectrum_and_residual() {
    let g = catalog(c"k4");
    let (mut v, mut len) = ([0f64; 4], 0usize);
    assert_eq!(unsafe { plap_spectrum_p2(g, v.as_mut_ptr(), 4, &mut len) }, PlapStatus::Ok);
    assert_eq!(len, 4);
    assert!(v[0].abs() < 1e-12 && v[1..].iter().all(|x| (x - 4.0 / 3.0).abs() < 1e-12));
    let x = [1.0, -1.0, 0.0, 0.0];
    let mut r = f64::NAN;
    assert_eq!(unsafe { plap_eigen_residual(g, 4.0 / 3.0, x.as_ptr(), 4, 2.0, &mut r) }, PlapStatus::Ok);
    assert!(r < 1e-12);
    unsafe { plap_graph_free(g) };
}

#[test]
fn errors_carry_status_and_message() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { plap_graph_from_catalog(c"nope".as_ptr(), &mut g) }, PlapStatus::InvalidInput);
    assert!(last_error().contains("nope"));
    assert!(plap_last_error_length() > 0);

    let edges: [usize; 2] = [1, 1];
    assert_eq!(unsafe { plap_graph_new(2, edges.as_ptr(), 1, &mut g) }, PlapStatus::InvalidInput);

    let mut n = 0;
    assert_eq!(unsafe { plap_graph_vertex_count(ptr::null(), &mut n) }, PlapStatus::NullPointer);

    let big = catalog(c"c8");
    let (mut num, mut den, mut len) = ([0i64; 8], [0i64; 8], 0usize);
    let s = unsafe { plap_minmax_delta1(big, num.as_mut_ptr(), den.as_mut_ptr(), 8, &mut len) };
    assert_eq!(s, PlapStatus::CapExceeded);
    unsafe { plap_graph_free(big) };
    unsafe { plap_graph_free(ptr::null_mut()) };
}

#[test]
fn status_strings() {
    let s = unsafe { CStr::from_ptr(plap_status_string(PlapStatus::CapExceeded)) };
    assert_eq!(s.to_str().unwrap(), "size cap exceeded");
}

#[test]
fn verify_rejects_unknown_suite() {
    let (mut p, mut t) = (0, 0);
    assert_eq!(unsafe { plap_verify(c"bogus".as_ptr(), 1, &mut p, &mut t) }, PlapStatus::InvalidInput);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/plap.h")).unwrap();
    for name in [
        "plap_graph_new",
        "plap_graph_from_catalog",
        "plap_graph_free",
        "plap_delta1_spectrum",
        "plap_minmax_delta1",
        "plap_multiway_cheeger",
        "plap_spectrum_p2",
        "plap_eigen_residual",
        "plap_verify",
        "plap_last_error_message",
        "typedef struct PlapGraph PlapGraph",
        "PLAP_STATUS_CAP_EXCEEDED = 3",
    ] {
        assert!(header.contains(name), "{name} missing");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let src = std::env::temp_dir().join("plap_header_check.c");
    std::fs::write(&src, "#include \"plap.h\"\nint main(void) { return PLAP_STATUS_OK; }\n").unwrap();
    let Ok(out) = Command::new("cc").arg("-fsyntax-only").arg("-I").arg(&dir).arg(&src).output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

use std::ffi::CString;
use std::process::Command;
use std::ptr;

use spheremax_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { smx_last_error(buf.as_mut_ptr().cast(), buf.len()) };
    String::from_utf8_lossy(&buf[..n.min(255)]).into_owned()
}

fn gaussian(size: usize, c: f64, w: f64) -> Vec<f64> {
    (0..size).map(|i| (-((i as f64 / size as f64 - c) / w).powi(2)).exp()).collect()
}

fn grid(vals: &[f64]) -> *mut SmxGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { smx_grid_from_values(1, vals.len(), 1.0, vals.as_ptr(), vals.len(), &mut g) }, SmxStatus::Ok);
    g
}

#[test]
fn scalars() {
    assert!((smx_delta_n(8) - 0.1).abs() < 1e-15);
    let mut region = SmxRegion::Unknown;
    assert_eq!(unsafe { smx_classify(1, 0.5, 0.5, &mut region) }, SmxStatus::Ok);
    assert_eq!(region, SmxRegion::Unbounded);

    let mut v = [0.0; 12];
    assert_eq!(unsafe { smx_rhombus_vertices(8, v.as_mut_ptr()) }, SmxStatus::Ok);
    assert!((v[9] - 6.0 / 11.0).abs() < 1e-12 && (v[11] - 12.0 / 11.0).abs() < 1e-12);

    let mut x = 0.0;
    assert_eq!(unsafe { smx_bessel_j(0.0, 0.0, &mut x) }, SmxStatus::Ok);
    assert_eq!(x, 1.0);
    assert_eq!(unsafe { smx_dsigma_hat(2, 0.0, &mut x) }, SmxStatus::Ok);
    assert!((x - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(unsafe { smx_dsigma_hat_deriv(4, 1e-9, &mut x) }, SmxStatus::Ok);
    assert!(x.abs() < 1e-6);
    assert_eq!(unsafe { smx_dsigma_hat_deriv(4, 0.0, &mut x) }, SmxStatus::Domain);
}

#[test]
fn errors_are_codes_with_messages() {
    let mut x = 0.0;
    assert_eq!(unsafe { smx_dsigma_hat(2, -1.0, &mut x) }, SmxStatus::Domain);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { smx_bessel_j(0.0, 1.0, ptr::null_mut()) }, SmxStatus::NullPointer);
    assert!(last_error().contains("null"));
    let mut r = SmxRegion::Unknown;
    assert_eq!(unsafe { smx_classify(1, 1.5, 0.5, &mut r) }, SmxStatus::InvalidArgument);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { smx_grid_from_values(1, 8, 1.0, [0.0; 4].as_ptr(), 4, &mut g) }, SmxStatus::InvalidArgument);
    assert!(g.is_null());
    let mut v = 0.0;
    assert_eq!(unsafe { smx_cex_average(1, 1.8, 1.8, 1024.0, &mut v) }, SmxStatus::Divergent);
}

#[test]
fn grid_round_trip() {
    let vals = gaussian(32, 0.5, 0.1);
    let g = grid(&vals);
    assert_eq!(unsafe { smx_grid_len(g) }, 32);
    let mut back = vec![0.0; 32];
    assert_eq!(unsafe { smx_grid_values(g, back.as_mut_ptr(), 8) }, SmxStatus::BufferTooSmall);
    assert_eq!(unsafe { smx_grid_values(g, back.as_mut_ptr(), 32) }, SmxStatus::Ok);
    assert_eq!(back, vals);

    let dir = tempfile::tempdir().unwrap();
    let file = CString::new(dir.path().join("g.bin").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { smx_grid_save(g, file.as_ptr()) }, SmxStatus::Ok);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { smx_grid_load(file.as_ptr(), &mut h) }, SmxStatus::Ok);
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        assert_eq!(smx_grid_lp_norm(g, 2.0, &mut a), SmxStatus::Ok);
        assert_eq!(smx_grid_lp_norm(h, 2.0, &mut b), SmxStatus::Ok);
        smx_grid_free(g);
        smx_grid_free(h);
        smx_grid_free(ptr::null_mut());
    }
    assert_eq!(a, b);

    let mut z = ptr::null_mut();
    assert_eq!(unsafe { smx_grid_new(2, 8, 1.0, &mut z) }, SmxStatus::Ok);
    assert_eq!(unsafe { smx_grid_len(z) }, 64);
    unsafe { smx_grid_free(z) };
}

#[test]
fn operators() {
    let mut sym = ptr::null_mut();
    assert_eq!(unsafe { smx_symbol_new(1, 0, SmxSymbolKind::Full, 0.1, &mut sym) }, SmxStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { smx_symbol_eval(sym, 0.0, 0.0, &mut v) }, SmxStatus::Ok);
    assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-12);

    let f = grid(&gaussian(64, 0.45, 0.08));
    let g = grid(&gaussian(64, 0.55, 0.08));
    let mut avg = ptr::null_mut();
    let mut max = ptr::null_mut();
    unsafe {
        assert_eq!(smx_average_mult(sym, f, g, 0.1, &mut avg), SmxStatus::Ok);
        assert_eq!(smx_maximal(sym, f, g, [0.1].as_ptr(), 1, &mut max), SmxStatus::Ok);
    }
    let (mut a, mut b) = (vec![0.0; 64], vec![0.0; 64]);
    unsafe {
        smx_grid_values(avg, a.as_mut_ptr(), 64);
        smx_grid_values(max, b.as_mut_ptr(), 64);
    }
    for (x, y) in a.iter().zip(&b) {
        assert!((x.abs() - y).abs() <= 1e-12 * (1.0 + y));
    }
    let mut full = ptr::null_mut();
    assert_eq!(unsafe { smx_maximal(sym, f, g, ptr::null(), 0, &mut full) }, SmxStatus::Ok);

    let short = grid(&[1.0; 32]);
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { smx_average_mult(sym, f, short, 0.1, &mut bad) }, SmxStatus::GridMismatch);
    unsafe {
        for p in [f, g, avg, max, full, short] {
            smx_grid_free(p);
        }
        smx_symbol_free(sym);
    }
}

#[test]
fn counterexample_and_fit() {
    let rs = [1024.0, 2048.0, 4096.0, 8192.0];
    let vals: Vec<f64> = rs
        .iter()
        .map(|&r| {
            let mut v = 0.0;
            assert_eq!(unsafe { smx_cex_average(1, 2.0, 2.0, r, &mut v) }, SmxStatus::Ok);
            v
        })
        .collect();
    let mut fit = SmxFit::default();
    assert_eq!(unsafe { smx_fit_loglog(rs.as_ptr(), vals.as_ptr(), rs.len(), &mut fit) }, SmxStatus::Ok);
    assert!((fit.slope + 1.0).abs() < 0.1, "{fit:?}");
    assert_eq!(unsafe { smx_fit_loglog(rs.as_ptr(), vals.as_ptr(), 2, &mut fit) }, SmxStatus::InvalidArgument);
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let src = format!("{dir}/tests/use_header.c");
    let out = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(format!("{dir}/include")).arg(&src).output();
    match out {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
}

use std::ffi::{CStr, CString};
use std::ptr;

use csdim_ffi::*;

fn last_error() -> String {
    let n = unsafe { csdim_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; n + 1];
    unsafe { csdim_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn gaussian_mmse_and_replica() {
    let g = csdim_dist_gaussian();
    let mut m = f64::NAN;
    assert_eq!(unsafe { csdim_mmse(g, 4.0, &mut m) }, CsdimStatus::Ok);
    assert!((m - 0.2).abs() < 1e-10);
    let mut i = f64::NAN;
    assert_eq!(unsafe { csdim_mutual_info(g, 4.0, &mut i) }, CsdimStatus::Ok);
    assert!((i - 0.5 * 5f64.ln()).abs() < 1e-9);

    let mut r = CsdimReplica::default();
    assert_eq!(unsafe { csdim_replica(g, 2.0, 0.01, &mut r) }, CsdimStatus::Ok);
    let mut d = CsdimDistortion::default();
    assert_eq!(unsafe { csdim_gaussian_curves(2.0, 0.01, &mut d) }, CsdimStatus::Ok);
    assert_eq!(r.n_roots, 1);
    assert!((r.dl_mse - d.d_l).abs() < 1e-9 * d.d_l.max(1e-3));
    assert!(d.d_star <= d.d_star_linear && d.d_star_linear <= d.d_l);
    unsafe { csdim_dist_free(g) };
}

#[test]
fn errors_carry_status_and_message() {
    let mut out: *mut CsdimDistribution = ptr::null_mut();
    assert_eq!(unsafe { csdim_dist_sparse_gaussian(1.5, &mut out) }, CsdimStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(last_error().contains("gamma"));

    let mut x = 0.0;
    assert_eq!(unsafe { csdim_mmse(ptr::null(), 1.0, &mut x) }, CsdimStatus::NullPointer);
    let g = csdim_dist_gaussian();
    assert_eq!(unsafe { csdim_mmse(g, 1.0, ptr::null_mut()) }, CsdimStatus::NullPointer);
    assert_eq!(unsafe { csdim_mmse(g, 1.0, &mut x) }, CsdimStatus::Ok);
    assert_eq!(last_error(), "");

    let bad = CString::new("kind = \"mixture\"\nstandardise = true\n").unwrap();
    assert_eq!(unsafe { csdim_dist_from_toml(bad.as_ptr(), &mut out) }, CsdimStatus::Config);
    assert!(last_error().contains("standardise"), "{}", last_error());

    let cantor = csdim_dist_cantor();
    let mut se = CsdimStateEvolution::default();
    assert_eq!(
        unsafe { csdim_state_evolution(cantor, 0.5, 0.1, -1.0, &mut se) },
        CsdimStatus::InvalidArgument
    );
    unsafe {
        csdim_dist_free(cantor);
        csdim_dist_free(g);
        csdim_dist_free(ptr::null_mut());
    }
}

#[test]
fn handles_from_config() {
    let text = CString::new(
        "kind = \"mixture\"\nstandardize = true\n[[atoms]]\nvalue = 0.0\nmass = 0.9\n\
         [[components]]\nfamily = \"gaussian\"\nweight = 0.1\nmean = 0.0\nvariance = 1.0\n",
    )
    .unwrap();
    let mut h: *mut CsdimDistribution = ptr::null_mut();
    assert_eq!(unsafe { csdim_dist_from_toml(text.as_ptr(), &mut h) }, CsdimStatus::Ok);
    let mut d = 0.0;
    assert_eq!(unsafe { csdim_dist_info_dimension(h, &mut d) }, CsdimStatus::Ok);
    assert!((d - 0.1).abs() < 1e-15);

    let mut se = CsdimStateEvolution::default();
    assert_eq!(unsafe { csdim_state_evolution(h, 0.5, 1e-4, 1.2, &mut se) }, CsdimStatus::Ok);
    assert_eq!(se.converged, 1);
    assert_eq!(se.alpha, 1.2);
    assert!(se.mse > 0.0 && se.mse < 1e-3);
    unsafe { csdim_dist_free(h) };
}

#[test]
fn thresholds_and_bounds() {
    let mut t = CsdimThreshold::default();
    assert_eq!(unsafe { csdim_threshold(CsdimFamily::Pm, 0.1, &mut t) }, CsdimStatus::Ok);
    assert!(t.rate > 0.32 && t.rate < 0.34);
    assert_eq!(unsafe { csdim_threshold(CsdimFamily::Simple, 0.2, &mut t) }, CsdimStatus::Ok);
    assert_eq!(t.rate, 0.6);
    assert!(t.alpha.is_nan());
    let mut l = 0.0;
    assert_eq!(unsafe { csdim_lipschitz_constant(0.1, 0.0, 0.5, &mut l) }, CsdimStatus::Ok);
    assert!(l.is_finite() && l > 1.0);
    assert_eq!(unsafe { csdim_lipschitz_constant(0.1, 0.0, 0.05, &mut l) }, CsdimStatus::Ok);
    assert!(l.is_infinite());
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(csdim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

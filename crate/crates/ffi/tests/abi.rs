use std::ffi::CStr;
use std::ptr;

use evcopula_ffi::*;

fn mo(alpha: f64, beta: f64) -> *mut EvcCopula {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { evc_copula_mo(alpha, beta, &mut c) }, EvcStatus::Ok);
    assert!(!c.is_null());
    c
}

#[test]
fn coefficients_through_handle() {
    let c = mo(0.5, 0.5);
    let mut k = EvcCoefficients::default();
    assert_eq!(unsafe { evc_coefficients(c, &mut k) }, EvcStatus::Ok);
    assert!((k.rho - 3.0 / 7.0).abs() < 1e-12);
    assert!((k.tau - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(k.lambda, 0.5);
    assert!((k.beta - (2f64.sqrt() - 1.0)).abs() < 1e-12);

    let mut a = 0.0;
    assert_eq!(unsafe { evc_pickands(c, 0.5, &mut a) }, EvcStatus::Ok);
    assert_eq!(a, 0.75);
    let mut cdf = 0.0;
    assert_eq!(
        unsafe { evc_copula_cdf(c, 0.5, 0.5, &mut cdf) },
        EvcStatus::Ok
    );
    assert!((cdf - 0.5f64.powf(1.5)).abs() < 1e-15);
    let mut d = 0.0;
    assert_eq!(
        unsafe { evc_copula_partial_u(c, 0.3, 0.9, &mut d) },
        EvcStatus::Ok
    );
    assert!((0.0..=1.0).contains(&d));
    unsafe { evc_copula_free(c) };
}

#[test]
fn piecewise_linear_and_pareto_agree() {
    let t = [0.0, 0.25, 0.75, 1.0];
    let a = [1.0, 0.75, 0.75, 1.0];
    let mut pl = ptr::null_mut();
    assert_eq!(
        unsafe { evc_copula_piecewise_linear(t.as_ptr(), a.as_ptr(), t.len(), &mut pl) },
        EvcStatus::Ok
    );
    let mut pareto = ptr::null_mut();
    assert_eq!(
        unsafe { evc_copula_pareto(0.25, 0.25, &mut pareto) },
        EvcStatus::Ok
    );
    for (u, v) in [(0.2, 0.7), (0.5, 0.5), (0.9, 0.1)] {
        let (mut x, mut y) = (0.0, 0.0);
        unsafe {
            evc_copula_cdf(pl, u, v, &mut x);
            evc_copula_cdf(pareto, u, v, &mut y);
        }
        assert!((x - y).abs() < 1e-14);
    }
    unsafe {
        evc_copula_free(pl);
        evc_copula_free(pareto);
    }
}

#[test]
fn error_codes() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(evc_copula_gumbel(0.5, &mut c), EvcStatus::ParamOutOfRange);
        assert!(c.is_null());
        assert_eq!(
            evc_copula_mo(0.5, 0.5, ptr::null_mut()),
            EvcStatus::NullPointer
        );
        let t = [0.0, 0.5, 1.0];
        let a = [1.0, 0.3, 1.0];
        assert_eq!(
            evc_copula_piecewise_linear(t.as_ptr(), a.as_ptr(), 3, &mut c),
            EvcStatus::InvalidDependence
        );
        let mut x = 0.0;
        assert_eq!(
            evc_copula_cdf(ptr::null(), 0.5, 0.5, &mut x),
            EvcStatus::NullPointer
        );
        let g = mo(0.2, 0.3);
        assert_eq!(
            evc_copula_cdf(g, 1.5, 0.5, &mut x),
            EvcStatus::ParamOutOfRange
        );
        assert_eq!(evc_pickands(g, -0.1, &mut x), EvcStatus::ParamOutOfRange);
        assert_eq!(
            evc_sample(g, 0, 1, &mut x, &mut x),
            EvcStatus::ParamOutOfRange
        );
        evc_copula_free(g);
        evc_copula_free(ptr::null_mut());
    }
    for s in [EvcStatus::Ok, EvcStatus::ParamOutOfRange, EvcStatus::Panic] {
        let msg = unsafe { CStr::from_ptr(evc_status_message(s)) };
        assert!(!msg.to_bytes().is_empty());
    }
}

#[test]
fn bounds() {
    let mut r = EvcInterval::default();
    let mut t = EvcInterval::default();
    unsafe {
        assert_eq!(evc_rho_bounds(0.5, &mut r), EvcStatus::Ok);
        assert_eq!(evc_tau_bounds(0.5, &mut t), EvcStatus::Ok);
        assert_eq!(evc_rho_bounds(1.5, &mut r), EvcStatus::ParamOutOfRange);
    }
    assert!((r.lo - 3.0 / 7.0).abs() < 1e-12);
    assert!((r.hi - 33.0 / 49.0).abs() < 1e-12);
    assert!((t.lo - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(t.hi, 0.5);
}

#[test]
fn sampling_is_reproducible() {
    let n = 5000;
    let c = mo(0.4, 0.7);
    let (mut u1, mut v1) = (vec![0.0; n], vec![0.0; n]);
    let (mut u2, mut v2) = (vec![0.0; n], vec![0.0; n]);
    unsafe {
        assert_eq!(
            evc_sample(c, n, 11, u1.as_mut_ptr(), v1.as_mut_ptr()),
            EvcStatus::Ok
        );
        assert_eq!(
            evc_sample(c, n, 11, u2.as_mut_ptr(), v2.as_mut_ptr()),
            EvcStatus::Ok
        );
        evc_copula_free(c);
    }
    assert_eq!(u1, u2);
    assert_eq!(v1, v2);
    assert!(u1.iter().chain(&v1).all(|x| (0.0..=1.0).contains(x)));

    unsafe {
        assert_eq!(
            evc_sample_mo(1.0, 1.0, n, 3, u1.as_mut_ptr(), v1.as_mut_ptr()),
            EvcStatus::Ok
        );
    }
    assert_eq!(u1, v1);
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(evc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

use klgamma::bessel::{bessel_i, bessel_i_scaled_with, bessel_k, bessel_k_flagged, bessel_k_via_connection, IBranch};
use klgamma::{Complex, Error};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn rel(a: Complex, b: Complex) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

#[test]
fn i_examples() {
    assert!((bessel_i(c(0.0, 0.0), 1e-12).unwrap() - 1.0).norm() < 1e-15);
    let v = bessel_i(c(0.5, 0.0), 1.0).unwrap();
    assert!(rel(v, c((2.0 / PI).sqrt() * 1f64.sinh(), 0.0)) < 1e-14);
    let a = bessel_i(c(-1.0, 0.0), 1.0).unwrap();
    let b = bessel_i(c(1.0, 0.0), 1.0).unwrap();
    assert!(rel(a, c(0.565159103992485027208, 0.0)) < 1e-14);
    assert!(rel(a, b) < 1e-15);
    let v = bessel_i(c(2.5, 1.0), 3.0).unwrap();
    assert!(rel(v, c(1.12060173514151939234, -1.30377465496565523910)) < 1e-12);
    assert!(matches!(bessel_i(c(0.0, 0.0), 0.0), Err(Error::Domain(_))));
    assert!(matches!(bessel_i(c(0.0, 0.0), 701.0), Err(Error::Overflow(_))));
}

#[test]
fn k_examples() {
    let v = bessel_k(c(0.5, 0.0), 1.0).unwrap();
    assert!(rel(v, c((PI / 2.0).sqrt() * (-1f64).exp(), 0.0)) < 1e-13);
    let k0 = bessel_k(c(0.0, 0.0), 1.0).unwrap();
    assert!(rel(k0, c(0.421024438240708333336, 0.0)) < 1e-13);
    let v = bessel_k(c(0.0, 2.0), 1.0).unwrap();
    assert!(rel(v, c(0.0806169976223659785698, 0.0)) < 1e-12);
    assert!(v.norm() <= k0.norm());
    let v = bessel_k(c(0.3, 0.0), 2.0).unwrap();
    assert!(rel(v, c(0.116036974348119258362, 0.0)) < 1e-13);
    let v = bessel_k(c(1.5, 2.0), 0.7).unwrap();
    assert!(rel(v, c(-0.516661752731467845633, 0.132899221194571368077)) < 1e-12);
    let v = bessel_k(c(0.0, 10.0), 5.0).unwrap();
    assert!(rel(v, c(-1.08253981347969806935e-7, 0.0)) < 1e-10);
    assert!(matches!(bessel_k(c(0.0, 0.0), -1.0), Err(Error::Domain(_))));
    assert!(matches!(bessel_k(c(250.0, 0.0), 1.0), Err(Error::OrderOutOfRange(..))));
    assert!(bessel_k_flagged(c(1.0, 0.0), 1e-7).unwrap().accuracy_warning);
    assert!(!bessel_k_flagged(c(0.0, 1.0), 1e-7).unwrap().accuracy_warning);
}

#[test]
fn connection_examples() {
    let v = bessel_k_via_connection(c(0.5, 0.0), 1.0).unwrap();
    assert!(rel(v, c((PI / 2.0).sqrt() * (-1f64).exp(), 0.0)) < 1e-10);
    let a = bessel_k_via_connection(c(0.3, 0.0), 2.0).unwrap();
    assert!(rel(a, bessel_k(c(0.3, 0.0), 2.0).unwrap()) < 1e-9);
    assert!(matches!(bessel_k_via_connection(c(1.0, 0.0), 1.0), Err(Error::ConnectionDegenerate(_))));
}

#[test]
fn modulus_bound_grid() {
    for s in [0.5, 1.0, 2.0, 5.0, 10.0] {
        for x in [0.1, 1.0, 5.0, 20.0] {
            let k = bessel_k(c(0.0, s), x).unwrap().norm();
            let k0 = bessel_k(c(0.0, 0.0), x).unwrap().norm();
            assert!(k <= k0 * (1.0 + 1e-10), "s={s} x={x}: {k} > {k0}");
        }
    }
}

#[test]
fn series_and_asymptotic_overlap() {
    for nu in [c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.5), c(2.0, -1.0), c(-1.3, 0.2), c(0.0, 3.0)] {
        for x in [30.0, 35.0, 40.0, 45.0, 50.0] {
            let a = bessel_i_scaled_with(nu, x, IBranch::Series).unwrap();
            let b = bessel_i_scaled_with(nu, x, IBranch::Asymptotic).unwrap();
            assert!(rel(a, b) <= 1e-9, "nu={nu} x={x}: {a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k_even_in_order(re in -8.0f64..8.0, im in -8.0f64..8.0, x in 0.05f64..25.0) {
        let a = bessel_k(c(re, im), x).unwrap();
        let b = bessel_k(c(-re, -im), x).unwrap();
        prop_assert!(rel(a, b) <= 1e-11, "{a} vs {b}");
    }

    #[test]
    fn k_imaginary_order_is_real(s in -30.0f64..30.0, x in 0.01f64..40.0) {
        let v = bessel_k(c(0.0, s), x).unwrap();
        prop_assert!(v.im.abs() <= 1e-12 * v.norm(), "{v}");
    }

    #[test]
    fn large_x_law(s in 0.0f64..1.0) {
        for x in [50.0f64, 100.0] {
            let v = bessel_k(c(0.0, s), x).unwrap().re * x.exp() * (2.0 * x / PI).sqrt();
            prop_assert!((v - 1.0).abs() <= 0.02, "s={s} x={x}: {v}");
        }
    }

    /// The connection formula subtracts two terms of size ~e^x to produce
    /// one of size ~e^{-x}; the tolerance carries that cancellation factor.
    #[test]
    fn connection_consistency(re in -3.0f64..3.0, im in -1.0f64..1.0, x in 0.1f64..10.0) {
        let nu = c(re, im);
        let sin = (PI * nu).sin().norm();
        prop_assume!(sin >= 1e-3);
        let k = bessel_k(nu, x).unwrap();
        let via = bessel_k_via_connection(nu, x).unwrap();
        let size = bessel_i(nu, x).unwrap().norm() + bessel_i(-nu, x).unwrap().norm();
        let floor = 64.0 * f64::EPSILON * PI * size / (2.0 * sin * k.norm());
        prop_assert!(rel(k, via) <= floor.max(1e-9), "nu={nu} x={x}: {k} vs {via}");
    }

    #[test]
    fn i_small_x_slope(re in 0.05f64..3.0, im in -1.0f64..1.0) {
        // For Re nu < -eps, |I_{-nu}(x)| = o(x^eps): the fitted slope is Re(-nu) > eps.
        let mu = c(re, im);
        let (x0, x1) = (1e-4f64, 1e-2f64);
        let a = bessel_i(mu, x0).unwrap().norm().ln();
        let b = bessel_i(mu, x1).unwrap().norm().ln();
        let slope = (b - a) / (x1.ln() - x0.ln());
        prop_assert!(slope > 0.5 * re && (slope - re).abs() < 1e-3, "slope {slope} for Re = {re}");
    }
}

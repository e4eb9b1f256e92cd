use klgamma::bessel::bessel_i;
use klgamma::gamma::{factorial, rgamma, sinpi};
use klgamma::kernel::{
    psi, psi_in_regime, psi_weighted, saalschutz_check, saalschutz_scale, strip_index, tail_series,
    tail_series_weighted, KernelParams, Regime,
};
use klgamma::{Complex, Error};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn params(z: Complex) -> KernelParams {
    KernelParams::new(z, strip_index(z.re).unwrap()).unwrap()
}

/// `(2/x)^{2z} sum_k c_k I_{2k+2z}(x) - sin(2 pi z) / (2 pi)`, the quantity
/// the tail series must reproduce.
fn tail_oracle(x: f64, z: Complex, n: u32) -> Complex {
    let mut acc = c(0.0, 0.0);
    for k in 0..=n {
        let kf = f64::from(k);
        let ck = (z + kf) * rgamma(1.0 - kf - 2.0 * z) / factorial(k);
        acc += ck * (2.0 * z * (2.0 / x).ln()).exp() * bessel_i(2.0 * z + 2.0 * kf, x).unwrap();
    }
    acc - sinpi(2.0 * z) / (2.0 * PI)
}

#[test]
fn weighted_kernel_survives_underflow() {
    // Psi ~ 1e-420 at x = 1e-100 is not representable; Psi (2/x)^{1-2z} is.
    // References from 1500-digit mpmath.
    let x: f64 = 1e-100;
    for (z, want) in [(-2.05, 4.537_025_092_932_895_5e89), (-2.95, 6.271_647_452_690_780_5e88)] {
        let z = c(z, 0.0);
        let p = KernelParams::new(z, 2).unwrap();
        assert_eq!(psi(x, &p).unwrap().psi.norm(), 0.0);
        let v = psi_weighted(x, &p, (1.0 - 2.0 * z) * (2.0 / x).ln()).unwrap();
        assert!((v.psi.re - want).abs() < 1e-12 * want, "z={z}: {}", v.psi);
    }
    let w = c(3.0, 0.5);
    let t = tail_series(0.3, c(-1.3, 0.2), 1).unwrap();
    let tw = tail_series_weighted(0.3, c(-1.3, 0.2), 1, w).unwrap();
    assert!((tw - t * w.exp()).norm() < 1e-14 * tw.norm());
}

#[test]
fn psi_examples() {
    let p = params(c(-0.5, 0.0));
    let v = psi(1.0, &p).unwrap();
    assert!((v.psi - 0.398092769802765425262).norm() < 1e-12, "{}", v.psi);
    assert_eq!(v.regime, Regime::DirectBessel);
    let v = psi(1e-6, &p).unwrap();
    assert!(v.psi.norm() < 1e-5);
    let p = params(c(-0.3, 0.0));
    let a = psi_in_regime(1e-3, &p, Regime::SmallXSeries).unwrap();
    let b = psi_in_regime(1e-3, &p, Regime::ExtendedPrecision).unwrap();
    assert!((a.psi - b.psi).norm() <= 1e-8 * a.psi.norm());
    assert!(a.est_error >= 0.0 && b.est_error >= 0.0);
    assert!(matches!(psi(0.0, &p), Err(Error::Domain(_))));
    assert!(matches!(KernelParams::new(c(-1.5, 0.0), 0), Err(Error::StripMismatch { required: 1, given: 0, .. })));
}

#[test]
fn tail_examples() {
    assert!(tail_series(1e-8, c(-0.25, 0.0), 0).unwrap().norm() < 1e-15);
    for (z, x) in [(c(-0.5, 0.0), 1.0), (c(-0.25, 0.0), 0.5)] {
        let t = tail_series(x, z, 0).unwrap();
        assert!((t - tail_oracle(x, z, 0)).norm() <= 1e-10);
    }
    assert!(matches!(tail_series(11.0, c(-0.25, 0.0), 0), Err(Error::Domain(_))));
}

#[test]
fn saalschutz_examples() {
    assert!(saalschutz_check(1, c(0.3, 0.0)).norm() <= 1e-12);
    assert!(saalschutz_check(3, c(-0.7, 0.2)).norm() <= 1e-10);
    assert_eq!(saalschutz_check(1, c(0.0, 0.0)), c(0.0, 0.0));
}

#[test]
fn regimes_agree_on_overlap() {
    for z in [-0.25, -0.75, -1.5, -2.3] {
        let p = params(c(z, 0.0));
        let small =
            if p.sine_magnitude() >= p.sin_threshold { Regime::SmallXSeries } else { Regime::ExtendedPrecision };
        for i in 0..=10 {
            let x = 0.3 + 0.05 * f64::from(i);
            let a = psi_in_regime(x, &p, Regime::DirectBessel).unwrap().psi;
            let b = psi_in_regime(x, &p, small).unwrap().psi;
            assert!((a - b).norm() <= 1e-8 * a.norm(), "z={z} x={x}: {a} vs {b}");
        }
    }
}

#[test]
fn vanishing_order() {
    for z in [-0.25, -0.5, -0.75, -1.5, -2.3, -2.5] {
        let p = params(c(z, 0.0));
        let a = psi(1e-4, &p).unwrap().psi.norm().ln();
        let b = psi(1e-2, &p).unwrap().psi.norm().ln();
        let slope = (b - a) / (1e-2f64.ln() - 1e-4f64.ln());
        assert!(slope >= -2.0 * z - 0.1, "z={z}: slope {slope}");
    }
}

#[test]
fn large_x_growth_is_bounded() {
    for z in [-0.25, -0.5, -0.75, -1.5, -2.5] {
        let p = params(c(z, 0.0));
        let ratio = |x: f64| psi(x, &p).unwrap().psi.norm() / (x.powf(-2.0 * z - 0.5) * x.exp());
        let ratios: Vec<f64> = (0..=25).map(|i| ratio(5.0 + f64::from(i))).collect();
        let c_fit = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(c_fit.is_finite() && c_fit < 1.0, "z={z}: c = {c_fit}");
        // The ratio must not grow along the window.
        assert!(ratios[25] <= ratios[0], "z={z}: {ratios:?}");
    }
}

#[test]
fn deep_strip_stays_accurate() {
    let p = params(c(-7.3, 0.0));
    for x in [0.2, 0.5, 1.0, 2.0] {
        let auto = psi(x, &p).unwrap();
        let small = psi_in_regime(x, &p, Regime::SmallXSeries).unwrap();
        assert!((auto.psi - small.psi).norm() <= 1e-9 * small.psi.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn tail_reconciles_with_lemma(n in 0u32..3, frac in 0.05f64..0.95, im in -0.5f64..0.5, x in 0.05f64..2.0) {
        let z = c(-f64::from(n) - frac, im);
        let t = tail_series(x, z, n).unwrap();
        let o = tail_oracle(x, z, n);
        prop_assert!((t - o).norm() <= 1e-10, "z={z} x={x}: {t} vs {o}");
    }

    #[test]
    fn saalschutz_vanishes(l in 1u32..=10, re in -3.0f64..1.0, im in -1.0f64..1.0) {
        let z = c(re, im);
        let v = saalschutz_check(l, z).norm();
        prop_assert!(v <= 1e-10 * saalschutz_scale(l, z).max(1e-300), "l={l} z={z}: {v}");
    }

    #[test]
    fn regime_consistency_random(n in 0u32..3, frac in 0.05f64..0.95, x in 0.3f64..0.8) {
        let z = c(-f64::from(n) - frac, 0.0);
        let p = KernelParams::new(z, n).unwrap();
        let small = if p.sine_magnitude() >= p.sin_threshold { Regime::SmallXSeries } else { Regime::ExtendedPrecision };
        let a = psi_in_regime(x, &p, Regime::DirectBessel).unwrap().psi;
        let b = psi_in_regime(x, &p, small).unwrap().psi;
        prop_assert!((a - b).norm() <= 1e-8 * a.norm(), "z={z} x={x}: {a} vs {b}");
    }
}

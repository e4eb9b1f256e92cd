//! Complex Gamma function and the products built from it.
//!
//! The kernel is a 14-term Lanczos approximation (g = 671/128) evaluated in
//! logarithmic form on `Re w >= 1/2`; the left half-plane is reached through
//! the reflection formula with an argument-reduced `sin(pi w)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::Complex;

const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_092;
const LANCZOS_COEF: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Distance to a non-positive integer below which an argument counts as a pole.
const POLE_EPS: f64 = 1e-14;

/// Beyond this |Im w| the reflection path works in logarithms to avoid overflow.
const LOG_PATH_IM: f64 = 20.0;

/// `sin(pi x)` with exact zeros at the integers.
pub fn sinpi_real(x: f64) -> f64 {
    let mut r = x - 2.0 * (x / 2.0).round();
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    (PI * r).sin()
}

/// `cos(pi x)` with exact zeros at the half-integers.
pub fn cospi_real(x: f64) -> f64 {
    sinpi_real(x + 0.5)
}

/// `sin(pi w)` for complex `w`, reducing the real part before scaling by pi.
pub fn sinpi(w: Complex) -> Complex {
    let (s, c) = (sinpi_real(w.re), cospi_real(w.re));
    let b = PI * w.im;
    Complex::new(s * b.cosh(), c * b.sinh())
}

/// `ln sin(pi w)`, stable for large |Im w|. The imaginary part is only
/// meaningful modulo 2 pi.
pub fn ln_sinpi(w: Complex) -> Complex {
    if w.im.abs() < LOG_PATH_IM {
        return sinpi(w).ln();
    }
    if w.im < 0.0 {
        return ln_sinpi(w.conj()).conj();
    }
    // sin(pi w) = (i/2) e^{-i pi w} (1 - e^{2 pi i w})
    let a = w.re - 2.0 * (w.re / 2.0).round();
    let head = Complex::new(PI * w.im - std::f64::consts::LN_2, PI / 2.0 - PI * a);
    let small = Complex::new(0.0, 2.0 * PI * a).exp() * (-2.0 * PI * w.im).exp();
    head + (Complex::new(1.0, 0.0) - small).ln()
}

fn lanczos_ln_gamma(w: Complex) -> Complex {
    let tmp = w + LANCZOS_G;
    let head = (w + 0.5) * tmp.ln() - tmp;
    let mut ser = Complex::new(LANCZOS_C0, 0.0);
    let mut y = w;
    for c in LANCZOS_COEF {
        y += 1.0;
        ser += c / y;
    }
    head + (ser * SQRT_2PI / w).ln()
}

fn pole_index(w: Complex) -> Option<i64> {
    if w.im.abs() <= POLE_EPS && w.re <= POLE_EPS {
        let m = w.re.round();
        if (w.re - m).abs() <= POLE_EPS {
            return Some(m as i64);
        }
    }
    None
}

/// `ln Gamma(w)`. The imaginary part is a valid argument of `Gamma(w)` but
/// not necessarily the principal branch of the log-gamma function.
pub fn ln_gamma(w: Complex) -> Result<Complex> {
    if let Some(m) = pole_index(w) {
        return Err(Error::Pole(m));
    }
    if w.re >= 0.5 {
        Ok(lanczos_ln_gamma(w))
    } else {
        let one_minus = Complex::new(1.0, 0.0) - w;
        Ok(Complex::new(PI.ln(), 0.0) - ln_sinpi(w) - lanczos_ln_gamma(one_minus))
    }
}

/// `ln |Gamma(a + i b)|^2`, finite for any |b| (no overflow through sinh).
pub fn ln_gamma_modulus_sq(a: f64, b: f64) -> Result<f64> {
    Ok(2.0 * ln_gamma(Complex::new(a, b))?.re)
}

/// Complex Gamma function.
pub fn cgamma(w: Complex) -> Result<Complex> {
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {w}")));
    }
    if let Some(m) = pole_index(w) {
        return Err(Error::Pole(m));
    }
    if w.re >= 0.5 {
        Ok(lanczos_ln_gamma(w).exp())
    } else if w.im.abs() < LOG_PATH_IM {
        let g = lanczos_ln_gamma(Complex::new(1.0, 0.0) - w).exp();
        Ok(PI / (sinpi(w) * g))
    } else {
        Ok(ln_gamma(w)?.exp())
    }
}

/// Reciprocal Gamma function `1/Gamma(w)`; entire, exactly zero at the poles.
pub fn rgamma(w: Complex) -> Complex {
    if pole_index(w).is_some() && w.re.fract() == 0.0 && w.im == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    if w.re >= 0.5 {
        (-lanczos_ln_gamma(w)).exp()
    } else if w.im.abs() < LOG_PATH_IM {
        let g = lanczos_ln_gamma(Complex::new(1.0, 0.0) - w).exp();
        sinpi(w) * g / PI
    } else {
        let ln = Complex::new(PI.ln(), 0.0) - ln_sinpi(w) - lanczos_ln_gamma(Complex::new(1.0, 0.0) - w);
        (-ln).exp()
    }
}

pub fn rgamma_real(x: f64) -> f64 {
    rgamma(Complex::new(x, 0.0)).re
}

/// `Gamma(z + i s) Gamma(z - i s)`.
///
/// For real `z` this is `|Gamma(z + i s)|^2`, returned as an exactly real,
/// non-negative value. The result is exactly even in `s`.
pub fn gamma_pair(z: Complex, s: f64) -> Result<Complex> {
    let s = s.abs();
    let plus = z + Complex::new(0.0, s);
    let minus = z - Complex::new(0.0, s);
    if z.im == 0.0 {
        let g = cgamma(plus)?;
        return Ok(Complex::new(g.norm_sqr(), 0.0));
    }
    Ok(cgamma(plus)? * cgamma(minus)?)
}

/// `1/Gamma(k + l + 2z + 1)` through the reflection identity
/// `-(-1)^{k+l} sin(2 pi z)/pi * Gamma(-2z - k - l)`.
///
/// Where `Gamma(-2z-k-l)` itself has a pole the identity is `0 * inf`, and
/// the reciprocal Gamma function is evaluated directly instead.
pub fn reflection_gamma(k: u32, l: u32, z: Complex) -> Complex {
    let kl = f64::from(k) + f64::from(l);
    let arg = -2.0 * z - kl;
    if pole_index(arg).is_some() {
        return rgamma(2.0 * z + kl + 1.0);
    }
    let sign = if (k + l).is_multiple_of(2) { -1.0 } else { 1.0 };
    match cgamma(arg) {
        Ok(g) => sinpi(2.0 * z) * g * (sign / PI),
        Err(_) => rgamma(2.0 * z + kl + 1.0),
    }
}

/// Shifted factorial `(p)_k = p (p+1) ... (p+k-1)`, with `(p)_0 = 1`.
pub fn pochhammer(p: Complex, k: u32) -> Complex {
    (0..k).fold(Complex::new(1.0, 0.0), |acc, j| acc * (p + f64::from(j)))
}

pub fn binomial(l: u32, k: u32) -> f64 {
    if k > l {
        return 0.0;
    }
    let k = k.min(l - k);
    (0..k).fold(1.0, |acc, j| acc * f64::from(l - j) / f64::from(j + 1))
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * f64::from(j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn rel(a: Complex, b: Complex) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn gamma_at_simple_points() {
        assert!(rel(cgamma(c(1.0, 0.0)).unwrap(), c(1.0, 0.0)) < 1e-15);
        let sqrt_pi = PI.sqrt();
        assert!(rel(cgamma(c(0.5, 0.0)).unwrap(), c(sqrt_pi, 0.0)) < 1e-15);
        assert!(rel(cgamma(c(-0.5, 0.0)).unwrap(), c(-2.0 * sqrt_pi, 0.0)) < 1e-15);
        assert!(rel(cgamma(c(5.0, 0.0)).unwrap(), c(24.0, 0.0)) < 1e-14);
    }

    #[test]
    fn poles_are_reported_with_their_index() {
        assert_eq!(cgamma(c(0.0, 0.0)), Err(Error::Pole(0)));
        assert_eq!(cgamma(c(-3.0, 0.0)), Err(Error::Pole(-3)));
        assert_eq!(cgamma(c(-2.0 + 1e-15, 0.0)), Err(Error::Pole(-2)));
        assert!(cgamma(c(-2.0 + 1e-10, 0.0)).is_ok());
        assert!(cgamma(c(-2.0, 1e-10)).is_ok());
    }

    #[test]
    fn gamma_pair_closed_forms() {
        // Gamma(1+i)Gamma(1-i) = pi / sinh(pi)
        let v = gamma_pair(c(1.0, 0.0), 1.0).unwrap();
        assert!((v.re - PI / PI.sinh()).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
        // |Gamma(-1/2 + i s)|^2 = 4 pi / ((1 + 4 s^2) cosh(pi s))
        for s in [0.0, 0.3, 1.0, 4.0] {
            let v = gamma_pair(c(-0.5, 0.0), s).unwrap().re;
            let exact = 4.0 * PI / ((1.0 + 4.0 * s * s) * (PI * s).cosh());
            assert!((v - exact).abs() / exact < 1e-13, "s={s}");
        }
    }

    #[test]
    fn gamma_pair_is_even_in_s() {
        let z = c(2.0, 3.0);
        assert_eq!(gamma_pair(z, 0.7).unwrap(), gamma_pair(z, -0.7).unwrap());
    }

    #[test]
    fn gamma_pair_rejects_poles() {
        assert_eq!(gamma_pair(c(-1.0, 0.0), 0.0), Err(Error::Pole(-1)));
    }

    #[test]
    fn reflection_gamma_examples() {
        let a = reflection_gamma(0, 0, c(0.25, 0.0));
        assert!((a.re - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
        let b = reflection_gamma(1, 2, c(0.0, 0.0));
        assert!((b.re - 1.0 / 6.0).abs() < 1e-15);
        let d = reflection_gamma(0, 0, c(-0.25, 0.0));
        assert!((d.re - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reflection_gamma_matches_direct_reciprocal() {
        for (k, l) in [(0, 0), (1, 0), (2, 3), (4, 1)] {
            for z in [c(0.3, 0.1), c(-0.7, 0.2), c(-1.25, 0.0), c(0.1, -0.4)] {
                let a = reflection_gamma(k, l, z);
                let b = rgamma(2.0 * z + f64::from(k + l) + 1.0);
                assert!((a - b).norm() <= 1e-13 * b.norm().max(1.0), "{k} {l} {z}");
            }
        }
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(c(2.0, 0.0), 3), c(24.0, 0.0));
        assert_eq!(pochhammer(c(-3.0, 0.0), 5), c(0.0, 0.0));
        assert_eq!(pochhammer(c(1.7, -2.0), 0), c(1.0, 0.0));
    }

    #[test]
    fn rgamma_vanishes_at_poles() {
        assert_eq!(rgamma(c(-4.0, 0.0)), c(0.0, 0.0));
        assert_eq!(rgamma(c(0.0, 0.0)), c(0.0, 0.0));
        assert!((rgamma(c(4.0, 0.0)).re - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn log_path_matches_direct_gamma_for_moderate_imaginary_part() {
        for w in [c(-0.3, 19.0), c(-2.7, 25.0), c(0.25, -30.0)] {
            let direct = ln_gamma(w).unwrap().re;
            let big = (-ln_gamma(c(1.0, 0.0) - w).unwrap() + PI.ln() - sinpi(w).ln()).re;
            assert!((direct - big).abs() < 1e-12, "{w}");
        }
    }

    #[test]
    fn modulus_for_large_imaginary_part() {
        // |Gamma(1/2 + i b)|^2 = pi / cosh(pi b)
        for b in [10.0, 100.0, 2500.0] {
            let ln = ln_gamma_modulus_sq(0.5, b).unwrap();
            let exact = PI.ln() - (PI * b) - (0.5 * (1.0 + (-2.0 * PI * b).exp())).ln();
            assert!((ln - exact).abs() < 1e-11 * exact.abs().max(1.0), "b={b}");
        }
    }
}

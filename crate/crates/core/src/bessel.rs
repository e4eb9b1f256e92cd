//! Modified Bessel functions `I_nu` and `K_w` of complex order.
//!
//! `I` comes from its ascending series (reciprocal-Gamma coefficients, so
//! negative integer orders are harmless) or, for large argument and modest
//! order, from the Hankel asymptotic expansion.
//!
//! `K` is computed from `K_w(x) = int_0^inf e^{-x cosh t} cosh(w t) dt`, which
//! is valid for every order. The one regime where that integral loses too
//! much to cancellation, large imaginary order with `x` below it, goes through
//! the connection formula with the series for `I` instead.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::{ln_gamma, sinpi};
use crate::quadrature::{integrate_panels, QuadratureSpec};
use crate::sum::ComplexSum;
use crate::Complex;

/// Largest |order| the module accepts.
pub const MAX_ORDER: f64 = 200.0;

/// Above this argument `I_nu(x)` itself overflows.
pub const MAX_I_ARGUMENT: f64 = 700.0;

/// Series/asymptotic switch for `I`.
pub const I_SWITCH: f64 = 40.0;

/// Imaginary order beyond which `K` uses the connection formula (for `x` up
/// to the order).
const K_SERIES_IMAG: f64 = 4.0;

/// Relative size below which a series term ends the summation.
const SERIES_EPS: f64 = 1e-17;

fn check_argument(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be finite and > 0, got {x}")));
    }
    Ok(())
}

fn check_order(w: Complex) -> Result<()> {
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite order {w}")));
    }
    if w.norm() > MAX_ORDER {
        return Err(Error::OrderOutOfRange(w.norm(), MAX_ORDER));
    }
    Ok(())
}

fn ln_factorial(k: usize) -> f64 {
    ln_gamma(Complex::new(k as f64 + 1.0, 0.0)).map(|g| g.re).unwrap_or(0.0)
}

/// Which expansion `I` should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IBranch {
    Series,
    Asymptotic,
}

fn default_branch(nu: Complex, x: f64) -> IBranch {
    if x > I_SWITCH && nu.norm_sqr() < 0.5 * x {
        IBranch::Asymptotic
    } else {
        IBranch::Series
    }
}

/// `I_nu(x)`.
pub fn bessel_i(nu: Complex, x: f64) -> Result<Complex> {
    check_argument(x)?;
    if x > MAX_I_ARGUMENT {
        return Err(Error::Overflow(format!("I_nu(x) overflows for x = {x} > {MAX_I_ARGUMENT}")));
    }
    Ok(bessel_i_scaled(nu, x)? * x.exp())
}

/// `e^{-x} I_nu(x)`.
pub fn bessel_i_scaled(nu: Complex, x: f64) -> Result<Complex> {
    bessel_i_scaled_with(nu, x, default_branch(nu, x))
}

/// `e^{-x} I_nu(x)` with the expansion chosen by the caller.
pub fn bessel_i_scaled_with(nu: Complex, x: f64, branch: IBranch) -> Result<Complex> {
    check_argument(x)?;
    check_order(nu)?;
    Ok(match branch {
        IBranch::Series => i_series_scaled(nu, x),
        IBranch::Asymptotic => i_asymptotic_scaled(nu, x),
    })
}

fn i_series_scaled(nu: Complex, x: f64) -> Complex {
    let lh = (0.5 * x).ln();
    let q = 0.25 * x * x;
    // Terms with Re(k + nu + 1) < 1 get their own reciprocal Gamma value; from
    // there on the ratio recurrence is safe.
    let k0 = if nu.re >= 0.0 { 0 } else { (-nu.re).ceil() as usize };
    let direct = |k: usize| -> Complex {
        let kf = k as f64;
        match ln_gamma(nu + kf + 1.0) {
            Ok(lg) => ((nu + 2.0 * kf) * lh - x - ln_factorial(k) - lg).exp(),
            Err(_) => Complex::new(0.0, 0.0),
        }
    };
    let mut acc = ComplexSum::new();
    let mut term = Complex::new(0.0, 0.0);
    for k in 0..=k0 {
        term = direct(k);
        acc.add(term);
    }
    let mut k = k0;
    while k < 20_000 {
        let kf = k as f64 + 1.0;
        let denom = kf * (nu + kf);
        term = term * q / denom;
        acc.add(term);
        k += 1;
        let past_peak = kf * denom.norm() > q;
        if past_peak && term.norm() <= SERIES_EPS * acc.sum().norm() {
            break;
        }
        if term.norm() == 0.0 {
            break;
        }
    }
    acc.sum()
}

fn i_asymptotic_scaled(nu: Complex, x: f64) -> Complex {
    let mu = 4.0 * nu * nu;
    let mut acc = ComplexSum::new();
    let mut term = Complex::new(1.0, 0.0);
    acc.add(term);
    let mut prev = 1.0;
    for k in 1..400 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * kf * x);
        let m = next.norm();
        if kf > nu.norm() + 1.0 && m > prev {
            break;
        }
        acc.add(next);
        term = next;
        prev = m;
        if m <= SERIES_EPS * acc.sum().norm() {
            break;
        }
    }
    acc.sum() / (2.0 * PI * x).sqrt()
}

/// Factored form of the ascending series,
/// `I_nu(x) = exp(L) * S` with `L = nu ln(x/2) - ln Gamma(1 + nu)` and
/// `S = sum_k (x^2/4)^k / (k! (1 + nu)_k)`.
///
/// Keeping `L` as a logarithm lets callers combine it with other
/// exponentially large or small factors. Requires `Re nu >= 0`.
pub fn i_series_split(nu: Complex, x: f64) -> Result<(Complex, Complex)> {
    check_argument(x)?;
    if !(nu.re >= 0.0) {
        return Err(Error::Domain(format!("factored I series needs Re nu >= 0, got {nu}")));
    }
    let ln_pref = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)?;
    let q = 0.25 * x * x;
    let mut acc = ComplexSum::new();
    let mut term = Complex::new(1.0, 0.0);
    acc.add(term);
    for k in 1..20_000 {
        let kf = k as f64;
        let denom = kf * (nu + kf);
        term = term * q / denom;
        acc.add(term);
        if kf * denom.norm() > q && term.norm() <= SERIES_EPS * acc.sum().norm() {
            break;
        }
    }
    Ok((ln_pref, acc.sum()))
}

/// `ln sinh(pi b)` for `b > 0`, without overflow.
pub(crate) fn ln_sinh_pi(b: f64) -> f64 {
    let a = PI * b;
    a + (-(-2.0 * a).exp_m1()).ln() - std::f64::consts::LN_2
}

/// `K_{i b}(x) e^{shift}` for real `b != 0`, via
/// `K_{ib} = -pi Im I_{ib} / sinh(pi b)`.
///
/// The shift lets callers fold in a large factor before exponentiating.
pub(crate) fn k_imag_order_series(b: f64, x: f64, shift: f64) -> Result<f64> {
    let ab = b.abs();
    let (ln_pref, series) = i_series_split(Complex::new(0.0, ab), x)?;
    let v = (ln_pref + shift - ln_sinh_pi(ab)).exp() * series;
    Ok(-PI * v.im)
}

/// A `K` value together with an accuracy flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselValue {
    #[serde(with = "crate::serde_complex")]
    pub value: Complex,
    /// Set for `x < 1e-6` with `Re w != 0`, where `K` grows like `x^{-|Re w|}`
    /// and the quadrature is near its limits.
    pub accuracy_warning: bool,
}

/// `K_w(x)`.
pub fn bessel_k(w: Complex, x: f64) -> Result<Complex> {
    Ok(bessel_k_flagged(w, x)?.value)
}

/// `K_w(x)` with the small-argument accuracy flag.
pub fn bessel_k_flagged(w: Complex, x: f64) -> Result<BesselValue> {
    check_argument(x)?;
    check_order(w)?;
    let (mant, ln_scale) = k_scaled_parts(w, x)?;
    let e = ln_scale - x;
    if e > 709.0 {
        return Err(Error::Overflow(format!("K_w(x) overflows at w = {w}, x = {x}")));
    }
    Ok(BesselValue { value: mant * e.exp(), accuracy_warning: x < 1e-6 && w.re != 0.0 })
}

/// `e^{x} K_w(x)`.
pub fn bessel_k_scaled(w: Complex, x: f64) -> Result<Complex> {
    check_argument(x)?;
    check_order(w)?;
    let (mant, ln_scale) = k_scaled_parts(w, x)?;
    if ln_scale > 709.0 {
        return Err(Error::Overflow(format!("scaled K_w(x) overflows at w = {w}, x = {x}")));
    }
    Ok(mant * ln_scale.exp())
}

/// `e^x K_w(x) = mant * exp(ln_scale)`.
fn k_scaled_parts(w: Complex, x: f64) -> Result<(Complex, f64)> {
    if w.im.abs() >= K_SERIES_IMAG && x <= w.im.abs() {
        let v = if w.re == 0.0 {
            Complex::new(k_imag_order_series(w.im, x, x)?, 0.0)
        } else {
            let s = sinpi(w);
            let d = bessel_i_scaled(-w, x)? - bessel_i_scaled(w, x)?;
            // d carries e^{-x}; shift it to e^{+x}.
            return Ok((d * PI / (2.0 * s), 2.0 * x));
        };
        return Ok((v, 0.0));
    }
    k_integral(w, x)
}

fn k_integral(w: Complex, x: f64) -> Result<(Complex, f64)> {
    // K is even in w; work with Re w >= 0.
    let (alpha, beta) = if w.re < 0.0 { (-w.re, -w.im) } else { (w.re, w.im) };
    let exponent = |t: f64, sign: f64| {
        let sh = (0.5 * t).sinh();
        -2.0 * x * sh * sh + sign * alpha * t
    };
    let t_peak = (alpha / x).asinh();
    let e_peak = exponent(t_peak, 1.0);
    let drop = 40.0 + 0.5 * PI * beta.abs();
    let mut lo = t_peak;
    let mut hi = t_peak + 1.0;
    while exponent(hi, 1.0) > e_peak - drop {
        lo = hi;
        hi = t_peak + 2.0 * (hi - t_peak);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if exponent(mid, 1.0) > e_peak - drop {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_max = hi;
    let f = |t: f64| {
        let ep = (exponent(t, 1.0) - e_peak).exp();
        let em = (exponent(t, -1.0) - e_peak).exp();
        let (s, c) = (beta * t).sin_cos();
        Complex::new(0.5 * (ep + em) * c, 0.5 * (ep - em) * s)
    };
    // Rough size of int |f|, used to put the absolute tolerance just above
    // the Kronrod rounding floor.
    let width = t_max.min((2.0 * PI / (x * t_peak.cosh())).sqrt()).max(1e-3);
    let spec = QuadratureSpec { abs_tol: 1e-13 * width, rel_tol: 1e-14, max_level: 12, max_evals: 200_000 };
    let panel = PI / (beta.abs() + 1.0);
    let r = integrate_panels(f, 0.0, t_max, panel, &spec)?;
    Ok((r.value, e_peak))
}

/// `K_nu(x)` from `pi / (2 sin(pi nu)) (I_{-nu}(x) - I_nu(x))`.
///
/// Only meaningful away from integer orders; loses roughly `2x / ln 10`
/// digits to cancellation, so it is a cross-check rather than a primary path.
pub fn bessel_k_via_connection(nu: Complex, x: f64) -> Result<Complex> {
    check_argument(x)?;
    check_order(nu)?;
    let s = sinpi(nu);
    if s.norm() < 1e-3 {
        return Err(Error::ConnectionDegenerate(format!("{nu}")));
    }
    let d = bessel_i(-nu, x)? - bessel_i(nu, x)?;
    Ok(d * PI / (2.0 * s))
}

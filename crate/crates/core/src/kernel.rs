//! The renormalized kernel
//!
//! ```text
//! Psi_n(x) = 1 + (2/x)^{2z} sum_{k=0}^{n} 4 (k+z) / (k! Gamma(1-k-2z)) K_{2z+2k}(x)
//! ```
//!
//! and the tail series that makes it computable near the origin.
//!
//! For small `x` the leading `1` cancels against the `K` sum to all orders up
//! to `x^{2n}`. Writing each `K` through `I_{-nu}` and `I_nu` and collapsing
//! the `I_nu` part with the binomial identity gives
//!
//! ```text
//! Psi_n(x) = 2 pi / sin(2 pi z) * [ (2/x)^{2z} sum_k c_k I_{-2k-2z}(x) - T(x) ]
//! c_k = (k+z) / (k! Gamma(1-k-2z))
//! T(x) = sum_{l>n} (x/2)^{2l}/l! sum_{k<=n} C(l,k) (k+z) / (Gamma(1-2z-k) Gamma(k+l+2z+1))
//! ```
//!
//! where every power of `x` is positive. At half-integer `z` the prefactor
//! blows up while the bracket vanishes; there `Psi` (an entire function of
//! `z`) is recovered from the same formula on a small circle around the
//! degenerate point by the Cauchy integral formula.
//!
//! Near the origin `Psi` itself can underflow while the power it is integrated
//! against overflows, so every evaluator also accepts a weight `exp(w)` that is
//! folded into each term's exponent.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_k;
use crate::error::{Error, Result};
use crate::gamma::{binomial, factorial, pochhammer, reflection_gamma, rgamma, sinpi};
use crate::sum::ComplexSum;
use crate::Complex;

/// Deepest strip index accepted.
pub const MAX_STRIP: u32 = 8;
/// Largest |Im z| accepted.
pub const MAX_IMAG: f64 = 10.0;
/// Largest argument for the tail series.
pub const TAIL_MAX_X: f64 = 10.0;
const TAIL_MAX_TERMS: u32 = 500;

const CONTOUR_RADIUS: f64 = 0.05;
const CONTOUR_NODES: usize = 32;
/// Largest distance from a half-integer handled by the contour average.
const CONTOUR_REACH: f64 = 0.1;

/// Strip index `n` with `-n-1 < re < -n`, if `re` is strictly inside one.
pub fn strip_index(re: f64) -> Option<u32> {
    if re >= 0.0 || re.fract() == 0.0 {
        return None;
    }
    Some((-re).floor() as u32)
}

pub(crate) fn check_strip(re: f64, n: u32) -> Result<()> {
    if re > -f64::from(n) - 1.0 && re < -f64::from(n) {
        return Ok(());
    }
    let required = if re < 0.0 { (-re).floor() as i64 } else { -1 };
    Err(Error::StripMismatch { re, required, given: n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    #[serde(with = "crate::serde_complex")]
    pub z: Complex,
    pub n: u32,
    pub x_switch: f64,
    pub sin_threshold: f64,
    pub tail_tol: f64,
}

impl KernelParams {
    /// Parameters with the default numerical policy.
    pub fn new(z: Complex, n: u32) -> Result<Self> {
        let p = Self { z, n, x_switch: 0.5, sin_threshold: 1e-3, tail_tol: 1e-16 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z.re.is_finite() && self.z.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite z = {}", self.z)));
        }
        if self.n > MAX_STRIP {
            return Err(Error::Range(format!("n = {} exceeds {MAX_STRIP}", self.n)));
        }
        if self.z.im.abs() > MAX_IMAG {
            return Err(Error::Range(format!("|Im z| = {} exceeds {MAX_IMAG}", self.z.im.abs())));
        }
        check_strip(self.z.re, self.n)?;
        if !(self.x_switch > 0.0) {
            return Err(Error::Domain(format!("x_switch must be > 0, got {}", self.x_switch)));
        }
        if !(self.sin_threshold > 0.0 && self.sin_threshold < 0.1) {
            return Err(Error::Domain(format!("sin_threshold must lie in (0, 0.1), got {}", self.sin_threshold)));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::Domain(format!("tail_tol must be > 0, got {}", self.tail_tol)));
        }
        Ok(())
    }

    /// `|sin(2 pi z)|`.
    pub fn sine_magnitude(&self) -> f64 {
        sinpi(2.0 * self.z).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SmallXSeries,
    DirectBessel,
    ExtendedPrecision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    #[serde(with = "crate::serde_complex")]
    pub psi: Complex,
    pub regime: Regime,
    pub est_error: f64,
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite and > 0, got {x}")));
    }
    Ok(())
}

/// `c_k = (k+z) / (k! Gamma(1-k-2z))`.
fn coefficient(k: u32, z: Complex) -> Complex {
    (z + f64::from(k)) * rgamma(1.0 - 2.0 * z - f64::from(k)) / factorial(k)
}

/// The tail `T(x)`: the part of `(2/x)^{2z} sum_k c_k I_{2k+2z}(x)` beyond
/// its constant `sin(2 pi z) / (2 pi)`, summed from `l = n+1`.
pub fn tail_series(x: f64, z: Complex, n: u32) -> Result<Complex> {
    tail_series_tol(x, z, n, 1e-16, ZERO)
}

/// `T(x) exp(log_weight)`.
pub fn tail_series_weighted(x: f64, z: Complex, n: u32, log_weight: Complex) -> Result<Complex> {
    tail_series_tol(x, z, n, 1e-16, log_weight)
}

const ZERO: Complex = Complex::new(0.0, 0.0);

fn tail_series_tol(x: f64, z: Complex, n: u32, tol: f64, log_weight: Complex) -> Result<Complex> {
    check_x(x)?;
    if x > TAIL_MAX_X {
        return Err(Error::Domain(format!("tail series needs x <= {TAIL_MAX_X}, got {x}")));
    }
    let q = 0.25 * x * x;
    let rg: Vec<Complex> = (0..=n).map(|k| rgamma(1.0 - 2.0 * z - f64::from(k))).collect();
    // (x/2)^{2l} / l! relative to its first value, which goes into the exponent.
    let lead = f64::from(2 * n + 2) * (0.5 * x).ln() - ln_factorial(n + 1) + log_weight;
    let mut power = 1.0;
    let mut acc = ComplexSum::new();
    let mut quiet = 0;
    for l in n + 1..n + 1 + TAIL_MAX_TERMS {
        let mut inner = ComplexSum::new();
        for k in 0..=n {
            inner.add(binomial(l, k) * (z + f64::from(k)) * rg[k as usize] * reflection_gamma(k, l, z));
        }
        let term = inner.sum() * power;
        acc.add(term);
        // Individual terms can vanish structurally; require two small ones.
        quiet = if term.norm() <= tol * acc.sum().norm() { quiet + 1 } else { 0 };
        if quiet >= 2 || power == 0.0 {
            break;
        }
        power *= q / f64::from(l + 1);
    }
    let sum = acc.sum();
    Ok(if sum == ZERO { sum } else { (sum.ln() + lead).exp() })
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|j| f64::from(j).ln()).sum()
}

/// `sum_{k=0}^{l} C(l,k) (k+z) (-2z-2l)_{l-k} (2z)_k`, which vanishes
/// identically.
pub fn saalschutz_check(l: u32, z: Complex) -> Complex {
    let mut acc = ComplexSum::new();
    acc.extend(saalschutz_terms(l, z));
    acc.sum()
}

/// Sum of the magnitudes of the terms in [`saalschutz_check`]; the natural
/// scale for judging its rounding error.
pub fn saalschutz_scale(l: u32, z: Complex) -> f64 {
    saalschutz_terms(l, z).map(|t| t.norm()).sum()
}

fn saalschutz_terms(l: u32, z: Complex) -> impl Iterator<Item = Complex> {
    (0..=l).map(move |k| {
        binomial(l, k) * (z + f64::from(k)) * pochhammer(-2.0 * z - 2.0 * f64::from(l), l - k) * pochhammer(2.0 * z, k)
    })
}

/// `Psi_n(x)` with the regime picked from `params`.
pub fn psi(x: f64, params: &KernelParams) -> Result<KernelValue> {
    psi_weighted(x, params, ZERO)
}

/// `Psi_n(x) exp(log_weight)`, finite wherever the product is even if the
/// factors are not.
pub fn psi_weighted(x: f64, params: &KernelParams, log_weight: Complex) -> Result<KernelValue> {
    check_x(x)?;
    params.validate()?;
    let series_regime =
        if params.sine_magnitude() >= params.sin_threshold { Regime::SmallXSeries } else { Regime::ExtendedPrecision };
    if x < params.x_switch {
        return evaluate(x, params, series_regime, log_weight);
    }
    let v = evaluate(x, params, Regime::DirectBessel, log_weight)?;
    // In deep strips the cancellation in the direct sum persists well past
    // the switch; hand over to the series while it is still in range.
    if v.est_error > 1e-10 * v.psi.norm() && x <= TAIL_MAX_X {
        let w = evaluate(x, params, series_regime, log_weight)?;
        if w.est_error < v.est_error {
            return Ok(w);
        }
    }
    Ok(v)
}

/// `Psi_n(x)` in a caller-chosen regime.
///
/// The small-x series refuses when `|sin(2 pi z)|` is below the threshold.
pub fn psi_in_regime(x: f64, params: &KernelParams, regime: Regime) -> Result<KernelValue> {
    check_x(x)?;
    params.validate()?;
    evaluate(x, params, regime, ZERO)
}

fn evaluate(x: f64, params: &KernelParams, regime: Regime, log_weight: Complex) -> Result<KernelValue> {
    let (z, n) = (params.z, params.n);
    let (psi, est_error) = match regime {
        Regime::DirectBessel => direct(x, z, n, log_weight)?,
        Regime::SmallXSeries => {
            let s = params.sine_magnitude();
            if s < params.sin_threshold {
                return Err(Error::DegenerateSine(s, params.sin_threshold));
            }
            small_x(x, z, n, params.tail_tol, log_weight)?
        }
        Regime::ExtendedPrecision => {
            let centre = Complex::new((2.0 * z.re).round() / 2.0, 0.0);
            if (z - centre).norm() <= CONTOUR_REACH {
                contour(x, z, centre, n, params.tail_tol, log_weight)?
            } else {
                // Far from the degenerate points the compensated direct sum
                // only loses what the leading cancellation costs.
                direct(x, z, n, log_weight)?
            }
        }
    };
    Ok(KernelValue { psi, regime, est_error })
}

/// `v exp(w)` through logarithms, so an underflowed `v` against a huge weight
/// gives 0 rather than NaN.
fn scale(v: Complex, w: Complex) -> Complex {
    if v == ZERO || w == ZERO {
        return v * w.exp();
    }
    (v.ln() + w).exp()
}

fn direct(x: f64, z: Complex, n: u32, log_weight: Complex) -> Result<(Complex, f64)> {
    let pre = (2.0 / x).ln() * 2.0 * z;
    let mut acc = ComplexSum::new();
    acc.add(Complex::new(1.0, 0.0));
    let mut size = 1.0;
    for k in 0..=n {
        let c = coefficient(k, z);
        if c.norm() == 0.0 {
            continue;
        }
        let t = 4.0 * c * (pre.exp() * bessel_k(2.0 * z + 2.0 * f64::from(k), x)?);
        size += t.norm();
        acc.add(t);
    }
    let w = log_weight.re.exp();
    Ok((scale(acc.sum(), log_weight), 4.0 * f64::EPSILON * size * w))
}

fn small_x(x: f64, z: Complex, n: u32, tol: f64, log_weight: Complex) -> Result<(Complex, f64)> {
    let lx = (2.0 / x).ln();
    let mut acc = ComplexSum::new();
    let mut size = 0.0;
    for k in 0..=n {
        // (2/x)^{2z} I_nu(x) with nu = -2z-2k, as (2/x)^{4z+2k} times the series.
        let nu = -2.0 * z - 2.0 * f64::from(k);
        let t = coefficient(k, z) * scale(i_series_reduced(nu, x), (4.0 * z + 2.0 * f64::from(k)) * lx + log_weight);
        size += t.norm();
        acc.add(t);
    }
    let tail = tail_series_tol(x, z, n, tol, log_weight)?;
    size += tail.norm();
    acc.add(-tail);
    let factor = 2.0 * PI / sinpi(2.0 * z);
    Ok((factor * acc.sum(), 4.0 * f64::EPSILON * size * factor.norm()))
}

/// `I_nu(x) / (x/2)^nu = sum_m (x^2/4)^m / (m! Gamma(nu+m+1))` for `x` up to
/// the tail-series range; `nu` must not be a negative integer.
fn i_series_reduced(nu: Complex, x: f64) -> Complex {
    let q = 0.25 * x * x;
    let mut term = rgamma(nu + 1.0);
    let mut acc = ComplexSum::new();
    acc.add(term);
    for m in 1..500 {
        let mf = f64::from(m);
        term = term * q / (mf * (nu + mf));
        acc.add(term);
        if mf > q && term.norm() <= 1e-17 * acc.sum().norm() {
            break;
        }
    }
    acc.sum()
}

/// Cauchy-integral evaluation around the nearest zero of `sin(2 pi z)`.
fn contour(x: f64, z: Complex, centre: Complex, n: u32, tol: f64, log_weight: Complex) -> Result<(Complex, f64)> {
    let r = CONTOUR_RADIUS.max(4.0 * (z - centre).norm()).min(0.45);
    let average = |nodes: usize| -> Result<(Complex, f64)> {
        let mut acc = ComplexSum::new();
        let mut err = 0.0;
        for j in 0..nodes {
            let theta = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
            let offset = Complex::from_polar(r, theta);
            let zeta = centre + offset;
            let (v, e) = small_x(x, zeta, n, tol, log_weight)?;
            let w = offset / (zeta - z);
            acc.add(v * w);
            err += e * w.norm();
        }
        Ok((acc.sum() / nodes as f64, err / nodes as f64))
    };
    let (full, rounding) = average(CONTOUR_NODES)?;
    let (half, _) = average(CONTOUR_NODES / 2)?;
    Ok((full, rounding + (full - half).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(re: f64, n: u32) -> KernelParams {
        KernelParams::new(Complex::new(re, 0.0), n).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(
            KernelParams::new(Complex::new(-1.5, 0.0), 0),
            Err(Error::StripMismatch { required: 1, given: 0, .. })
        ));
        assert!(matches!(KernelParams::new(Complex::new(-9.5, 0.0), 9), Err(Error::Range(_))));
        assert!(matches!(KernelParams::new(Complex::new(-0.5, 11.0), 0), Err(Error::Range(_))));
        assert!(KernelParams::new(Complex::new(-1.0, 0.0), 0).is_err());
        let mut p = params(-0.5, 0);
        p.sin_threshold = 0.2;
        assert!(p.validate().is_err());
        assert_eq!(strip_index(-2.3), Some(2));
        assert_eq!(strip_index(-2.0), None);
    }

    #[test]
    fn half_integer_closed_form() {
        // z = -1/2, n = 0: Psi = 1 - x K_1(x).
        let p = params(-0.5, 0);
        let v = psi(1.0, &p).unwrap();
        assert_eq!(v.regime, Regime::DirectBessel);
        assert!((v.psi.re - 0.398_092_769_802_765_4).abs() < 1e-12, "{}", v.psi);
        for x in [0.4, 0.1, 1e-3] {
            let v = psi(x, &p).unwrap();
            assert_eq!(v.regime, Regime::ExtendedPrecision);
            let exact = 1.0 - x * bessel_k(Complex::new(1.0, 0.0), x).unwrap().re;
            assert!((v.psi.re - exact).abs() <= 1e-9 * exact.abs(), "{x}: {} vs {exact}", v.psi);
        }
    }

    #[test]
    fn tail_vanishes_at_origin() {
        let t = tail_series(1e-8, Complex::new(-0.25, 0.0), 0).unwrap();
        assert!(t.norm() < 1e-15);
        assert!(tail_series(11.0, Complex::new(-0.25, 0.0), 0).is_err());
    }

    #[test]
    fn saalschutz_examples() {
        assert!(saalschutz_check(1, Complex::new(0.3, 0.0)).norm() < 1e-12);
        assert!(saalschutz_check(3, Complex::new(-0.7, 0.2)).norm() < 1e-10);
        assert_eq!(saalschutz_check(1, Complex::new(0.0, 0.0)), Complex::new(0.0, 0.0));
    }

    #[test]
    fn small_x_regime_refuses_degenerate_sine() {
        let p = params(-0.5, 0);
        assert!(matches!(psi_in_regime(0.1, &p, Regime::SmallXSeries), Err(Error::DegenerateSine(..))));
    }

    #[test]
    fn regimes_agree_off_the_degenerate_points() {
        let p = params(-0.3, 0);
        let a = psi_in_regime(1e-3, &p, Regime::SmallXSeries).unwrap().psi;
        let b = psi_in_regime(1e-3, &p, Regime::ExtendedPrecision).unwrap().psi;
        assert!((a - b).norm() <= 1e-8 * a.norm());
    }
}

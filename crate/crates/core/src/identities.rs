//! Evaluators for both sides of the Kontorovich-Lebedev type identities and
//! the Fourier transform of `|Gamma(a + i s)|^2`, plus residual reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::bessel::{bessel_i_scaled, bessel_k, bessel_k_scaled};
use crate::error::{Error, Result};
use crate::gamma::{cgamma, gamma_pair, ln_gamma_modulus_sq, rgamma, sinpi};
use crate::kernel::{check_strip, psi_weighted, tail_series_weighted, KernelParams};
use crate::quadrature::{integrate_even_real_line, integrate_semi_infinite, IntegrationResult, QuadratureSpec};
use crate::sum::ComplexSum;
use crate::Complex;

/// Default truncation radius for the Fourier integrals over `s`.
pub const FOURIER_RADIUS: f64 = 40.0;

/// Below this `|sin(2 pi z)|` the mixed representation refuses.
pub const MIXED_SIN_THRESHOLD: f64 = 1e-3;

/// Past this `x` the mixed integrand is built from scaled `I` and `K`
/// instead of the tail series.
const MIXED_SWITCH: f64 = 2.0;

/// Quadrature settings used when a caller has no preference.
pub fn default_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-20, rel_tol: 1e-12, max_level: 12, max_evals: 200_000 }
}

fn real_k(order: f64, x: f64) -> Result<f64> {
    Ok(bessel_k(Complex::new(0.0, order), x)?.re)
}

fn real_k_scaled(order: f64, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(Complex::new(0.0, order), x)?.re)
}

/// Integrate a fallible integrand, surfacing the first error it reports.
fn semi_infinite<T, F>(f: F, sigma: f64, spec: &QuadratureSpec) -> Result<IntegrationResult<T>>
where
    T: crate::quadrature::QuadValue,
    F: Fn(f64) -> Result<T>,
{
    let failure = std::sync::Mutex::new(None::<Error>);
    let r = integrate_semi_infinite(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                T::zero()
            }
        },
        sigma,
        spec,
    )?;
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

/// Endpoint exponent of `x^{2z-1} Psi_n(x)` at the origin, less a margin for
/// the logarithm that appears at half-integer `z`.
fn renormalized_sigma(re: f64, n: u32) -> f64 {
    (-(2.0 * (re + f64::from(n)) + 1.0).abs() - 0.02).max(-0.98)
}

/// `4 int_0^inf (x/2)^{2z} K_{2is}(x) dx / x` for `Re z > 0`.
pub fn kl_classic_rhs(z: Complex, s: f64, spec: &QuadratureSpec) -> Result<IntegrationResult<Complex>> {
    if !(z.re > 0.0) {
        return Err(Error::Domain(format!("classic representation needs Re z > 0, got {}", z.re)));
    }
    let f = |x: f64| -> Result<Complex> {
        let k = real_k(2.0 * s, x)?;
        Ok((2.0 * z * (0.5 * x).ln()).exp() * (4.0 * k / x))
    };
    semi_infinite(f, (2.0 * z.re - 1.0).min(10.0) - 0.02, spec)
}

/// `2 int_0^inf K_{2is}(x) Psi_n(x) (2/x)^{1-2z} dx` for `-n-1 < Re z < -n`.
pub fn kl_extended_rhs(z: Complex, s: f64, n: u32, spec: &QuadratureSpec) -> Result<IntegrationResult<Complex>> {
    check_strip(z.re, n)?;
    let params = KernelParams::new(z, n)?;
    let f = |x: f64| -> Result<Complex> {
        let k = real_k(2.0 * s, x)?;
        let p = psi_weighted(x, &params, (1.0 - 2.0 * z) * (2.0 / x).ln())?.psi;
        Ok(p * (2.0 * k))
    };
    semi_infinite(f, renormalized_sigma(z.re, n), spec)
}

fn mixed_coefficients(z: Complex, n: u32) -> Vec<Complex> {
    (0..=n).map(|k| (z + f64::from(k)) * rgamma(1.0 - 2.0 * z - f64::from(k)) / crate::gamma::factorial(k)).collect()
}

/// Pole sum plus I-kernel integral, valid for `Re z > -n-1` away from the
/// zeros of `sin(2 pi z)`.
pub fn kl_mixed_rhs(z: Complex, s: f64, n: u32, spec: &QuadratureSpec) -> Result<IntegrationResult<Complex>> {
    if !(z.re > -f64::from(n) - 1.0) {
        return Err(Error::StripMismatch { re: z.re, required: (-z.re).floor() as i64, given: n });
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::Pole(z.re as i64));
    }
    let sine = sinpi(2.0 * z);
    if sine.norm() < MIXED_SIN_THRESHOLD {
        return Err(Error::DegenerateSine(sine.norm(), MIXED_SIN_THRESHOLD));
    }
    let factor = 2.0 * PI / sine;
    let c = mixed_coefficients(z, n);
    let mut poles = ComplexSum::new();
    for (k, ck) in c.iter().enumerate() {
        let zk = z + k as f64;
        poles.add(*ck / (zk * zk + s * s));
    }
    let pole_sum = factor * poles.sum();
    let pre = (2.0 - 2.0 * z) * std::f64::consts::LN_2;
    let f = |x: f64| -> Result<Complex> {
        if x <= MIXED_SWITCH {
            let k = real_k(2.0 * s, x)?;
            let tail = tail_series_weighted(x, z, n, pre + (2.0 * z - 1.0) * x.ln())?;
            return Ok(-factor * tail * k);
        }
        // 2^{2-2z} x^{2z-1} K [1 - factor (2/x)^{2z} sum c_k I_{2k+2z}], with
        // the growing I paired against the decaying K.
        let ks = real_k_scaled(2.0 * s, x)?;
        let mut acc = ComplexSum::new();
        for (k, ck) in c.iter().enumerate() {
            acc.add(*ck * bessel_i_scaled(2.0 * z + 2.0 * k as f64, x)?);
        }
        let lead = (pre + (2.0 * z - 1.0) * x.ln() - x).exp() * ks;
        let paired = factor * acc.sum() * ks * (4.0 / x);
        Ok(lead - paired)
    };
    let sigma = (2.0 * z.re + 2.0 * f64::from(n) + 1.0).min(10.0) - 0.02;
    let r = semi_infinite(f, sigma.max(-0.98), spec)?;
    Ok(IntegrationResult { value: r.value + pole_sum, ..r })
}

/// `4 int_0^inf K_{2is}(x) I_{2k+2z}(x) dx / x`; equals `1 / ((z+k)^2 + s^2)`.
pub fn mellin_ki_integral(z: Complex, k: u32, s: f64, spec: &QuadratureSpec) -> Result<IntegrationResult<Complex>> {
    let nu = 2.0 * (z + f64::from(k));
    if !(nu.re > 0.0) {
        return Err(Error::Domain(format!("Mellin pair needs Re z + k > 0, got {}", 0.5 * nu.re)));
    }
    let f = |x: f64| -> Result<Complex> {
        let kk = real_k_scaled(2.0 * s, x)?;
        Ok(bessel_i_scaled(nu, x)? * (4.0 * kk / x))
    };
    semi_infinite(f, (nu.re - 1.0).min(10.0) - 0.02, spec)
}

pub fn mellin_closed(z: Complex, k: u32, s: f64) -> Complex {
    let zk = z + f64::from(k);
    1.0 / (zk * zk + s * s)
}

fn check_fourier_a(a: f64) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::Domain(format!("non-finite a = {a}")));
    }
    if a <= 0.0 && a.fract() == 0.0 {
        return Err(Error::Pole(a as i64));
    }
    Ok(())
}

/// `int_R cos(xi s) |Gamma(a + i s)|^2 ds`, truncated at `radius`.
pub fn fourier_gamma_direct(a: f64, xi: f64, radius: f64, spec: &QuadratureSpec) -> Result<IntegrationResult<f64>> {
    check_fourier_a(a)?;
    let f = |s: f64| match ln_gamma_modulus_sq(a, s) {
        Ok(l) => (xi * s).cos() * l.exp(),
        Err(_) => f64::NAN,
    };
    integrate_even_real_line(f, radius, spec)
}

/// `(2 pi / 2^{2a}) int_0^inf x^{2a-1} Psi_n(x) e^{-x cosh(xi/2)} dx` for
/// `-n-1 < a < -n`.
pub fn fourier_gamma_repr(a: f64, xi: f64, n: u32, spec: &QuadratureSpec) -> Result<IntegrationResult<f64>> {
    check_strip(a, n)?;
    let params = KernelParams::new(Complex::new(a, 0.0), n)?;
    let c = (0.5 * xi).cosh();
    let f = |x: f64| -> Result<f64> {
        let w = Complex::new((2.0 * a - 1.0) * x.ln() - x * c, 0.0);
        Ok(psi_weighted(x, &params, w)?.psi.re)
    };
    let r = semi_infinite(f, renormalized_sigma(a, n), spec)?;
    Ok(r.scaled(2.0 * PI * (-2.0 * a * std::f64::consts::LN_2).exp()))
}

/// `sqrt(pi) Gamma(a) Gamma(a + 1/2) cosh(xi/2)^{-2a}` for `a > 0`.
pub fn ramanujan_closed(a: f64, xi: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("closed form needs a > 0, got {a}")));
    }
    let g = cgamma(Complex::new(a, 0.0))?.re * cgamma(Complex::new(a + 0.5, 0.0))?.re;
    Ok(PI.sqrt() * g * (0.5 * xi).cosh().powf(-2.0 * a))
}

/// The transform at `a = -1/2` in closed form:
/// `4 pi ln(1 + e^{-|xi|}) cosh(xi/2) + 2 pi |xi| e^{-|xi|/2}`.
pub fn fourier_closed_half(xi: f64) -> f64 {
    let x = xi.abs();
    4.0 * PI * (-x).exp().ln_1p() * (0.5 * x).cosh() + 2.0 * PI * x * (-0.5 * x).exp()
}

/// How a report decides `passed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// `rel_residual <= tol`.
    Relative { tol: f64 },
    /// `abs_residual <= tol * scale`, for identities whose exact value is 0.
    ScaledAbsolute { tol: f64, scale: f64 },
    /// `lhs >= rhs` (real parts), for measured lower bounds.
    LowerBound,
}

impl Criterion {
    fn tolerance(&self) -> f64 {
        match *self {
            Criterion::Relative { tol } => tol,
            Criterion::ScaledAbsolute { tol, scale } => tol * scale,
            Criterion::LowerBound => 0.0,
        }
    }
}

/// One identity check. Residual failures are data, not errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    #[serde(with = "crate::serde_complex")]
    pub lhs: Complex,
    #[serde(with = "crate::serde_complex")]
    pub rhs: Complex,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub evaluations: usize,
    pub converged: bool,
    pub error: Option<String>,
}

impl IdentityReport {
    pub fn new(
        name: &str,
        params: BTreeMap<String, f64>,
        lhs: Complex,
        rhs: Complex,
        criterion: Criterion,
        evaluations: usize,
        converged: bool,
    ) -> Self {
        let abs_residual = (lhs - rhs).norm();
        let rel_residual = abs_residual / lhs.norm().max(rhs.norm()).max(1e-300);
        let passed = match criterion {
            Criterion::Relative { tol } => rel_residual <= tol,
            Criterion::ScaledAbsolute { tol, scale } => abs_residual <= tol * scale,
            Criterion::LowerBound => lhs.re >= rhs.re,
        };
        Self {
            name: name.to_string(),
            params,
            lhs,
            rhs,
            abs_residual,
            rel_residual,
            tolerance: criterion.tolerance(),
            passed: passed && abs_residual.is_finite(),
            evaluations,
            converged,
            error: None,
        }
    }

    /// A report for a point whose evaluation failed.
    pub fn failed(name: &str, params: BTreeMap<String, f64>, criterion: Criterion, err: &Error) -> Self {
        Self {
            name: name.to_string(),
            params,
            lhs: Complex::new(f64::NAN, f64::NAN),
            rhs: Complex::new(f64::NAN, f64::NAN),
            abs_residual: f64::NAN,
            rel_residual: f64::NAN,
            tolerance: criterion.tolerance(),
            passed: false,
            evaluations: 0,
            converged: false,
            error: Some(format!("{}: {err}", err.tag())),
        }
    }
}

pub(crate) fn params_z(z: Complex) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("z_re".to_string(), z.re);
    m.insert("z_im".to_string(), z.im);
    m
}

pub(crate) fn with(mut m: BTreeMap<String, f64>, key: &str, v: f64) -> BTreeMap<String, f64> {
    m.insert(key.to_string(), v);
    m
}

pub(crate) fn report_from<F>(name: &str, params: BTreeMap<String, f64>, criterion: Criterion, eval: F) -> IdentityReport
where
    F: FnOnce() -> Result<(Complex, Complex, usize, bool)>,
{
    match eval() {
        Ok((lhs, rhs, evals, conv)) => IdentityReport::new(name, params, lhs, rhs, criterion, evals, conv),
        Err(e) => IdentityReport::failed(name, params, criterion, &e),
    }
}

pub(crate) fn real(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

/// `gamma_pair(z, s)` against the classic representation.
pub fn report_classic(z: Complex, s: f64, tol: f64, spec: &QuadratureSpec) -> IdentityReport {
    report_from("kl_classic", with(params_z(z), "s", s), Criterion::Relative { tol }, || {
        let r = kl_classic_rhs(z, s, spec)?;
        Ok((gamma_pair(z, s)?, r.value, r.evaluations, r.converged))
    })
}

/// `gamma_pair(z, s)` against the extended representation.
pub fn report_extended(z: Complex, s: f64, n: u32, tol: f64, spec: &QuadratureSpec) -> IdentityReport {
    let params = with(with(params_z(z), "s", s), "n", f64::from(n));
    report_from("kl_extended", params, Criterion::Relative { tol }, || {
        let r = kl_extended_rhs(z, s, n, spec)?;
        Ok((gamma_pair(z, s)?, r.value, r.evaluations, r.converged))
    })
}

/// `gamma_pair(z, s)` against the mixed representation.
pub fn report_mixed(z: Complex, s: f64, n: u32, tol: f64, spec: &QuadratureSpec) -> IdentityReport {
    let params = with(with(params_z(z), "s", s), "n", f64::from(n));
    report_from("kl_mixed", params, Criterion::Relative { tol }, || {
        let r = kl_mixed_rhs(z, s, n, spec)?;
        Ok((gamma_pair(z, s)?, r.value, r.evaluations, r.converged))
    })
}

/// Extended against mixed representation, both by quadrature.
pub fn report_mixed_vs_extended(z: Complex, s: f64, n: u32, tol: f64, spec: &QuadratureSpec) -> IdentityReport {
    let params = with(with(params_z(z), "s", s), "n", f64::from(n));
    report_from("kl_mixed_vs_extended", params, Criterion::Relative { tol }, || {
        let e = kl_extended_rhs(z, s, n, spec)?;
        let m = kl_mixed_rhs(z, s, n, spec)?;
        Ok((e.value, m.value, e.evaluations + m.evaluations, e.converged && m.converged))
    })
}

/// Quadrature of the Mellin pair against its closed form.
pub fn mellin_ki_pair(z: Complex, k: u32, s: f64, tol: f64, spec: &QuadratureSpec) -> IdentityReport {
    let params = with(with(params_z(z), "k", f64::from(k)), "s", s);
    report_from("mellin_ki", params, Criterion::Relative { tol }, || {
        let r = mellin_ki_integral(z, k, s, spec)?;
        Ok((r.value, mellin_closed(z, k, s), r.evaluations, r.converged))
    })
}

fn fourier_params(a: f64, xi: f64) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("a".to_string(), a);
    m.insert("xi".to_string(), xi);
    m
}

/// Direct transform against the closed form for `a > 0`.
pub fn report_ramanujan(a: f64, xi: f64, tol: f64, spec: &QuadratureSpec) -> IdentityReport {
    report_from("ramanujan", fourier_params(a, xi), Criterion::Relative { tol }, || {
        let d = fourier_gamma_direct(a, xi, FOURIER_RADIUS, spec)?;
        Ok((real(d.value), real(ramanujan_closed(a, xi)?), d.evaluations, d.converged))
    })
}

/// Direct transform against the kernel representation for `a < 0`.
pub fn report_fourier(a: f64, xi: f64, n: u32, tol: f64, spec: &QuadratureSpec) -> IdentityReport {
    let params = with(fourier_params(a, xi), "n", f64::from(n));
    report_from("fourier_repr", params, Criterion::Relative { tol }, || {
        let d = fourier_gamma_direct(a, xi, FOURIER_RADIUS, spec)?;
        let r = fourier_gamma_repr(a, xi, n, spec)?;
        Ok((real(d.value), real(r.value), d.evaluations + r.evaluations, d.converged && r.converged))
    })
}

/// Direct transform and kernel representation at `a = -1/2` against the
/// closed form; two reports.
pub fn report_fourier_half(xi: f64, tol: f64, spec: &QuadratureSpec) -> Vec<IdentityReport> {
    let closed = real(fourier_closed_half(xi));
    let direct = report_from("fourier_half_direct", fourier_params(-0.5, xi), Criterion::Relative { tol }, || {
        let d = fourier_gamma_direct(-0.5, xi, FOURIER_RADIUS, spec)?;
        Ok((real(d.value), closed, d.evaluations, d.converged))
    });
    let repr = report_from("fourier_half_repr", fourier_params(-0.5, xi), Criterion::Relative { tol }, || {
        let r = fourier_gamma_repr(-0.5, xi, 0, spec)?;
        Ok((real(r.value), closed, r.evaluations, r.converged))
    });
    vec![direct, repr]
}

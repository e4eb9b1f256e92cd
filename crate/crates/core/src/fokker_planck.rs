//! The initial-value problem
//!
//! ```text
//! U_t = y^2 U_yy + y U_y - (y^2 + p^2) U,   U(0, y) = y^p
//! ```
//!
//! solved through the Kontorovich-Lebedev spectral representation, with a
//! double-integral form and a Crank-Nicolson solver as independent checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_k, i_series_split, ln_sinh_pi};
use crate::error::{Error, Result};
use crate::gamma::{ln_gamma, ln_gamma_modulus_sq, rgamma_real};
use crate::quadrature::{integrate_panels, QuadratureSpec};
use crate::Complex;

/// Relative size of the Gaussian factor at the u-truncation point.
pub const U_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpMethod {
    SpectralSingle,
    SpectralDouble,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpQuery {
    pub p: f64,
    pub t: f64,
    pub y: f64,
    /// Strip index for `p < 0`, `p` in `(-2n-2, -2n)`; inferred when absent.
    pub n: Option<u32>,
    pub method: FpMethod,
}

impl FpQuery {
    pub fn new(p: f64, t: f64, y: f64, method: FpMethod) -> Self {
        Self { p, t, y, n: None, method }
    }

    fn validate(&self) -> Result<()> {
        if !self.p.is_finite() {
            return Err(Error::Domain(format!("p must be finite, got {}", self.p)));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::Domain(format!("t must be finite and > 0, got {}", self.t)));
        }
        if !(self.y > 0.0) || !self.y.is_finite() {
            return Err(Error::Domain(format!("y must be finite and > 0, got {}", self.y)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpResult {
    pub value: f64,
    pub method: FpMethod,
    /// Signed contributions `-c_k e^{lambda_k t} K_{p+2k}(y)` included in
    /// `value` for `p < 0`; empty otherwise.
    pub correction_terms: Vec<f64>,
    pub u_truncation: f64,
    pub est_error: f64,
}

/// Dispatch on `q.method` (and on the sign of `p` for the spectral form).
pub fn solve(q: &FpQuery) -> Result<FpResult> {
    match q.method {
        FpMethod::SpectralSingle if q.p < 0.0 => solve_spectral_negative(q),
        FpMethod::SpectralSingle => solve_spectral_positive(q),
        FpMethod::SpectralDouble => solve_spectral_double(q),
        FpMethod::FiniteDifference => {
            q.validate()?;
            solve_finite_difference(q, &FdGrid::for_query(q.y, q.t))
        }
    }
}

pub fn u_truncation(t: f64) -> f64 {
    ((1.0 / U_TOL).ln() / t).sqrt() + 20.0
}

/// `u sinh(pi u) |Gamma(p/2 + iu/2)|^2 K_{iu}(y)`, computed as
/// `-pi u Im I_{iu}(y) |Gamma|^2` with every large factor kept in logarithms.
fn spectral_weight(p: f64, u: f64, y: f64) -> Result<f64> {
    if u == 0.0 {
        return Ok(0.0);
    }
    let (ln_pref, series) = i_series_split(Complex::new(0.0, u), y)?;
    let lg = ln_gamma_modulus_sq(0.5 * p, 0.5 * u)?;
    let v = (ln_pref + lg).exp() * series;
    Ok(-PI * u * v.im)
}

fn spectral_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-14, rel_tol: 1e-12, max_level: 12, max_evals: 4_000_000 }
}

/// The continuous-spectrum integral
/// `2^p / (2 pi^2) int_0^U u sinh(pi u) e^{-(p^2+u^2) t} |Gamma(p/2+iu/2)|^2 K_{iu}(y) du`.
fn single_integral(p: f64, t: f64, y: f64) -> Result<(f64, f64, f64)> {
    let cap = u_truncation(t);
    let failure = std::sync::Mutex::new(None::<Error>);
    let f = |u: f64| match spectral_weight(p, u, y) {
        Ok(w) => w * (-(p * p + u * u) * t).exp(),
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            0.0
        }
    };
    // The phase of I_{iu}(y) advances at rate ~ln(2u / y); one period per panel.
    let width = 2.0 * PI / ((2.0 * cap / y).ln().abs() + 2.0);
    let r = integrate_panels(f, 0.0, cap, width, &spectral_spec())?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let scale = (p * std::f64::consts::LN_2).exp() / (2.0 * PI * PI);
    Ok((scale * r.value, scale * r.error_estimate, cap))
}

fn check_positive(p: f64) -> Result<()> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("this solver needs p > 0, got {p}")));
    }
    Ok(())
}

/// Single spectral integral for `p > 0`.
pub fn solve_spectral_positive(q: &FpQuery) -> Result<FpResult> {
    q.validate()?;
    check_positive(q.p)?;
    let (value, err, cap) = single_integral(q.p, q.t, q.y)?;
    Ok(FpResult {
        value,
        method: FpMethod::SpectralSingle,
        correction_terms: Vec::new(),
        u_truncation: cap,
        est_error: err,
    })
}

/// `int_0^inf x^{p-1} K_{iu}(x) dx` to absolute accuracy about `abs_tol`.
///
/// On `[0, b]` the power series of `I_{iu}` is integrated term by term, which
/// handles the oscillation near the origin exactly; the tail is quadrature.
fn mellin_k(p: f64, u: f64, abs_tol: f64) -> Result<f64> {
    let b = u.clamp(2.0, 60.0);
    let iu = Complex::new(0.0, u);
    let q = 0.25 * b * b;
    let mut r = Complex::new(1.0, 0.0);
    let mut acc = crate::sum::ComplexSum::new();
    acc.add(r / (p + iu));
    for k in 1..2000u32 {
        let kf = f64::from(k);
        r *= q / (kf * (kf + iu));
        let term = r / (p + 2.0 * kf + iu);
        acc.add(term);
        if kf > q && term.norm() < 1e-17 * acc.sum().norm() {
            break;
        }
    }
    let ln_head = p * b.ln() + iu * (0.5 * b).ln() - ln_gamma(Complex::new(1.0, u))? - ln_sinh_pi(u);
    let head = -PI * (ln_head.exp() * acc.sum()).im;

    let failure = std::sync::Mutex::new(None::<Error>);
    let f = |s: f64| {
        let x = b + s;
        match bessel_k(iu, x) {
            Ok(k) => k.re * ((p - 1.0) * x.ln()).exp(),
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        }
    };
    let spec = QuadratureSpec { abs_tol, rel_tol: 1e-12, max_level: 12, max_evals: 200_000 };
    // e^{-45} is far below any requested accuracy.
    let tail = integrate_panels(f, 0.0, 45.0, 15.0, &spec)?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(head + tail.value)
}

/// Double integral for `p > 0`: the inner Mellin transform of `K_{iu}` is
/// computed by quadrature instead of being replaced by its Gamma closed form.
pub fn solve_spectral_double(q: &FpQuery) -> Result<FpResult> {
    q.validate()?;
    check_positive(q.p)?;
    let (p, t, y) = (q.p, q.t, q.y);
    let cap = u_truncation(t);
    let m0 = (2.0 * ln_gamma(Complex::new(0.5 * p, 0.0))?.re + (p - 2.0) * std::f64::consts::LN_2).exp();
    let failure = std::sync::Mutex::new(None::<Error>);
    let f = |u: f64| {
        let r = (|| -> Result<f64> {
            if u == 0.0 {
                return Ok(0.0);
            }
            let (ln_pref, series) = i_series_split(Complex::new(0.0, u), y)?;
            let weight = -PI * u * (ln_pref.exp() * series).im * (-(p * p + u * u) * t).exp();
            // |M(u)| <= M(0); the inner integral only needs the accuracy the
            // outer weight can see.
            if weight.abs() * m0 < 1e-18 {
                return Ok(0.0);
            }
            Ok(weight * mellin_k(p, u, 1e-15 / weight.abs().max(1.0))?)
        })();
        r.unwrap_or_else(|e| {
            failure.lock().unwrap().get_or_insert(e);
            0.0
        })
    };
    let width = 2.0 * PI / ((2.0 * cap / y).ln().abs() + 2.0);
    let spec = QuadratureSpec { abs_tol: 1e-13, rel_tol: 1e-10, max_level: 10, max_evals: 100_000 };
    let r = integrate_panels(f, 0.0, cap, width, &spec)?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let scale = 2.0 / (PI * PI);
    Ok(FpResult {
        value: scale * r.value,
        method: FpMethod::SpectralDouble,
        correction_terms: Vec::new(),
        u_truncation: cap,
        est_error: scale * r.error_estimate,
    })
}

/// Strip index `n` with `p` in `(-2n-2, -2n)`.
pub fn fp_strip(p: f64) -> Option<u32> {
    if p >= 0.0 || (p / 2.0).fract() == 0.0 {
        return None;
    }
    Some((-p / 2.0).floor() as u32)
}

/// `c_k = 2^{p+1} (p+2k) / (k! Gamma(1-p-k))`.
pub fn correction_coefficient(p: f64, k: u32) -> f64 {
    let kf = f64::from(k);
    ((p + 1.0) * std::f64::consts::LN_2).exp() * (p + 2.0 * kf) * rgamma_real(1.0 - p - kf) / crate::gamma::factorial(k)
}

/// Single spectral integral minus the discrete terms
/// `c_k e^{((p+2k)^2 - p^2) t} K_{p+2k}(y)`, `k = 0..=n`, for negative
/// non-integer `p`.
pub fn solve_spectral_negative(q: &FpQuery) -> Result<FpResult> {
    q.validate()?;
    let p = q.p;
    if !(p < 0.0) {
        return Err(Error::Domain(format!("this solver needs p < 0, got {p}")));
    }
    if p.fract() == 0.0 {
        return Err(Error::Pole(p as i64));
    }
    let required = fp_strip(p);
    let n = match (q.n, required) {
        (Some(n), Some(r)) if n == r => n,
        (None, Some(r)) => r,
        (given, _) => {
            return Err(Error::StripMismatch {
                re: p,
                required: required.map_or(-1, i64::from),
                given: given.unwrap_or(0),
            })
        }
    };
    // Gamma(p/2 + iu/2) at u = 0 must be finite.
    ln_gamma(Complex::new(0.5 * p, 0.0))?;
    let (integral, err, cap) = single_integral(p, q.t, q.y)?;
    let mut corrections = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let order = p + 2.0 * f64::from(k);
        let lambda = order * order - p * p;
        let kv = bessel_k(Complex::new(order, 0.0), q.y)?.re;
        corrections.push(-correction_coefficient(p, k) * (lambda * q.t).exp() * kv);
    }
    let value = integral + corrections.iter().sum::<f64>();
    Ok(FpResult {
        value,
        method: FpMethod::SpectralSingle,
        correction_terms: corrections,
        u_truncation: cap,
        est_error: err,
    })
}

/// Uniform grid in `v = ln y` for the Crank-Nicolson solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdGrid {
    pub v_min: f64,
    pub v_max: f64,
    pub nv: usize,
    pub nt: usize,
}

impl FdGrid {
    /// Grid over `[ln y - 8, ln y + 4]`, fine enough for ~1e-5 relative error
    /// at moderate `t`.
    pub fn for_query(y: f64, t: f64) -> Self {
        let v = y.ln();
        let nt = ((t / 2.5e-4).ceil() as usize).clamp(64, 4000);
        Self { v_min: v - 8.0, v_max: v + 4.0, nv: 2401, nt }
    }

    fn validate(&self, y: f64) -> Result<()> {
        if self.nv < 32 {
            return Err(Error::Grid(format!("nv = {} is below 32", self.nv)));
        }
        if self.nt < 16 {
            return Err(Error::Grid(format!("nt = {} is below 16", self.nt)));
        }
        let v = y.ln();
        if !(self.v_min <= v - 8.0 && self.v_max >= v + 4.0) {
            return Err(Error::Grid(format!(
                "[{}, {}] does not cover [ln y - 8, ln y + 4] = [{}, {}]",
                self.v_min,
                self.v_max,
                v - 8.0,
                v + 4.0
            )));
        }
        Ok(())
    }

    pub fn dv(&self) -> f64 {
        (self.v_max - self.v_min) / (self.nv - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dv = self.dv();
        (0..self.nv).map(|i| self.v_min + dv * i as f64).collect()
    }

    /// Same domain with `dv` and `dt` halved.
    pub fn refined(&self) -> Self {
        Self { nv: 2 * self.nv - 1, nt: 2 * self.nt, ..*self }
    }

    /// The discrete `d^2/dv^2 - e^{2v} - p^2` at interior nodes (entries 0
    /// and `nv-1` are left at zero).
    pub fn apply_operator(&self, p: f64, u: &[f64]) -> Vec<f64> {
        let dv = self.dv();
        let v = self.nodes();
        let mut out = vec![0.0; u.len()];
        for i in 1..u.len() - 1 {
            let lap = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (dv * dv);
            out[i] = lap - ((2.0 * v[i]).exp() + p * p) * u[i];
        }
        out
    }
}

/// Solve `A x = d` for tridiagonal `A` (sub `a`, diagonal `b`, super `c`).
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64], scratch: &mut [f64]) {
    let n = b.len();
    scratch[0] = c[0] / b[0];
    d[0] /= b[0];
    for i in 1..n {
        let m = b[i] - a[i] * scratch[i - 1];
        scratch[i] = if i + 1 < n { c[i] / m } else { 0.0 };
        d[i] = (d[i] - a[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= scratch[i] * d[i + 1];
    }
}

/// One run of the theta scheme; returns the solution on the grid nodes.
fn march(p: f64, t: f64, grid: &FdGrid) -> Vec<f64> {
    let nv = grid.nv;
    let dv = grid.dv();
    let v = grid.nodes();
    let pot: Vec<f64> = v.iter().map(|&vi| (2.0 * vi).exp() + p * p).collect();
    let mut u: Vec<f64> = v.iter().map(|&vi| (p * vi).exp()).collect();
    u[nv - 1] = 0.0;
    // Unknowns are nodes 0..nv-1; node nv-1 is held at zero. At node 0 the
    // far-field relation U_v = p U closes the stencil through a ghost node.
    let m = nv - 1;
    let inv = 1.0 / (dv * dv);
    let apply = |u: &[f64], out: &mut [f64]| {
        for i in 0..m {
            let left = if i == 0 { u[1] - 2.0 * dv * p * u[0] } else { u[i - 1] };
            out[i] = (left - 2.0 * u[i] + u[i + 1]) * inv - pot[i] * u[i];
        }
    };
    let (mut a, mut b, mut c) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut rhs = vec![0.0; m];
    let mut lu = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    // theta = 1 is backward Euler, theta = 1/2 Crank-Nicolson.
    let mut step = |u: &mut Vec<f64>, dt: f64, theta: f64| {
        apply(u, &mut lu);
        for i in 0..m {
            rhs[i] = u[i] + (1.0 - theta) * dt * lu[i];
            let w = theta * dt;
            b[i] = 1.0 + w * (2.0 * inv + pot[i]);
            a[i] = -w * inv;
            c[i] = -w * inv;
        }
        // Ghost-node closure at i = 0: left neighbour is u1 - 2 dv p u0.
        let w = theta * dt;
        b[0] = 1.0 + w * (2.0 * inv + pot[0]) + w * 2.0 * dv * p * inv;
        c[0] = -w * 2.0 * inv;
        a[0] = 0.0;
        thomas(&a, &b, &c, &mut rhs, &mut scratch);
        u[..m].copy_from_slice(&rhs);
    };
    let dt = t / grid.nt as f64;
    // Rannacher start: the first two steps as four backward-Euler half steps.
    let startup = grid.nt.min(2);
    for _ in 0..2 * startup {
        step(&mut u, 0.5 * dt, 1.0);
    }
    for _ in startup..grid.nt {
        step(&mut u, dt, 0.5);
    }
    u
}

/// Four-point Lagrange interpolation of grid data at `v`.
fn interpolate(grid: &FdGrid, u: &[f64], v: f64) -> f64 {
    let dv = grid.dv();
    let pos = (v - grid.v_min) / dv;
    let i0 = (pos.floor() as isize - 1).clamp(0, grid.nv as isize - 4) as usize;
    let s = pos - i0 as f64;
    let mut acc = 0.0;
    for j in 0..4 {
        let mut w = 1.0;
        for k in 0..4 {
            if k != j {
                w *= (s - k as f64) / (j as f64 - k as f64);
            }
        }
        acc += w * u[i0 + j];
    }
    acc
}

/// Crank-Nicolson in `v = ln y`, with a grid-doubling Richardson error
/// estimate. The reported value is the fine-grid solution.
pub fn solve_finite_difference(q: &FpQuery, grid: &FdGrid) -> Result<FpResult> {
    q.validate()?;
    grid.validate(q.y)?;
    let v = q.y.ln();
    let coarse = interpolate(grid, &march(q.p, q.t, grid), v);
    let fine_grid = grid.refined();
    let fine = interpolate(&fine_grid, &march(q.p, q.t, &fine_grid), v);
    Ok(FpResult {
        value: fine,
        method: FpMethod::FiniteDifference,
        correction_terms: Vec::new(),
        u_truncation: 0.0,
        est_error: (fine - coarse).abs() / 3.0,
    })
}

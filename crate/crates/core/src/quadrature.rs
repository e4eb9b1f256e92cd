//! One-dimensional numerical integration.
//!
//! Two engines cover everything the library integrates:
//!
//! * [`integrate_semi_infinite`]: exp-sinh double-exponential rule on
//!   `(0, inf)`, which absorbs algebraic endpoint behaviour `x^sigma` at the
//!   origin and algebraic or exponential decay at infinity.
//! * [`integrate_finite`] / [`integrate_panels`]: globally adaptive
//!   Gauss-Kronrod (10/21) on a finite interval, optionally pre-split into
//!   panels no wider than a caller-supplied width so that oscillatory factors
//!   such as `cos(2 s t)` are resolved from the start.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::Complex;

/// Tolerance contract shared by all integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Refinement depth cap: DE halving levels, or GK bisection depth.
    pub max_level: u32,
    pub max_evals: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_level: u32, max_evals: usize) -> Result<Self> {
        let spec = Self { abs_tol, rel_tol, max_level, max_evals };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::Spec(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Spec(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if self.max_level < 1 {
            return Err(Error::Spec("max_level must be >= 1".into()));
        }
        if self.max_evals < 16 {
            return Err(Error::Spec(format!("max_evals must be >= 16, got {}", self.max_evals)));
        }
        Ok(())
    }

    pub fn with_tolerances(self, abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..self }
    }

    fn target(&self, value_magnitude: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value_magnitude)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-15, rel_tol: 1e-12, max_level: 12, max_evals: 400_000 }
    }
}

/// Value with an error estimate. `converged == false` signals an exhausted
/// budget; it is not an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: QuadValue> IntegrationResult<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> IntegrationResult<U> {
        IntegrationResult {
            value: f(self.value),
            error_estimate: self.error_estimate,
            evaluations: self.evaluations,
            converged: self.converged,
        }
    }

    /// Scale value and error estimate by a constant factor.
    pub fn scaled(self, factor: T) -> Self
    where
        T: Mul<Output = T>,
    {
        IntegrationResult {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.magnitude(),
            ..self
        }
    }

    /// Sum of two independent integrals.
    pub fn combine(self, other: Self) -> Self {
        IntegrationResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }
}

/// Scalar types an integrand may return.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn finite(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex {
    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Clone, Copy)]
struct Acc<T> {
    hi: T,
    lo: T,
}

impl<T: QuadValue> Acc<T> {
    fn new() -> Self {
        Self { hi: T::zero(), lo: T::zero() }
    }
    fn add(&mut self, x: T) {
        let s = self.hi + x;
        let bp = s - self.hi;
        let err = (self.hi - (s - bp)) + (x - bp);
        self.hi = s;
        self.lo = self.lo + err;
    }
    fn sum(&self) -> T {
        self.hi + self.lo
    }
}

// ---------------------------------------------------------------------------
// exp-sinh on (0, inf)

const DE_SMALL: f64 = 1e-22;

fn de_node(tau: f64) -> (f64, f64) {
    let x = (FRAC_PI_2 * tau.sinh()).exp();
    (x, FRAC_PI_2 * tau.cosh() * x)
}

/// Integrate `f` over `(0, inf)`.
///
/// `sigma > -1` is the caller's bound on the endpoint behaviour
/// `|f(x)| <~ x^sigma` as `x -> 0+`; it sets how far towards the origin the
/// node set has to reach. The integrand must decay at infinity (algebraic
/// decay faster than `1/x` is enough for the double-exponential map).
pub fn integrate_semi_infinite<T, F>(f: F, sigma: f64, spec: &QuadratureSpec) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if !(sigma > -1.0) {
        return Err(Error::Domain(format!("singularity exponent must exceed -1, got {sigma}")));
    }
    let evals = std::cell::Cell::new(0usize);
    let eval = |tau: f64| -> Result<(T, f64)> {
        let (x, w) = de_node(tau);
        if x == 0.0 || !x.is_finite() || w == 0.0 {
            return Ok((T::zero(), 0.0));
        }
        evals.set(evals.get() + 1);
        let v = f(x);
        if !v.finite() {
            return Err(Error::EvaluationFailure(x));
        }
        let t = v * w;
        Ok((t, t.magnitude()))
    };

    // Hard limits of the node set: x^(sigma+1) below 1e-22 near the origin,
    // and |ln x| <= 700 overall.
    let ln_x_lo = (DE_SMALL.ln() / (sigma + 1.0)).max(-700.0);
    let tau_floor = -(ln_x_lo.abs() / FRAC_PI_2).asinh();
    let tau_ceil = (700.0 / FRAC_PI_2).asinh();

    // Coarse walk at h = 1/8 to find where the integrand becomes negligible.
    let h0 = 0.125;
    let mut coarse: Vec<(f64, T, f64)> = Vec::new();
    let mut peak = 0.0f64;
    let (t0, m0) = eval(0.0)?;
    coarse.push((0.0, t0, m0));
    peak = peak.max(m0);
    let mut tau_hi = 0.0;
    let mut quiet = 0;
    let mut k = 1;
    loop {
        let tau = k as f64 * h0;
        if tau > tau_ceil {
            break;
        }
        let (t, m) = eval(tau)?;
        coarse.push((tau, t, m));
        peak = peak.max(m);
        tau_hi = tau;
        quiet = if m <= DE_SMALL * peak { quiet + 1 } else { 0 };
        if quiet >= 4 {
            break;
        }
        k += 1;
    }
    let mut tau_lo = 0.0;
    quiet = 0;
    k = 1;
    loop {
        let tau = -(k as f64) * h0;
        if tau < tau_floor {
            break;
        }
        let (t, m) = eval(tau)?;
        coarse.push((tau, t, m));
        peak = peak.max(m);
        tau_lo = tau;
        quiet = if m <= DE_SMALL * peak { quiet + 1 } else { 0 };
        if quiet >= 4 {
            break;
        }
        k += 1;
    }

    // Level L uses step h = 2^-L. Nodes already evaluated on the coarse walk
    // (multiples of 1/8) are reused for levels <= 3.
    let mut sum = Acc::<T>::new();
    let mut abs_sum = 0.0;
    let mut h = 0.125;
    for &(_, t, m) in &coarse {
        sum.add(t);
        abs_sum += m;
    }
    let mut prev = sum.sum() * h;
    let mut level = 3u32;
    let mut err = f64::INFINITY;
    let mut converged = false;
    let max_level = spec.max_level.max(4);
    while level < max_level {
        if evals.get() >= spec.max_evals {
            break;
        }
        h *= 0.5;
        level += 1;
        let first = (tau_lo / h).ceil() as i64;
        let last = (tau_hi / h).floor() as i64;
        let mut j = if first % 2 == 0 { first + 1 } else { first };
        while j <= last {
            let (t, m) = eval(j as f64 * h)?;
            sum.add(t);
            abs_sum += m;
            j += 2;
        }
        let cur = sum.sum() * h;
        err = (cur - prev).magnitude();
        prev = cur;
        let floor = 64.0 * f64::EPSILON * abs_sum * h;
        if level >= 5 && err <= spec.target(cur.magnitude()).max(floor) {
            converged = true;
            break;
        }
    }
    Ok(IntegrationResult { value: prev, error_estimate: err, evaluations: evals.get(), converged })
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod 10/21

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_221_795,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gk21<T, F>(f: &F, a: f64, b: f64) -> Result<(T, f64)>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [T::zero(); 21];
    let fc = f(centre);
    if !fc.finite() {
        return Err(Error::EvaluationFailure(centre));
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (centre - dx, centre + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.finite() {
            return Err(Error::EvaluationFailure(x1));
        }
        if !f2.finite() {
            return Err(Error::EvaluationFailure(x2));
        }
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
    }
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    let mut resabs = fc.magnitude() * WGK[10];
    for j in 0..10 {
        let pair = fv[2 * j] + fv[2 * j + 1];
        kron = kron + pair * WGK[j];
        resabs += WGK[j] * (fv[2 * j].magnitude() + fv[2 * j + 1].magnitude());
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut resasc = WGK[10] * (fc - mean).magnitude();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[2 * j] - mean).magnitude() + (fv[2 * j + 1] - mean).magnitude());
    }
    let h = half.abs();
    let (resabs, resasc) = (resabs * h, resasc * h);
    let mut err = (kron - gauss).magnitude() * h;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((kron * half, err))
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
    depth: u32,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Kronrod integration over `[a, b]`.
pub fn integrate_finite<T, F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_panels(f, a, b, (b - a).abs(), spec)
}

/// Adaptive Gauss-Kronrod over `[a, b]`, starting from equal panels no wider
/// than `max_width`.
pub fn integrate_panels<T, F>(
    f: F,
    a: f64,
    b: f64,
    max_width: f64,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("finite interval required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(IntegrationResult { value: T::zero(), error_estimate: 0.0, evaluations: 0, converged: true });
    }
    let width = (b - a).abs();
    let pieces = if max_width > 0.0 && max_width < width { ((width / max_width).ceil() as usize).max(1) } else { 1 };
    let step = (b - a) / pieces as f64;
    let mut heap = BinaryHeap::with_capacity(pieces * 2);
    let mut frozen: Vec<Segment<T>> = Vec::new();
    let mut evals = 0usize;
    for i in 0..pieces {
        let lo = a + step * i as f64;
        let hi = if i + 1 == pieces { b } else { a + step * (i + 1) as f64 };
        let (value, err) = gk21(&f, lo, hi)?;
        evals += 21;
        heap.push(Segment { a: lo, b: hi, value, err, depth: 0 });
    }
    let totals = |heap: &BinaryHeap<Segment<T>>, frozen: &[Segment<T>]| {
        let mut acc = Acc::<T>::new();
        let mut e = 0.0;
        for s in heap.iter().chain(frozen.iter()) {
            acc.add(s.value);
            e += s.err;
        }
        (acc.sum(), e)
    };
    let (mut total, mut total_err) = totals(&heap, &frozen);
    let mut converged = total_err <= spec.target(total.magnitude());
    let mut iterations = 0usize;
    while !converged {
        if evals + 42 > spec.max_evals {
            break;
        }
        let Some(seg) = heap.pop() else { break };
        if seg.depth >= spec.max_level.max(1) * 4 {
            frozen.push(seg);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let mid = 0.5 * (seg.a + seg.b);
        let (v1, e1) = gk21(&f, seg.a, mid)?;
        let (v2, e2) = gk21(&f, mid, seg.b)?;
        evals += 42;
        heap.push(Segment { a: seg.a, b: mid, value: v1, err: e1, depth: seg.depth + 1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, err: e2, depth: seg.depth + 1 });
        iterations += 1;
        // Incremental totals drift; recompute exactly every so often.
        if iterations.is_multiple_of(64) || heap.len() < 64 {
            (total, total_err) = totals(&heap, &frozen);
        } else {
            total = total - seg.value + v1 + v2;
            total_err = total_err - seg.err + e1 + e2;
        }
        converged = total_err <= spec.target(total.magnitude());
    }
    let (total, total_err) = totals(&heap, &frozen);
    let converged = converged || total_err <= spec.target(total.magnitude());
    Ok(IntegrationResult { value: total, error_estimate: total_err, evaluations: evals, converged })
}

/// `int_{-inf}^{inf} f(s) ds` for even `f`, computed as `2 int_0^S f`.
///
/// The caller asserts `|f(s)| <= C e^{-pi |s| / 2}` beyond `S`; the
/// corresponding tail bound `2 |f(S)| (2/pi)` is added to the error estimate.
pub fn integrate_even_real_line<F>(
    f: F,
    truncation_radius: f64,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult<f64>>
where
    F: Fn(f64) -> f64,
{
    if !(truncation_radius > 0.0) {
        return Err(Error::Domain(format!("truncation radius must be > 0, got {truncation_radius}")));
    }
    let half = integrate_panels(&f, 0.0, truncation_radius, 0.5, spec)?;
    let edge = f(truncation_radius);
    let tail = if edge.is_finite() { 2.0 * edge.abs() / FRAC_PI_2 } else { f64::INFINITY };
    Ok(IntegrationResult {
        value: 2.0 * half.value,
        error_estimate: 2.0 * half.error_estimate + tail,
        evaluations: half.evaluations + 1,
        converged: half.converged,
    })
}

//! Parameter grids and the sweep that turns them into identity reports.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fokker_planck::{solve, FpMethod, FpQuery};
use crate::identities::{
    mellin_ki_pair, params_z, real, report_classic, report_extended, report_fourier, report_fourier_half, report_from,
    report_mixed, report_mixed_vs_extended, report_ramanujan, with, Criterion, IdentityReport,
};
use crate::kernel::{psi, psi_in_regime, saalschutz_check, saalschutz_scale, strip_index, KernelParams, Regime};
use crate::quadrature::QuadratureSpec;
use crate::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlPoint {
    #[serde(with = "crate::serde_complex")]
    pub z: Complex,
    pub s: f64,
    /// Strip index; inferred from `Re z` when absent.
    #[serde(default)]
    pub n: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinPoint {
    #[serde(with = "crate::serde_complex")]
    pub z: Complex,
    pub k: u32,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierPoint {
    pub a: f64,
    pub xi: f64,
    #[serde(default)]
    pub n: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    #[serde(with = "crate::serde_complex")]
    pub z: Complex,
    #[serde(default)]
    pub n: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaalschutzPoint {
    #[serde(with = "crate::serde_complex")]
    pub z: Complex,
    pub l: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpPoint {
    pub p: f64,
    #[serde(default = "default_t")]
    pub t: f64,
    pub y: f64,
}

fn default_t() -> f64 {
    FP_INITIAL_T
}

/// Time used for the initial-condition check.
pub const FP_INITIAL_T: f64 = 1e-6;
/// Window on which the kernel slope is fitted.
pub const SLOPE_WINDOW: (f64, f64) = (1e-4, 1e-2);
/// Allowance below `-2 Re z` for the fitted slope.
pub const SLOPE_SLACK: f64 = 0.1;
/// Points where the small-x and large-x kernel regimes are compared.
pub const REGIME_OVERLAP: [f64; 3] = [0.3, 0.55, 0.8];

/// Every section is a list of points; missing sections are empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterGrid {
    /// Overrides every section's tolerance (not the slope lower bounds).
    pub tolerance: Option<f64>,
    pub classic: Vec<KlPoint>,
    pub extended: Vec<KlPoint>,
    pub extended_complex: Vec<KlPoint>,
    pub mixed: Vec<KlPoint>,
    pub mixed_vs_extended: Vec<KlPoint>,
    pub mellin: Vec<MellinPoint>,
    pub ramanujan: Vec<FourierPoint>,
    pub fourier: Vec<FourierPoint>,
    pub fourier_half: Vec<f64>,
    pub kernel: Vec<KernelPoint>,
    pub saalschutz: Vec<SaalschutzPoint>,
    pub fp_initial: Vec<FpPoint>,
    pub fp_double: Vec<FpPoint>,
    pub fp_fd: Vec<FpPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// The 25 real-z extended-representation checks.
    Kl,
    Classic,
    Mixed,
    Mellin,
    Fourier,
    Kernel,
    Fp,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 8] = ["kl", "classic", "mixed", "mellin", "fourier", "kernel", "fp", "all"];
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "kl" => Suite::Kl,
            "classic" => Suite::Classic,
            "mixed" => Suite::Mixed,
            "mellin" => Suite::Mellin,
            "fourier" => Suite::Fourier,
            "kernel" => Suite::Kernel,
            "fp" => Suite::Fp,
            "all" => Suite::All,
            _ => return Err(format!("unknown suite {s:?}, expected one of {}", Suite::NAMES.join("|"))),
        })
    }
}

fn real_points(zs: &[f64], ss: &[f64]) -> Vec<KlPoint> {
    zs.iter().flat_map(|&z| ss.iter().map(move |&s| KlPoint { z: Complex::new(z, 0.0), s, n: None })).collect()
}

fn fourier_points(a: &[f64], xi: &[f64]) -> Vec<FourierPoint> {
    a.iter().flat_map(|&a| xi.iter().map(move |&xi| FourierPoint { a, xi, n: None })).collect()
}

fn fp_points(p: &[f64], t: &[f64], y: &[f64]) -> Vec<FpPoint> {
    let mut out = Vec::new();
    for &p in p {
        for &t in t {
            for &y in y {
                out.push(FpPoint { p, t, y });
            }
        }
    }
    out
}

/// Seed for the random Saalschutz parameters of the builtin grid.
pub const SAALSCHUTZ_SEED: u64 = 0x5a_a1;

impl ParameterGrid {
    /// The acceptance grid.
    pub fn builtin() -> Self {
        let ext_z = [-0.25, -0.5, -0.75, -1.5, -2.5];
        let ext_s = [0.0, 0.5, 1.0, 2.0, 5.0];
        let mixed_z = [
            Complex::new(-0.25, 0.0),
            Complex::new(-0.75, 0.0),
            Complex::new(-1.25, 0.0),
            Complex::new(-0.3, 0.4),
            Complex::new(1.25, 0.0),
        ];
        let mixed: Vec<KlPoint> =
            mixed_z.iter().flat_map(|&z| ext_s.iter().map(move |&s| KlPoint { z, s, n: None })).collect();
        let mixed_vs_extended = mixed.iter().copied().filter(|p| p.z.re < 0.0).collect();
        let mut rng = StdRng::seed_from_u64(SAALSCHUTZ_SEED);
        let mut saalschutz = Vec::new();
        for _ in 0..20 {
            let z = Complex::new(rng.gen_range(-3.0..1.0), rng.gen_range(-1.0..1.0));
            saalschutz.extend((1..=10).map(|l| SaalschutzPoint { z, l }));
        }
        let c = |re, im, k, s| MellinPoint { z: Complex::new(re, im), k, s };
        Self {
            tolerance: None,
            classic: [Complex::new(0.5, 0.0), Complex::new(1.0, 0.0), Complex::new(2.0, 0.0), Complex::new(0.5, 0.5)]
                .iter()
                .flat_map(|&z| [0.0, 0.5, 1.0, 2.0].map(|s| KlPoint { z, s, n: None }))
                .collect(),
            extended: real_points(&ext_z, &ext_s),
            extended_complex: vec![
                KlPoint { z: Complex::new(-0.3, 0.4), s: 1.0, n: Some(0) },
                KlPoint { z: Complex::new(-1.5, 0.2), s: 0.5, n: Some(1) },
            ],
            mixed,
            mixed_vs_extended,
            mellin: vec![
                c(1.0, 0.0, 0, 0.0),
                c(0.5, 0.0, 1, 2.0),
                c(-0.4, 0.0, 1, 0.0),
                c(0.25, 0.0, 0, 1.0),
                c(-0.75, 0.0, 1, 0.5),
                c(-1.5, 0.0, 2, 1.0),
                c(0.3, 0.4, 0, 0.5),
                c(-0.3, 0.4, 1, 2.0),
                c(2.0, 0.0, 3, 5.0),
            ],
            ramanujan: fourier_points(&[0.5, 1.0, 2.0], &[0.0, 1.0, 3.0]),
            fourier: fourier_points(&[-0.25, -0.5, -0.75, -1.5], &[0.0, 1.0, 2.0, 4.0]),
            fourier_half: vec![0.0, 1.0, 2.0, 4.0],
            kernel: ext_z.iter().map(|&z| KernelPoint { z: Complex::new(z, 0.0), n: None }).collect(),
            saalschutz,
            fp_initial: fp_points(&[1.0, 0.5, -0.5, -1.5], &[FP_INITIAL_T], &[0.5, 1.0, 2.0]),
            fp_double: fp_points(&[0.5, 1.0, 2.0], &[0.1, 0.5], &[1.0, 3.0]),
            fp_fd: fp_points(&[-0.5, -1.5, -2.5], &[0.1, 0.25], &[1.0, 1.5]),
        }
    }

    /// Keep only the sections belonging to `suite`.
    pub fn restrict(mut self, suite: Suite) -> Self {
        let keep = |s: &[Suite]| suite == Suite::All || s.contains(&suite);
        if !keep(&[Suite::Classic]) {
            self.classic.clear();
        }
        if !keep(&[Suite::Kl]) {
            self.extended.clear();
        }
        if suite != Suite::All {
            self.extended_complex.clear();
        }
        if !keep(&[Suite::Mixed]) {
            self.mixed.clear();
            self.mixed_vs_extended.clear();
        }
        if !keep(&[Suite::Mellin]) {
            self.mellin.clear();
        }
        if !keep(&[Suite::Fourier]) {
            self.ramanujan.clear();
            self.fourier.clear();
            self.fourier_half.clear();
        }
        if !keep(&[Suite::Kernel]) {
            self.kernel.clear();
            self.saalschutz.clear();
        }
        if !keep(&[Suite::Fp]) {
            self.fp_initial.clear();
            self.fp_double.clear();
            self.fp_fd.clear();
        }
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Grid(format!("malformed grid file: {e}")))
    }

    /// Number of reports [`verify_all`] will produce.
    pub fn len(&self) -> usize {
        self.tasks(&QuadratureSpec::default()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn tasks<'a>(&'a self, spec: &'a QuadratureSpec) -> Vec<Task<'a>> {
        let tol = |default: f64| self.tolerance.unwrap_or(default);
        let mut out: Vec<Task<'a>> = Vec::new();
        for p in &self.classic {
            let t = tol(1e-9);
            out.push(Box::new(move || vec![report_classic(p.z, p.s, t, spec)]));
        }
        for p in self.extended.iter().chain(&self.extended_complex) {
            let t = tol(if p.z.im == 0.0 { 1e-7 } else { 1e-6 });
            out.push(Box::new(move || vec![report_extended(p.z, p.s, strip_or_zero(p.n, p.z.re), t, spec)]));
        }
        for p in &self.mixed {
            let t = tol(1e-7);
            out.push(Box::new(move || vec![report_mixed(p.z, p.s, mixed_n(p), t, spec)]));
        }
        for p in &self.mixed_vs_extended {
            let t = tol(1e-7);
            out.push(Box::new(move || vec![report_mixed_vs_extended(p.z, p.s, mixed_n(p), t, spec)]));
        }
        for p in &self.mellin {
            let t = tol(1e-9);
            out.push(Box::new(move || vec![mellin_ki_pair(p.z, p.k, p.s, t, spec)]));
        }
        for p in &self.ramanujan {
            let t = tol(1e-8);
            out.push(Box::new(move || vec![report_ramanujan(p.a, p.xi, t, spec)]));
        }
        for p in &self.fourier {
            let t = tol(1e-6);
            out.push(Box::new(move || vec![report_fourier(p.a, p.xi, strip_or_zero(p.n, p.a), t, spec)]));
        }
        for &xi in &self.fourier_half {
            let t = tol(1e-7);
            out.push(Box::new(move || report_fourier_half(xi, t, spec)));
        }
        for p in &self.kernel {
            let t = tol(1e-8);
            out.push(Box::new(move || vec![report_kernel_slope(p)]));
            for &x in &REGIME_OVERLAP {
                out.push(Box::new(move || vec![report_kernel_regimes(p, x, t)]));
            }
        }
        for p in &self.saalschutz {
            let t = tol(1e-10);
            out.push(Box::new(move || vec![report_saalschutz(p, t)]));
        }
        for p in &self.fp_initial {
            let t = tol(1e-3);
            out.push(Box::new(move || vec![report_fp_initial(p, t)]));
        }
        for p in &self.fp_double {
            let t = tol(1e-6);
            out.push(Box::new(move || vec![report_fp_pair(p, FpMethod::SpectralDouble, t)]));
        }
        for p in &self.fp_fd {
            let t = tol(1e-3);
            out.push(Box::new(move || vec![report_fp_pair(p, FpMethod::FiniteDifference, t)]));
        }
        out
    }
}

type Task<'a> = Box<dyn Fn() -> Vec<IdentityReport> + Send + Sync + 'a>;

fn strip_or_zero(n: Option<u32>, re: f64) -> u32 {
    n.or_else(|| strip_index(re)).unwrap_or(0)
}

/// The mixed representation holds for every `Re z > -n-1`; use the smallest
/// admissible `n`.
fn mixed_n(p: &KlPoint) -> u32 {
    p.n.unwrap_or_else(|| if p.z.re > 0.0 { 0 } else { (-p.z.re).floor() as u32 })
}

/// Run every grid point. Points are evaluated in parallel but reports come
/// back in grid order; failures are reported, never raised.
pub fn verify_all(grid: &ParameterGrid, spec: &QuadratureSpec) -> Vec<IdentityReport> {
    let tasks = grid.tasks(spec);
    tasks.par_iter().map(|t| t()).collect::<Vec<_>>().into_iter().flatten().collect()
}

fn kernel_params(p: &KernelPoint) -> BTreeMap<String, f64> {
    with(params_z(p.z), "n", f64::from(strip_or_zero(p.n, p.z.re)))
}

/// Least-squares slope of `ln |Psi_n|` against `ln x` over [`SLOPE_WINDOW`],
/// checked against the lower bound `-2 Re z - 0.1`.
fn report_kernel_slope(p: &KernelPoint) -> IdentityReport {
    report_from("kernel_slope", kernel_params(p), Criterion::LowerBound, || {
        let params = KernelParams::new(p.z, strip_or_zero(p.n, p.z.re))?;
        let (lo, hi) = (SLOPE_WINDOW.0.ln(), SLOPE_WINDOW.1.ln());
        let m = 9;
        let mut pts = Vec::with_capacity(m);
        for i in 0..m {
            let lx = lo + (hi - lo) * i as f64 / (m - 1) as f64;
            pts.push((lx, psi(lx.exp(), &params)?.psi.norm().ln()));
        }
        let mx = pts.iter().map(|q| q.0).sum::<f64>() / m as f64;
        let my = pts.iter().map(|q| q.1).sum::<f64>() / m as f64;
        let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
        Ok((real(sxy / sxx), real(-2.0 * p.z.re - SLOPE_SLACK), m, true))
    })
}

/// Large-x direct sum against the small-x form (contour average near
/// half-integers) at one point of the overlap window.
fn report_kernel_regimes(p: &KernelPoint, x: f64, tol: f64) -> IdentityReport {
    report_from("kernel_regimes", with(kernel_params(p), "x", x), Criterion::Relative { tol }, || {
        let params = KernelParams::new(p.z, strip_or_zero(p.n, p.z.re))?;
        let small = if params.sine_magnitude() >= params.sin_threshold {
            Regime::SmallXSeries
        } else {
            Regime::ExtendedPrecision
        };
        let d = psi_in_regime(x, &params, Regime::DirectBessel)?;
        let s = psi_in_regime(x, &params, small)?;
        Ok((d.psi, s.psi, 2, true))
    })
}

fn report_saalschutz(p: &SaalschutzPoint, tol: f64) -> IdentityReport {
    let params = with(params_z(p.z), "l", f64::from(p.l));
    let scale = saalschutz_scale(p.l, p.z).max(f64::MIN_POSITIVE);
    report_from("saalschutz", params, Criterion::ScaledAbsolute { tol, scale }, || {
        Ok((saalschutz_check(p.l, p.z), Complex::new(0.0, 0.0), 1, true))
    })
}

fn fp_params(p: &FpPoint) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("p".to_string(), p.p);
    m.insert("t".to_string(), p.t);
    m.insert("y".to_string(), p.y);
    m
}

fn report_fp_initial(p: &FpPoint, tol: f64) -> IdentityReport {
    report_from("fp_initial", fp_params(p), Criterion::Relative { tol }, || {
        let r = solve(&FpQuery::new(p.p, p.t, p.y, FpMethod::SpectralSingle))?;
        Ok((real(r.value), real(p.y.powf(p.p)), 1, true))
    })
}

/// Single spectral integral against an independent method.
fn report_fp_pair(p: &FpPoint, oracle: FpMethod, tol: f64) -> IdentityReport {
    let name = match oracle {
        FpMethod::SpectralDouble => "fp_single_vs_double",
        _ => "fp_single_vs_fd",
    };
    report_from(name, fp_params(p), Criterion::Relative { tol }, || {
        let a = solve(&FpQuery::new(p.p, p.t, p.y, FpMethod::SpectralSingle))?;
        let b = solve(&FpQuery::new(p.p, p.t, p.y, oracle))?;
        Ok((real(a.value), real(b.value), 2, true))
    })
}

use klgamma::bessel::{bessel_i, bessel_k_flagged};
use klgamma::fokker_planck::{solve, FpMethod, FpQuery};
use klgamma::gamma::gamma_pair;
use klgamma::identities::{
    fourier_closed_half, fourier_gamma_direct, fourier_gamma_repr, ramanujan_closed, FOURIER_RADIUS,
};
use klgamma::kernel::{psi as kernel_psi, strip_index, KernelParams};
use klgamma::quadrature::QuadratureSpec;
use klgamma::verify::{verify_all, ParameterGrid, Suite};
use klgamma::Complex;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::render::Document;
use crate::{BesselKind, Failure, FpMethodArg};

fn cx(z: Complex) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn gamma(z: Complex, s: f64) -> Result<Document, Failure> {
    let v = gamma_pair(z, s)?;
    Ok(Document {
        json: json!({ "z": cx(z), "s": s, "value": cx(v) }),
        headers: vec!["z_re", "z_im", "s", "value_re", "value_im"],
        rows: vec![vec![z.re.into(), z.im.into(), s.into(), v.re.into(), v.im.into()]],
    })
}

pub fn bessel(kind: BesselKind, order: Complex, x: f64) -> Result<Document, Failure> {
    let (name, value, warning) = match kind {
        BesselKind::I => ("i", bessel_i(order, x)?, false),
        BesselKind::K => {
            let b = bessel_k_flagged(order, x)?;
            ("k", b.value, b.accuracy_warning)
        }
    };
    Ok(Document {
        json: json!({
            "kind": name,
            "order": cx(order),
            "x": x,
            "value": cx(value),
            "accuracy_warning": warning,
        }),
        headers: vec!["kind", "order_re", "order_im", "x", "value_re", "value_im", "accuracy_warning"],
        rows: vec![vec![
            name.into(),
            order.re.into(),
            order.im.into(),
            x.into(),
            value.re.into(),
            value.im.into(),
            warning.into(),
        ]],
    })
}

pub fn psi(z: Complex, n: u32, x: f64) -> Result<Document, Failure> {
    let params = KernelParams::new(z, n)?;
    let v = kernel_psi(x, &params)?;
    let regime = serde_json::to_value(v.regime).unwrap_or(Value::Null);
    Ok(Document {
        json: json!({
            "z": cx(z),
            "n": n,
            "x": x,
            "psi": cx(v.psi),
            "regime": regime,
            "est_error": v.est_error,
        }),
        headers: vec!["z_re", "z_im", "n", "x", "psi_re", "psi_im", "regime", "est_error"],
        rows: vec![vec![
            z.re.into(),
            z.im.into(),
            n.into(),
            x.into(),
            v.psi.re.into(),
            v.psi.im.into(),
            regime,
            v.est_error.into(),
        ]],
    })
}

pub fn verify(
    suite: &str,
    grid: &str,
    tol: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<(Document, Result<(), Failure>), Failure> {
    let suite: Suite = suite.parse().map_err(Failure::Usage)?;
    let mut grid = if grid == "builtin" {
        ParameterGrid::builtin()
    } else {
        let text =
            std::fs::read_to_string(grid).map_err(|e| Failure::Usage(format!("cannot read grid {grid}: {e}")))?;
        ParameterGrid::from_json(&text)?
    }
    .restrict(suite);
    if let Some(t) = tol {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Failure::Usage(format!("--tol must be finite and > 0, got {t}")));
        }
        grid.tolerance = Some(t);
    }
    if grid.is_empty() {
        return Err(Failure::Usage(format!("grid has no points for suite {suite:?}")));
    }
    let reports = verify_all(&grid, spec);
    let failed = reports.iter().filter(|r| !r.passed).count();
    let rows = reports
        .iter()
        .map(|r| {
            let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            vec![
                r.name.clone().into(),
                params.join(";").into(),
                r.lhs.re.into(),
                r.lhs.im.into(),
                r.rhs.re.into(),
                r.rhs.im.into(),
                r.abs_residual.into(),
                r.rel_residual.into(),
                r.tolerance.into(),
                r.passed.into(),
                r.converged.into(),
                r.error.clone().map_or(Value::Null, Value::from),
            ]
        })
        .collect();
    let doc = Document {
        json: serde_json::to_value(&reports).map_err(|e| Failure::Usage(e.to_string()))?,
        headers: vec![
            "name",
            "params",
            "lhs_re",
            "lhs_im",
            "rhs_re",
            "rhs_im",
            "abs_residual",
            "rel_residual",
            "tolerance",
            "passed",
            "converged",
            "error",
        ],
        rows,
    };
    let verdict = if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{failed} of {} reports exceeded tolerance", reports.len())))
    };
    Ok((doc, verdict))
}

/// `LO:HI:STEP`, inclusive of `HI` up to rounding.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("malformed grid {s:?}: expected LO:HI:STEP with STEP > 0 and LO <= HI"));
    let parts: Vec<f64> = s.split(':').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(Failure::Usage(format!("grid {s:?} has more than 100000 points")));
    }
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

pub fn fourier(a: f64, xi_grid: &str, n: Option<u32>, spec: &QuadratureSpec) -> Result<Document, Failure> {
    let xis = parse_grid(xi_grid)?;
    let n = if a < 0.0 { n.or_else(|| strip_index(a)) } else { None };
    let rows: Vec<Result<[Option<f64>; 4], klgamma::Error>> = xis
        .par_iter()
        .map(|&xi| {
            let direct = fourier_gamma_direct(a, xi, FOURIER_RADIUS, spec)?.value;
            let repr = match n {
                Some(n) => Some(fourier_gamma_repr(a, xi, n, spec)?.value),
                None if a < 0.0 => Some(fourier_gamma_repr(a, xi, 0, spec)?.value),
                None => None,
            };
            let closed = if a > 0.0 {
                Some(ramanujan_closed(a, xi)?)
            } else if a == -0.5 {
                Some(fourier_closed_half(xi))
            } else {
                None
            };
            let value = repr.unwrap_or(direct);
            let reference = closed.unwrap_or(direct);
            let residual = (value - reference).abs() / value.abs().max(reference.abs()).max(1e-300);
            Ok([Some(direct), repr, closed, Some(residual)])
        })
        .collect();
    let mut json_rows = Vec::with_capacity(rows.len());
    let mut table = Vec::with_capacity(rows.len());
    for (&xi, row) in xis.iter().zip(rows) {
        let [direct, repr, closed, residual] = row?;
        json_rows.push(json!({
            "a": a,
            "xi": xi,
            "n": n,
            "direct": direct,
            "repr": repr,
            "closed": closed,
            "residual": residual,
        }));
        table.push(vec![a.into(), xi.into(), n.into(), direct.into(), repr.into(), closed.into(), residual.into()]);
    }
    Ok(Document {
        json: Value::Array(json_rows),
        headers: vec!["a", "xi", "n", "direct", "repr", "closed", "residual"],
        rows: table,
    })
}

pub fn fp(p: f64, t: f64, y: f64, method: FpMethodArg, n: Option<u32>) -> Result<Document, Failure> {
    let method = match method {
        FpMethodArg::Single => FpMethod::SpectralSingle,
        FpMethodArg::Double => FpMethod::SpectralDouble,
        FpMethodArg::Fd => FpMethod::FiniteDifference,
    };
    let r = solve(&FpQuery { p, t, y, n, method })?;
    let corrections: Vec<String> = r.correction_terms.iter().map(f64::to_string).collect();
    Ok(Document {
        json: serde_json::to_value(&r).map_err(|e| Failure::Usage(e.to_string()))?,
        headers: vec!["p", "t", "y", "method", "value", "correction_terms", "u_truncation", "est_error"],
        rows: vec![vec![
            p.into(),
            t.into(),
            y.into(),
            serde_json::to_value(r.method).unwrap_or(Value::Null),
            r.value.into(),
            corrections.join(";").into(),
            r.u_truncation.into(),
            r.est_error.into(),
        ]],
    })
}

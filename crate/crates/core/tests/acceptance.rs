//! One PASS/FAIL line per acceptance criterion, over the builtin grid at the
//! default tolerances. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use klgamma::identities::default_spec;
use klgamma::verify::{verify_all, ParameterGrid};

struct Criterion {
    id: &'static str,
    title: &'static str,
    budget: Option<Duration>,
    pick: fn(&ParameterGrid) -> ParameterGrid,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: "1",
        title: "classical KL representation",
        budget: Some(Duration::from_secs(5)),
        pick: |g| ParameterGrid { classic: g.classic.clone(), ..Default::default() },
    },
    Criterion {
        id: "2",
        title: "extended KL representation",
        budget: Some(Duration::from_secs(60)),
        pick: |g| ParameterGrid {
            extended: g.extended.clone(),
            extended_complex: g.extended_complex.clone(),
            ..Default::default()
        },
    },
    Criterion {
        id: "3",
        title: "mixed representation",
        budget: Some(Duration::from_secs(30)),
        pick: |g| ParameterGrid {
            mixed: g.mixed.clone(),
            mixed_vs_extended: g.mixed_vs_extended.clone(),
            ..Default::default()
        },
    },
    Criterion {
        id: "4",
        title: "K-I Mellin pair",
        budget: Some(Duration::from_secs(5)),
        pick: |g| ParameterGrid { mellin: g.mellin.clone(), ..Default::default() },
    },
    Criterion {
        id: "5",
        title: "Ramanujan transform",
        budget: Some(Duration::from_secs(10)),
        pick: |g| ParameterGrid { ramanujan: g.ramanujan.clone(), ..Default::default() },
    },
    Criterion {
        id: "6",
        title: "negative-a Fourier representation",
        budget: Some(Duration::from_secs(60)),
        pick: |g| ParameterGrid {
            fourier: g.fourier.clone(),
            fourier_half: g.fourier_half.clone(),
            ..Default::default()
        },
    },
    Criterion {
        id: "7",
        title: "kernel cancellation",
        budget: None,
        pick: |g| ParameterGrid { kernel: g.kernel.clone(), ..Default::default() },
    },
    Criterion {
        id: "8",
        title: "Pfaff-Saalschutz identity (unscaled absolute residuals)",
        budget: None,
        pick: |g| ParameterGrid { saalschutz: g.saalschutz.clone(), ..Default::default() },
    },
    Criterion {
        id: "9a",
        title: "Fokker-Planck initial condition",
        budget: None,
        pick: |g| ParameterGrid { fp_initial: g.fp_initial.clone(), ..Default::default() },
    },
    Criterion {
        id: "9b",
        title: "Fokker-Planck single vs double integral",
        budget: None,
        pick: |g| ParameterGrid { fp_double: g.fp_double.clone(), ..Default::default() },
    },
    Criterion {
        id: "9c",
        title: "Fokker-Planck negative p vs finite differences",
        budget: None,
        pick: |g| ParameterGrid { fp_fd: g.fp_fd.clone(), ..Default::default() },
    },
];

const FP_BUDGET: u64 = 180;

fn main() -> ExitCode {
    let builtin = ParameterGrid::builtin();
    let spec = default_spec();
    let mut failures = 0;
    let mut fp_time = Duration::ZERO;
    for c in CRITERIA {
        let grid = (c.pick)(&builtin);
        let start = Instant::now();
        let reports = verify_all(&grid, &spec);
        let elapsed = start.elapsed();
        if c.id.starts_with('9') {
            fp_time += elapsed;
        }
        let failed: Vec<_> = reports.iter().filter(|r| !r.passed).collect();
        // Saalschutz residuals are absolute (scaled); the rest relative.
        let worst = reports
            .iter()
            .filter(|r| r.name != "kernel_slope")
            .map(|r| if r.name == "saalschutz" { r.abs_residual } else { r.rel_residual })
            .fold(0.0, f64::max);
        let in_budget = c.budget.is_none_or(|b| elapsed <= b);
        let ok = failed.is_empty() && !reports.is_empty() && in_budget;
        let budget = c.budget.map_or(String::new(), |b| format!(" (budget {} s)", b.as_secs()));
        println!(
            "{} criterion {}: {} - {}/{} reports pass, worst residual {:.2e}, {:.2} s{}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            reports.len() - failed.len(),
            reports.len(),
            worst,
            elapsed.as_secs_f64(),
            budget,
        );
        for r in failed.iter().take(5) {
            println!("    {} {:?}: rel {:.3e} tol {:.1e} {:?}", r.name, r.params, r.rel_residual, r.tolerance, r.error);
        }
        if !ok {
            failures += 1;
        }
    }
    let fp_ok = fp_time <= Duration::from_secs(FP_BUDGET);
    println!(
        "{} criterion 9: Fokker-Planck total runtime {:.2} s (budget {FP_BUDGET} s)",
        if fp_ok { "PASS" } else { "FAIL" },
        fp_time.as_secs_f64()
    );
    if !fp_ok {
        failures += 1;
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

//! Runs the enabled checks for one configuration and writes CSV and JSON output.

use crate::config::{Criterion, RunConfig};
use crate::error::{GeomError, Result};
use crate::verify::{
    convergence_sweep, convergence_verdicts, geodesic_check, geodesic_verdicts, invariance_suite,
    invariance_verdicts, large_l_limit_test, large_l_verdict, oracle_equivalence_test,
    oracle_verdict, t_tensor_scaling_test, t_tensor_verdict, GeodesicSummary, InvarianceResiduals,
    RateFit, SweepRow, Verdict,
};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "l,c0_diff,c1_diff,t_ratio_max,gap_residual,invariance_residual";

pub mod exit {
    pub const PASS: i32 = 0;
    pub const CRITERION_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

/// Process exit code for an error raised before or during a run.
pub fn exit_code_for(err: &GeomError) -> i32 {
    match err {
        GeomError::Config(_) | GeomError::UnsupportedOrder(_) => exit::CONFIG,
        _ => exit::NUMERICAL,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Fits {
    pub c0: Option<RateFit>,
    pub c1: Option<RateFit>,
    pub t: Option<RateFit>,
    pub large_l: Option<RateFit>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Details {
    pub gap_ratio: Option<f64>,
    pub t_excluded_samples: Option<usize>,
    pub geodesics: Option<GeodesicSummary>,
    pub invariance: Option<InvarianceResiduals>,
    pub large_l_series: Option<Vec<(f64, f64)>>,
    pub oracle_max_deviation: Option<f64>,
}

/// Everything a run produces. Wall-clock timings are kept out of the
/// serialized report so equal configurations give byte-identical files.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: BTreeMap<String, String>,
    pub rows: Vec<SweepRow>,
    pub fits: Fits,
    pub verdicts: Vec<Verdict>,
    pub details: Details,
    #[serde(skip)]
    pub timings: Vec<(Criterion, Duration)>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            exit::PASS
        } else {
            exit::CRITERION_FAILED
        }
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.l, r.c0_diff, r.c1_diff, r.t_ratio_max, r.gap_residual, r.invariance_residual
            ));
        }
        out
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn timed<T>(timings: &mut Vec<(Criterion, Duration)>, c: Criterion, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    timings.push((c, start.elapsed()));
    out
}

/// Executes every enabled criterion of `config`.
pub fn run_scenario(config: &RunConfig) -> Result<RunReport> {
    let sweep = &config.sweep;
    sweep.validate()?;
    let tol = &sweep.tolerances;
    let mut rows: Vec<SweepRow> = sweep.l_grid.iter().map(|&l| SweepRow::empty(l)).collect();
    let mut fits = Fits::default();
    let mut verdicts = Vec::new();
    let mut details = Details::default();
    let mut timings = Vec::new();

    for &c in &config.criteria {
        match c {
            Criterion::Convergence => {
                let rep = timed(&mut timings, c, || convergence_sweep(sweep))?;
                for (row, got) in rows.iter_mut().zip(&rep.rows) {
                    row.c0_diff = got.c0_diff;
                    row.c1_diff = got.c1_diff;
                    row.gap_residual = got.gap_residual;
                }
                verdicts.extend(convergence_verdicts(&rep, tol));
                details.gap_ratio = Some(rep.gap_ratio);
                fits.c0 = Some(rep.c0_fit);
                fits.c1 = rep.c1_fit;
            }
            Criterion::TTensor => {
                let res = timed(&mut timings, c, || t_tensor_scaling_test(sweep))?;
                for (row, (_, ratio)) in rows.iter_mut().zip(&res.ratios) {
                    row.t_ratio_max = *ratio;
                }
                verdicts.push(t_tensor_verdict(&res, tol));
                details.t_excluded_samples = Some(res.excluded);
                fits.t = res.fit;
            }
            Criterion::Geodesic => {
                let summary = timed(&mut timings, c, || geodesic_check(sweep))?;
                let transitive = sweep.scenario.orbit_invariant_coords().is_empty();
                verdicts.extend(geodesic_verdicts(&summary, tol, transitive));
                details.geodesics = Some(summary);
            }
            Criterion::Invariance => {
                let res = timed(&mut timings, c, || invariance_suite(sweep, &sweep.l_grid))?;
                for (row, (_, r)) in rows.iter_mut().zip(&res.per_l) {
                    row.invariance_residual = *r;
                }
                verdicts.extend(invariance_verdicts(&res, tol));
                details.invariance = Some(res);
            }
            Criterion::LargeL => {
                let (series, fit) =
                    timed(&mut timings, c, || large_l_limit_test(sweep, &sweep.large_l_grid))?;
                verdicts.push(large_l_verdict(&fit, tol));
                details.large_l_series = Some(series);
                fits.large_l = Some(fit);
            }
            Criterion::Oracle => {
                let dev = timed(&mut timings, c, || oracle_equivalence_test(sweep, sweep.oracle_samples))?;
                verdicts.push(oracle_verdict(dev, sweep.oracle_samples, tol));
                details.oracle_max_deviation = Some(dev);
            }
        }
    }
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        config: config.echo(),
        rows,
        fits,
        verdicts,
        details,
        timings,
    })
}

/// Fails with a configuration error unless `path` can be created.
pub fn check_writable(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if path.is_dir() || !parent.is_dir() {
        return Err(GeomError::Config(format!("output path {} is not writable", path.display())));
    }
    Ok(())
}

/// Writes the CSV table and the JSON report to the given paths.
pub fn emit_report(report: &RunReport, csv: Option<&Path>, json: Option<&Path>) -> Result<()> {
    let write = |path: &Path, text: String| {
        fs::write(path, text)
            .map_err(|e| GeomError::Config(format!("cannot write {}: {e}", path.display())))
    };
    if let Some(p) = csv {
        write(p, report.csv())?;
    }
    if let Some(p) = json {
        write(p, report.json())?;
    }
    Ok(())
}

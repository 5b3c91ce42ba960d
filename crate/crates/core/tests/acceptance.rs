//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use cheeger_core::cheeger::{limit_metric, rescaled_metric, MetricVariant};
use cheeger_core::config::{parse_scenario, Criterion, RunConfig};
use cheeger_core::exec::Execution;
use cheeger_core::linalg::max_abs;
use cheeger_core::manifold::{halton_points, KillingData, Scenario, CATALOGUE};
use cheeger_core::runner::{emit_report, run_scenario, RunReport};
use cheeger_core::tensor::t_tensor;
use cheeger_core::verify::{
    convergence_sweep, geodesic_check, invariance_suite, large_l_limit_test,
    oracle_equivalence_test, t_tensor_scaling_test, FitStatus,
};
use nalgebra::DVector;
use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

const L_GRID: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn config(scenario: &str) -> RunConfig {
    parse_scenario(&format!("scenario = {scenario}\n")).expect("default config")
}

fn within(v: f64, (lo, hi): (f64, f64)) -> bool {
    v >= lo && v <= hi
}

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        summary: summary.into(),
    }
}

fn convergence_rate() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for id in ["s2_band", "warped_s2"] {
        let cfg = config(id);
        assert_eq!(cfg.sweep.l_grid, L_GRID);
        let rep = convergence_sweep(&cfg.sweep).expect("sweep");
        let c1 = rep.c1_fit.as_ref().expect("C^1 enabled by default");
        ok &= within(rep.c0_fit.slope, (1.9, 2.1)) && within(c1.slope, (1.8, 2.2));
        parts.push(format!("{id} C0 slope {:.4}, C1 slope {:.4}", rep.c0_fit.slope, c1.slope));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    parts.push(format!("{secs:.1} s"));
    outcome(ok, parts.join("; "))
}

fn hopf_spot_value() -> Outcome {
    let s = Scenario::by_id("s3_hopf").unwrap();
    let points = halton_points(&s.sample_region(), 25);
    let mut eig_err = 0.0_f64;
    let mut limit_err = 0.0_f64;
    let mut at_tenth = 0.0;
    for x in &points {
        let g = s.metric(x);
        let kd = KillingData::with_metric(&s, x, &g).unwrap();
        let km = kd.k_m();
        for l in [0.5, 0.1, 0.05] {
            let block = km.transpose() * rescaled_metric(&kd, &g, l).unwrap() * &km;
            let eig = block[(0, 0)];
            eig_err = eig_err.max((eig - 1.0 / (1.0 + l * l)).abs());
            if l == 0.1 {
                at_tenth = eig;
            }
        }
        limit_err = limit_err.max(max_abs(&(limit_metric(&kd, &g).unwrap() - &g)));
    }
    let ok = eig_err < 1e-8 && (at_tenth - 0.9900990099_f64).abs() < 1e-10 && limit_err < 1e-10;
    outcome(
        ok,
        format!(
            "vertical eigenvalue error {eig_err:.2e}, value at l=0.1 {at_tenth:.10}, |g~ - g_M| {limit_err:.2e}"
        ),
    )
}

fn gap_bound() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for info in CATALOGUE {
        let rep = convergence_sweep(&config(info.id).sweep).expect("sweep");
        ok &= rep.gap_ratio < 3.0;
        worst = worst.max(rep.gap_ratio);
    }
    outcome(ok, format!("largest/smallest gap/l^2 over all scenarios <= {worst:.4} (< 3)"))
}

fn totally_geodesic() -> Outcome {
    let cfg = config("s2_band");
    assert_eq!(cfg.sweep.geodesic.levels, vec![0.6, 0.9, 1.2]);
    assert_eq!((cfg.sweep.geodesic.length, cfg.sweep.geodesic.step), (3.0, 1e-3));
    let sum = geodesic_check(&cfg.sweep).expect("geodesics");
    let limit = sum.limit.iter().map(|o| o.drift).fold(0.0, f64::max);
    let original = sum.original.iter().map(|o| o.drift).fold(f64::INFINITY, f64::min);
    let exits = sum.limit.iter().filter(|o| o.boundary_exit.is_some()).count();
    let ok = sum.limit.len() == 3 && sum.original.len() == 3 && exits == 0 && limit < 1e-6 && original > 1e-3;
    outcome(ok, format!("g~ drift {limit:.2e} (< 1e-6), g_M drift >= {original:.4} (> 1e-3)"))
}

fn t_scaling() -> Outcome {
    let cfg = config("s2_band");
    let res = t_tensor_scaling_test(&cfg.sweep).expect("T scaling");
    let slope = res.fit.as_ref().map(|f| f.slope).unwrap_or(f64::NAN);
    let s = &cfg.sweep.scenario;
    let x = DVector::from_vec(vec![0.0, FRAC_PI_4]);
    let kd = KillingData::at(s, &x).unwrap();
    let base = t_tensor(s, MetricVariant::Original, &kd, &x).unwrap().value;
    let spot = t_tensor(s, MetricVariant::Rescaled(0.1), &kd, &x).unwrap().value / base;
    let ok = within(slope, (1.8, 2.2)) && (spot - 0.01 / 0.51).abs() < 1e-6 && !res.vacuous;
    outcome(ok, format!("slope {slope:.4}, ratio at phi=pi/4, l=0.1: {spot:.8} (0.01/0.51 = {:.8})", 0.01 / 0.51))
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for info in CATALOGUE {
        let cfg = config(info.id);
        assert!(cfg.sweep.oracle_samples >= 100);
        worst = worst.max(oracle_equivalence_test(&cfg.sweep, cfg.sweep.oracle_samples).unwrap());
    }
    outcome(worst < 1e-10, format!("max |Ch-path - closed form| over {} scenarios: {worst:.2e}", CATALOGUE.len()))
}

fn invariance() -> Outcome {
    let mut ok = true;
    let (mut inv, mut hor, mut kap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for info in CATALOGUE {
        let cfg = config(info.id);
        assert!(cfg.sweep.invariance_elements >= 20);
        let r = invariance_suite(&cfg.sweep, &cfg.sweep.l_grid).unwrap();
        let i = r.original.max(r.cheeger).max(r.rescaled).max(r.limit);
        ok &= i < 1e-8 && r.horizontal < 1e-10 && r.kappa_horizontal < 1e-10 && r.kappa_isotropy < 1e-10;
        inv = inv.max(i);
        hor = hor.max(r.horizontal);
        kap = kap.max(r.kappa_horizontal).max(r.kappa_isotropy);
    }
    outcome(ok, format!("G-invariance {inv:.2e}, horizontal identity {hor:.2e}, kappa {kap:.2e}"))
}

fn large_l() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for id in ["s2_band", "s3_hopf", "su2_s2"] {
        let cfg = config(id);
        assert_eq!(cfg.sweep.large_l_grid, vec![10.0, 30.0, 100.0]);
        let (_, fit) = large_l_limit_test(&cfg.sweep, &cfg.sweep.large_l_grid).unwrap();
        ok &= fit.status == FitStatus::Fitted && within(fit.slope, (-2.2, -1.8));
        parts.push(format!("{id} {:.4}", fit.slope));
    }
    outcome(ok, format!("slopes {}", parts.join(", ")))
}

fn run_to_files(cfg: &RunConfig, dir: &std::path::Path, tag: &str) -> (Vec<u8>, Vec<u8>, RunReport) {
    let csv = dir.join(format!("{tag}.csv"));
    let json = dir.join(format!("{tag}.json"));
    let report = run_scenario(cfg).unwrap();
    emit_report(&report, Some(&csv), Some(&json)).unwrap();
    (std::fs::read(csv).unwrap(), std::fs::read(json).unwrap(), report)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for id in ["warped_s2", "su2_s2"] {
        let cfg = config(id);
        let (c1, j1, rep) = run_to_files(&cfg, dir.path(), "a");
        let (c2, j2, _) = run_to_files(&cfg, dir.path(), "b");
        let mut seq = cfg.clone();
        seq.sweep.exec = Execution::Sequential;
        seq.criteria = vec![Criterion::Convergence, Criterion::Invariance, Criterion::Oracle];
        let mut par = seq.clone();
        par.sweep.exec = Execution::Parallel;
        let (sc, _, _) = run_to_files(&seq, dir.path(), "s");
        let (pc, _, _) = run_to_files(&par, dir.path(), "p");
        let same = c1 == c2 && j1 == j2 && sc == pc;
        ok &= same && rep.passed();
        parts.push(format!("{id}: {} CSV bytes, {} report bytes, identical {same}", c1.len(), j1.len()));
    }
    outcome(ok, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("convergence rate", convergence_rate),
        ("Hopf spot value", hopf_spot_value),
        ("orbit gap bound", gap_bound),
        ("totally geodesic fibers", totally_geodesic),
        ("T-tensor scaling", t_scaling),
        ("oracle equivalence", oracle_equivalence),
        ("invariance suite", invariance),
        ("large-l limit", large_l),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = check();
        println!(
            "acceptance {} {name}: {} ({})",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.summary
        );
        if !o.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

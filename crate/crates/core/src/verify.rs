//! Convergence sweeps, rate fits and the geometric property checks built on them.

use crate::cheeger::{
    cheeger_metric, cheeger_metric_closed_form, kappa_matrix, limit_metric, normal_homogeneous_gap,
    rescaled_metric, AdaptedFrame, MetricVariant,
};
use crate::error::{GeomError, Result};
use crate::exec::{max_of, Execution};
use crate::lie::GroupElement;
use crate::linalg::{inner_in, max_abs, norm_in};
use crate::manifold::{pullback_metric, KillingData, SamplePlan, Scenario};
use crate::rng::{rng_for, stream};
use crate::tensor::{cp_norm, difference_field, geodesic_integrate, t_tensor, GeodesicState};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

/// `|T^{g_M}|` below this value makes a sample useless for the T-tensor ratio.
pub const T_EXCLUSION: f64 = 1e-8;
/// Norms at or below this value are treated as exact zeros in rate fits.
pub const NOISE_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub c0_slope: (f64, f64),
    pub c1_slope: (f64, f64),
    pub t_slope: (f64, f64),
    pub large_l_slope: (f64, f64),
    pub gap_ratio: f64,
    pub geodesic_drift: f64,
    pub geodesic_discrimination: f64,
    pub invariance: f64,
    pub horizontal: f64,
    pub kappa: f64,
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            c0_slope: (1.9, 2.1),
            c1_slope: (1.8, 2.2),
            t_slope: (1.8, 2.2),
            large_l_slope: (-2.2, -1.8),
            gap_ratio: 3.0,
            geodesic_drift: 1e-6,
            geodesic_discrimination: 1e-3,
            invariance: 1e-8,
            horizontal: 1e-10,
            kappa: 1e-10,
            oracle: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicParams {
    /// Values of the first orbit-invariant coordinate at which geodesics start.
    pub levels: Vec<f64>,
    pub length: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub scenario: Scenario,
    pub l_grid: Vec<f64>,
    pub large_l_grid: Vec<f64>,
    pub plan: SamplePlan,
    pub cp_orders: Vec<u32>,
    pub tolerances: Tolerances,
    pub geodesic: GeodesicParams,
    pub invariance_elements: usize,
    pub invariance_points: usize,
    pub oracle_samples: usize,
    pub exec: Execution,
}

impl SweepConfig {
    /// Documented defaults: four-point grid down to 0.025, 200 Halton points,
    /// 50 directions per point, seed 42.
    pub fn defaults(scenario: Scenario) -> Self {
        let plan = SamplePlan::halton(&scenario.sample_region(), 200, 50, 42);
        let levels = scenario.default_geodesic_levels();
        SweepConfig {
            scenario,
            l_grid: vec![0.2, 0.1, 0.05, 0.025],
            large_l_grid: vec![10.0, 30.0, 100.0],
            plan,
            cp_orders: vec![0, 1],
            tolerances: Tolerances::default(),
            geodesic: GeodesicParams {
                levels,
                length: 3.0,
                step: 1e-3,
            },
            invariance_elements: 20,
            invariance_points: 10,
            oracle_samples: 100,
            exec: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(GeomError::Config(m));
        if self.l_grid.len() < 4 {
            return cfg(format!("l_grid needs at least 4 values, got {}", self.l_grid.len()));
        }
        if self.l_grid.windows(2).any(|w| !(w[1] < w[0])) {
            return cfg("l_grid must be strictly decreasing".into());
        }
        if self.l_grid.iter().any(|&l| !(l >= 1e-3) || !l.is_finite()) {
            return cfg("l_grid values must be at least 1e-3".into());
        }
        if self.large_l_grid.len() < 2 || self.large_l_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return cfg("large_l_grid needs at least 2 strictly increasing values".into());
        }
        if self.large_l_grid[0] <= 0.0 || !self.large_l_grid.iter().all(|l| l.is_finite()) {
            return cfg("large_l_grid values must be positive".into());
        }
        if let Some(&p) = self.cp_orders.iter().find(|&&p| p > 1) {
            return Err(GeomError::UnsupportedOrder(p));
        }
        if !self.cp_orders.contains(&0) {
            return cfg("cp.orders must include 0".into());
        }
        if self.plan.points.is_empty() {
            return cfg("samples.points must be positive".into());
        }
        if self.invariance_elements < 20 {
            return cfg("invariance.group_elements must be at least 20".into());
        }
        if self.invariance_points == 0 || self.plan.directions == 0 {
            return cfg("invariance.points and samples.directions must be positive".into());
        }
        if self.oracle_samples < 100 {
            return cfg("oracle.samples must be at least 100".into());
        }
        let g = &self.geodesic;
        if !(g.step > 0.0 && g.length > 0.0 && g.step <= g.length) {
            return cfg("geodesic.step and geodesic.length must be positive with step <= length".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Every norm was at or below the noise floor.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest deviation of the log data from the fitted line.
    pub residual: f64,
    pub status: FitStatus,
    /// Points dropped for being at or below the noise floor.
    pub excluded: usize,
}

/// Least-squares fit of `log norm = slope * log l + intercept`.
pub fn rate_fit(series: &[(f64, f64)]) -> RateFit {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, v)| *v > NOISE_FLOOR)
        .map(|&(l, v)| (l.ln(), v.ln()))
        .collect();
    let excluded = series.len() - pts.len();
    if pts.len() < 2 {
        return RateFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            residual: f64::NAN,
            status: FitStatus::Exact,
            excluded,
        };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    RateFit {
        slope,
        intercept,
        residual,
        status: FitStatus::Fitted,
        excluded,
    }
}

/// Per-`l` measurements. Quantities that were not computed are NaN.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub l: f64,
    pub c0_diff: f64,
    pub c1_diff: f64,
    pub t_ratio_max: f64,
    pub gap_residual: f64,
    pub invariance_residual: f64,
}

impl SweepRow {
    pub fn empty(l: f64) -> Self {
        SweepRow {
            l,
            c0_diff: f64::NAN,
            c1_diff: f64::NAN,
            t_ratio_max: f64::NAN,
            gap_residual: f64::NAN,
            invariance_residual: f64::NAN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub c0_fit: RateFit,
    pub c1_fit: Option<RateFit>,
    /// `max gap / l^2` divided by `min gap / l^2` over the grid.
    pub gap_ratio: f64,
}

fn in_window(v: f64, (lo, hi): (f64, f64)) -> bool {
    v >= lo && v <= hi
}

fn window(w: (f64, f64)) -> String {
    format!("[{}, {}]", w.0, w.1)
}

/// `|g~_l - g~|` in `C^0` (and `C^1` if requested) plus the orbit gap, per `l`.
pub fn convergence_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let s = &config.scenario;
    let exec = config.exec;
    let mut rows = Vec::with_capacity(config.l_grid.len());
    for &l in &config.l_grid {
        let diff = difference_field(s, MetricVariant::Rescaled(l), MetricVariant::Limit);
        let with_l = |e: GeomError| e.with_l(l);
        let c0 = cp_norm(s, &diff, 0, &config.plan, exec).map_err(with_l)?;
        let c1 = if config.cp_orders.contains(&1) {
            cp_norm(s, &diff, 1, &config.plan, exec).map_err(with_l)?
        } else {
            f64::NAN
        };
        let gaps = exec.try_map(&config.plan.points, |x| -> Result<f64> {
            let g = s.metric(x);
            let kd = KillingData::with_metric(s, x, &g)?;
            Ok(normal_homogeneous_gap(&kd, &rescaled_metric(&kd, &g, l)?))
        });
        let mut row = SweepRow::empty(l);
        row.c0_diff = c0;
        row.c1_diff = c1;
        row.gap_residual = max_of(&gaps.map_err(with_l)?);
        rows.push(row);
    }
    let c0_fit = rate_fit(&rows.iter().map(|r| (r.l, r.c0_diff)).collect::<Vec<_>>());
    let c1_fit = config
        .cp_orders
        .contains(&1)
        .then(|| rate_fit(&rows.iter().map(|r| (r.l, r.c1_diff)).collect::<Vec<_>>()));
    let scaled: Vec<f64> = rows.iter().map(|r| r.gap_residual / (r.l * r.l)).collect();
    let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let gap_ratio = if hi <= NOISE_FLOOR { 1.0 } else { hi / lo };
    Ok(SweepReport {
        rows,
        c0_fit,
        c1_fit,
        gap_ratio,
    })
}

pub fn convergence_verdicts(report: &SweepReport, tol: &Tolerances) -> Vec<Verdict> {
    let fit_verdict = |name: &str, fit: &RateFit, w: (f64, f64)| {
        let exact = fit.status == FitStatus::Exact;
        Verdict {
            criterion: name.into(),
            passed: exact || in_window(fit.slope, w),
            measured: fit.slope,
            threshold: window(w),
            detail: if exact {
                "exact: every difference is below the noise floor".into()
            } else {
                format!("fit residual {:e}, {} points excluded", fit.residual, fit.excluded)
            },
        }
    };
    let mut out = vec![fit_verdict("convergence.c0_slope", &report.c0_fit, tol.c0_slope)];
    if let Some(fit) = &report.c1_fit {
        out.push(fit_verdict("convergence.c1_slope", fit, tol.c1_slope));
    }
    out.push(Verdict {
        criterion: "convergence.gap_ratio".into(),
        passed: report.gap_ratio < tol.gap_ratio,
        measured: report.gap_ratio,
        threshold: format!("< {}", tol.gap_ratio),
        detail: "largest over smallest gap / l^2 across the grid".into(),
    });
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TScaling {
    /// Per `l`: max ratio `|T^{g~_l}| / |T^{g_M}|`, NaN when vacuous.
    pub ratios: Vec<(f64, f64)>,
    pub fit: Option<RateFit>,
    pub excluded: usize,
    pub vacuous: bool,
}

/// Fitted decay of `max_x |T^{g~_l}| / |T^{g_M}|` over the `l` grid.
pub fn t_tensor_scaling_test(config: &SweepConfig) -> Result<TScaling> {
    let s = &config.scenario;
    let base = config.exec.try_map(&config.plan.points, |x| -> Result<(KillingData, f64)> {
        let kd = KillingData::at(s, x)?;
        let t = t_tensor(s, MetricVariant::Original, &kd, x)?.value;
        Ok((kd, t))
    })?;
    let kept: Vec<(usize, f64)> = base
        .iter()
        .enumerate()
        .filter(|(_, (_, t))| *t >= T_EXCLUSION)
        .map(|(i, (_, t))| (i, *t))
        .collect();
    let excluded = base.len() - kept.len();
    if kept.is_empty() {
        return Ok(TScaling {
            ratios: config.l_grid.iter().map(|&l| (l, f64::NAN)).collect(),
            fit: None,
            excluded,
            vacuous: true,
        });
    }
    let mut ratios = Vec::new();
    for &l in &config.l_grid {
        let per = config.exec.try_map(&kept, |&(i, t0)| -> Result<f64> {
            let x = &config.plan.points[i];
            let t = t_tensor(s, MetricVariant::Rescaled(l), &base[i].0, x)?.value;
            Ok(t / t0)
        });
        ratios.push((l, max_of(&per.map_err(|e| e.with_l(l))?)));
    }
    Ok(TScaling {
        fit: Some(rate_fit(&ratios)),
        ratios,
        excluded,
        vacuous: false,
    })
}

pub fn t_tensor_verdict(result: &TScaling, tol: &Tolerances) -> Verdict {
    match &result.fit {
        None => Verdict {
            criterion: "t_tensor.slope".into(),
            passed: true,
            measured: f64::NAN,
            threshold: window(tol.t_slope),
            detail: format!("vacuous: |T| of g_M vanishes at all {} samples", result.excluded),
        },
        Some(fit) => Verdict {
            criterion: "t_tensor.slope".into(),
            passed: fit.status == FitStatus::Exact || in_window(fit.slope, tol.t_slope),
            measured: fit.slope,
            threshold: window(tol.t_slope),
            detail: format!("{} samples excluded, fit residual {:e}", result.excluded, fit.residual),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicOutcome {
    pub level: f64,
    pub drift: f64,
    /// Arc length at which the geodesic left the chart, if it did.
    pub boundary_exit: Option<f64>,
}

/// Orbit drift of geodesics with vertical initial velocity.
///
/// Orbits are coordinate level sets, so drift is the largest deviation of the
/// orbit-invariant coordinates from their start values.
pub fn totally_geodesic_test(
    scenario: &Scenario,
    variant: MetricVariant,
    levels: &[f64],
    length: f64,
    step: f64,
    exec: Execution,
) -> Result<Vec<GeodesicOutcome>> {
    let invariant = scenario.orbit_invariant_coords();
    let starts: Vec<(f64, DVector<f64>)> = levels
        .iter()
        .filter_map(|&lv| scenario.geodesic_start(lv).map(|x| (lv, x)))
        .collect();
    exec.try_map(&starts, |(level, x)| -> Result<GeodesicOutcome> {
        let g_m = scenario.metric(x);
        let kd = KillingData::with_metric(scenario, x, &g_m)?;
        let h = variant.eval_with(&kd, &g_m)?;
        let v = kd.k_m().column(0).into_owned();
        let frame = AdaptedFrame::new(&kd, &g_m)?;
        let leak = frame
            .horizontal()
            .column_iter()
            .map(|z| inner_in(&g_m, &z.into_owned(), &v).abs())
            .fold(0.0, f64::max);
        if leak > 1e-10 * norm_in(&g_m, &v) {
            return Err(GeomError::numerical(x.as_slice(), "initial velocity is not vertical"));
        }
        let velocity = &v / norm_in(&h, &v);
        let initial = GeodesicState {
            position: x.clone(),
            velocity,
            arc_length: 0.0,
        };
        let tr = geodesic_integrate(scenario, variant, initial, length, step)?;
        let drift = tr
            .states
            .iter()
            .flat_map(|st| invariant.iter().map(move |&i| (st.position[i] - x[i]).abs()))
            .fold(0.0, f64::max);
        Ok(GeodesicOutcome {
            level: *level,
            drift,
            boundary_exit: tr.boundary_exit,
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicSummary {
    pub limit: Vec<GeodesicOutcome>,
    /// Runs under `g_M` at starts where its T-tensor does not vanish.
    pub original: Vec<GeodesicOutcome>,
}

pub fn geodesic_check(config: &SweepConfig) -> Result<GeodesicSummary> {
    let s = &config.scenario;
    let p = &config.geodesic;
    let limit = totally_geodesic_test(s, MetricVariant::Limit, &p.levels, p.length, p.step, config.exec)?;
    let mut curved = Vec::new();
    for &lv in &p.levels {
        if let Some(x) = s.geodesic_start(lv) {
            let kd = KillingData::at(s, &x)?;
            if t_tensor(s, MetricVariant::Original, &kd, &x)?.value > 1e-6 {
                curved.push(lv);
            }
        }
    }
    let original =
        totally_geodesic_test(s, MetricVariant::Original, &curved, p.length, p.step, config.exec)?;
    Ok(GeodesicSummary { limit, original })
}

pub fn geodesic_verdicts(summary: &GeodesicSummary, tol: &Tolerances, transitive: bool) -> Vec<Verdict> {
    let conclusive: Vec<&GeodesicOutcome> =
        summary.limit.iter().filter(|o| o.boundary_exit.is_none()).collect();
    let drift = conclusive.iter().map(|o| o.drift).fold(0.0, f64::max);
    let inconclusive = summary.limit.len() - conclusive.len();
    let mut out = vec![if transitive || summary.limit.is_empty() {
        Verdict {
            criterion: "geodesic.limit_drift".into(),
            passed: true,
            measured: f64::NAN,
            threshold: format!("< {:e}", tol.geodesic_drift),
            detail: "vacuous: the action is transitive, the single orbit is all of M".into(),
        }
    } else {
        Verdict {
            criterion: "geodesic.limit_drift".into(),
            passed: !conclusive.is_empty() && drift < tol.geodesic_drift,
            measured: drift,
            threshold: format!("< {:e}", tol.geodesic_drift),
            detail: format!("{} starts, {inconclusive} left the chart early", summary.limit.len()),
        }
    }];
    if !summary.original.is_empty() {
        let min_drift = summary.original.iter().map(|o| o.drift).fold(f64::INFINITY, f64::min);
        out.push(Verdict {
            criterion: "geodesic.original_drift".into(),
            passed: min_drift > tol.geodesic_discrimination,
            measured: min_drift,
            threshold: format!("> {:e}", tol.geodesic_discrimination),
            detail: "smallest g_M drift over starts with non-vanishing T".into(),
        });
    }
    out
}

/// Residuals of the invariance suite; `per_l` holds the worst of `g_l` and `g~_l` at each `l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceResiduals {
    pub original: f64,
    pub cheeger: f64,
    pub rescaled: f64,
    pub limit: f64,
    pub per_l: Vec<(f64, f64)>,
    pub horizontal: f64,
    pub kappa_horizontal: f64,
    pub kappa_isotropy: f64,
    pub group_elements: usize,
}

fn invariance_points(config: &SweepConfig) -> Vec<DVector<f64>> {
    let s = &config.scenario;
    let r = s.sample_region();
    (0..config.invariance_points)
        .map(|i| {
            let mut rng = rng_for(config.plan.seed, stream::INVARIANCE_POINTS, i as u64);
            DVector::from_fn(s.dim(), |j, _| rng.random_range(r.lo[j]..r.hi[j]))
        })
        .collect()
}

/// Group element `i` for point `j`: a shared draw, redrawn per point while the
/// image of the point leaves the sample region.
fn element_for(config: &SweepConfig, i: usize, j: usize, x: &DVector<f64>) -> Result<GroupElement> {
    let s = &config.scenario;
    let region = s.sample_region();
    let inside = |y: &DVector<f64>| {
        s.chart().contains_with(y, 0.0)
            && s.chart().coords().iter().enumerate().all(|(k, c)| {
                c.periodic || (y[k] >= region.lo[k] && y[k] <= region.hi[k])
            })
    };
    let seed = config.plan.seed;
    for attempt in 0..1000u64 {
        let index = if attempt == 0 {
            i as u64
        } else {
            ((i as u64) << 40) | ((j as u64) << 16) | attempt
        };
        let mut rng = rng_for(seed, stream::GROUP_ELEMENTS, index);
        let g = s.group().random_element(&mut rng);
        if inside(&s.act(&g, x)) {
            return Ok(g);
        }
    }
    Err(GeomError::numerical(x.as_slice(), "no group element keeps the point in the chart"))
}

/// `G`-invariance of every variant, the horizontal-block identity, and the
/// defining properties of `kappa`, all as maximal absolute residuals.
pub fn invariance_suite(config: &SweepConfig, l_list: &[f64]) -> Result<InvarianceResiduals> {
    let s = &config.scenario;
    let points = invariance_points(config);
    let n_el = config.invariance_elements;
    struct PointResult {
        original: f64,
        cheeger: Vec<f64>,
        rescaled: Vec<f64>,
        limit: f64,
        horizontal: f64,
        kappa_h: f64,
        kappa_i: f64,
    }
    let indexed: Vec<(usize, DVector<f64>)> = points.into_iter().enumerate().collect();
    let results = config.exec.try_map(&indexed, |(j, x)| -> Result<PointResult> {
        let residual = |g: &GroupElement, v: MetricVariant| -> Result<f64> {
            let pulled = pullback_metric(s, g, x, |y| v.eval(s, y))?;
            Ok(max_abs(&(pulled - v.eval(s, x)?)))
        };
        let mut r = PointResult {
            original: 0.0,
            cheeger: vec![0.0; l_list.len()],
            rescaled: vec![0.0; l_list.len()],
            limit: 0.0,
            horizontal: 0.0,
            kappa_h: 0.0,
            kappa_i: 0.0,
        };
        for i in 0..n_el {
            let g = element_for(config, i, *j, x)?;
            r.original = r.original.max(residual(&g, MetricVariant::Original)?);
            r.limit = r.limit.max(residual(&g, MetricVariant::Limit)?);
            for (k, &l) in l_list.iter().enumerate() {
                let e = |err: GeomError| err.with_l(l);
                r.cheeger[k] = r.cheeger[k].max(residual(&g, MetricVariant::Cheeger(l)).map_err(e)?);
                r.rescaled[k] = r.rescaled[k].max(residual(&g, MetricVariant::Rescaled(l)).map_err(e)?);
            }
        }

        let g_m = s.metric(x);
        let kd = KillingData::with_metric(s, x, &g_m)?;
        let frame = AdaptedFrame::new(&kd, &g_m)?;
        let z = frame.horizontal();
        let dirs = config.plan.unit_directions(*j, &g_m);
        let mut others = vec![limit_metric(&kd, &g_m)?];
        for &l in l_list {
            others.push(cheeger_metric(&kd, &g_m, l)?);
            others.push(rescaled_metric(&kd, &g_m, l)?);
        }
        for h in &others {
            let dz = z.transpose() * (h - &g_m);
            for w in &dirs {
                r.horizontal = r.horizontal.max((&dz * w).amax());
            }
        }
        let kap = kappa_matrix(&kd, &g_m)?;
        for v in &dirs {
            let kv = &kap * v;
            // (kappa v, v) is orthogonal to every (-k, K k) for l = 1
            let lhs = -(kd.k.transpose() * &g_m * v) + &kv;
            r.kappa_h = r.kappa_h.max(lhs.amax());
            let iso = kd.isotropy_basis.transpose() * &kv;
            r.kappa_i = r.kappa_i.max(if iso.is_empty() { 0.0 } else { iso.amax() });
        }
        Ok(r)
    })?;
    let fold = |f: &dyn Fn(&PointResult) -> f64| results.iter().map(f).fold(0.0, f64::max);
    let per_l = l_list
        .iter()
        .enumerate()
        .map(|(k, &l)| (l, fold(&|r| r.cheeger[k].max(r.rescaled[k]))))
        .collect();
    Ok(InvarianceResiduals {
        original: fold(&|r| r.original),
        cheeger: fold(&|r| r.cheeger.iter().copied().fold(0.0, f64::max)),
        rescaled: fold(&|r| r.rescaled.iter().copied().fold(0.0, f64::max)),
        limit: fold(&|r| r.limit),
        per_l,
        horizontal: fold(&|r| r.horizontal),
        kappa_horizontal: fold(&|r| r.kappa_h),
        kappa_isotropy: fold(&|r| r.kappa_i),
        group_elements: n_el,
    })
}

pub fn invariance_verdicts(res: &InvarianceResiduals, tol: &Tolerances) -> Vec<Verdict> {
    let v = |name: &str, measured: f64, t: f64| Verdict {
        criterion: format!("invariance.{name}"),
        passed: measured < t,
        measured,
        threshold: format!("< {t:e}"),
        detail: String::new(),
    };
    vec![
        v("original", res.original, tol.invariance),
        v("cheeger", res.cheeger, tol.invariance),
        v("rescaled", res.rescaled, tol.invariance),
        v("limit", res.limit, tol.invariance),
        v("horizontal_identity", res.horizontal, tol.horizontal),
        v("kappa_horizontal", res.kappa_horizontal, tol.kappa),
        v("kappa_isotropy", res.kappa_isotropy, tol.kappa),
    ]
}

/// Fitted decay of `|g_l - g_M|_{C^0}` for large `l`.
pub fn large_l_limit_test(config: &SweepConfig, l_grid_large: &[f64]) -> Result<(Vec<(f64, f64)>, RateFit)> {
    let s = &config.scenario;
    let mut series = Vec::new();
    for &l in l_grid_large {
        let d = difference_field(s, MetricVariant::Cheeger(l), MetricVariant::Original);
        series.push((l, cp_norm(s, &d, 0, &config.plan, config.exec).map_err(|e| e.with_l(l))?));
    }
    let fit = rate_fit(&series);
    Ok((series, fit))
}

pub fn large_l_verdict(fit: &RateFit, tol: &Tolerances) -> Verdict {
    Verdict {
        criterion: "large_l.slope".into(),
        passed: fit.status == FitStatus::Exact || in_window(fit.slope, tol.large_l_slope),
        measured: fit.slope,
        threshold: window(tol.large_l_slope),
        detail: format!("fit residual {:e}", fit.residual),
    }
}

/// Largest entrywise difference between the two constructions of `g_l` over
/// seeded samples with `l` log-uniform in `[0.05, 5]`.
pub fn oracle_equivalence_test(config: &SweepConfig, samples: usize) -> Result<f64> {
    let s = &config.scenario;
    let r = s.sample_region();
    let idx: Vec<u64> = (0..samples as u64).collect();
    let devs = config.exec.try_map(&idx, |&i| -> Result<f64> {
        let mut rng = rng_for(config.plan.seed, stream::ORACLE, i);
        let x = DVector::from_fn(s.dim(), |j, _| rng.random_range(r.lo[j]..r.hi[j]));
        let l = (rng.random_range(0.05f64.ln()..5.0f64.ln())).exp();
        let g = s.metric(&x);
        let kd = KillingData::with_metric(s, &x, &g)?;
        let a = cheeger_metric(&kd, &g, l)?;
        let b = cheeger_metric_closed_form(&kd, &g, l)?;
        Ok(max_abs(&(a - b)))
    })?;
    Ok(max_of(&devs))
}

pub fn oracle_verdict(deviation: f64, samples: usize, tol: &Tolerances) -> Verdict {
    Verdict {
        criterion: "oracle.max_deviation".into(),
        passed: deviation < tol.oracle,
        measured: deviation,
        threshold: format!("< {:e}", tol.oracle),
        detail: format!("{samples} seeded samples"),
    }
}

/// The matrix `K_m^T h K_m` of a metric on orbit directions, in `m_basis` coordinates.
pub fn orbit_block(data: &KillingData, h: &DMatrix<f64>) -> DMatrix<f64> {
    let km = data.k_m();
    km.transpose() * h * km
}

//! Line-oriented `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! scenario = warped_s2
//! scenario.warp_amplitude = 0.3
//! l_grid = 0.2, 0.1, 0.05, 0.025
//! samples.points = 200
//! ```
//!
//! Unknown and repeated keys are rejected. Every key has a default except `scenario`.

use crate::error::{GeomError, Result};
use crate::exec::Execution;
use crate::manifold::{scenario_info, DerivativeSource, Numerics, SamplePlan, Scenario};
use crate::verify::{GeodesicParams, SweepConfig, Tolerances};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Criterion {
    Convergence,
    TTensor,
    Geodesic,
    Invariance,
    LargeL,
    Oracle,
}

impl Criterion {
    pub const ALL: [Criterion; 6] = [
        Criterion::Convergence,
        Criterion::TTensor,
        Criterion::Geodesic,
        Criterion::Invariance,
        Criterion::LargeL,
        Criterion::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Convergence => "convergence",
            Criterion::TTensor => "t_tensor",
            Criterion::Geodesic => "geodesic",
            Criterion::Invariance => "invariance",
            Criterion::LargeL => "large_l",
            Criterion::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Criterion::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Keys accepted besides `scenario.<param>`, with their defaults as config text.
pub const KEYS: &[(&str, &str)] = &[
    ("l_grid", "0.2, 0.1, 0.05, 0.025"),
    ("large_l_grid", "10, 30, 100"),
    ("samples.points", "200"),
    ("samples.directions", "50"),
    ("seed", "42"),
    ("cp.orders", "0, 1"),
    ("fd.h", "1e-4"),
    ("fd.h_act", "1e-5"),
    ("fd.source", "analytic"),
    ("geodesic.levels", "scenario default"),
    ("geodesic.length", "3"),
    ("geodesic.step", "1e-3"),
    ("invariance.group_elements", "20"),
    ("invariance.points", "10"),
    ("oracle.samples", "100"),
    ("criteria", "convergence, t_tensor, geodesic, invariance, large_l, oracle"),
    ("exec.mode", "parallel"),
    ("output.csv", "none"),
    ("output.report", "none"),
    ("tol.c0_slope", "1.9, 2.1"),
    ("tol.c1_slope", "1.8, 2.2"),
    ("tol.t_slope", "1.8, 2.2"),
    ("tol.large_l_slope", "-2.2, -1.8"),
    ("tol.gap_ratio", "3"),
    ("tol.geodesic_drift", "1e-6"),
    ("tol.geodesic_discrimination", "1e-3"),
    ("tol.invariance", "1e-8"),
    ("tol.horizontal", "1e-10"),
    ("tol.kappa", "1e-10"),
    ("tol.oracle", "1e-10"),
];

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    /// 0 for values set outside the file.
    line: usize,
}

/// Parsed but not yet validated key/value pairs.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

fn known_key(key: &str) -> bool {
    key == "scenario" || key.starts_with("scenario.") || KEYS.iter().any(|(k, _)| *k == key)
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                GeomError::Config(format!("line {line_no}: expected 'key = value', got '{content}'"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(GeomError::Config(format!("line {line_no}: empty key or value")));
            }
            if !known_key(key) {
                return Err(GeomError::Config(format!("line {line_no}: unknown key '{key}'")));
            }
            if let Some(prev) = raw.entries.get(key) {
                return Err(GeomError::Config(format!(
                    "line {line_no}: key '{key}' already set on line {}",
                    prev.line
                )));
            }
            raw.entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line: line_no,
                },
            );
        }
        Ok(raw)
    }

    /// Sets or replaces a key (used for command-line overrides).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !known_key(key) {
            return Err(GeomError::Config(format!("unknown key '{key}'")));
        }
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line: 0,
            },
        );
        Ok(())
    }

    pub fn build(&self) -> Result<RunConfig> {
        RunConfig::from_raw(self)
    }

    fn context(&self, key: &str) -> String {
        match self.entries.get(key) {
            Some(Entry { line: 0, .. }) => format!("override '{key}'"),
            Some(e) => format!("line {}: '{key}'", e.line),
            None => format!("'{key}'"),
        }
    }

    fn err(&self, key: &str, msg: impl fmt::Display) -> GeomError {
        GeomError::Config(format!("{}: {msg}", self.context(key)))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn float(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_float(v).ok_or_else(|| self.err(key, format!("'{v}' is not a number"))),
        }
    }

    fn floats(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => split(v)
                .map(|s| parse_float(s).ok_or_else(|| self.err(key, format!("'{s}' is not a number"))))
                .collect(),
        }
    }

    fn pair(&self, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
        let v = self.floats(key, &[default.0, default.1])?;
        match v.as_slice() {
            [a, b] if a <= b => Ok((*a, *b)),
            _ => Err(self.err(key, "expected 'low, high' with low <= high")),
        }
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| self.err(key, format!("'{v}' is not a non-negative integer"))),
        }
    }
}

fn split(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim)
}

fn parse_float(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub sweep: SweepConfig,
    pub criteria: Vec<Criterion>,
    pub out_csv: Option<PathBuf>,
    pub out_report: Option<PathBuf>,
}

impl RunConfig {
    fn from_raw(raw: &RawConfig) -> Result<Self> {
        let id = raw
            .get("scenario")
            .ok_or_else(|| GeomError::Config("missing required key 'scenario'".into()))?;
        let info = scenario_info(id).ok_or_else(|| raw.err("scenario", format!("unknown scenario id '{id}'")))?;
        let mut params = BTreeMap::new();
        for (key, entry) in &raw.entries {
            if let Some(name) = key.strip_prefix("scenario.") {
                if !info.params.iter().any(|p| p.name == name) {
                    return Err(raw.err(key, format!("scenario '{id}' has no parameter '{name}'")));
                }
                let v = parse_float(&entry.value)
                    .ok_or_else(|| raw.err(key, format!("'{}' is not a number", entry.value)))?;
                params.insert(name.to_string(), v);
            }
        }
        let source = match raw.get("fd.source").unwrap_or("analytic") {
            "analytic" => DerivativeSource::PreferAnalytic,
            "fd" => DerivativeSource::FiniteDifference,
            other => return Err(raw.err("fd.source", format!("expected 'analytic' or 'fd', got '{other}'"))),
        };
        let numerics = Numerics {
            h_act: raw.float("fd.h_act", 1e-5)?,
            h_fd: raw.float("fd.h", 1e-4)?,
            source,
            ..Numerics::default()
        };
        if !(numerics.h_act > 0.0 && numerics.h_fd > 0.0) {
            return Err(GeomError::Config("finite-difference steps must be positive".into()));
        }
        let scenario = Scenario::new(id, &params)?.with_numerics(numerics);
        let mut sweep = SweepConfig::defaults(scenario);

        sweep.l_grid = raw.floats("l_grid", &sweep.l_grid)?;
        sweep.large_l_grid = raw.floats("large_l_grid", &sweep.large_l_grid)?;
        let points = raw.count("samples.points", 200)?;
        let directions = raw.count("samples.directions", 50)?;
        let seed = match raw.get("seed") {
            None => 42,
            Some(v) => v.parse::<u64>().map_err(|_| raw.err("seed", format!("'{v}' is not a u64")))?,
        };
        sweep.plan = SamplePlan::halton(&sweep.scenario.sample_region(), points, directions, seed);
        sweep.cp_orders = match raw.get("cp.orders") {
            None => vec![0, 1],
            Some(v) => split(v)
                .map(|s| s.parse::<u32>().map_err(|_| raw.err("cp.orders", format!("'{s}' is not an order"))))
                .collect::<Result<_>>()?,
        };
        let default_levels = sweep.geodesic.levels.clone();
        sweep.geodesic = GeodesicParams {
            levels: match raw.get("geodesic.levels") {
                Some("none") => Vec::new(),
                _ => raw.floats("geodesic.levels", &default_levels)?,
            },
            length: raw.float("geodesic.length", 3.0)?,
            step: raw.float("geodesic.step", 1e-3)?,
        };
        for &lv in &sweep.geodesic.levels {
            if let Some(x) = sweep.scenario.geodesic_start(lv) {
                if !sweep.sample_region_contains(&x) {
                    return Err(raw.err("geodesic.levels", format!("level {lv} is outside the sample region")));
                }
            }
        }
        sweep.invariance_elements = raw.count("invariance.group_elements", 20)?;
        sweep.invariance_points = raw.count("invariance.points", 10)?;
        sweep.oracle_samples = raw.count("oracle.samples", 100)?;
        let d = Tolerances::default();
        sweep.tolerances = Tolerances {
            c0_slope: raw.pair("tol.c0_slope", d.c0_slope)?,
            c1_slope: raw.pair("tol.c1_slope", d.c1_slope)?,
            t_slope: raw.pair("tol.t_slope", d.t_slope)?,
            large_l_slope: raw.pair("tol.large_l_slope", d.large_l_slope)?,
            gap_ratio: raw.float("tol.gap_ratio", d.gap_ratio)?,
            geodesic_drift: raw.float("tol.geodesic_drift", d.geodesic_drift)?,
            geodesic_discrimination: raw.float("tol.geodesic_discrimination", d.geodesic_discrimination)?,
            invariance: raw.float("tol.invariance", d.invariance)?,
            horizontal: raw.float("tol.horizontal", d.horizontal)?,
            kappa: raw.float("tol.kappa", d.kappa)?,
            oracle: raw.float("tol.oracle", d.oracle)?,
        };
        sweep.exec = match raw.get("exec.mode") {
            None => Execution::default(),
            Some(v) => Execution::parse(v)
                .ok_or_else(|| raw.err("exec.mode", format!("expected 'parallel' or 'sequential', got '{v}'")))?,
        };
        sweep.validate().map_err(|e| match e {
            GeomError::Config(m) => GeomError::Config(format!("{id}: {m}")),
            other => other,
        })?;

        let criteria = match raw.get("criteria") {
            None => Criterion::ALL.to_vec(),
            Some(v) => parse_criteria(v).map_err(|m| raw.err("criteria", m))?,
        };
        let path = |key: &str| raw.get(key).map(PathBuf::from);
        Ok(RunConfig {
            sweep,
            criteria,
            out_csv: path("output.csv"),
            out_report: path("output.report"),
        })
    }

    /// Every effective parameter, explicit or defaulted, as printable text.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let s = &self.sweep;
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let pair = |p: (f64, f64)| format!("{}, {}", p.0, p.1);
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("scenario", s.scenario.id().to_string());
        for (k, v) in s.scenario.params() {
            put(&format!("scenario.{k}"), v.to_string());
        }
        put("l_grid", list(&s.l_grid));
        put("large_l_grid", list(&s.large_l_grid));
        put("samples.points", s.plan.points.len().to_string());
        put("samples.directions", s.plan.directions.to_string());
        put("seed", s.plan.seed.to_string());
        put(
            "cp.orders",
            s.cp_orders.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "),
        );
        let n = &s.scenario.numerics;
        put("fd.h", n.h_fd.to_string());
        put("fd.h_act", n.h_act.to_string());
        put(
            "fd.source",
            match n.source {
                DerivativeSource::PreferAnalytic => "analytic",
                DerivativeSource::FiniteDifference => "fd",
            }
            .to_string(),
        );
        let levels = &s.geodesic.levels;
        put("geodesic.levels", if levels.is_empty() { "none".into() } else { list(levels) });
        put("geodesic.length", s.geodesic.length.to_string());
        put("geodesic.step", s.geodesic.step.to_string());
        put("invariance.group_elements", s.invariance_elements.to_string());
        put("invariance.points", s.invariance_points.to_string());
        put("oracle.samples", s.oracle_samples.to_string());
        put(
            "criteria",
            self.criteria.iter().map(|c| c.name()).collect::<Vec<_>>().join(", "),
        );
        put("exec.mode", s.exec.as_str().to_string());
        let t = &s.tolerances;
        put("tol.c0_slope", pair(t.c0_slope));
        put("tol.c1_slope", pair(t.c1_slope));
        put("tol.t_slope", pair(t.t_slope));
        put("tol.large_l_slope", pair(t.large_l_slope));
        put("tol.gap_ratio", t.gap_ratio.to_string());
        put("tol.geodesic_drift", t.geodesic_drift.to_string());
        put("tol.geodesic_discrimination", t.geodesic_discrimination.to_string());
        put("tol.invariance", t.invariance.to_string());
        put("tol.horizontal", t.horizontal.to_string());
        put("tol.kappa", t.kappa.to_string());
        put("tol.oracle", t.oracle.to_string());
        m
    }

    pub fn enabled(&self, c: Criterion) -> bool {
        self.criteria.contains(&c)
    }
}

impl SweepConfig {
    fn sample_region_contains(&self, x: &nalgebra::DVector<f64>) -> bool {
        let r = self.scenario.sample_region();
        self.scenario
            .chart()
            .coords()
            .iter()
            .enumerate()
            .all(|(i, c)| c.periodic || (x[i] >= r.lo[i] && x[i] <= r.hi[i]))
    }
}

/// Parses a comma-separated criterion list such as `convergence, oracle`.
pub fn parse_criteria(v: &str) -> std::result::Result<Vec<Criterion>, String> {
    let mut out = Vec::new();
    for name in split(v) {
        let c = Criterion::parse(name).ok_or_else(|| format!("unknown criterion '{name}'"))?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err("no criteria selected".into());
    }
    out.sort();
    Ok(out)
}

/// Parses and validates configuration text.
pub fn parse_scenario(text: &str) -> Result<RunConfig> {
    RawConfig::parse(text)?.build()
}

//! The scenario catalogue: a group, a chart, an isometric action and an
//! invariant metric for each supported example.

use super::chart::{Chart, Coordinate, Region};
use crate::error::{GeomError, Result};
use crate::lie::{circle_angles, quaternion_of, GroupElement, GroupKind, LieGroup};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub doc: &'static str,
}

pub struct ScenarioInfo {
    pub id: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
}

const MARGIN: ParamSpec = ParamSpec {
    name: "margin",
    default: 0.05,
    doc: "distance kept between sample points and the edge of the chart",
};

pub const CATALOGUE: &[ScenarioInfo] = &[
    ScenarioInfo {
        id: "s2_band",
        summary: "S^1 rotating the round S^2, colatitude band [0.4, pi - 0.4]",
        params: &[MARGIN],
    },
    ScenarioInfo {
        id: "warped_s2",
        summary: "S^1 on S^2 with g = dphi^2 + sin^2(phi)(1 + a sin(phi)) dtheta^2, same band",
        params: &[
            ParamSpec {
                name: "warp_amplitude",
                default: 0.3,
                doc: "warp amplitude a (> -1)",
            },
            MARGIN,
        ],
    },
    ScenarioInfo {
        id: "s3_hopf",
        summary: "Hopf S^1 on S^3 in Euler coordinates (psi, eta, chi); fiber_scale != 1 gives a Berger metric",
        params: &[
            ParamSpec {
                name: "fiber_scale",
                default: 1.0,
                doc: "length of the Hopf field (1 = round)",
            },
            MARGIN,
        ],
    },
    ScenarioInfo {
        id: "su2_s2",
        summary: "SU(2) acting transitively on S^2 = SU(2)/U(1) by rotations",
        params: &[
            ParamSpec {
                name: "radius",
                default: 1.0,
                doc: "radius of the round sphere",
            },
            MARGIN,
        ],
    },
    ScenarioInfo {
        id: "flat_t2",
        summary: "first-factor S^1 translating the flat torus a^2 dx^2 + dy^2",
        params: &[ParamSpec {
            name: "orbit_scale",
            default: 1.0,
            doc: "a; orbits have length 2 pi a",
        }],
    },
    ScenarioInfo {
        id: "t2_self",
        summary: "T^2 translating the flat torus a^2 dx^2 + dy^2 (transitive, free)",
        params: &[ParamSpec {
            name: "orbit_scale",
            default: 1.0,
            doc: "a; x-orbits have length 2 pi a",
        }],
    },
];

pub fn scenario_info(id: &str) -> Option<&'static ScenarioInfo> {
    CATALOGUE.iter().find(|s| s.id == id)
}

/// Where Killing fields and action Jacobians come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeSource {
    /// Closed-form derivatives when the scenario provides them, otherwise differences.
    PreferAnalytic,
    FiniteDifference,
}

#[derive(Clone, Debug)]
pub struct Numerics {
    /// Step for differentiating the action.
    pub h_act: f64,
    /// Step for metric and tensor-field derivatives.
    pub h_fd: f64,
    /// Relative singular-value threshold for the isotropy kernel.
    pub sigma_tol: f64,
    pub source: DerivativeSource,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            h_act: 1e-5,
            h_fd: 1e-4,
            sigma_tol: 1e-8,
            source: DerivativeSource::PreferAnalytic,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    S2Band,
    WarpedS2 { amplitude: f64 },
    S3Hopf { fiber_scale: f64 },
    Su2S2 { radius: f64 },
    FlatT2 { a: f64 },
    T2Self { a: f64 },
}

#[derive(Clone, Debug)]
pub struct Scenario {
    id: &'static str,
    kind: Kind,
    group: LieGroup,
    chart: Chart,
    margin: f64,
    params: Vec<(String, f64)>,
    pub numerics: Numerics,
}

fn band_chart(edge: f64) -> Chart {
    Chart::new(vec![
        Coordinate::angle("theta"),
        Coordinate::interval("phi", edge, PI - edge),
    ])
}

impl Scenario {
    pub fn new(id: &str, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let info = scenario_info(id)
            .ok_or_else(|| GeomError::Config(format!("unknown scenario id '{id}'")))?;
        for key in overrides.keys() {
            if !info.params.iter().any(|p| p.name == key) {
                return Err(GeomError::Config(format!(
                    "scenario '{id}' has no parameter '{key}'"
                )));
            }
        }
        let get = |name: &str| -> f64 {
            overrides.get(name).copied().unwrap_or_else(|| {
                info.params
                    .iter()
                    .find(|p| p.name == name)
                    .map(|p| p.default)
                    .unwrap_or(0.0)
            })
        };
        let positive = |name: &str| -> Result<f64> {
            let v = get(name);
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(GeomError::Config(format!("{name} must be positive, got {v}")))
            }
        };

        let (kind, group, chart) = match info.id {
            "s2_band" => (Kind::S2Band, GroupKind::U1, band_chart(0.4)),
            "warped_s2" => {
                let amplitude = get("warp_amplitude");
                if !(amplitude > -1.0 && amplitude.is_finite()) {
                    return Err(GeomError::Config(format!(
                        "warp_amplitude must exceed -1, got {amplitude}"
                    )));
                }
                (Kind::WarpedS2 { amplitude }, GroupKind::U1, band_chart(0.4))
            }
            "s3_hopf" => (
                Kind::S3Hopf {
                    fiber_scale: positive("fiber_scale")?,
                },
                GroupKind::U1,
                Chart::new(vec![
                    Coordinate::angle("psi"),
                    Coordinate::interval("eta", 0.2, FRAC_PI_2 - 0.2),
                    Coordinate::angle("chi"),
                ]),
            ),
            "su2_s2" => (
                Kind::Su2S2 {
                    radius: positive("radius")?,
                },
                GroupKind::Su2,
                band_chart(0.3),
            ),
            "flat_t2" | "t2_self" => {
                let a = positive("orbit_scale")?;
                let chart = Chart::new(vec![Coordinate::angle("x"), Coordinate::angle("y")]);
                if info.id == "flat_t2" {
                    (Kind::FlatT2 { a }, GroupKind::U1, chart)
                } else {
                    (Kind::T2Self { a }, GroupKind::T2, chart)
                }
            }
            _ => unreachable!("catalogue entries are matched above"),
        };
        let has_margin = info.params.iter().any(|p| p.name == "margin");
        let margin = if has_margin { get("margin") } else { 0.0 };
        if !(margin >= 0.0 && margin.is_finite()) || chart.region(margin).is_empty() {
            return Err(GeomError::Config(format!(
                "margin {margin} leaves no sample region"
            )));
        }
        let params = info
            .params
            .iter()
            .map(|p| (p.name.to_string(), get(p.name)))
            .collect();
        Ok(Scenario {
            id: info.id,
            kind,
            group: LieGroup::new(group),
            chart,
            margin,
            params,
            numerics: Numerics::default(),
        })
    }

    /// Catalogue entry with default parameters.
    pub fn by_id(id: &str) -> Result<Self> {
        Self::new(id, &BTreeMap::new())
    }

    pub fn with_numerics(mut self, numerics: Numerics) -> Self {
        self.numerics = numerics;
        self
    }

    pub fn id(&self) -> &'static str {
        self.id
    }

    pub fn group(&self) -> &LieGroup {
        &self.group
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Effective scenario parameters, in catalogue order.
    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    /// The precompact invariant sample region.
    pub fn sample_region(&self) -> Region {
        self.chart.region(self.margin)
    }

    fn warp(&self, phi: f64) -> (f64, f64) {
        let (s, c) = phi.sin_cos();
        match self.kind {
            Kind::S2Band => (s * s, 2.0 * s * c),
            Kind::WarpedS2 { amplitude: a } => {
                (s * s * (1.0 + a * s), 2.0 * s * c * (1.0 + a * s) + a * s * s * c)
            }
            Kind::Su2S2 { radius } => (radius * radius * s * s, radius * radius * 2.0 * s * c),
            _ => unreachable!(),
        }
    }

    /// Components of `g_M` at `x`.
    pub fn metric(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self.kind {
            Kind::S2Band | Kind::WarpedS2 { .. } => {
                let (f, _) = self.warp(x[1]);
                DMatrix::from_row_slice(2, 2, &[f, 0.0, 0.0, 1.0])
            }
            Kind::Su2S2 { radius } => {
                let (f, _) = self.warp(x[1]);
                DMatrix::from_row_slice(2, 2, &[f, 0.0, 0.0, radius * radius])
            }
            Kind::S3Hopf { fiber_scale } => {
                let c = (2.0 * x[1]).cos();
                let round = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, c, 0.0, 1.0, 0.0, c, 0.0, 1.0]);
                let w = DVector::from_vec(vec![1.0, 0.0, c]);
                round + (&w * w.transpose()) * (fiber_scale * fiber_scale - 1.0)
            }
            Kind::FlatT2 { a } | Kind::T2Self { a } => {
                DMatrix::from_row_slice(2, 2, &[a * a, 0.0, 0.0, 1.0])
            }
        }
    }

    /// Closed-form `d_m g_M`, one matrix per chart coordinate.
    pub fn metric_derivatives(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let n = self.dim();
        let mut out = vec![DMatrix::zeros(n, n); n];
        match self.kind {
            Kind::S2Band | Kind::WarpedS2 { .. } | Kind::Su2S2 { .. } => {
                out[1][(0, 0)] = self.warp(x[1]).1;
            }
            Kind::S3Hopf { fiber_scale } => {
                let c = (2.0 * x[1]).cos();
                let dc = -2.0 * (2.0 * x[1]).sin();
                let e = fiber_scale * fiber_scale - 1.0;
                // d/deta of round part plus (e) * d(w w^T), w = (1, 0, c)
                let d = &mut out[1];
                d[(0, 2)] = dc + e * dc;
                d[(2, 0)] = dc + e * dc;
                d[(2, 2)] = e * 2.0 * c * dc;
            }
            Kind::FlatT2 { .. } | Kind::T2Self { .. } => {}
        }
        out
    }

    /// The action on chart points (periodic coordinates stay on the universal cover).
    pub fn act(&self, g: &GroupElement, x: &DVector<f64>) -> DVector<f64> {
        let mut y = x.clone();
        match self.kind {
            Kind::S2Band | Kind::WarpedS2 { .. } | Kind::S3Hopf { .. } | Kind::FlatT2 { .. } => {
                y[0] += circle_angles(g)[0];
            }
            Kind::T2Self { .. } => {
                let a = circle_angles(g);
                y[0] += a[0];
                y[1] += a[1];
            }
            Kind::Su2S2 { .. } => {
                let p = rotation_of(g) * sphere_point(x[0], x[1]);
                let phi = p.z.clamp(-1.0, 1.0).acos();
                let raw = p.y.atan2(p.x);
                let theta = raw + TAU * ((x[0] - raw) / TAU).round();
                y[0] = theta;
                y[1] = phi;
            }
        }
        y
    }

    /// Closed-form Killing operator: column `i` is the field of basis element `k_i`.
    pub fn killing_analytic(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.dim();
        Some(match self.kind {
            Kind::S2Band | Kind::WarpedS2 { .. } | Kind::S3Hopf { .. } | Kind::FlatT2 { .. } => {
                let mut k = DMatrix::zeros(n, 1);
                k[(0, 0)] = 1.0;
                k
            }
            Kind::T2Self { .. } => DMatrix::identity(2, 2),
            Kind::Su2S2 { .. } => {
                let p = sphere_point(x[0], x[1]);
                let (xt, xp) = sphere_frame(x[0], x[1]);
                let s2 = x[1].sin().powi(2);
                let mut k = DMatrix::zeros(2, 3);
                for a in 0..3 {
                    let w = Vector3::ith(a, 1.0).cross(&p);
                    k[(0, a)] = w.dot(&xt) / s2;
                    k[(1, a)] = w.dot(&xp);
                }
                k
            }
        })
    }

    /// Closed-form Jacobian of `act(g, .)` at `x`.
    pub fn action_jacobian_analytic(
        &self,
        g: &GroupElement,
        x: &DVector<f64>,
    ) -> Option<DMatrix<f64>> {
        match self.kind {
            Kind::Su2S2 { .. } => {
                let y = self.act(g, x);
                let r = rotation_of(g);
                let (xt, xp) = sphere_frame(x[0], x[1]);
                let (yt, yp) = sphere_frame(y[0], y[1]);
                let s2 = y[1].sin().powi(2);
                let (rt, rp) = (r * xt, r * xp);
                Some(DMatrix::from_row_slice(
                    2,
                    2,
                    &[yt.dot(&rt) / s2, yt.dot(&rp) / s2, yp.dot(&rt), yp.dot(&rp)],
                ))
            }
            _ => Some(DMatrix::identity(self.dim(), self.dim())),
        }
    }

    /// Coordinates that are constant along orbits; orbit drift is measured in them.
    pub fn orbit_invariant_coords(&self) -> &'static [usize] {
        match self.kind {
            Kind::S2Band | Kind::WarpedS2 { .. } | Kind::FlatT2 { .. } => &[1],
            Kind::S3Hopf { .. } => &[1, 2],
            Kind::Su2S2 { .. } | Kind::T2Self { .. } => &[],
        }
    }

    /// Default levels of the first orbit-invariant coordinate used as geodesic starts.
    pub fn default_geodesic_levels(&self) -> Vec<f64> {
        match self.kind {
            Kind::S2Band | Kind::WarpedS2 { .. } => vec![0.6, 0.9, 1.2],
            Kind::S3Hopf { .. } => vec![0.5, 0.8, 1.1],
            Kind::FlatT2 { .. } => vec![0.5, 1.5, 2.5],
            Kind::Su2S2 { .. } | Kind::T2Self { .. } => vec![],
        }
    }

    /// Start point on the orbit whose first invariant coordinate equals `level`.
    pub fn geodesic_start(&self, level: f64) -> Option<DVector<f64>> {
        let idx = *self.orbit_invariant_coords().first()?;
        let mut x = DVector::zeros(self.dim());
        x[idx] = level;
        if let Kind::S3Hopf { .. } = self.kind {
            x[2] = 0.3;
        }
        Some(x)
    }
}

fn sphere_point(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(sp * ct, sp * st, cp)
}

/// Coordinate vectors `(d/dtheta, d/dphi)` of the unit-sphere embedding.
fn sphere_frame(theta: f64, phi: f64) -> (Vector3<f64>, Vector3<f64>) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    (
        Vector3::new(-sp * st, sp * ct, 0.0),
        Vector3::new(cp * ct, cp * st, -sp),
    )
}

/// Rotation `p -> q p q*` of a unit quaternion.
fn rotation_of(g: &GroupElement) -> Matrix3<f64> {
    let [w, x, y, z] = quaternion_of(g);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_spd, max_abs};
    use crate::rng::rng_for;

    fn all() -> Vec<Scenario> {
        CATALOGUE
            .iter()
            .map(|s| Scenario::by_id(s.id).unwrap())
            .collect()
    }

    fn interior_point(s: &Scenario, t: f64) -> DVector<f64> {
        let r = s.sample_region();
        DVector::from_fn(s.dim(), |i, _| r.lo[i] + (r.hi[i] - r.lo[i]) * (0.2 + 0.6 * t))
    }

    #[test]
    fn unknown_ids_and_params_are_rejected() {
        assert!(matches!(Scenario::by_id("klein"), Err(GeomError::Config(_))));
        let mut p = BTreeMap::new();
        p.insert("radius".to_string(), 2.0);
        assert!(Scenario::new("s2_band", &p).is_err());
        assert!(Scenario::new("su2_s2", &p).is_ok());
        p.insert("radius".to_string(), -1.0);
        assert!(Scenario::new("su2_s2", &p).is_err());
    }

    #[test]
    fn warped_amplitude_is_echoed() {
        let mut p = BTreeMap::new();
        p.insert("warp_amplitude".to_string(), 0.3);
        let s = Scenario::new("warped_s2", &p).unwrap();
        assert_eq!(s.params()[0], ("warp_amplitude".to_string(), 0.3));
    }

    #[test]
    fn metrics_are_spd_on_samples() {
        for s in all() {
            for i in 0..10 {
                let x = interior_point(&s, i as f64 / 9.0);
                assert!(is_spd(&s.metric(&x), 1e-10), "{}", s.id());
            }
        }
    }

    #[test]
    fn identity_acts_trivially_and_action_composes() {
        for s in all() {
            let g = s.group();
            let x = interior_point(&s, 0.4);
            assert!((s.act(&g.identity(), &x) - &x).norm() < 1e-12);
            for i in 0..20 {
                let a = g.random_element(&mut rng_for(1, 1, i));
                let b = g.random_element(&mut rng_for(1, 2, i));
                let lhs = s.act(&a, &s.act(&b, &x));
                let rhs = s.act(&g.compose(&a, &b), &x);
                assert!(s.chart().delta(&lhs, &rhs).norm() < 1e-10, "{}", s.id());
            }
        }
    }

    #[test]
    fn analytic_metric_derivatives_match_differences() {
        for s in all() {
            let x = interior_point(&s, 0.3);
            let d = s.metric_derivatives(&x);
            for m in 0..s.dim() {
                let h = 1e-5;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[m] += h;
                xm[m] -= h;
                let fd = (s.metric(&xp) - s.metric(&xm)) / (2.0 * h);
                assert!(max_abs(&(fd - &d[m])) < 1e-8, "{} coord {m}", s.id());
            }
        }
    }

    #[test]
    fn round_sphere_derivative_spot_value() {
        let s = Scenario::by_id("s2_band").unwrap();
        let x = DVector::from_vec(vec![0.0, std::f64::consts::FRAC_PI_4]);
        assert!((s.metric_derivatives(&x)[1][(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn berger_fiber_length() {
        let mut p = BTreeMap::new();
        p.insert("fiber_scale".to_string(), 0.5);
        let s = Scenario::new("s3_hopf", &p).unwrap();
        let x = DVector::from_vec(vec![0.1, 0.6, 0.2]);
        let k = s.killing_analytic(&x).unwrap();
        let len2 = (k.transpose() * s.metric(&x) * &k)[(0, 0)];
        assert!((len2 - 0.25).abs() < 1e-14);
    }
}

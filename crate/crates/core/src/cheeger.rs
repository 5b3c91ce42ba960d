//! The Cheeger deformation `g_l`, its orbit-rescaled version and the limit metric.
//!
//! Conventions at a regular point `x` with metric matrix `G = g_M(x)`:
//! `K` is the Killing operator, `m_basis` a `g_bi`-orthonormal basis of
//! `m_x`, `K_m = K * m_basis` spans the orbit tangent space and
//! `P = K_m^T G K_m` is the orbit tensor.
//!
//! Two independent routes to `g_l` are provided. [`cheeger_metric`] pulls the
//! product metric back through the reparametrization
//! `Ch_l(v) = K kappa(v) / l^2 + v`; [`cheeger_metric_closed_form`] writes the
//! orbit block as `l^2 P (l^2 + P)^{-1}` in an adapted frame.

use crate::error::{GeomError, Result};
use crate::lie::GroupElement;
use crate::linalg::{canonical_signs, inner_in, norm_in, symmetrize, unit_sphere_sup};
use crate::manifold::{pullback_metric, KillingData, Scenario};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Largest condition number of `Ch_l` accepted before reporting a failure.
pub const MAX_REPARAM_CONDITION: f64 = 1e12;

/// Length scale `l` of the group factor `l^2 g_bi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationParams {
    l: f64,
}

impl DeformationParams {
    pub fn new(l: f64) -> Result<Self> {
        if l.is_finite() && l > 0.0 {
            Ok(DeformationParams { l })
        } else {
            Err(GeomError::Config(format!("deformation scale must be positive, got {l}")))
        }
    }

    pub fn l(self) -> f64 {
        self.l
    }

    /// True when `1/l^2` rescaling loses too much precision to be trusted.
    pub fn poorly_conditioned(self) -> bool {
        self.l * self.l < 1e-12
    }
}

/// Which metric on `M` is meant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "tag", content = "l", rename_all = "lowercase")]
pub enum MetricVariant {
    Original,
    Cheeger(f64),
    Rescaled(f64),
    Limit,
}

impl MetricVariant {
    pub fn label(&self) -> String {
        match self {
            MetricVariant::Original => "original".into(),
            MetricVariant::Cheeger(l) => format!("cheeger({l})"),
            MetricVariant::Rescaled(l) => format!("rescaled({l})"),
            MetricVariant::Limit => "limit".into(),
        }
    }

    /// Evaluates the variant from precomputed Killing data and `G = g_M(x)`.
    pub fn eval_with(&self, data: &KillingData, g_m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match *self {
            MetricVariant::Original => Ok(g_m.clone()),
            MetricVariant::Cheeger(l) => cheeger_metric(data, g_m, l),
            MetricVariant::Rescaled(l) => rescaled_metric(data, g_m, l),
            MetricVariant::Limit => limit_metric(data, g_m),
        }
    }

    pub fn eval(&self, scenario: &Scenario, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        scenario.chart().check(x)?;
        let g_m = scenario.metric(x);
        if *self == MetricVariant::Original {
            return Ok(g_m);
        }
        let data = KillingData::with_metric(scenario, x, &g_m)?;
        self.eval_with(&data, &g_m)
    }
}

/// Pullback of a metric variant under `act(g, .)`.
pub fn action_pullback_metric(
    scenario: &Scenario,
    g: &GroupElement,
    variant: MetricVariant,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    pullback_metric(scenario, g, x, |y| variant.eval(scenario, y))
}

/// Vertical space of the quotient map at `(e, x)`: pairs `(-k_i, K k_i)`.
#[derive(Clone, Debug)]
pub struct VerticalSpaceBasis {
    pub pairs: Vec<(DVector<f64>, DVector<f64>)>,
}

pub fn vertical_space_basis(data: &KillingData) -> VerticalSpaceBasis {
    let d = data.k.ncols();
    let pairs = (0..d)
        .map(|i| {
            let e = DVector::from_fn(d, |j, _| if i == j { 1.0 } else { 0.0 });
            let kv = &data.k * &e;
            (-e, kv)
        })
        .collect();
    VerticalSpaceBasis { pairs }
}

/// Matrix of `kappa_x: T_x M -> m_x` (algebra coefficients).
pub fn kappa_matrix(data: &KillingData, g_m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let km = data.k_m();
    let b_m = data.m_basis.transpose() * &data.m_basis; // identity for B = I
    let rhs = km.transpose() * g_m;
    let coeffs = b_m
        .cholesky()
        .ok_or_else(|| GeomError::numerical(data.point.as_slice(), "singular m-Gram system"))?
        .solve(&rhs);
    Ok(&data.m_basis * coeffs)
}

/// `kappa(v)`: the unique element of `m_x` with `g_bi(kappa, k) = g_M(v, K k)` for all `k`.
pub fn kappa(data: &KillingData, g_m: &DMatrix<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(kappa_matrix(data, g_m)? * v)
}

/// Matrix of `Ch_l = I + K kappa / l^2`.
pub fn reparam_matrix(data: &KillingData, g_m: &DMatrix<f64>, l: f64) -> Result<DMatrix<f64>> {
    let n = g_m.nrows();
    Ok(DMatrix::identity(n, n) + &data.k * kappa_matrix(data, g_m)? / (l * l))
}

pub fn cheeger_reparam(
    data: &KillingData,
    g_m: &DMatrix<f64>,
    l: f64,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    Ok(reparam_matrix(data, g_m, l)? * v)
}

/// `g_l` from `g_l(Ch_l v, Ch_l w) = g_bi(kappa v, kappa w) / l^2 + g_M(v, w)`.
pub fn cheeger_metric(data: &KillingData, g_m: &DMatrix<f64>, l: f64) -> Result<DMatrix<f64>> {
    let kap = kappa_matrix(data, g_m)?;
    let c = DMatrix::identity(g_m.nrows(), g_m.nrows()) + &data.k * &kap / (l * l);
    let sv = c.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smin > 0.0 && smax / smin <= MAX_REPARAM_CONDITION) {
        return Err(GeomError::Numerical {
            point: data.point.iter().copied().collect(),
            l: Some(l),
            detail: format!("reparametrization condition number {:e}", smax / smin),
        });
    }
    let c_inv = c.try_inverse().ok_or_else(|| {
        GeomError::numerical(data.point.as_slice(), "singular reparametrization").with_l(l)
    })?;
    let lifted = kap.transpose() * &kap / (l * l) + g_m;
    Ok(symmetrize(&(c_inv.transpose() * lifted * c_inv)))
}

/// A `g_M`-orthonormal frame `[E_v | E_h]` adapted to the orbit.
///
/// `E_v = K_m M` comes from Gram-Schmidt on the Killing fields of `m_basis`;
/// `E_h` from Gram-Schmidt of the chart basis in coordinate order, skipping
/// vectors that are (numerically) vertical.
#[derive(Clone, Debug)]
pub struct AdaptedFrame {
    pub frame: DMatrix<f64>,
    pub vertical_dim: usize,
    /// Upper-triangular `M` with `E_v = K_m M`.
    pub vertical_coeffs: DMatrix<f64>,
}

impl AdaptedFrame {
    pub fn new(data: &KillingData, g_m: &DMatrix<f64>) -> Result<Self> {
        let n = g_m.nrows();
        let r = data.orbit_dim();
        let fail = |msg: &str| GeomError::numerical(data.point.as_slice(), msg);
        let km = data.k_m();
        let (e_v, m) = if r > 0 {
            let gram = symmetrize(&(km.transpose() * g_m * &km));
            let chol = gram
                .cholesky()
                .ok_or_else(|| fail("orbit Killing fields are dependent"))?;
            let m = chol
                .l()
                .try_inverse()
                .ok_or_else(|| fail("singular orbit Gram factor"))?
                .transpose();
            (&km * &m, m)
        } else {
            (DMatrix::zeros(n, 0), DMatrix::zeros(0, 0))
        };

        let mut cols: Vec<DVector<f64>> = e_v.column_iter().map(|c| c.into_owned()).collect();
        for i in 0..n {
            if cols.len() == n {
                break;
            }
            let e = DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 });
            let scale = norm_in(g_m, &e);
            let mut w = e;
            for _ in 0..2 {
                for c in &cols {
                    let proj = inner_in(g_m, c, &w);
                    w -= c * proj;
                }
            }
            let len = norm_in(g_m, &w);
            if len > 1e-8 * scale {
                cols.push(w / len);
            }
        }
        if cols.len() != n {
            return Err(fail("could not complete the adapted frame"));
        }
        let mut frame = DMatrix::from_columns(&cols);
        if r < n {
            let mut horiz = frame.columns(r, n - r).into_owned();
            canonical_signs(&mut horiz, 1e-12);
            frame.columns_mut(r, n - r).copy_from(&horiz);
        }
        Ok(AdaptedFrame {
            frame,
            vertical_dim: r,
            vertical_coeffs: m,
        })
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    /// Horizontal frame vectors as columns.
    pub fn horizontal(&self) -> DMatrix<f64> {
        let n = self.dim();
        self.frame.columns(self.vertical_dim, n - self.vertical_dim).into_owned()
    }

    pub fn vertical(&self) -> DMatrix<f64> {
        self.frame.columns(0, self.vertical_dim).into_owned()
    }

    /// Components `F^T h F` of a bilinear form in the frame.
    pub fn to_frame(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        self.frame.transpose() * h * &self.frame
    }

    /// Chart components of a form whose frame components are `a`.
    /// Uses `F^{-1} = F^T G`, valid because the frame is `G`-orthonormal.
    pub fn to_chart(&self, g_m: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
        let fg = self.frame.transpose() * g_m;
        symmetrize(&(fg.transpose() * a * fg))
    }

    /// Frame components of `g_M` with the orbit block replaced by `vv`.
    fn with_vertical_block(&self, vv: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let r = self.vertical_dim;
        let mut a = DMatrix::identity(n, n);
        a.view_mut((0, 0), (r, r)).copy_from(vv);
        a
    }
}

/// `g_l` with orbit block `l^2 P (l^2 + P)^{-1}` and horizontal and mixed blocks of `g_M`.
pub fn cheeger_metric_closed_form(
    data: &KillingData,
    g_m: &DMatrix<f64>,
    l: f64,
) -> Result<DMatrix<f64>> {
    let frame = AdaptedFrame::new(data, g_m)?;
    let r = data.orbit_dim();
    let p = &data.orbit_tensor;
    let shifted = p + DMatrix::identity(r, r) * (l * l);
    let inv = shifted.try_inverse().ok_or_else(|| {
        GeomError::numerical(data.point.as_slice(), "singular l^2 + P").with_l(l)
    })?;
    let s = symmetrize(&(p * inv * (l * l)));
    let m = &frame.vertical_coeffs;
    let vv = m.transpose() * s * m;
    Ok(frame.to_chart(g_m, &frame.with_vertical_block(&vv)))
}

/// `g~_l`: `g_l` with its orbit block divided by `l^2`.
pub fn rescaled_metric(data: &KillingData, g_m: &DMatrix<f64>, l: f64) -> Result<DMatrix<f64>> {
    let g_l = cheeger_metric(data, g_m, l)?;
    let frame = AdaptedFrame::new(data, g_m)?;
    let r = frame.vertical_dim;
    let mut a = frame.to_frame(&g_l);
    a.view_mut((0, 0), (r, r)).scale_mut(1.0 / (l * l));
    Ok(frame.to_chart(g_m, &a))
}

/// `g~`: horizontal part of `g_M` plus `g~(K a, K b) = g_bi(a, b)` on orbits.
pub fn limit_metric(data: &KillingData, g_m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let frame = AdaptedFrame::new(data, g_m)?;
    let m = &frame.vertical_coeffs;
    let vv = m.transpose() * m;
    Ok(frame.to_chart(g_m, &frame.with_vertical_block(&vv)))
}

/// `(Phi_x)^* metric (a, b) = metric(K a, K b)` for `a, b` in `m_x`.
pub fn normal_homogeneous_pullback(
    data: &KillingData,
    metric: &DMatrix<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
) -> f64 {
    inner_in(metric, &(&data.k * a), &(&data.k * b))
}

/// `sup |(Phi_x)^* metric (a, b) - g_bi(a, b)|` over `g_bi`-unit `a, b` in `m_x`.
pub fn normal_homogeneous_gap(data: &KillingData, metric: &DMatrix<f64>) -> f64 {
    let r = data.orbit_dim();
    if r == 0 {
        return 0.0;
    }
    let km = data.k_m();
    let pulled = km.transpose() * metric * &km;
    let b_m = data.m_basis.transpose() * &data.m_basis;
    unit_sphere_sup(&(pulled - &b_m), &b_m).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_spd, max_abs};
    use crate::manifold::CATALOGUE;
    use crate::rng::{gaussian_vector, rng_for};
    use rand::Rng;
    use std::collections::BTreeMap;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn pt(v: &[f64]) -> DVector<f64> {
        DVector::from_vec(v.to_vec())
    }

    fn at(id: &str, x: &[f64]) -> (Scenario, KillingData, DMatrix<f64>) {
        let s = Scenario::by_id(id).unwrap();
        let x = pt(x);
        let g = s.metric(&x);
        let kd = KillingData::with_metric(&s, &x, &g).unwrap();
        (s, kd, g)
    }

    fn d_theta() -> DVector<f64> {
        pt(&[1.0, 0.0])
    }

    #[test]
    fn kappa_examples() {
        let (_, kd, g) = at("s2_band", &[0.0, FRAC_PI_4]);
        assert!(kappa(&kd, &g, &pt(&[0.0, 1.0])).unwrap().norm() < 1e-15);
        assert!((kappa(&kd, &g, &d_theta()).unwrap()[0] - 0.5).abs() < 1e-15);

        let (_, kd, g) = at("s3_hopf", &[0.0, 0.7, 0.3]);
        let hopf = kd.k.column(0).into_owned();
        assert!((kappa(&kd, &g, &hopf).unwrap()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vertical_space_pairs() {
        let (_, kd, _) = at("s2_band", &[0.0, 1.0]);
        let v = vertical_space_basis(&kd);
        assert_eq!(v.pairs.len(), 1);
        assert_eq!(v.pairs[0].0, pt(&[-1.0]));
        assert_eq!(v.pairs[0].1, d_theta());
        let (_, kd, _) = at("flat_t2", &[1.0, 2.0]);
        assert_eq!(vertical_space_basis(&kd).pairs[0].1, pt(&[1.0, 0.0]));
    }

    #[test]
    fn horizontal_lift_is_orthogonal_to_vertical_space() {
        for info in CATALOGUE {
            let s = Scenario::by_id(info.id).unwrap();
            let r = s.sample_region();
            for i in 0..20 {
                let mut rng = rng_for(8, 0, i);
                let x = DVector::from_fn(s.dim(), |j, _| rng.random_range(r.lo[j]..r.hi[j]));
                let g = s.metric(&x);
                let kd = KillingData::with_metric(&s, &x, &g).unwrap();
                let v = gaussian_vector(&mut rng, s.dim());
                let l = rng.random_range(0.05..3.0);
                let kap = kappa(&kd, &g, &v).unwrap();
                for (minus_k, kk) in vertical_space_basis(&kd).pairs {
                    // (l^2 g_bi + g_M)((kappa / l^2, v), (-k, K k))
                    let ip = l * l * (kap.dot(&minus_k) / (l * l)) + inner_in(&g, &v, &kk);
                    assert!(ip.abs() < 1e-10, "{}", info.id);
                }
                // kappa takes values in m_x
                for iso in kd.isotropy_basis.column_iter() {
                    assert!(iso.dot(&kap).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn reparametrization_examples() {
        let (_, kd, g) = at("s2_band", &[0.0, FRAC_PI_4]);
        let ch = cheeger_reparam(&kd, &g, 1.0, &d_theta()).unwrap();
        assert!((ch - pt(&[1.5, 0.0])).norm() < 1e-15);
        let z = pt(&[0.0, 1.0]);
        assert!((cheeger_reparam(&kd, &g, 0.3, &z).unwrap() - &z).norm() < 1e-15);

        let (_, kd, g) = at("s3_hopf", &[0.0, 0.7, 0.3]);
        let hopf = kd.k.column(0).into_owned();
        let ch = cheeger_reparam(&kd, &g, 0.1, &hopf).unwrap();
        assert!((ch - &hopf * 101.0).norm() < 1e-11);
    }

    #[test]
    fn cheeger_metric_spot_values() {
        let (_, kd, g) = at("s2_band", &[0.0, FRAC_PI_4]);
        let gl = cheeger_metric(&kd, &g, 1.0).unwrap();
        assert!((gl[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((gl[(1, 1)] - 1.0).abs() < 1e-15);
        assert!(gl[(0, 1)].abs() < 1e-15);

        let (_, kd, g) = at("s3_hopf", &[0.2, 0.9, 0.4]);
        let gl = cheeger_metric(&kd, &g, 1.0).unwrap();
        let v = kd.k.column(0).into_owned();
        assert!((inner_in(&gl, &v, &v) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn closed_form_examples() {
        // P = lambda: lambda l^2 / (l^2 + lambda)
        let (_, kd, g) = at("s2_band", &[0.0, 1.1]);
        let lambda = 1.1f64.sin().powi(2);
        for l in [0.1, 1.0, 7.0] {
            let gl = cheeger_metric_closed_form(&kd, &g, l).unwrap();
            let expect = lambda * l * l / (l * l + lambda);
            assert!((gl[(0, 0)] - expect).abs() < 1e-14);
        }
        // large l recovers g_M
        let gl = cheeger_metric_closed_form(&kd, &g, 1e4).unwrap();
        assert!(max_abs(&(gl - &g)) < 1e-7);
        // P = identity at l = 1: half of g_bi on the orbit
        let (_, kd, g) = at("su2_s2", &[0.5, 1.0]);
        let gl = cheeger_metric_closed_form(&kd, &g, 1.0).unwrap();
        let km = kd.k_m();
        let block = km.transpose() * gl * km;
        assert!(max_abs(&(block - DMatrix::identity(2, 2) * 0.5)) < 1e-14);
    }

    #[test]
    fn rescaled_examples() {
        let (_, kd, g) = at("s2_band", &[0.0, FRAC_PI_4]);
        let gt = rescaled_metric(&kd, &g, 0.1).unwrap();
        assert!((gt[(0, 0)] - 0.5 / 0.51).abs() < 1e-12);
        assert!((gt[(1, 1)] - 1.0).abs() < 1e-12);

        let (_, kd, g) = at("s3_hopf", &[0.0, 0.5, 1.0]);
        let gt = rescaled_metric(&kd, &g, 0.1).unwrap();
        let v = kd.k.column(0).into_owned();
        assert!((inner_in(&gt, &v, &v) - 1.0 / 1.01).abs() < 1e-12);
    }

    #[test]
    fn limit_examples() {
        for phi in [0.5, 1.0, FRAC_PI_2, 2.5] {
            let (_, kd, g) = at("s2_band", &[0.3, phi]);
            let gt = limit_metric(&kd, &g).unwrap();
            assert!(max_abs(&(gt - DMatrix::identity(2, 2))) < 1e-14);
        }
        let (_, kd, g) = at("s3_hopf", &[0.0, 0.8, 0.1]);
        assert!(max_abs(&(limit_metric(&kd, &g).unwrap() - &g)) < 1e-14);
        let mut p = BTreeMap::new();
        p.insert("warp_amplitude".to_string(), -0.6);
        let s = Scenario::new("warped_s2", &p).unwrap();
        for phi in [0.5, 1.5] {
            let x = pt(&[0.0, phi]);
            let g = s.metric(&x);
            let kd = KillingData::with_metric(&s, &x, &g).unwrap();
            assert!((limit_metric(&kd, &g).unwrap()[(0, 0)] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn horizontal_vectors_are_static() {
        let (_, kd, g) = at("s3_hopf", &[0.1, 0.6, 0.9]);
        let frame = AdaptedFrame::new(&kd, &g).unwrap();
        let z = frame.horizontal();
        let mut rng = rng_for(1, 0, 0);
        for l in [0.05, 0.3, 2.0] {
            let gl = cheeger_metric(&kd, &g, l).unwrap();
            let gt = rescaled_metric(&kd, &g, l).unwrap();
            let glim = limit_metric(&kd, &g).unwrap();
            for _ in 0..5 {
                let w = gaussian_vector(&mut rng, 3);
                for zc in z.column_iter() {
                    let zc = zc.into_owned();
                    let base = inner_in(&g, &zc, &w);
                    assert!((inner_in(&gl, &zc, &w) - base).abs() < 1e-10);
                    assert!((inner_in(&gt, &zc, &w) - base).abs() < 1e-10);
                    assert!((inner_in(&glim, &zc, &w) - base).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn adapted_frame_is_orthonormal_and_deterministic() {
        for info in CATALOGUE {
            let s = Scenario::by_id(info.id).unwrap();
            let r = s.sample_region();
            let x = DVector::from_fn(s.dim(), |j, _| 0.5 * (r.lo[j] + r.hi[j]) + 0.1);
            let g = s.metric(&x);
            let kd = KillingData::with_metric(&s, &x, &g).unwrap();
            let f = AdaptedFrame::new(&kd, &g).unwrap();
            let gram = f.frame.transpose() * &g * &f.frame;
            assert!(max_abs(&(gram - DMatrix::identity(s.dim(), s.dim()))) < 1e-13);
            let f2 = AdaptedFrame::new(&kd, &g).unwrap();
            assert_eq!(f.frame, f2.frame);
        }
    }

    #[test]
    fn normal_homogeneous_pullbacks() {
        let (_, kd, g) = at("su2_s2", &[0.4, 1.2]);
        let glim = limit_metric(&kd, &g).unwrap();
        let mut rng = rng_for(2, 0, 0);
        for _ in 0..5 {
            let a = &kd.m_basis * gaussian_vector(&mut rng, 2);
            let b = &kd.m_basis * gaussian_vector(&mut rng, 2);
            assert!((normal_homogeneous_pullback(&kd, &glim, &a, &a) - a.dot(&a)).abs() < 1e-13);
            assert!((normal_homogeneous_pullback(&kd, &glim, &a, &b) - a.dot(&b)).abs() < 1e-13);
        }
        let (_, kd, g) = at("s2_band", &[0.0, 1.0]);
        let a = pt(&[0.7]);
        let p = kd.orbit_tensor[(0, 0)];
        assert!((normal_homogeneous_pullback(&kd, &g, &a, &a) - p * 0.49).abs() < 1e-14);
        assert!(normal_homogeneous_gap(&kd, &limit_metric(&kd, &g).unwrap()) < 1e-14);
        let gt = rescaled_metric(&kd, &g, 0.1).unwrap();
        let lam = 1f64.sin().powi(2);
        assert!((normal_homogeneous_gap(&kd, &gt) - 0.01 / (0.01 + lam)).abs() < 1e-12);
    }

    #[test]
    fn variants_are_spd() {
        for info in CATALOGUE {
            let s = Scenario::by_id(info.id).unwrap();
            let r = s.sample_region();
            let x = DVector::from_fn(s.dim(), |j, _| r.lo[j] + 0.3 * (r.hi[j] - r.lo[j]));
            for v in [
                MetricVariant::Original,
                MetricVariant::Cheeger(0.05),
                MetricVariant::Rescaled(0.05),
                MetricVariant::Limit,
            ] {
                assert!(is_spd(&v.eval(&s, &x).unwrap(), 1e-10), "{} {}", info.id, v.label());
            }
        }
    }

    #[test]
    fn ill_conditioned_reparametrization_is_reported() {
        let (_, kd, g) = at("s2_band", &[0.0, 1.0]);
        let err = cheeger_metric(&kd, &g, 1e-7).unwrap_err();
        match err {
            GeomError::Numerical { l: Some(l), .. } => assert_eq!(l, 1e-7),
            other => panic!("unexpected {other:?}"),
        }
        assert!(DeformationParams::new(1e-7).unwrap().poorly_conditioned());
        assert!(DeformationParams::new(0.0).is_err());
    }

    #[test]
    fn kappa_is_an_isomorphism_on_orbits() {
        // restricted to T_x G(x), kappa has singular values bounded below
        for id in ["s2_band", "s3_hopf", "su2_s2"] {
            let s = Scenario::by_id(id).unwrap();
            let r = s.sample_region();
            let mut smallest = f64::INFINITY;
            for i in 0..20 {
                let t = i as f64 / 19.0;
                let x = DVector::from_fn(s.dim(), |j, _| r.lo[j] + t * (r.hi[j] - r.lo[j]));
                let g = s.metric(&x);
                let kd = KillingData::with_metric(&s, &x, &g).unwrap();
                let restricted = kd.m_basis.transpose() * kappa_matrix(&kd, &g).unwrap() * kd.k_m();
                smallest = smallest.min(restricted.singular_values().min());
            }
            assert!(smallest > 0.1, "{id}: {smallest}");
        }
    }
}

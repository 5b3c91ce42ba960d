//! Killing operators, the isotropy splitting `g = g_x + m_x`, and the orbit tensor.

use super::scenario::{DerivativeSource, Scenario};
use crate::error::{GeomError, Result};
use crate::lie::{BiInvariantForm, GroupElement};
use crate::linalg::{canonical_signs, is_spd, symmetrize};
use nalgebra::{DMatrix, DVector};

/// Killing data at a regular point.
#[derive(Clone, Debug)]
pub struct KillingData {
    pub point: DVector<f64>,
    /// `dim M x dim G`; column `i` is the Killing field of `k_i` at the point.
    pub k: DMatrix<f64>,
    /// `B`-orthonormal basis of the isotropy algebra (columns, algebra coefficients).
    pub isotropy_basis: DMatrix<f64>,
    /// `B`-orthonormal basis of its `B`-orthogonal complement.
    pub m_basis: DMatrix<f64>,
    /// Orbit tensor in `m_basis` coordinates: `g_M(K a, K b) = g_bi(P a, b)`.
    pub orbit_tensor: DMatrix<f64>,
}

impl KillingData {
    pub fn at(scenario: &Scenario, x: &DVector<f64>) -> Result<Self> {
        let g_m = scenario.metric(x);
        Self::with_metric(scenario, x, &g_m)
    }

    pub fn with_metric(scenario: &Scenario, x: &DVector<f64>, g_m: &DMatrix<f64>) -> Result<Self> {
        let k = killing_operator(scenario, x)?;
        let form = scenario.group().form();
        let (isotropy_basis, m_basis) =
            isotropy_split(&k, form, scenario.numerics.sigma_tol, x)?;
        let orbit_tensor = orbit_tensor(&k, g_m, &m_basis, form, x)?;
        Ok(KillingData {
            point: x.clone(),
            k,
            isotropy_basis,
            m_basis,
            orbit_tensor,
        })
    }

    pub fn orbit_dim(&self) -> usize {
        self.m_basis.ncols()
    }

    /// Killing fields of the `m_basis` vectors: a basis of the orbit tangent space.
    pub fn k_m(&self) -> DMatrix<f64> {
        &self.k * &self.m_basis
    }
}

/// A vector of `m_x` over the point `x`.
#[derive(Clone, Debug)]
pub struct OrbitBundlePoint {
    pub x: DVector<f64>,
    pub v: DVector<f64>,
}

impl OrbitBundlePoint {
    /// Checks that `v` is `B`-orthogonal to the isotropy algebra.
    pub fn new(data: &KillingData, form: &BiInvariantForm, v: DVector<f64>) -> Result<Self> {
        for col in data.isotropy_basis.column_iter() {
            let c = form.inner(&col.into_owned(), &v);
            if c.abs() > 1e-10 {
                return Err(GeomError::numerical(
                    data.point.as_slice(),
                    format!("vector has isotropy component {c:e}"),
                ));
            }
        }
        Ok(OrbitBundlePoint {
            x: data.point.clone(),
            v,
        })
    }
}

/// Fourth-order central difference of a vector-valued map, with periodic
/// components of the output unwrapped relative to `center`.
fn central_difference<F>(scenario: &Scenario, center: &DVector<f64>, h: f64, f: F) -> DVector<f64>
where
    F: Fn(f64) -> DVector<f64>,
{
    let chart = scenario.chart();
    let d = |t: f64| chart.delta(center, &f(t));
    (d(-2.0 * h) - d(-h) * 8.0 + d(h) * 8.0 - d(2.0 * h)) / (12.0 * h)
}

/// Killing fields by differentiating `t -> act(exp(t k_i), x)`.
pub fn killing_operator_fd(scenario: &Scenario, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    scenario.chart().check(x)?;
    let group = scenario.group();
    let h = scenario.numerics.h_act;
    let mut k = DMatrix::zeros(scenario.dim(), group.dim());
    for i in 0..group.dim() {
        let e = DVector::from_fn(group.dim(), |j, _| if j == i { 1.0 } else { 0.0 });
        let col = central_difference(scenario, x, h, |t| {
            scenario.act(&group.exp_map(&e, t), x)
        });
        k.set_column(i, &col);
    }
    Ok(k)
}

pub fn killing_operator(scenario: &Scenario, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    scenario.chart().check(x)?;
    match (scenario.numerics.source, scenario.killing_analytic(x)) {
        (DerivativeSource::PreferAnalytic, Some(k)) => Ok(k),
        _ => killing_operator_fd(scenario, x),
    }
}

/// Jacobian of `act(g, .)` at `x` by central differences.
pub fn action_jacobian_fd(
    scenario: &Scenario,
    g: &GroupElement,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let h = scenario.numerics.h_act;
    let chart = scenario.chart();
    chart.check_with(x, 2.0 * h)?;
    let y = scenario.act(g, x);
    let n = scenario.dim();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = central_difference(scenario, &y, h, |t| {
            let mut xs = x.clone();
            xs[j] += t;
            scenario.act(g, &xs)
        });
        jac.set_column(j, &col);
    }
    Ok(jac)
}

pub fn action_jacobian(
    scenario: &Scenario,
    g: &GroupElement,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    match scenario.numerics.source {
        DerivativeSource::PreferAnalytic => match scenario.action_jacobian_analytic(g, x) {
            Some(j) => Ok(j),
            None => action_jacobian_fd(scenario, g, x),
        },
        DerivativeSource::FiniteDifference => action_jacobian_fd(scenario, g, x),
    }
}

/// `Dact^T * metric(act(g, x)) * Dact` for an arbitrary metric field.
pub fn pullback_metric<F>(
    scenario: &Scenario,
    g: &GroupElement,
    x: &DVector<f64>,
    metric: F,
) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    scenario.chart().check(x)?;
    let y = scenario.act(g, x);
    scenario.chart().check(&y)?;
    let jac = action_jacobian(scenario, g, x)?;
    Ok(symmetrize(&(jac.transpose() * metric(&y)? * &jac)))
}

/// Splits the algebra into `ker K` and its `B`-orthogonal complement.
///
/// Singular values are taken in `B`-orthonormal coordinates and compared with
/// `sigma_tol * sigma_max`; a value within a factor 10 of the threshold is
/// reported as a degenerate point.
pub fn isotropy_split(
    k: &DMatrix<f64>,
    form: &BiInvariantForm,
    sigma_tol: f64,
    point: &DVector<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let d = k.ncols();
    let n = k.nrows();
    let chol = form.matrix.clone().cholesky().ok_or_else(|| {
        GeomError::numerical(point.as_slice(), "bi-invariant form is not positive definite")
    })?;
    // a = L^{-T} a~ maps B-orthonormal coordinates a~ to basis coefficients a
    let l_inv_t = chol
        .l()
        .try_inverse()
        .ok_or_else(|| GeomError::numerical(point.as_slice(), "singular Cholesky factor"))?
        .transpose();
    let kt = k * &l_inv_t;
    // pad rows so the SVD returns a full set of right singular vectors
    let rows = n.max(d);
    let mut padded = DMatrix::zeros(rows, d);
    padded.view_mut((0, 0), (n, d)).copy_from(&kt);
    let svd = padded.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| GeomError::numerical(point.as_slice(), "SVD did not converge"))?;
    let sigma = svd.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);

    let mut kernel = Vec::new();
    let mut range = Vec::new();
    for (i, &s) in sigma.iter().enumerate() {
        let rel = if sigma_max > 0.0 { s / sigma_max } else { 0.0 };
        if rel > 0.1 * sigma_tol && rel < 10.0 * sigma_tol {
            return Err(GeomError::Degenerate {
                point: point.iter().copied().collect(),
                sigma: rel,
            });
        }
        let v = v_t.row(i).transpose();
        if rel < sigma_tol {
            kernel.push((s, v));
        } else {
            range.push((s, v));
        }
    }
    // deterministic ordering: decreasing singular value for the range
    range.sort_by(|a, b| b.0.total_cmp(&a.0));
    let assemble = |cols: &[(f64, DVector<f64>)]| -> DMatrix<f64> {
        let mut m = DMatrix::zeros(d, cols.len());
        for (j, (_, v)) in cols.iter().enumerate() {
            m.set_column(j, &(&l_inv_t * v));
        }
        canonical_signs(&mut m, 1e-12);
        m
    };
    Ok((assemble(&kernel), assemble(&range)))
}

/// `P = B_m^{-1} (K_m^T G K_m)`, symmetrized.
pub fn orbit_tensor(
    k: &DMatrix<f64>,
    g_m: &DMatrix<f64>,
    m_basis: &DMatrix<f64>,
    form: &BiInvariantForm,
    point: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let r = m_basis.ncols();
    if r == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let km = k * m_basis;
    let b_m = m_basis.transpose() * &form.matrix * m_basis;
    let rhs = km.transpose() * g_m * &km;
    let p = b_m
        .cholesky()
        .ok_or_else(|| GeomError::numerical(point.as_slice(), "singular m-Gram matrix"))?
        .solve(&rhs);
    let p = symmetrize(&p);
    if !is_spd(&p, 0.0) {
        return Err(GeomError::numerical(
            point.as_slice(),
            "orbit tensor is not positive definite (rank misdetected)",
        ));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{GroupKind, LieGroup};
    use crate::linalg::max_abs;
    use crate::manifold::scenario::{Numerics, CATALOGUE};
    use crate::rng::rng_for;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn pt(v: &[f64]) -> DVector<f64> {
        DVector::from_vec(v.to_vec())
    }

    #[test]
    fn band_killing_field_is_d_theta() {
        let s = Scenario::by_id("s2_band").unwrap();
        for phi in [0.5, 1.0, 2.0] {
            let k = killing_operator(&s, &pt(&[0.7, phi])).unwrap();
            assert_eq!(k, DMatrix::from_row_slice(2, 1, &[1.0, 0.0]));
            let fd = killing_operator_fd(&s, &pt(&[0.7, phi])).unwrap();
            assert!(max_abs(&(fd - k)) < 1e-9);
        }
    }

    #[test]
    fn fixed_point_has_zero_killing_column() {
        // The north pole of the SU(2) sphere is outside the chart, but in the
        // ambient picture rotation about e_3 fixes it; near the pole the
        // e_3 column of K shrinks to zero in the phi component and the
        // theta component stays 1 (coordinate artefact), so test via lengths.
        let s = Scenario::by_id("su2_s2").unwrap();
        let x = pt(&[0.0, 0.31]);
        let k = killing_operator(&s, &x).unwrap();
        let g = s.metric(&x);
        let len = |c: usize| (k.column(c).transpose() * &g * k.column(c))[(0, 0)].sqrt();
        assert!((len(2) - 0.31f64.sin()).abs() < 1e-12);
        // an isolated zero operator has a trivial range
        let zero = DMatrix::zeros(2, 1);
        let form = BiInvariantForm::identity(1);
        let (iso, m) = isotropy_split(&zero, &form, 1e-8, &x).unwrap();
        assert_eq!((iso.ncols(), m.ncols()), (1, 0));
    }

    #[test]
    fn fd_killing_matches_analytic_everywhere() {
        for info in CATALOGUE {
            let s = Scenario::by_id(info.id).unwrap();
            let r = s.sample_region();
            for i in 0..10 {
                let mut rng = rng_for(5, 0, i);
                let x = DVector::from_fn(s.dim(), |j, _| rng.random_range(r.lo[j]..r.hi[j]));
                let a = s.killing_analytic(&x).unwrap();
                let f = killing_operator_fd(&s, &x).unwrap();
                assert!(max_abs(&(a - f)) < 1e-8, "{}", info.id);
            }
        }
    }

    #[test]
    fn fd_action_jacobian_matches_analytic() {
        let s = Scenario::by_id("su2_s2").unwrap();
        let g = s.group().exp_map(&pt(&[0.2, -0.4, 0.3]), 1.0);
        let x = pt(&[1.0, 1.3]);
        let a = s.action_jacobian_analytic(&g, &x).unwrap();
        let f = action_jacobian_fd(&s, &g, &x).unwrap();
        assert!(max_abs(&(a - f)) < 1e-8);
    }

    #[test]
    fn hopf_field_has_unit_length() {
        let s = Scenario::by_id("s3_hopf").unwrap();
        for eta in [0.3, 0.7, 1.2] {
            let x = pt(&[0.4, eta, 2.0]);
            let k = killing_operator(&s, &x).unwrap();
            let len2 = (k.transpose() * s.metric(&x) * &k)[(0, 0)];
            assert!((len2 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn isotropy_split_examples() {
        // free circle action on the band
        let s = Scenario::by_id("s2_band").unwrap();
        let kd = KillingData::at(&s, &pt(&[0.0, 1.0])).unwrap();
        assert_eq!((kd.isotropy_basis.ncols(), kd.orbit_dim()), (0, 1));

        // SU(2) on S^2: isotropy is the circle fixing the point
        let s = Scenario::by_id("su2_s2").unwrap();
        let x = pt(&[0.8, 1.1]);
        let kd = KillingData::at(&s, &x).unwrap();
        assert_eq!((kd.isotropy_basis.ncols(), kd.orbit_dim()), (1, 2));
        assert!((&kd.k * &kd.isotropy_basis).norm() < 1e-12);
        // the isotropy axis is the point itself in R^3
        let axis = kd.isotropy_basis.column(0);
        let p = [1.1f64.sin() * 0.8f64.cos(), 1.1f64.sin() * 0.8f64.sin(), 1.1f64.cos()];
        let dot: f64 = (0..3).map(|i| axis[i] * p[i]).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-12);

        // T^2 on itself and the first-factor sub-action are both free
        for id in ["t2_self", "flat_t2"] {
            let s = Scenario::by_id(id).unwrap();
            let kd = KillingData::at(&s, &pt(&[1.0, 2.0])).unwrap();
            assert_eq!(kd.isotropy_basis.ncols(), 0);
            assert_eq!(kd.orbit_dim(), s.group().dim());
        }
    }

    #[test]
    fn ambiguous_rank_is_degenerate() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-8]);
        let form = BiInvariantForm::identity(2);
        let err = isotropy_split(&k, &form, 1e-8, &pt(&[0.0, 0.0])).unwrap_err();
        assert!(matches!(err, GeomError::Degenerate { .. }));
        // clearly separated values are fine
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        let (iso, m) = isotropy_split(&k, &form, 1e-8, &pt(&[0.0, 0.0])).unwrap();
        assert_eq!((iso.ncols(), m.ncols()), (1, 1));
    }

    #[test]
    fn orbit_tensor_spot_values() {
        let s = Scenario::by_id("s2_band").unwrap();
        let p = KillingData::at(&s, &pt(&[0.0, FRAC_PI_2])).unwrap().orbit_tensor;
        assert!((p[(0, 0)] - 1.0).abs() < 1e-15);
        let p = KillingData::at(&s, &pt(&[0.0, FRAC_PI_4])).unwrap().orbit_tensor;
        assert!((p[(0, 0)] - 0.5).abs() < 1e-15);
        let s = Scenario::by_id("s3_hopf").unwrap();
        let p = KillingData::at(&s, &pt(&[0.3, 0.9, 1.0])).unwrap().orbit_tensor;
        assert!((p[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invariants_over_random_points() {
        for info in CATALOGUE {
            let s = Scenario::by_id(info.id)
                .unwrap()
                .with_numerics(Numerics {
                    source: DerivativeSource::FiniteDifference,
                    ..Numerics::default()
                });
            let r = s.sample_region();
            let mut ranks = Vec::new();
            for i in 0..100 {
                let mut rng = rng_for(11, 0, i);
                let x = DVector::from_fn(s.dim(), |j, _| rng.random_range(r.lo[j]..r.hi[j]));
                let g = s.metric(&x);
                let kd = KillingData::with_metric(&s, &x, &g).unwrap();
                assert!((&kd.k * &kd.isotropy_basis).norm() < 1e-8, "{}", info.id);
                ranks.push(kd.orbit_dim());
                // g_M(Ka, Kb) = g_bi(Pa, b)
                let a = crate::rng::gaussian_vector(&mut rng, kd.orbit_dim());
                let b = crate::rng::gaussian_vector(&mut rng, kd.orbit_dim());
                let km = kd.k_m();
                let lhs = (&km * &a).dot(&(&g * (&km * &b)));
                let rhs = (&kd.orbit_tensor * &a).dot(&b);
                assert!((lhs - rhs).abs() < 1e-10);
                // G-invariance of g_M
                let h = s.group().random_element(&mut rng);
                let y = s.act(&h, &x);
                if s.chart().contains_with(&y, 1e-3) {
                    let pb = pullback_metric(&s, &h, &x, |z| Ok(s.metric(z))).unwrap();
                    assert!(max_abs(&(pb - &g)) < 1e-8, "{}", info.id);
                }
            }
            assert!(ranks.iter().all(|&r| r == ranks[0]), "{}", info.id);
        }
    }

    #[test]
    fn orbit_vectors_must_avoid_the_isotropy() {
        let s = Scenario::by_id("su2_s2").unwrap();
        let kd = KillingData::at(&s, &pt(&[0.2, 1.0])).unwrap();
        let form = s.group().form();
        assert!(OrbitBundlePoint::new(&kd, form, kd.m_basis.column(0).into_owned()).is_ok());
        assert!(
            OrbitBundlePoint::new(&kd, form, kd.isotropy_basis.column(0).into_owned()).is_err()
        );
    }

    #[test]
    fn outside_domain_is_an_error() {
        let s = Scenario::by_id("s2_band").unwrap();
        assert!(matches!(
            killing_operator(&s, &pt(&[0.0, 0.1])),
            Err(GeomError::Domain { .. })
        ));
        let _ = LieGroup::new(GroupKind::U1);
    }
}

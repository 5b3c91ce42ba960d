use super::derivative::richardson_derivative;
use crate::cheeger::MetricVariant;
use crate::error::{GeomError, Result};
use crate::exec::{max_of, Execution};
use crate::linalg::unit_sphere_sup;
use crate::manifold::{SamplePlan, Scenario};
use nalgebra::{DMatrix, DVector};

/// A symmetric (0,2)-tensor field on the chart.
pub trait TensorField: Sync {
    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>>;
}

impl<F> TensorField for F
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Sync,
{
    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self(x)
    }
}

pub fn variant_field(scenario: &Scenario, variant: MetricVariant) -> impl TensorField + '_ {
    move |x: &DVector<f64>| variant.eval(scenario, x)
}

/// The field `a - b`.
pub fn difference_field(
    scenario: &Scenario,
    a: MetricVariant,
    b: MetricVariant,
) -> impl TensorField + '_ {
    move |x: &DVector<f64>| Ok(a.eval(scenario, x)? - b.eval(scenario, x)?)
}

/// `C^p` size of a tensor field over a sample plan, measured with `g_M`-unit vectors.
///
/// `p = 0`: `sup |D(u, v)|` over points and `g_M`-unit `u, v`, evaluated exactly
/// per point as the largest generalized eigenvalue. `p = 1` additionally takes
/// the same sup of every first coordinate derivative `d_m D`.
pub fn cp_norm(
    scenario: &Scenario,
    field: &dyn TensorField,
    p: u32,
    plan: &SamplePlan,
    exec: Execution,
) -> Result<f64> {
    if p > 1 {
        return Err(GeomError::UnsupportedOrder(p));
    }
    let h = scenario.numerics.h_fd;
    let per_point = exec.try_map(&plan.points, |x| -> Result<f64> {
        let g = scenario.metric(x);
        let sup = |a: &DMatrix<f64>| {
            unit_sphere_sup(a, &g)
                .ok_or_else(|| GeomError::numerical(x.as_slice(), "g_M is not positive definite"))
        };
        let mut best = sup(&field.eval(x)?)?;
        if p == 1 {
            for m in 0..scenario.dim() {
                let d = richardson_derivative(scenario, |y| field.eval(y), x, m, h)?;
                best = best.max(sup(&d)?);
            }
        }
        Ok(best)
    })?;
    Ok(max_of(&per_point))
}

use crate::cheeger::MetricVariant;
use crate::error::Result;
use crate::manifold::{DerivativeSource, Scenario};
use nalgebra::{DMatrix, DVector};

/// `d_m F(x)` for a matrix-valued `F`: fourth-order central differences with
/// step `h`, improved by one Richardson level against step `h / 2`.
///
/// The stencil reaches `2h` along coordinate `m`; leaving the chart is a domain error.
pub fn richardson_derivative<F>(
    scenario: &Scenario,
    f: F,
    x: &DVector<f64>,
    m: usize,
    h: f64,
) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    scenario.chart().check_with(x, 2.0 * h)?;
    let shifted = |t: f64| {
        let mut y = x.clone();
        y[m] += t;
        f(&y)
    };
    let stencil = |h: f64| -> Result<DMatrix<f64>> {
        let (a, b, c, d) = (shifted(-2.0 * h)?, shifted(-h)?, shifted(h)?, shifted(2.0 * h)?);
        Ok((a - b * 8.0 + c * 8.0 - d) / (12.0 * h))
    };
    let coarse = stencil(h)?;
    let fine = stencil(0.5 * h)?;
    Ok((fine * 16.0 - coarse) / 15.0)
}

/// `d_m g_ij` for every chart coordinate `m`, one matrix per `m`.
///
/// The original metric uses the scenario's closed form when available;
/// every other variant is differentiated numerically with step `h_fd`.
pub fn metric_derivatives(
    scenario: &Scenario,
    variant: MetricVariant,
    x: &DVector<f64>,
) -> Result<Vec<DMatrix<f64>>> {
    if variant == MetricVariant::Original
        && scenario.numerics.source == DerivativeSource::PreferAnalytic
    {
        scenario.chart().check(x)?;
        return Ok(scenario.metric_derivatives(x));
    }
    let h = scenario.numerics.h_fd;
    (0..scenario.dim())
        .map(|m| richardson_derivative(scenario, |y| variant.eval(scenario, y), x, m, h))
        .collect()
}

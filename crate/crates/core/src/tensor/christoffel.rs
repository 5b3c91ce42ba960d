use super::derivative::metric_derivatives;
use crate::cheeger::MetricVariant;
use crate::error::{GeomError, Result};
use crate::manifold::Scenario;
use nalgebra::{DMatrix, DVector};

/// Christoffel symbols at a point: `symbols[m][(i, j)] = Gamma^m_ij`.
#[derive(Clone, Debug)]
pub struct Christoffel {
    pub symbols: Vec<DMatrix<f64>>,
}

impl Christoffel {
    /// `Gamma(u, v)^m = Gamma^m_ij u^i v^j`.
    pub fn contract(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.symbols.len(),
            self.symbols.iter().map(|g| (u.transpose() * g * v)[(0, 0)]),
        )
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.symbols
            .iter()
            .map(|g| crate::linalg::max_abs(&(g - g.transpose())))
            .fold(0.0, f64::max)
    }
}

/// `Gamma^m_ij = 1/2 g^{mn} (d_i g_nj + d_j g_ni - d_n g_ij)`.
pub fn christoffel(
    scenario: &Scenario,
    variant: MetricVariant,
    x: &DVector<f64>,
) -> Result<Christoffel> {
    let g = variant.eval(scenario, x)?;
    let dg = metric_derivatives(scenario, variant, x)?;
    let n = g.nrows();
    let g_inv = g.try_inverse().ok_or_else(|| {
        GeomError::numerical(x.as_slice(), format!("singular {} metric", variant.label()))
    })?;
    // first kind: lowered[n][(i, j)]
    let lowered: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            DMatrix::from_fn(n, n, |i, j| 0.5 * (dg[i][(k, j)] + dg[j][(k, i)] - dg[k][(i, j)]))
        })
        .collect();
    let symbols = (0..n)
        .map(|m| {
            let mut s = DMatrix::zeros(n, n);
            for (k, low) in lowered.iter().enumerate() {
                s += low * g_inv[(m, k)];
            }
            s
        })
        .collect();
    Ok(Christoffel { symbols })
}

/// Christoffel symbols of a fixed metric variant as a field on the chart.
#[derive(Clone, Copy, Debug)]
pub struct ChristoffelField<'a> {
    pub scenario: &'a Scenario,
    pub variant: MetricVariant,
}

impl<'a> ChristoffelField<'a> {
    pub fn new(scenario: &'a Scenario, variant: MetricVariant) -> Self {
        ChristoffelField { scenario, variant }
    }

    pub fn at(&self, x: &DVector<f64>) -> Result<Christoffel> {
        christoffel(self.scenario, self.variant, x)
    }
}

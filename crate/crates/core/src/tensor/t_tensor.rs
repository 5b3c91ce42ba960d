use super::christoffel::christoffel;
use super::derivative::richardson_derivative;
use crate::cheeger::MetricVariant;
use crate::error::{GeomError, Result};
use crate::linalg::{norm_in, symmetrize};
use crate::manifold::{killing_operator, KillingData, Scenario};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TTensorSample {
    pub x: Vec<f64>,
    /// `sup |T(u, v)|` over unit vertical `u, v`, all in the variant metric.
    pub value: f64,
}

/// O'Neill T-tensor of the orbit foliation on vertical pairs, `T_U V = (nabla_U V)^perp`.
///
/// Vertical fields are the Killing fields of the fixed `m_basis` vectors,
/// extended off `x` by the action; the result is tensorial so the extension
/// does not matter.
pub fn t_tensor(
    scenario: &Scenario,
    variant: MetricVariant,
    data: &KillingData,
    x: &DVector<f64>,
) -> Result<TTensorSample> {
    let n = scenario.dim();
    let r = data.orbit_dim();
    let sample = |value| TTensorSample {
        x: x.iter().copied().collect(),
        value,
    };
    if r == 0 || r == n {
        return Ok(sample(0.0));
    }
    let h = variant.eval(scenario, x)?;
    let gamma = christoffel(scenario, variant, x)?;
    let h_fd = scenario.numerics.h_fd;
    let dk: Vec<DMatrix<f64>> = (0..n)
        .map(|k| richardson_derivative(scenario, |y| killing_operator(scenario, y), x, k, h_fd))
        .collect::<Result<_>>()?;
    let y = data.k_m();
    // d_k Y_j for Y_j = K m_j
    let dy: Vec<DMatrix<f64>> = dk.iter().map(|d| d * &data.m_basis).collect();

    let gram = symmetrize(&(y.transpose() * &h * &y));
    let chol = gram
        .cholesky()
        .ok_or_else(|| GeomError::numerical(x.as_slice(), "vertical fields are dependent"))?;
    let m = chol
        .l()
        .try_inverse()
        .ok_or_else(|| GeomError::numerical(x.as_slice(), "singular vertical Gram factor"))?
        .transpose();
    let v = &y * &m;

    // horizontal part of nabla_{Y_a} Y_b
    let nabla = |a: usize, b: usize| -> DVector<f64> {
        let ya = y.column(a).into_owned();
        let yb = y.column(b).into_owned();
        let mut w = gamma.contract(&ya, &yb);
        for (k, d) in dy.iter().enumerate() {
            w += d.column(b) * ya[k];
        }
        w
    };
    let project = |w: DVector<f64>| -> DVector<f64> {
        let coeffs = v.transpose() * &h * &w;
        &w - &v * coeffs
    };
    let raw: Vec<Vec<DVector<f64>>> = (0..r)
        .map(|a| (0..r).map(|b| project(nabla(a, b))).collect())
        .collect();
    // components in the orthonormal vertical frame V = Y M
    let t = |i: usize, j: usize| -> DVector<f64> {
        let mut out = DVector::zeros(n);
        for a in 0..r {
            for b in 0..r {
                out += &raw[a][b] * (m[(a, i)] * m[(b, j)]);
            }
        }
        out
    };
    let frame: Vec<Vec<DVector<f64>>> = (0..r).map(|i| (0..r).map(|j| t(i, j)).collect()).collect();

    let value = if r == 1 {
        norm_in(&h, &frame[0][0])
    } else {
        bilinear_sup(&frame, &h)
    };
    Ok(sample(value))
}

fn eval_bilinear(frame: &[Vec<DVector<f64>>], u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(frame[0][0].len());
    for (i, row) in frame.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            out += t * (u[i] * v[j]);
        }
    }
    out
}

/// `sup |T(u, v)|_h` over unit `u, v` by alternating maximization from each basis start.
fn bilinear_sup(frame: &[Vec<DVector<f64>>], h: &DMatrix<f64>) -> f64 {
    let r = frame.len();
    let mut best = 0.0_f64;
    for start in 0..r {
        let mut u = DVector::from_fn(r, |i, _| if i == start { 1.0 } else { 0.0 });
        let mut v = u.clone();
        for _ in 0..100 {
            let w = eval_bilinear(frame, &u, &v);
            let len = norm_in(h, &w);
            best = best.max(len);
            if len == 0.0 {
                break;
            }
            let w = w / len;
            // s_ij = h(w, T(e_i, e_j)); top singular pair of s
            let s = DMatrix::from_fn(r, r, |i, j| (w.transpose() * h * &frame[i][j])[(0, 0)]);
            let svd = s.svd(true, true);
            let idx = svd.singular_values.imax();
            u = svd.u.as_ref().unwrap().column(idx).into_owned();
            v = svd.v_t.as_ref().unwrap().row(idx).transpose();
        }
    }
    best
}

//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn is_spd(m: &DMatrix<f64>, floor: f64) -> bool {
    m.nrows() == m.ncols() && min_eigenvalue(m) > floor
}

/// `sup |a(u, v)|` over `g`-unit vectors `u, v`, for symmetric `a` and SPD `g`.
///
/// Equals the largest absolute generalized eigenvalue of the pencil `(a, g)`.
pub fn unit_sphere_sup(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Option<f64> {
    if a.is_empty() {
        return Some(0.0);
    }
    let chol = g.clone().cholesky()?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let whitened = symmetrize(&(&linv * a * linv.transpose()));
    Some(
        whitened
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs())),
    )
}

/// `g`-norm of a vector.
pub fn norm_in(g: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (v.transpose() * g * v)[(0, 0)].max(0.0).sqrt()
}

pub fn inner_in(g: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (u.transpose() * g * v)[(0, 0)]
}

/// Flips the sign of each column so that its first component above `eps` in
/// magnitude is positive.
pub fn canonical_signs(m: &mut DMatrix<f64>, eps: f64) {
    for mut col in m.column_iter_mut() {
        if let Some(first) = col.iter().copied().find(|c| c.abs() > eps) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

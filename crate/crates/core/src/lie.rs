//! Catalogued compact matrix Lie groups with a bi-invariant inner product.
//!
//! Each group is given in a real defining representation together with a
//! basis of its Lie algebra that is orthonormal for the bi-invariant form.
//! Algebra elements are handled as coefficient vectors in that basis.

use crate::error::{GeomError, Result};
use crate::linalg::{is_spd, max_abs};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GroupKind {
    /// The circle, as rotations of the plane.
    U1,
    /// The 2-torus, as block-diagonal pairs of plane rotations.
    T2,
    /// Unit quaternions acting on `R^4` by left multiplication.
    Su2,
}

/// Basis `k_i` of the Lie algebra with structure constants
/// `[k_i, k_j] = sum_m c[i][j][m] k_m`.
#[derive(Clone, Debug)]
pub struct LieAlgebraBasis {
    basis: Vec<DMatrix<f64>>,
    structure_constants: Vec<Vec<Vec<f64>>>,
    gram_inv: DMatrix<f64>,
}

/// The bi-invariant form on the algebra, `B[i][j] = g_bi(k_i, k_j)`.
#[derive(Clone, Debug)]
pub struct BiInvariantForm {
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct LieGroup {
    kind: GroupKind,
    algebra: LieAlgebraBasis,
    form: BiInvariantForm,
}

fn plane_rotation_generator() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
}

/// Matrix of left multiplication by the quaternion `w + x i + y j + z k`.
pub fn quaternion_left(q: [f64; 4]) -> DMatrix<f64> {
    let [w, x, y, z] = q;
    DMatrix::from_row_slice(
        4,
        4,
        &[
            w, -x, -y, -z, //
            x, w, -z, y, //
            y, z, w, -x, //
            z, -y, x, w,
        ],
    )
}

fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

impl LieAlgebraBasis {
    /// Builds the basis and derives structure constants by projecting commutators.
    pub fn new(basis: Vec<DMatrix<f64>>) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(GeomError::Algebra("empty basis".into()));
        }
        let gram = DMatrix::from_fn(d, d, |i, j| frobenius(&basis[i], &basis[j]));
        if !is_spd(&gram, 1e-12) {
            return Err(GeomError::Algebra(
                "generators are linearly dependent".into(),
            ));
        }
        let gram_inv = gram
            .try_inverse()
            .ok_or_else(|| GeomError::Algebra("singular Gram matrix".into()))?;
        let mut alg = LieAlgebraBasis {
            basis,
            structure_constants: Vec::new(),
            gram_inv,
        };
        let mut c = vec![vec![vec![0.0; d]; d]; d];
        for i in 0..d {
            for j in 0..d {
                let comm = &alg.basis[i] * &alg.basis[j] - &alg.basis[j] * &alg.basis[i];
                let coeffs = alg.project(&comm)?;
                for m in 0..d {
                    c[i][j][m] = coeffs[m];
                }
            }
        }
        alg.structure_constants = c;
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn structure_constants(&self) -> &[Vec<Vec<f64>>] {
        &self.structure_constants
    }

    /// Matrix `sum_i a_i k_i`.
    pub fn element(&self, coeffs: &DVector<f64>) -> DMatrix<f64> {
        let n = self.basis[0].nrows();
        self.basis
            .iter()
            .zip(coeffs.iter())
            .fold(DMatrix::zeros(n, n), |acc, (k, a)| acc + k * *a)
    }

    /// Coefficients of a matrix in the basis; fails if it is not in the span.
    pub fn project(&self, m: &DMatrix<f64>) -> Result<DVector<f64>> {
        let d = self.dim();
        let rhs = DVector::from_fn(d, |i, _| frobenius(&self.basis[i], m));
        let coeffs = &self.gram_inv * rhs;
        let residual = max_abs(&(self.element(&coeffs) - m));
        if residual > 1e-10 {
            return Err(GeomError::Algebra(format!(
                "matrix is not in the algebra (projection residual {residual:e})"
            )));
        }
        Ok(coeffs)
    }

    /// Largest violation of antisymmetry and the Jacobi identity over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let c = &self.structure_constants;
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for m in 0..d {
                    worst = worst.max((c[i][j][m] + c[j][i][m]).abs());
                }
                for k in 0..d {
                    // [[k_i,k_j],k_k] + [[k_j,k_k],k_i] + [[k_k,k_i],k_j]
                    for out in 0..d {
                        let mut s = 0.0;
                        for m in 0..d {
                            s += c[i][j][m] * c[m][k][out]
                                + c[j][k][m] * c[m][i][out]
                                + c[k][i][m] * c[m][j][out];
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

impl BiInvariantForm {
    pub fn identity(dim: usize) -> Self {
        BiInvariantForm {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a.transpose() * &self.matrix * b)[(0, 0)]
    }

    /// Largest `|B([a,b],c) + B(b,[a,c])|` over basis triples.
    pub fn ad_invariance_residual(&self, algebra: &LieAlgebraBasis) -> f64 {
        let d = algebra.dim();
        let c = algebra.structure_constants();
        let b = &self.matrix;
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut s = 0.0;
                    for m in 0..d {
                        s += c[i][j][m] * b[(m, k)] + b[(j, m)] * c[i][k][m];
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }
}

impl LieGroup {
    pub fn new(kind: GroupKind) -> Self {
        let basis = match kind {
            GroupKind::U1 => vec![plane_rotation_generator()],
            GroupKind::T2 => {
                let j = plane_rotation_generator();
                let mut a = DMatrix::zeros(4, 4);
                let mut b = DMatrix::zeros(4, 4);
                a.view_mut((0, 0), (2, 2)).copy_from(&j);
                b.view_mut((2, 2), (2, 2)).copy_from(&j);
                vec![a, b]
            }
            // Half unit imaginary quaternions: exp(t k) has period 4 pi and
            // [k_1, k_2] = k_3.
            GroupKind::Su2 => vec![
                quaternion_left([0.0, 1.0, 0.0, 0.0]) * 0.5,
                quaternion_left([0.0, 0.0, 1.0, 0.0]) * 0.5,
                quaternion_left([0.0, 0.0, 0.0, 1.0]) * 0.5,
            ],
        };
        let algebra = LieAlgebraBasis::new(basis).expect("catalogued algebra is closed");
        let form = BiInvariantForm::identity(algebra.dim());
        LieGroup {
            kind,
            algebra,
            form,
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn algebra(&self) -> &LieAlgebraBasis {
        &self.algebra
    }

    pub fn form(&self) -> &BiInvariantForm {
        &self.form
    }

    pub fn identity(&self) -> GroupElement {
        let n = self.algebra.basis[0].nrows();
        GroupElement {
            matrix: DMatrix::identity(n, n),
        }
    }

    /// `exp(t * sum_i a_i k_i)`.
    pub fn exp_map(&self, coeffs: &DVector<f64>, t: f64) -> GroupElement {
        assert_eq!(coeffs.len(), self.dim(), "coefficient vector length");
        GroupElement {
            matrix: (self.algebra.element(coeffs) * t).exp(),
        }
    }

    /// Coefficients of `[a, b]`, computed from the matrix commutator.
    pub fn bracket(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        let am = self.algebra.element(a);
        let bm = self.algebra.element(b);
        self.algebra.project(&(&am * &bm - &bm * &am))
    }

    pub fn compose(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &g.matrix * &h.matrix,
        }
    }

    /// Distance of a matrix from the catalogued group.
    pub fn membership_residual(&self, g: &GroupElement) -> f64 {
        let m = &g.matrix;
        let n = m.nrows();
        let orth = max_abs(&(m.transpose() * m - DMatrix::identity(n, n)));
        let det = (m.determinant() - 1.0).abs();
        let shape = match self.kind {
            GroupKind::U1 => 0.0,
            GroupKind::T2 => {
                let mut off: f64 = 0.0;
                for i in 0..2 {
                    for j in 2..4 {
                        off = off.max(m[(i, j)].abs()).max(m[(j, i)].abs());
                    }
                }
                off
            }
            GroupKind::Su2 => {
                let q = quaternion_of(g);
                max_abs(&(quaternion_left(q) - m))
            }
        };
        orth.max(det).max(shape)
    }

    /// `exp` of a coefficient vector drawn uniformly from `[-2 pi, 2 pi]^d`.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> GroupElement {
        let tau = std::f64::consts::TAU;
        let a = DVector::from_fn(self.dim(), |_, _| rng.random_range(-tau..tau));
        self.exp_map(&a, 1.0)
    }
}

/// Rotation angle of each plane block of a `U(1)` or `T^2` element.
pub fn circle_angles(g: &GroupElement) -> Vec<f64> {
    let m = &g.matrix;
    (0..m.nrows() / 2)
        .map(|b| m[(2 * b + 1, 2 * b)].atan2(m[(2 * b, 2 * b)]))
        .collect()
}

/// Unit quaternion `(w, x, y, z)` of an `SU(2)` element (first column of its matrix).
pub fn quaternion_of(g: &GroupElement) -> [f64; 4] {
    let m = &g.matrix;
    [m[(0, 0)], m[(1, 0)], m[(2, 0)], m[(3, 0)]]
}

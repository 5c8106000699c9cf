//! Small dense linear-algebra helpers shared by the models and index code.

use nalgebra::{DMatrix, DVector};

use crate::ad::Real;

/// Gaussian elimination with partial pivoting over any [`Real`] scalar.
///
/// Pivoting decisions use the underlying `f64` values, so the same elimination
/// order is used for plain and dual evaluations. Returns `None` when a pivot is
/// below `rel_tol` times the largest entry of the matrix.
pub fn solve_generic<S: Real>(mut a: Vec<Vec<S>>, mut b: Vec<S>, rel_tol: f64) -> Option<Vec<S>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(|x| x.value().abs()))
        .fold(0.0_f64, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .value()
                    .abs()
                    .partial_cmp(&a[j][col].value().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[piv][col].value().abs() <= rel_tol * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for row in col + 1..n {
            let factor = a[row][col] * inv;
            for k in col..n {
                let t = a[col][k];
                a[row][k] -= factor * t;
            }
            let t = b[col];
            b[row] -= factor * t;
        }
    }
    let mut x = vec![S::cst(0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Determinant by elimination over any [`Real`] scalar.
pub fn det_generic<S: Real>(mut a: Vec<Vec<S>>) -> S {
    let n = a.len();
    let mut det = S::cst(1.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .value()
                    .abs()
                    .partial_cmp(&a[j][col].value().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[piv][col].value() == 0.0 {
            return S::cst(0.0);
        }
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col];
        let inv = a[col][col].recip();
        for row in col + 1..n {
            let factor = a[row][col] * inv;
            for k in col..n {
                let t = a[col][k];
                a[row][k] -= factor * t;
            }
        }
    }
    det
}

/// The standard complex structure `J0 = [[0, -I], [I, 0]]` on R^{2n}.
pub fn j0(two_n: usize) -> DMatrix<f64> {
    let n = two_n / 2;
    let mut j = DMatrix::zeros(two_n, two_n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// `‖Φᵀ J0 Φ − J0‖` (Frobenius).
pub fn symplectic_defect(phi: &DMatrix<f64>) -> f64 {
    let j = j0(phi.nrows());
    (phi.transpose() * &j * phi - j).norm()
}

/// Rotation by `angle` radians in the plane, i.e. `exp(angle · J0)` for 2n = 2.
pub fn rotation2(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Orthonormal basis (columns) of the approximate null space of `a`, using
/// singular values below `tol`.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    let square = if a.nrows() < n {
        a.clone().resize_vertically(n, 0.0)
    } else {
        a.clone()
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Smallest singular value.
pub fn sigma_min(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Minimum-norm least-squares solution of `a x = b` with a relative rank cutoff.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_cutoff: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (smax * rel_cutoff).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Inertia of a symmetric matrix: (positive, negative, near-zero) eigenvalue counts.
pub fn inertia(sym: &DMatrix<f64>, zero_tol: f64) -> (usize, usize, usize) {
    let s = (sym + sym.transpose()) * 0.5;
    let eig = s.symmetric_eigen();
    let mut out = (0, 0, 0);
    for &e in eig.eigenvalues.iter() {
        if e > zero_tol {
            out.0 += 1;
        } else if e < -zero_tol {
            out.1 += 1;
        } else {
            out.2 += 1;
        }
    }
    out
}

pub fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generic_solve_matches_nalgebra() {
        let rows = vec![vec![2.0, 1.0, -1.0], vec![-3.0, -1.0, 2.0], vec![-2.0, 1.0, 2.0]];
        let b = vec![8.0, -11.0, -3.0];
        let x = solve_generic(rows.clone(), b.clone(), 1e-14).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
        assert!((x[2] + 1.0).abs() < 1e-12);
        let d = det_generic(rows.clone());
        let dm = to_dmatrix(&rows).determinant();
        assert!((d - dm).abs() < 1e-12);
    }

    #[test]
    fn zero_valued_factors_keep_their_derivatives() {
        use crate::ad::seed;
        // a(s) = [[1, s], [s, 1]] at s = 0: x = a⁻¹ e₁ has dx₁/ds = −1
        let s = seed(&[0.0])[0];
        let one = crate::ad::Dual::constant(1.0);
        let zero = crate::ad::Dual::constant(0.0);
        let x = solve_generic(vec![vec![one, s], vec![s, one]], vec![one, zero], 1e-12).unwrap();
        assert!((x[1].eps[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_system_is_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_generic(rows, vec![1.0, 1.0], 1e-12).is_none());
    }

    #[test]
    fn rotations_are_symplectic() {
        assert!(symplectic_defect(&rotation2(0.77)) < 1e-14);
        let shear = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 1.0]);
        assert!(symplectic_defect(&shear) < 1e-14);
    }

    #[test]
    fn null_space_of_shear() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let k = null_space(&a, 1e-9);
        assert_eq!(k.ncols(), 1);
        assert!((k[(0, 0)].abs() - 1.0).abs() < 1e-12);
    }
}

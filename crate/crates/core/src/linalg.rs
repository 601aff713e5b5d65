//! Small dense determinant machinery: pivoted elimination and the adjugate.
//!
//! Everything here runs on matrices of side ≤ the party count, so cubic and
//! even quintic costs are irrelevant; what matters is a deterministic,
//! allocation-light implementation with well-defined behavior on singular
//! input.

use nalgebra::DMatrix;

/// Determinant by Gaussian elimination with partial pivoting.
///
/// Singular matrices (an exactly zero pivot column) return 0.
pub fn det_pivoted(a: &DMatrix<f64>) -> f64 {
    assert_eq!(a.nrows(), a.ncols(), "determinant of a non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    let mut m = a.clone();
    let mut det = 1.0f64;
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[(col, col)].abs();
        for row in (col + 1)..n {
            let cand = m[(row, col)].abs();
            if cand > best {
                best = cand;
                pivot = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap_rows(pivot, col);
            det = -det;
        }
        let d = m[(col, col)];
        det *= d;
        for row in (col + 1)..n {
            let factor = m[(row, col)] / d;
            if factor != 0.0 {
                for c in col..n {
                    m[(row, c)] -= factor * m[(col, c)];
                }
            }
        }
    }
    det
}

/// Adjugate via cofactors: `adj(A)[i][j] = (−1)^{i+j} det(A del row j, col i)`.
///
/// Satisfies `A · adj(A) = det(A) · I` including on singular input, which is
/// why the determinant gradient uses it instead of an inverse.
pub fn adjugate(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), a.ncols(), "adjugate of a non-square matrix");
    let n = a.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let mut adj = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let minor = deleted(a, j, i);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[(i, j)] = sign * det_pivoted(&minor);
        }
    }
    adj
}

/// Copy of `a` with one row and one column removed.
fn deleted(a: &DMatrix<f64>, row: usize, col: usize) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(n - 1, n - 1, |i, j| {
        let si = if i < row { i } else { i + 1 };
        let sj = if j < col { j } else { j + 1 };
        a[(si, sj)]
    })
}

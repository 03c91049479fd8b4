use nalgebra::{DMatrix, DVector};

/// Relative residual below which a column counts as a linear combination
/// of the columns before it.
const DEPENDENCE_TOL: f64 = 1e-10;

/// Indices of columns of `z` that lie (numerically) in the span of the
/// preceding columns, plus the constant vector when `with_constant` is set.
/// Uses twice-iterated modified Gram–Schmidt.
pub(crate) fn dependent_columns(z: &DMatrix<f64>, with_constant: bool) -> Vec<usize> {
    let n = z.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    if with_constant {
        basis.push(DVector::from_element(n, 1.0 / (n as f64).sqrt()));
    }
    let mut dependent = Vec::new();
    for (j, col) in z.column_iter().enumerate() {
        let mut v = col.into_owned();
        let norm0 = v.norm_squared();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let norm = v.norm_squared();
        if norm0 == 0.0 || norm <= DEPENDENCE_TOL * norm0 {
            dependent.push(j);
        } else {
            basis.push(v / norm.sqrt());
        }
    }
    dependent
}

/// Inverse of a symmetric positive-definite matrix, `None` when the
/// Cholesky factorization fails.
pub(crate) fn spd_inverse(h: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = h.clone().cholesky()?;
    let inv = chol.inverse();
    if inv.iter().all(|v| v.is_finite()) {
        Some(inv)
    } else {
        None
    }
}

pub(crate) fn amax(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_duplicate_and_constant_columns() {
        let z = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.5, 1.0, 2.0, //
                2.0, 0.5, 2.0, 2.0, //
                3.0, 0.5, 3.0, 2.0, //
                5.0, 0.5, 5.0, 2.0,
            ],
        );
        assert_eq!(dependent_columns(&z, false), vec![2, 3]);
        assert_eq!(dependent_columns(&z, true), vec![1, 2, 3]);
    }

    #[test]
    fn inverse_of_spd() {
        let h = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let inv = spd_inverse(&h).unwrap();
        let eye = &h * &inv;
        assert!((eye - DMatrix::identity(2, 2)).amax() < 1e-14);
        assert!(spd_inverse(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).is_none());
    }
}

//! Closed-form per-class updates of the alternating solver.
//!
//! With the reweighting diagonal `D` held fixed, the skeleton column update
//! solves `(T T^T + lambda1 D_S^c) w_c = T (y_c - O^T u_c)` and the object
//! column update solves `(O O^T + lambda2 D_A^c) u_c = O (y_c - T^T w_c)`.
//! Both systems are symmetric positive definite whenever `lambda > 0`, so
//! they are factored with Cholesky rather than inverted.

use alloc::format;
use alloc::vec::Vec;

use crate::cholesky::Cholesky;
use crate::data::Dataset;
use crate::error::{check_len, Error, Result};
use crate::matrix::Matrix;

/// Which half of the model a system belongs to; only used for messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Skeleton,
    Objects,
}

/// New `w_c` for class column `y_c` with `u_c` and `D_S^c` held fixed.
pub fn update_w_c(dataset: &Dataset, u_c: &[f64], y_c: &[f64], d_s: &[f64], lambda1: f64) -> Result<Vec<f64>> {
    check_len("object weight column", dataset.layout().object_dim(), u_c.len())?;
    check_len("reweighting diagonal", dataset.layout().skeleton_dim(), d_s.len())?;
    let rhs = projected_target(dataset.skeleton(), dataset.objects(), u_c, y_c)?;
    solve_reweighted(&dataset.skeleton().gram(), d_s, lambda1, &rhs, Side::Skeleton)
}

/// New `u_c` for class column `y_c` with `w_c` and `D_A^c` held fixed.
pub fn update_u_c(dataset: &Dataset, w_c: &[f64], y_c: &[f64], d_a: &[f64], lambda2: f64) -> Result<Vec<f64>> {
    check_len("skeleton weight column", dataset.layout().skeleton_dim(), w_c.len())?;
    check_len("reweighting diagonal", dataset.layout().object_dim(), d_a.len())?;
    let rhs = projected_target(dataset.objects(), dataset.skeleton(), w_c, y_c)?;
    solve_reweighted(&dataset.objects().gram(), d_a, lambda2, &rhs, Side::Objects)
}

// `A (y - B^T x)` with A, B observation matrices (features x N).
fn projected_target(a: &Matrix, b: &Matrix, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_len("label column", a.cols(), y.len())?;
    let fitted = b.transpose_mul_vec(x);
    let target: Vec<f64> = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    Ok(a.mul_vec(&target))
}

/// Solves `(gram + lambda diag(d)) x = rhs`.
pub(crate) fn solve_reweighted(gram: &Matrix, d: &[f64], lambda: f64, rhs: &[f64], side: Side) -> Result<Vec<f64>> {
    let mut system = gram.clone();
    if lambda != 0.0 {
        for (i, di) in d.iter().enumerate() {
            system[(i, i)] += lambda * di;
        }
    }
    let chol = Cholesky::factor(&system).map_err(|e| match e {
        Error::Singular(detail) => Error::Singular(singular_message(side, lambda, &detail)),
        other => other,
    })?;
    Ok(chol.solve(rhs))
}

fn singular_message(side: Side, lambda: f64, detail: &str) -> alloc::string::String {
    let (gram, name) = match side {
        Side::Skeleton => ("T T^T", "lambda1"),
        Side::Objects => ("O O^T", "lambda2"),
    };
    if lambda == 0.0 {
        format!("{name} = 0 and {gram} is singular (rank-deficient features or fewer instances than features); {detail}")
    } else {
        format!("{gram} + {name} D is not positive definite; {detail}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FeatureLayout;
    use alloc::string::String;
    use alloc::vec;

    fn identity_dataset() -> Dataset {
        // d_T = d_O = N = 3, T = O = I
        let layout = FeatureLayout::new(vec![1, 2], 1, vec![3]).unwrap();
        Dataset::from_class_indices(
            layout,
            Matrix::identity(3),
            Matrix::identity(3),
            &[0, 1, 0],
            vec![String::from("a"), String::from("b")],
        )
        .unwrap()
    }

    #[test]
    fn identity_design_returns_labels() {
        let ds = identity_dataset();
        let y = ds.label_column(0);
        let w = update_w_c(&ds, &[0.0; 3], &y, &[1.0; 3], 0.0).unwrap();
        assert_eq!(w, y);
        let u = update_u_c(&ds, &[0.0; 3], &y, &[1.0; 3], 0.0).unwrap();
        assert_eq!(u, y);
    }

    #[test]
    fn rank_deficient_without_regularization_is_singular() {
        // Two identical instances: T T^T has rank 1 < d_T = 2.
        let layout = FeatureLayout::new(vec![2], 1, vec![1]).unwrap();
        let t = Matrix::from_row_major(2, 2, vec![1.0, 1.0, 2.0, 2.0]).unwrap();
        let o = Matrix::from_row_major(1, 2, vec![1.0, -1.0]).unwrap();
        let ds = Dataset::from_class_indices(layout, t, o, &[0, 1], vec![String::from("a"), String::from("b")]).unwrap();
        let err = update_w_c(&ds, &[0.0], &ds.label_column(0), &[1.0, 1.0], 0.0).unwrap_err();
        match err {
            Error::Singular(msg) => assert!(msg.contains("lambda1 = 0"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        // Any positive lambda makes the system definite.
        assert!(update_w_c(&ds, &[0.0], &ds.label_column(0), &[1.0, 1.0], 1e-3).is_ok());
    }

    #[test]
    fn dimension_checks() {
        let ds = identity_dataset();
        let y = ds.label_column(0);
        assert!(update_w_c(&ds, &[0.0; 2], &y, &[1.0; 3], 0.1).is_err());
        assert!(update_w_c(&ds, &[0.0; 3], &y, &[1.0; 2], 0.1).is_err());
        assert!(update_w_c(&ds, &[0.0; 3], &y[..2], &[1.0; 3], 0.1).is_err());
        assert!(update_u_c(&ds, &[0.0; 3], &y, &[1.0; 4], 0.1).is_err());
    }
}

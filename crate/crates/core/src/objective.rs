//! Group norms, the regression loss and the regularized objective.

use crate::data::Dataset;
use crate::error::{check_len, Error, Result};
use crate::layout::FeatureLayout;
use crate::math::norm2;
use crate::matrix::Matrix;

/// Sum over classes and joints of the Euclidean norm of each per-joint block
/// of `w`.
pub fn skeletal_norm(w: &Matrix, layout: &FeatureLayout) -> Result<f64> {
    check_len("skeleton weight rows", layout.skeleton_dim(), w.rows())?;
    Ok((0..w.cols())
        .map(|c| block_norm_sum(&w.column(c), layout.joint_ranges()))
        .sum())
}

/// Sum over classes, objects and modalities of the Euclidean norm of each
/// object/modality block of `u`.
pub fn attribute_norm(u: &Matrix, layout: &FeatureLayout) -> Result<f64> {
    check_len("object weight rows", layout.object_dim(), u.rows())?;
    Ok((0..u.cols())
        .map(|c| block_norm_sum(&u.column(c), layout.attribute_ranges()))
        .sum())
}

fn block_norm_sum(col: &[f64], ranges: impl Iterator<Item = core::ops::Range<usize>>) -> f64 {
    ranges.map(|r| norm2(&col[r])).sum()
}

/// `T^T W + O^T U - Y`, an `N x C` matrix.
pub fn residual(dataset: &Dataset, w: &Matrix, u: &Matrix) -> Result<Matrix> {
    check_weights(dataset, w, u)?;
    let mut r = dataset.skeleton().transpose_mul(w);
    let ou = dataset.objects().transpose_mul(u);
    for ((r, a), y) in r
        .as_mut_slice()
        .iter_mut()
        .zip(ou.as_slice())
        .zip(dataset.labels().as_slice())
    {
        *r += a - y;
    }
    Ok(r)
}

/// Squared Frobenius norm of the residual.
pub fn loss(dataset: &Dataset, w: &Matrix, u: &Matrix) -> Result<f64> {
    Ok(residual(dataset, w, u)?.frobenius_sq())
}

/// `loss + lambda1 * skeletal_norm(W) + lambda2 * attribute_norm(U)`.
pub fn objective(dataset: &Dataset, w: &Matrix, u: &Matrix, lambda1: f64, lambda2: f64) -> Result<f64> {
    check_lambda("lambda1", lambda1)?;
    check_lambda("lambda2", lambda2)?;
    let layout = dataset.layout();
    Ok(loss(dataset, w, u)?
        + lambda1 * skeletal_norm(w, layout)?
        + lambda2 * attribute_norm(u, layout)?)
}

pub(crate) fn check_lambda(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig {
            field,
            reason: alloc::format!("must be finite and >= 0, got {value}"),
        })
    }
}

pub(crate) fn check_weights(dataset: &Dataset, w: &Matrix, u: &Matrix) -> Result<()> {
    let layout = dataset.layout();
    check_len("skeleton weight rows", layout.skeleton_dim(), w.rows())?;
    check_len("object weight rows", layout.object_dim(), u.rows())?;
    check_len("skeleton weight columns", dataset.class_count(), w.cols())?;
    check_len("object weight columns", dataset.class_count(), u.cols())
}

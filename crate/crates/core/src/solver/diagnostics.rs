//! Executable forms of the convergence argument: the norm inequality behind
//! the monotone decrease, a first-order stationarity measure, and a smoothed
//! objective with its analytic gradient.

use alloc::vec::Vec;
use core::ops::Range;

use super::reweight::block_diagonal;
use crate::data::Dataset;
use crate::error::{check_len, Error, Result};
use crate::math::{dot, norm2, sqrt};
use crate::matrix::Matrix;
use crate::model::Model;
use crate::objective::{check_lambda, check_weights, residual};

/// Checks `||v~|| - ||v~||^2 / (2||v||) <= ||v|| - ||v||^2 / (2||v||)` with an
/// absolute slack of `1e-12`. `v` must be nonzero.
pub fn check_lemma1(v: &[f64], v_tilde: &[f64]) -> Result<bool> {
    let nv = norm2(v);
    if nv.is_nan() || nv <= 0.0 {
        return Err(Error::Precondition("reference vector must have nonzero norm".into()));
    }
    let nt = norm2(v_tilde);
    let lhs = nt - nt * nt / (2.0 * nv);
    let rhs = nv - nv * nv / (2.0 * nv);
    Ok(lhs <= rhs + 1e-12)
}

/// Largest normalized residual of the first-order conditions
///
/// ```text
/// T T^T w_c + T O^T u_c - T y_c + lambda1 D_S^c w_c = 0
/// O O^T u_c + O T^T w_c - O y_c + lambda2 D_A^c u_c = 0
/// ```
///
/// with `D` built from the model's own weights. The `w_c` residual is divided
/// by `1 + ||w_c||` and the `u_c` residual by `1 + ||u_c||`.
pub fn stationarity_residual(dataset: &Dataset, model: &Model, lambda1: f64, lambda2: f64, epsilon: f64) -> Result<f64> {
    check_lambda("lambda1", lambda1)?;
    check_lambda("lambda2", lambda2)?;
    let (w, u) = (model.skeleton_weights(), model.object_weights());
    check_weights(dataset, w, u)?;
    let layout = dataset.layout();
    // R = T^T W + O^T U - Y, so T R and O R are the loss half-gradients.
    let r = residual(dataset, w, u)?;
    let tr = dataset.skeleton().transpose().transpose_mul(&r);
    let or = dataset.objects().transpose().transpose_mul(&r);

    let mut worst: f64 = 0.0;
    for c in 0..dataset.class_count() {
        let w_c = w.column(c);
        let d_s = block_diagonal(&w_c, layout.joint_ranges(), epsilon);
        let g_w: Vec<f64> = (0..w_c.len())
            .map(|i| tr[(i, c)] + lambda1 * d_s[i] * w_c[i])
            .collect();
        worst = worst.max(norm2(&g_w) / (1.0 + norm2(&w_c)));

        let u_c = u.column(c);
        let d_a = block_diagonal(&u_c, layout.attribute_ranges(), epsilon);
        let g_u: Vec<f64> = (0..u_c.len())
            .map(|i| or[(i, c)] + lambda2 * d_a[i] * u_c[i])
            .collect();
        worst = worst.max(norm2(&g_u) / (1.0 + norm2(&u_c)));
    }
    Ok(worst)
}

/// Objective with every block norm `||b||` replaced by `sqrt(||b||^2 + eps^2)`.
pub fn smoothed_objective(dataset: &Dataset, w: &Matrix, u: &Matrix, lambda1: f64, lambda2: f64, epsilon: f64) -> Result<f64> {
    check_lambda("lambda1", lambda1)?;
    check_lambda("lambda2", lambda2)?;
    let layout = dataset.layout();
    let loss = residual(dataset, w, u)?.frobenius_sq();
    let joints: Vec<_> = layout.joint_ranges().collect();
    let blocks: Vec<_> = layout.attribute_ranges().collect();
    let s = smoothed_norm(w, &joints, epsilon);
    let a = smoothed_norm(u, &blocks, epsilon);
    Ok(loss + lambda1 * s + lambda2 * a)
}

fn smoothed_norm(m: &Matrix, ranges: &[Range<usize>], epsilon: f64) -> f64 {
    (0..m.cols())
        .map(|c| {
            let col = m.column(c);
            ranges
                .iter()
                .map(|r| sqrt(dot(&col[r.clone()], &col[r.clone()]) + epsilon * epsilon))
                .sum::<f64>()
        })
        .sum()
}

/// Gradient of [`smoothed_objective`] with respect to `W` and `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedGradient {
    pub skeleton: Matrix,
    pub objects: Matrix,
}

pub fn smoothed_gradient(dataset: &Dataset, w: &Matrix, u: &Matrix, lambda1: f64, lambda2: f64, epsilon: f64) -> Result<SmoothedGradient> {
    check_lambda("lambda1", lambda1)?;
    check_lambda("lambda2", lambda2)?;
    let layout = dataset.layout();
    let r = residual(dataset, w, u)?;
    let mut gw = dataset.skeleton().transpose().transpose_mul(&r).scaled(2.0);
    let mut gu = dataset.objects().transpose().transpose_mul(&r).scaled(2.0);
    let joints: Vec<_> = layout.joint_ranges().collect();
    let blocks: Vec<_> = layout.attribute_ranges().collect();
    add_smoothed_penalty(&mut gw, w, &joints, lambda1, epsilon)?;
    add_smoothed_penalty(&mut gu, u, &blocks, lambda2, epsilon)?;
    Ok(SmoothedGradient {
        skeleton: gw,
        objects: gu,
    })
}

fn add_smoothed_penalty(
    grad: &mut Matrix,
    m: &Matrix,
    ranges: &[Range<usize>],
    lambda: f64,
    epsilon: f64,
) -> Result<()> {
    check_len("gradient rows", m.rows(), grad.rows())?;
    for c in 0..m.cols() {
        let col = m.column(c);
        for r in ranges {
            let block = &col[r.clone()];
            let denom = sqrt(dot(block, block) + epsilon * epsilon);
            for i in r.clone() {
                grad[(i, c)] += lambda * col[i] / denom;
            }
        }
    }
    Ok(())
}

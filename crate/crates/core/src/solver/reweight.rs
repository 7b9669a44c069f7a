use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{check_len, Result};
use crate::layout::FeatureLayout;
use crate::math::norm2;

/// Diagonal of the skeleton reweighting matrix `D_S^c` for column `w_c`.
///
/// Every entry of joint block `j` equals `1 / (2 max(||w_c^j||, epsilon))`.
pub fn build_d_s(w_c: &[f64], layout: &FeatureLayout, epsilon: f64) -> Result<Vec<f64>> {
    check_len("skeleton weight column", layout.skeleton_dim(), w_c.len())?;
    Ok(block_diagonal(w_c, layout.joint_ranges(), epsilon))
}

/// Diagonal of the attribute reweighting matrix `D_A^c` for column `u_c`,
/// one constant block per (object, modality).
pub fn build_d_a(u_c: &[f64], layout: &FeatureLayout, epsilon: f64) -> Result<Vec<f64>> {
    check_len("object weight column", layout.object_dim(), u_c.len())?;
    Ok(block_diagonal(u_c, layout.attribute_ranges(), epsilon))
}

pub(crate) fn block_diagonal(
    column: &[f64],
    ranges: impl Iterator<Item = Range<usize>>,
    epsilon: f64,
) -> Vec<f64> {
    let mut d = vec![0.0; column.len()];
    for r in ranges {
        let value = 1.0 / (2.0 * norm2(&column[r.clone()]).max(epsilon));
        d[r].fill(value);
    }
    d
}

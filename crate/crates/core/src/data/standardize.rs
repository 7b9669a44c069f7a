use alloc::format;
use alloc::vec::Vec;

use super::Dataset;
use crate::error::{check_len, Error, Result};
use crate::matrix::Matrix;

/// Per-feature affine transform `(x - mean) / scale` learned from a
/// training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub skeleton_mean: Vec<f64>,
    pub skeleton_scale: Vec<f64>,
    pub object_mean: Vec<f64>,
    pub object_scale: Vec<f64>,
    /// Skeleton feature rows with zero variance (scale forced to 1).
    pub constant_skeleton: Vec<usize>,
    /// Object feature rows with zero variance (scale forced to 1).
    pub constant_objects: Vec<usize>,
}

/// Standardizes every feature row of `T` and `O` to zero mean and unit
/// (population) variance. Requires at least two instances.
pub fn standardize(dataset: &Dataset) -> Result<(Dataset, Standardizer)> {
    if dataset.len() < 2 {
        return Err(Error::Precondition(format!(
            "standardization needs at least 2 instances, got {}",
            dataset.len()
        )));
    }
    let (skeleton_mean, skeleton_scale, constant_skeleton) = row_stats(dataset.skeleton());
    let (object_mean, object_scale, constant_objects) = row_stats(dataset.objects());
    let s = Standardizer {
        skeleton_mean,
        skeleton_scale,
        object_mean,
        object_scale,
        constant_skeleton,
        constant_objects,
    };
    Ok((s.apply(dataset)?, s))
}

impl Standardizer {
    pub fn apply(&self, dataset: &Dataset) -> Result<Dataset> {
        let (t, o) = self.apply_features(dataset.skeleton(), dataset.objects())?;
        dataset.replace_features(t, o)
    }

    /// Transforms raw `d_T x N` / `d_O x N` feature matrices.
    pub fn apply_features(&self, skeleton: &Matrix, objects: &Matrix) -> Result<(Matrix, Matrix)> {
        check_len("skeleton rows", self.skeleton_mean.len(), skeleton.rows())?;
        check_len("object rows", self.object_mean.len(), objects.rows())?;
        Ok((
            transform(skeleton, &self.skeleton_mean, &self.skeleton_scale),
            transform(objects, &self.object_mean, &self.object_scale),
        ))
    }
}

fn transform(m: &Matrix, mean: &[f64], scale: &[f64]) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |r, c| (m[(r, c)] - mean[r]) / scale[r])
}

fn row_stats(m: &Matrix) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let n = m.cols() as f64;
    let mut means = Vec::with_capacity(m.rows());
    let mut scales = Vec::with_capacity(m.rows());
    let mut constant = Vec::new();
    for r in 0..m.rows() {
        let row = m.row(r);
        let mean = row.iter().sum::<f64>() / n;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = crate::math::sqrt(var);
        means.push(mean);
        if sd <= 1e-12 * mean.abs().max(1.0) {
            constant.push(r);
            scales.push(1.0);
        } else {
            scales.push(sd);
        }
    }
    (means, scales, constant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FeatureLayout;
    use alloc::string::String;
    use alloc::vec;

    fn ds() -> Dataset {
        let layout = FeatureLayout::new(vec![2], 1, vec![1]).unwrap();
        let t = Matrix::from_row_major(2, 4, vec![1.0, 2.0, 3.0, 10.0, 5.0, 5.0, 5.0, 5.0]).unwrap();
        let o = Matrix::from_row_major(1, 4, vec![-1.0, 0.5, 0.25, 8.0]).unwrap();
        Dataset::from_class_indices(layout, t, o, &[0, 1, 0, 1], vec![String::from("a"), String::from("b")]).unwrap()
    }

    #[test]
    fn zero_mean_unit_variance_and_constant_flag() {
        let (z, s) = standardize(&ds()).unwrap();
        assert_eq!(s.constant_skeleton, vec![1]);
        assert_eq!(s.skeleton_scale[1], 1.0);
        assert!(s.constant_objects.is_empty());
        for m in [z.skeleton(), z.objects()] {
            for r in 0..m.rows() {
                let row = m.row(r);
                let mean = row.iter().sum::<f64>() / 4.0;
                assert!(mean.abs() < 1e-12);
                let var = row.iter().map(|v| v * v).sum::<f64>() / 4.0;
                if !(m.rows() == 2 && r == 1) {
                    assert!((var - 1.0).abs() < 1e-12);
                }
            }
        }
        // Constant row is centered, not scaled.
        assert_eq!(z.skeleton().row(1), &[0.0; 4]);
    }

    #[test]
    fn recorded_transform_reproduces_training_output() {
        let d = ds();
        let (z, s) = standardize(&d).unwrap();
        assert_eq!(s.apply(&d).unwrap(), z);
    }

    #[test]
    fn needs_two_instances() {
        let one = ds().select(&[0]).unwrap();
        assert!(matches!(standardize(&one), Err(Error::Precondition(_))));
    }
}

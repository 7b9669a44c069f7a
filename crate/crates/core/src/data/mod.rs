//! Observation matrices and the pure data operations on them.

mod split;
mod standardize;
mod synth;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{check_finite, check_len, Error, Result};
use crate::layout::FeatureLayout;
use crate::matrix::Matrix;

pub use split::{split, Split};
pub use standardize::{standardize, Standardizer};
pub use synth::{generate, GeneratedData, SynthSpec};

/// Paired skeleton/object observations with one-hot labels.
///
/// Instances are columns: `skeleton` is `d_T x N`, `objects` is `d_O x N`,
/// and `labels` is `N x C` with exactly one 1 per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    layout: FeatureLayout,
    skeleton: Matrix,
    objects: Matrix,
    labels: Matrix,
    class_indices: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Validates and assembles a dataset from a one-hot label matrix.
    pub fn new(
        layout: FeatureLayout,
        skeleton: Matrix,
        objects: Matrix,
        labels: Matrix,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let class_indices = one_hot_indices(&labels)?;
        check_len("class names", labels.cols(), class_names.len())?;
        Dataset::assemble(layout, skeleton, objects, labels, class_indices, class_names)
    }

    /// Builds the one-hot label matrix from per-instance class indices.
    pub fn from_class_indices(
        layout: FeatureLayout,
        skeleton: Matrix,
        objects: Matrix,
        class_indices: &[usize],
        class_names: Vec<String>,
    ) -> Result<Self> {
        let c = class_names.len();
        if let Some(i) = class_indices.iter().position(|&k| k >= c) {
            return Err(Error::InvalidLabels(format!(
                "instance {i} has class index {} but only {c} classes exist",
                class_indices[i]
            )));
        }
        let labels = one_hot(class_indices, c);
        Dataset::assemble(
            layout,
            skeleton,
            objects,
            labels,
            class_indices.to_vec(),
            class_names,
        )
    }

    fn assemble(
        layout: FeatureLayout,
        skeleton: Matrix,
        objects: Matrix,
        labels: Matrix,
        class_indices: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        check_len("skeleton rows (d_T)", layout.skeleton_dim(), skeleton.rows())?;
        check_len("object rows (d_O)", layout.object_dim(), objects.rows())?;
        let n = skeleton.cols();
        check_len("object instances", n, objects.cols())?;
        check_len("label rows", n, labels.rows())?;
        if n == 0 {
            return Err(Error::Precondition("dataset has no instances".into()));
        }
        if labels.cols() < 2 {
            return Err(Error::InvalidLabels(format!(
                "at least 2 classes required, got {}",
                labels.cols()
            )));
        }
        check_finite("skeleton features", skeleton.as_slice())?;
        check_finite("object features", objects.as_slice())?;
        Ok(Dataset {
            layout,
            skeleton,
            objects,
            labels,
            class_indices,
            class_names,
        })
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    /// `T`, `d_T x N`.
    pub fn skeleton(&self) -> &Matrix {
        &self.skeleton
    }

    /// `O`, `d_O x N`.
    pub fn objects(&self) -> &Matrix {
        &self.objects
    }

    /// `Y`, `N x C`.
    pub fn labels(&self) -> &Matrix {
        &self.labels
    }

    pub fn class_indices(&self) -> &[usize] {
        &self.class_indices
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn len(&self) -> usize {
        self.skeleton.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn class_count(&self) -> usize {
        self.labels.cols()
    }

    /// Label column `y_c` for class `c`.
    pub fn label_column(&self, c: usize) -> Vec<f64> {
        self.labels.column(c)
    }

    /// Skeleton feature vector `t_i`.
    pub fn skeleton_instance(&self, i: usize) -> Vec<f64> {
        self.skeleton.column(i)
    }

    /// Object feature vector `o_i`.
    pub fn object_instance(&self, i: usize) -> Vec<f64> {
        self.objects.column(i)
    }

    /// Number of instances per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.class_count()];
        for &k in &self.class_indices {
            counts[k] += 1;
        }
        counts
    }

    /// New dataset holding the given instances in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        let n = self.len();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::Precondition(format!(
                "instance index {bad} out of range for {n} instances"
            )));
        }
        let t = Matrix::from_fn(self.skeleton.rows(), indices.len(), |r, c| {
            self.skeleton[(r, indices[c])]
        });
        let o = Matrix::from_fn(self.objects.rows(), indices.len(), |r, c| {
            self.objects[(r, indices[c])]
        });
        let classes: Vec<usize> = indices.iter().map(|&i| self.class_indices[i]).collect();
        Dataset::from_class_indices(self.layout.clone(), t, o, &classes, self.class_names.clone())
    }

    /// Appends a constant-1 skeleton feature as an extra joint block, giving
    /// the linear model an intercept.
    pub fn with_bias_joint(&self) -> Dataset {
        let d = self.skeleton.rows();
        let t = Matrix::from_fn(d + 1, self.len(), |r, c| {
            if r < d {
                self.skeleton[(r, c)]
            } else {
                1.0
            }
        });
        Dataset {
            layout: self.layout.with_bias_joint(),
            skeleton: t,
            ..self.clone()
        }
    }

    /// Same instances with the joint blocks of `T` reordered so that new joint
    /// `k` is old joint `perm[k]`.
    pub fn permute_joints(&self, perm: &[usize]) -> Result<Dataset> {
        let layout = self.layout.permute_joints(perm)?;
        let rows = permuted_rows(&self.layout, perm);
        let t = Matrix::from_fn(self.skeleton.rows(), self.len(), |r, c| {
            self.skeleton[(rows[r], c)]
        });
        Ok(Dataset {
            layout,
            skeleton: t,
            ..self.clone()
        })
    }

    pub(crate) fn replace_features(&self, skeleton: Matrix, objects: Matrix) -> Result<Dataset> {
        Dataset::assemble(
            self.layout.clone(),
            skeleton,
            objects,
            self.labels.clone(),
            self.class_indices.clone(),
            self.class_names.clone(),
        )
    }
}

/// Row map for a joint permutation: new row `r` reads old row `map[r]`.
pub(crate) fn permuted_rows(layout: &FeatureLayout, perm: &[usize]) -> Vec<usize> {
    perm.iter().flat_map(|&p| layout.joint_range(p)).collect()
}

fn one_hot(class_indices: &[usize], classes: usize) -> Matrix {
    let mut y = Matrix::zeros(class_indices.len(), classes);
    for (i, &k) in class_indices.iter().enumerate() {
        y[(i, k)] = 1.0;
    }
    y
}

fn one_hot_indices(labels: &Matrix) -> Result<Vec<usize>> {
    (0..labels.rows())
        .map(|i| {
            let row = labels.row(i);
            let ones: Vec<usize> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == 1.0)
                .map(|(k, _)| k)
                .collect();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones.len() == 1 && zeros + 1 == row.len() {
                Ok(ones[0])
            } else {
                Err(Error::InvalidLabels(format!("row {i} is not a one-hot indicator")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn names(c: usize) -> Vec<String> {
        (0..c).map(|k| format!("c{k}")).collect()
    }

    fn tiny() -> Dataset {
        let layout = FeatureLayout::new(vec![1, 2], 1, vec![1]).unwrap();
        let t = Matrix::from_fn(3, 4, |r, c| (r * 4 + c) as f64);
        let o = Matrix::from_fn(1, 4, |_, c| -(c as f64));
        Dataset::from_class_indices(layout, t, o, &[0, 1, 1, 0], names(2)).unwrap()
    }

    #[test]
    fn one_hot_round_trip() {
        let ds = tiny();
        assert_eq!(ds.labels().row(1), &[0.0, 1.0]);
        let again = Dataset::new(
            ds.layout().clone(),
            ds.skeleton().clone(),
            ds.objects().clone(),
            ds.labels().clone(),
            names(2),
        )
        .unwrap();
        assert_eq!(again.class_indices(), &[0, 1, 1, 0]);
        assert_eq!(again.class_counts(), vec![2, 2]);
    }

    #[test]
    fn rejects_non_one_hot_rows() {
        let ds = tiny();
        let mut y = ds.labels().clone();
        y[(2, 0)] = 1.0;
        let err = Dataset::new(ds.layout().clone(), ds.skeleton().clone(), ds.objects().clone(), y, names(2));
        assert!(matches!(err, Err(Error::InvalidLabels(_))));
        let mut y = ds.labels().clone();
        y[(0, 0)] = 0.5;
        assert!(Dataset::new(ds.layout().clone(), ds.skeleton().clone(), ds.objects().clone(), y, names(2)).is_err());
    }

    #[test]
    fn rejects_shape_and_value_problems() {
        let ds = tiny();
        let layout = ds.layout().clone();
        // wrong d_T
        assert!(Dataset::from_class_indices(layout.clone(), Matrix::zeros(2, 4), ds.objects().clone(), &[0, 1, 1, 0], names(2)).is_err());
        // N disagreement
        assert!(Dataset::from_class_indices(layout.clone(), ds.skeleton().clone(), Matrix::zeros(1, 3), &[0, 1, 1, 0], names(2)).is_err());
        // single class
        assert!(Dataset::from_class_indices(layout.clone(), ds.skeleton().clone(), ds.objects().clone(), &[0, 0, 0, 0], names(1)).is_err());
        // label out of range
        assert!(Dataset::from_class_indices(layout.clone(), ds.skeleton().clone(), ds.objects().clone(), &[0, 2, 1, 0], names(2)).is_err());
        // NaN
        let mut t = ds.skeleton().clone();
        t[(1, 1)] = f64::NAN;
        assert!(matches!(
            Dataset::from_class_indices(layout, t, ds.objects().clone(), &[0, 1, 1, 0], names(2)),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn select_and_bias() {
        let ds = tiny();
        let sub = ds.select(&[3, 1]).unwrap();
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.skeleton_instance(0), ds.skeleton_instance(3));
        assert_eq!(sub.class_indices(), &[0, 1]);
        assert!(ds.select(&[4]).is_err());

        let b = ds.with_bias_joint();
        assert_eq!(b.layout().joint_dims(), &[1, 2, 1]);
        assert_eq!(b.skeleton().row(3), &[1.0; 4]);
    }

    #[test]
    fn permute_joints_moves_rows() {
        let ds = tiny();
        let p = ds.permute_joints(&[1, 0]).unwrap();
        assert_eq!(p.layout().joint_dims(), &[2, 1]);
        assert_eq!(p.skeleton().row(0), ds.skeleton().row(1));
        assert_eq!(p.skeleton().row(2), ds.skeleton().row(0));
    }
}

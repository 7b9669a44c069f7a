//! Reading discriminative joints and object attributes off a fitted model.
//!
//! The importance of joint `j` for class `c` is read from the block `w_c^j`
//! of the skeleton weights; likewise object/modality blocks of `U`. Reports
//! also carry column-normalized copies in which each class column sums to 1.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::math::norm2;
use crate::matrix::Matrix;
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImportanceMetric {
    /// Euclidean norm of the weight block.
    #[default]
    BlockNorm,
    /// Plain sum of the block's (signed) entries. Opposite signs can cancel.
    SignedSum,
}

impl ImportanceMetric {
    fn score(self, block: &[f64]) -> f64 {
        match self {
            ImportanceMetric::BlockNorm => norm2(block),
            ImportanceMetric::SignedSum => block.iter().sum(),
        }
    }
}

/// Per-block scores of `W`: a `J x C` matrix and the per-joint total over
/// classes.
pub fn joint_importance(model: &Model, metric: ImportanceMetric) -> (Matrix, Vec<f64>) {
    let by_class = block_scores(model.skeleton_weights(), model.layout().joint_ranges(), metric);
    let overall = row_sums(&by_class);
    (by_class, overall)
}

/// Per-block scores of `U`: an `(O*M) x C` matrix (object-major rows) and the
/// `O x C` per-object aggregate summing each object's modalities.
pub fn object_importance(model: &Model, metric: ImportanceMetric) -> (Matrix, Matrix) {
    let layout = model.layout();
    let by_block = block_scores(model.object_weights(), layout.attribute_ranges(), metric);
    let m = layout.modality_count();
    let per_object = Matrix::from_fn(layout.object_count(), by_block.cols(), |o, c| {
        (0..m).map(|k| by_block[(o * m + k, c)]).sum()
    });
    (by_block, per_object)
}

fn block_scores(weights: &Matrix, ranges: impl Iterator<Item = Range<usize>>, metric: ImportanceMetric) -> Matrix {
    let ranges: Vec<_> = ranges.collect();
    let columns: Vec<Vec<f64>> = (0..weights.cols()).map(|c| weights.column(c)).collect();
    Matrix::from_fn(ranges.len(), weights.cols(), |b, c| {
        metric.score(&columns[c][ranges[b].clone()])
    })
}

fn row_sums(m: &Matrix) -> Vec<f64> {
    (0..m.rows()).map(|r| m.row(r).iter().sum()).collect()
}

/// Column-stochastic copy of a nonnegative matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMatrix {
    pub matrix: Matrix,
    /// Columns whose raw entries were all zero; left unchanged.
    pub zero_columns: Vec<usize>,
}

/// Divides each column by its sum. All-zero columns stay zero and are
/// listed in `zero_columns`. Negative or non-finite entries are rejected.
pub fn normalize_columns(raw: &Matrix) -> Result<NormalizedMatrix> {
    if let Some(i) = raw.as_slice().iter().position(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::Precondition(format!(
            "importance entries must be finite and nonnegative; entry ({}, {}) is {}",
            i / raw.cols(),
            i % raw.cols(),
            raw.as_slice()[i]
        )));
    }
    let mut matrix = raw.clone();
    let mut zero_columns = Vec::new();
    for c in 0..raw.cols() {
        let total: f64 = (0..raw.rows()).map(|r| raw[(r, c)]).sum();
        if total == 0.0 {
            zero_columns.push(c);
            continue;
        }
        for r in 0..raw.rows() {
            matrix[(r, c)] /= total;
        }
    }
    Ok(NormalizedMatrix {
        matrix,
        zero_columns,
    })
}

/// Importance scores of every joint and object/modality block.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    pub metric: ImportanceMetric,
    /// `J x C`.
    pub joint_by_class: Matrix,
    /// Length `J`.
    pub joint_overall: Vec<f64>,
    /// `(O*M) x C`, object-major.
    pub object_modality_by_class: Matrix,
    /// `O x C`.
    pub object_by_class: Matrix,
    pub joint_normalized: NormalizedMatrix,
    pub object_modality_normalized: NormalizedMatrix,
}

impl ImportanceReport {
    /// Builds the report. Normalized tables use absolute values, which only
    /// differ from the raw scores under [`ImportanceMetric::SignedSum`].
    pub fn from_model(model: &Model, metric: ImportanceMetric) -> Self {
        let (joint_by_class, joint_overall) = joint_importance(model, metric);
        let (object_modality_by_class, object_by_class) = object_importance(model, metric);
        let abs = |m: &Matrix| Matrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)].abs());
        let joint_normalized = normalize_columns(&abs(&joint_by_class)).expect("absolute values are nonnegative");
        let object_modality_normalized =
            normalize_columns(&abs(&object_modality_by_class)).expect("absolute values are nonnegative");
        ImportanceReport {
            metric,
            joint_by_class,
            joint_overall,
            object_modality_by_class,
            object_by_class,
            joint_normalized,
            object_modality_normalized,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{FeatureLayout, SolverConfig};
    use alloc::string::String;
    use alloc::vec;

    fn model(w: Matrix, u: Matrix, layout: FeatureLayout) -> Model {
        let names = (0..w.cols()).map(|c| format!("c{c}")).collect::<Vec<String>>();
        Model::new(layout, w, u, names, SolverConfig::default()).unwrap()
    }

    #[test]
    fn zero_model_scores_zero_and_flags_columns() {
        let layout = FeatureLayout::new(vec![2, 2], 2, vec![1, 2]).unwrap();
        let m = model(Matrix::zeros(4, 3), Matrix::zeros(6, 3), layout);
        let report = ImportanceReport::from_model(&m, ImportanceMetric::BlockNorm);
        assert!(report.joint_by_class.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(report.joint_overall, vec![0.0, 0.0]);
        assert_eq!(report.joint_normalized.zero_columns, vec![0, 1, 2]);
        assert_eq!(report.object_modality_normalized.zero_columns, vec![0, 1, 2]);
        assert_eq!(report.object_by_class.rows(), 2);
    }

    #[test]
    fn single_nonzero_block() {
        // Joint 2 (index 1), class 1 (index 0) holds (3, 4).
        let layout = FeatureLayout::new(vec![2, 2], 1, vec![1]).unwrap();
        let mut w = Matrix::zeros(4, 2);
        w[(2, 0)] = 3.0;
        w[(3, 0)] = 4.0;
        let m = model(w, Matrix::zeros(1, 2), layout);
        let (by_class, overall) = joint_importance(&m, ImportanceMetric::BlockNorm);
        assert_eq!(by_class.as_slice(), &[0.0, 0.0, 5.0, 0.0]);
        assert_eq!(overall, vec![0.0, 5.0]);
        let (signed, _) = joint_importance(&m, ImportanceMetric::SignedSum);
        assert_eq!(signed[(1, 0)], 7.0);
    }

    #[test]
    fn object_scores_aggregate_modalities() {
        let layout = FeatureLayout::new(vec![1], 2, vec![2, 1]).unwrap();
        // object 0: (3,4 | 1), object 1: (0,0 | -2), one class column + zeros
        let u = Matrix::from_row_major(6, 2, vec![3.0, 0.0, 4.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -2.0, 0.0]).unwrap();
        let m = model(Matrix::zeros(1, 2), u, layout);
        let (blocks, objects) = object_importance(&m, ImportanceMetric::BlockNorm);
        assert_eq!(blocks.column(0), vec![5.0, 1.0, 0.0, 2.0]);
        assert_eq!(objects.column(0), vec![6.0, 2.0]);
    }

    #[test]
    fn normalize_examples() {
        let raw = Matrix::from_row_major(3, 1, vec![1.0, 1.0, 2.0]).unwrap();
        assert_eq!(normalize_columns(&raw).unwrap().matrix.column(0), vec![0.25, 0.25, 0.5]);

        let zero = Matrix::zeros(2, 1);
        let n = normalize_columns(&zero).unwrap();
        assert_eq!(n.matrix, zero);
        assert_eq!(n.zero_columns, vec![0]);

        let neg = Matrix::from_row_major(2, 1, vec![1.0, -1.0]).unwrap();
        assert!(matches!(normalize_columns(&neg), Err(Error::Precondition(_))));
    }
}

//! Fitted weights and the argmax prediction rule.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{check_finite, check_len, Error, Result};
use crate::layout::FeatureLayout;
use crate::matrix::Matrix;
use crate::solver::SolverConfig;

/// Learned skeleton weights `W` (`d_T x C`) and object weights `U`
/// (`d_O x C`).
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    layout: FeatureLayout,
    skeleton_weights: Matrix,
    object_weights: Matrix,
    class_names: Vec<String>,
    config: SolverConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub scores: Vec<f64>,
}

impl Model {
    pub fn new(
        layout: FeatureLayout,
        skeleton_weights: Matrix,
        object_weights: Matrix,
        class_names: Vec<String>,
        config: SolverConfig,
    ) -> Result<Self> {
        let c = class_names.len();
        if c < 2 {
            return Err(Error::InvalidLabels(alloc::format!(
                "a model needs at least 2 classes, got {c}"
            )));
        }
        check_len("skeleton weight rows", layout.skeleton_dim(), skeleton_weights.rows())?;
        check_len("object weight rows", layout.object_dim(), object_weights.rows())?;
        check_len("skeleton weight columns", c, skeleton_weights.cols())?;
        check_len("object weight columns", c, object_weights.cols())?;
        check_finite("skeleton weights", skeleton_weights.as_slice())?;
        check_finite("object weights", object_weights.as_slice())?;
        Ok(Model {
            layout,
            skeleton_weights,
            object_weights,
            class_names,
            config,
        })
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    /// `W`.
    pub fn skeleton_weights(&self) -> &Matrix {
        &self.skeleton_weights
    }

    /// `U`.
    pub fn object_weights(&self) -> &Matrix {
        &self.object_weights
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Hyperparameters the model was fitted with.
    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Raw class scores `t^T w_c + o^T u_c`, written into `scores`.
    ///
    /// Allocation-free; lengths are checked only in debug builds. Used on
    /// the hot path of [`Model::predict`] and the throughput benchmark.
    pub fn scores_into(&self, t: &[f64], o: &[f64], scores: &mut [f64]) {
        debug_assert_eq!(scores.len(), self.class_count());
        scores.iter_mut().for_each(|s| *s = 0.0);
        accumulate(&self.skeleton_weights, t, scores);
        accumulate(&self.object_weights, o, scores);
    }

    /// Scores every class and returns the argmax, ties going to the lowest
    /// class index.
    pub fn predict(&self, t: &[f64], o: &[f64]) -> Result<Prediction> {
        check_len("skeleton vector", self.layout.skeleton_dim(), t.len())?;
        check_len("object vector", self.layout.object_dim(), o.len())?;
        check_finite("skeleton vector", t)?;
        check_finite("object vector", o)?;
        let mut scores = vec![0.0; self.class_count()];
        self.scores_into(t, o, &mut scores);
        Ok(Prediction {
            class: argmax(&scores),
            scores,
        })
    }

    /// Predicts every column of `d_T x N` / `d_O x N` feature matrices.
    pub fn predict_columns(&self, skeleton: &Matrix, objects: &Matrix) -> Result<Vec<usize>> {
        check_len("skeleton rows", self.layout.skeleton_dim(), skeleton.rows())?;
        check_len("object rows", self.layout.object_dim(), objects.rows())?;
        check_len("object instances", skeleton.cols(), objects.cols())?;
        check_finite("skeleton features", skeleton.as_slice())?;
        check_finite("object features", objects.as_slice())?;
        Ok(classify_columns(
            &self.skeleton_weights,
            &self.object_weights,
            skeleton,
            objects,
        ))
    }

    /// Predicts every instance of a labeled dataset and scores the result.
    pub fn predict_batch(&self, dataset: &Dataset) -> Result<BatchPrediction> {
        if dataset.layout() != &self.layout {
            return Err(Error::InvalidLayout(
                "dataset layout differs from the model layout".into(),
            ));
        }
        check_len("dataset classes", self.class_count(), dataset.class_count())?;
        let classes = self.predict_columns(dataset.skeleton(), dataset.objects())?;
        let accuracy = accuracy(&classes, dataset.class_indices());
        Ok(BatchPrediction { classes, accuracy })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchPrediction {
    pub classes: Vec<usize>,
    /// Fraction of instances whose predicted class matches the label.
    pub accuracy: f64,
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

/// Argmax class of every instance column. Uses the same accumulation order
/// as [`Model::predict`], so both agree bit for bit.
pub(crate) fn classify_columns(w: &Matrix, u: &Matrix, skeleton: &Matrix, objects: &Matrix) -> Vec<usize> {
    let mut t = vec![0.0; skeleton.rows()];
    let mut o = vec![0.0; objects.rows()];
    let mut scores = vec![0.0; w.cols()];
    (0..skeleton.cols())
        .map(|i| {
            t.iter_mut().enumerate().for_each(|(r, v)| *v = skeleton[(r, i)]);
            o.iter_mut().enumerate().for_each(|(r, v)| *v = objects[(r, i)]);
            scores.iter_mut().for_each(|s| *s = 0.0);
            accumulate(w, &t, &mut scores);
            accumulate(u, &o, &mut scores);
            argmax(&scores)
        })
        .collect()
}

// scores += M^T x, with M row-major (features x classes).
#[inline]
fn accumulate(m: &Matrix, x: &[f64], scores: &mut [f64]) {
    for (k, &xk) in x.iter().enumerate() {
        for (s, &w) in scores.iter_mut().zip(m.row(k)) {
            *s += xk * w;
        }
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

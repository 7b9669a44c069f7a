//! Model file: one JSON document holding the layout, class names, `W` and `U`
//! as row-major arrays, the solver hyperparameters and, when the model was
//! trained on standardized features, the feature transform.

use std::path::Path;

use poseattr_core::{FeatureLayout, Matrix, Model, SolverConfig, Standardizer};
use serde::{Deserialize, Serialize};

use crate::atomic::write_atomic;
use crate::datafile::{DataFile, FeatureNames};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A model plus everything needed to apply it to raw feature files.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: Model,
    pub names: FeatureNames,
    pub standardizer: Option<Standardizer>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRepr {
    format_version: u32,
    layout: LayoutRepr,
    classes: Vec<String>,
    #[serde(default)]
    names: FeatureNames,
    skeleton_weights: MatrixRepr,
    object_weights: MatrixRepr,
    hyperparameters: HyperRepr,
    standardizer: Option<StandardizerRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutRepr {
    joint_dims: Vec<usize>,
    object_count: usize,
    modality_dims: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperRepr {
    lambda1: f64,
    lambda2: f64,
    tol: f64,
    max_iters: usize,
    epsilon: f64,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StandardizerRepr {
    skeleton_mean: Vec<f64>,
    skeleton_scale: Vec<f64>,
    object_mean: Vec<f64>,
    object_scale: Vec<f64>,
    constant_skeleton: Vec<usize>,
    constant_objects: Vec<usize>,
}

impl From<&Matrix> for MatrixRepr {
    fn from(m: &Matrix) -> Self {
        MatrixRepr {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().to_vec(),
        }
    }
}

impl ModelFile {
    pub fn new(model: Model) -> Self {
        ModelFile {
            model,
            names: FeatureNames::default(),
            standardizer: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let m = &self.model;
        let layout = m.layout();
        let cfg = m.config();
        let repr = ModelRepr {
            format_version: MODEL_FORMAT_VERSION,
            layout: LayoutRepr {
                joint_dims: layout.joint_dims().to_vec(),
                object_count: layout.object_count(),
                modality_dims: layout.modality_dims().to_vec(),
            },
            classes: m.class_names().to_vec(),
            names: self.names.clone(),
            skeleton_weights: m.skeleton_weights().into(),
            object_weights: m.object_weights().into(),
            hyperparameters: HyperRepr {
                lambda1: cfg.lambda1,
                lambda2: cfg.lambda2,
                tol: cfg.tol,
                max_iters: cfg.max_iters,
                epsilon: cfg.epsilon,
                seed: cfg.seed,
            },
            standardizer: self.standardizer.as_ref().map(|s| StandardizerRepr {
                skeleton_mean: s.skeleton_mean.clone(),
                skeleton_scale: s.skeleton_scale.clone(),
                object_mean: s.object_mean.clone(),
                object_scale: s.object_scale.clone(),
                constant_skeleton: s.constant_skeleton.clone(),
                constant_objects: s.constant_objects.clone(),
            }),
        };
        let mut text = serde_json::to_string_pretty(&repr).map_err(|e| Error::Invalid(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let invalid = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message,
        };
        let repr: ModelRepr = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if repr.format_version != MODEL_FORMAT_VERSION {
            return Err(invalid(format!(
                "unsupported model format_version {} (expected {MODEL_FORMAT_VERSION})",
                repr.format_version
            )));
        }
        let layout = FeatureLayout::new(repr.layout.joint_dims, repr.layout.object_count, repr.layout.modality_dims)?;
        repr.names.validate(&layout)?;
        let matrix = |m: MatrixRepr| Matrix::from_row_major(m.rows, m.cols, m.data);
        let h = repr.hyperparameters;
        let config = SolverConfig {
            lambda1: h.lambda1,
            lambda2: h.lambda2,
            tol: h.tol,
            max_iters: h.max_iters,
            epsilon: h.epsilon,
            seed: h.seed,
        };
        let model = Model::new(
            layout.clone(),
            matrix(repr.skeleton_weights)?,
            matrix(repr.object_weights)?,
            repr.classes,
            config,
        )?;
        let standardizer = match repr.standardizer {
            None => None,
            Some(s) => {
                let ok = s.skeleton_mean.len() == layout.skeleton_dim()
                    && s.skeleton_scale.len() == layout.skeleton_dim()
                    && s.object_mean.len() == layout.object_dim()
                    && s.object_scale.len() == layout.object_dim();
                if !ok {
                    return Err(invalid("standardizer lengths do not match the layout".into()));
                }
                Some(Standardizer {
                    skeleton_mean: s.skeleton_mean,
                    skeleton_scale: s.skeleton_scale,
                    object_mean: s.object_mean,
                    object_scale: s.object_scale,
                    constant_skeleton: s.constant_skeleton,
                    constant_objects: s.constant_objects,
                })
            }
        };
        Ok(ModelFile {
            model,
            names: repr.names,
            standardizer,
        })
    }

    /// Predicted class of every instance in `data`, applying the stored
    /// standardization first. Layout and class names must match the model.
    pub fn predict_file(&self, data: &DataFile) -> Result<Vec<usize>> {
        if data.layout != *self.model.layout() {
            return Err(Error::Invalid(format!(
                "data layout (joints {:?}, {} objects, modalities {:?}) does not match the model layout (joints {:?}, {} objects, modalities {:?})",
                data.layout.joint_dims(),
                data.layout.object_count(),
                data.layout.modality_dims(),
                self.model.layout().joint_dims(),
                self.model.layout().object_count(),
                self.model.layout().modality_dims(),
            )));
        }
        if data.classes != self.model.class_names() {
            return Err(Error::Invalid(format!(
                "data classes {:?} do not match model classes {:?}",
                data.classes,
                self.model.class_names()
            )));
        }
        let classes = match &self.standardizer {
            Some(s) => {
                let (t, o) = s.apply_features(&data.skeleton, &data.objects)?;
                self.model.predict_columns(&t, &o)?
            }
            None => self.model.predict_columns(&data.skeleton, &data.objects)?,
        };
        Ok(classes)
    }
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelFile::from_json(&text, path)
}

pub fn save_model(file: &ModelFile, path: &Path, overwrite: bool) -> Result<()> {
    write_atomic(path, file.to_json()?.as_bytes(), overwrite)
}

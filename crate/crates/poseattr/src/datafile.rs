//! Dataset exchange format.
//!
//! UTF-8 text. Line 1 is a JSON header object:
//!
//! ```text
//! {"joint_dims":[3,3],"object_count":1,"modality_dims":[2,1],
//!  "classes":["drink","eat"],
//!  "names":{"joints":["head","hand"],"objects":["cup"],"modalities":["color","shape"]}}
//! ```
//!
//! Every following non-blank line is one instance as a JSON array: `d_T`
//! skeleton values, `d_O` object values (object-major, modalities in header
//! order), then the class label as a string (or a class index). The label
//! may be omitted on every row for unlabeled data. Instances are stored as
//! rows; in memory they become columns of `T` and `O`.

use std::fmt::Write as _;
use std::path::Path;

use poseattr_core::{Dataset, FeatureLayout, Matrix};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::atomic::write_atomic;
use crate::error::{Error, Result};

/// Human-readable names of joints, objects and attribute modalities. Empty
/// lists mean "unnamed".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureNames {
    #[serde(default)]
    pub joints: Vec<String>,
    #[serde(default)]
    pub objects: Vec<String>,
    #[serde(default)]
    pub modalities: Vec<String>,
}

impl FeatureNames {
    pub fn validate(&self, layout: &FeatureLayout) -> Result<()> {
        let check = |what: &str, names: &[String], expected: usize| {
            if names.is_empty() || names.len() == expected {
                Ok(())
            } else {
                Err(Error::Invalid(format!(
                    "header names.{what} has {} entries, layout declares {expected}",
                    names.len()
                )))
            }
        };
        check("joints", &self.joints, layout.joint_count())?;
        check("objects", &self.objects, layout.object_count())?;
        check("modalities", &self.modalities, layout.modality_count())
    }

    pub fn joint(&self, j: usize) -> String {
        self.joints.get(j).cloned().unwrap_or_else(|| format!("joint{j}"))
    }

    pub fn object(&self, o: usize) -> String {
        self.objects.get(o).cloned().unwrap_or_else(|| format!("object{o}"))
    }

    pub fn modality(&self, m: usize) -> String {
        self.modalities.get(m).cloned().unwrap_or_else(|| format!("modality{m}"))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    joint_dims: Vec<usize>,
    object_count: usize,
    modality_dims: Vec<usize>,
    classes: Vec<String>,
    #[serde(default)]
    names: FeatureNames,
}

/// Contents of a dataset file, possibly unlabeled.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFile {
    pub layout: FeatureLayout,
    pub classes: Vec<String>,
    pub names: FeatureNames,
    /// `d_T x N`.
    pub skeleton: Matrix,
    /// `d_O x N`.
    pub objects: Matrix,
    /// Class index per instance, `None` for an unlabeled file.
    pub labels: Option<Vec<usize>>,
}

impl DataFile {
    pub fn from_dataset(dataset: &Dataset, names: FeatureNames) -> Self {
        DataFile {
            layout: dataset.layout().clone(),
            classes: dataset.class_names().to_vec(),
            names,
            skeleton: dataset.skeleton().clone(),
            objects: dataset.objects().clone(),
            labels: Some(dataset.class_indices().to_vec()),
        }
    }

    pub fn len(&self) -> usize {
        self.skeleton.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Validated labeled dataset. Fails on unlabeled files.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::Invalid("dataset file has no labels".into()))?;
        Ok(Dataset::from_class_indices(
            self.layout.clone(),
            self.skeleton.clone(),
            self.objects.clone(),
            labels,
            self.classes.clone(),
        )?)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, first) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
        let header: Header =
            serde_json::from_str(first).map_err(|e| parse_err(1, format!("invalid header: {e}")))?;
        let layout = FeatureLayout::new(header.joint_dims, header.object_count, header.modality_dims)
            .map_err(|e| parse_err(1, e.to_string()))?;
        header.names.validate(&layout).map_err(|e| parse_err(1, e.to_string()))?;
        for (i, name) in header.classes.iter().enumerate() {
            if header.classes[..i].contains(name) {
                return Err(parse_err(1, format!("duplicate class name {name:?}")));
            }
        }
        let (d_t, d_o) = (layout.skeleton_dim(), layout.object_dim());

        let mut features: Vec<f64> = Vec::new();
        let mut labels: Vec<usize> = Vec::new();
        let mut labeled: Option<bool> = None;
        let mut row = 0;
        for (line, text) in lines {
            if text.trim().is_empty() {
                continue;
            }
            let cells: Vec<Value> = serde_json::from_str(text)
                .map_err(|e| parse_err(line, format!("row {row}: {e}")))?;
            let has_label = match cells.len() {
                n if n == d_t + d_o => false,
                n if n == d_t + d_o + 1 => true,
                n => {
                    return Err(parse_err(
                        line,
                        format!(
                            "row {row} has {n} values, expected {} features (d_T = {d_t}, d_O = {d_o}) plus an optional label",
                            d_t + d_o
                        ),
                    ))
                }
            };
            if *labeled.get_or_insert(has_label) != has_label {
                return Err(parse_err(
                    line,
                    format!("row {row}: either every row carries a label or none does"),
                ));
            }
            for (k, cell) in cells[..d_t + d_o].iter().enumerate() {
                match cell.as_f64() {
                    Some(v) if v.is_finite() => features.push(v),
                    _ => {
                        return Err(parse_err(
                            line,
                            format!("row {row}, column {k}: expected a finite number, found {cell}"),
                        ))
                    }
                }
            }
            if has_label {
                let index = label_index(&cells[d_t + d_o], &header.classes)
                    .map_err(|m| parse_err(line, format!("row {row}: {m}")))?;
                labels.push(index);
            }
            row += 1;
        }
        if row == 0 {
            return Err(parse_err(1, "file contains no instances".into()));
        }

        let width = d_t + d_o;
        let skeleton = Matrix::from_fn(d_t, row, |r, i| features[i * width + r]);
        let objects = Matrix::from_fn(d_o, row, |r, i| features[i * width + d_t + r]);
        Ok(DataFile {
            layout,
            classes: header.classes,
            names: header.names,
            skeleton,
            objects,
            labels: labeled.unwrap_or(false).then_some(labels),
        })
    }

    /// Serialized form. Deterministic, and every finite double round-trips
    /// exactly.
    pub fn to_text(&self) -> Result<String> {
        let header = Header {
            joint_dims: self.layout.joint_dims().to_vec(),
            object_count: self.layout.object_count(),
            modality_dims: self.layout.modality_dims().to_vec(),
            classes: self.classes.clone(),
            names: self.names.clone(),
        };
        let mut out = serde_json::to_string(&header).map_err(|e| Error::Invalid(e.to_string()))?;
        out.push('\n');
        for i in 0..self.len() {
            out.push('[');
            let values = self.skeleton.column(i).into_iter().chain(self.objects.column(i));
            for (k, v) in values.enumerate() {
                if !v.is_finite() {
                    return Err(Error::Invalid(format!("instance {i}, feature {k} is not finite")));
                }
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{}", Value::from(v)).expect("writing to a String cannot fail");
            }
            if let Some(labels) = &self.labels {
                let name = self.classes.get(labels[i]).ok_or_else(|| {
                    Error::Invalid(format!("instance {i} has class index {} out of range", labels[i]))
                })?;
                write!(out, ",{}", Value::from(name.as_str())).expect("writing to a String cannot fail");
            }
            out.push_str("]\n");
        }
        Ok(out)
    }
}

fn label_index(cell: &Value, classes: &[String]) -> std::result::Result<usize, String> {
    match cell {
        Value::String(s) => classes
            .iter()
            .position(|c| c == s)
            .ok_or_else(|| format!("unknown label {s:?}; declared classes are {classes:?}")),
        Value::Number(n) => match n.as_u64() {
            Some(k) if (k as usize) < classes.len() => Ok(k as usize),
            _ => Err(format!("label index {n} is not in 0..{}", classes.len())),
        },
        other => Err(format!("label must be a string or class index, found {other}")),
    }
}

pub fn load_data(path: &Path) -> Result<DataFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DataFile::parse(&text, path)
}

/// Loads a labeled dataset.
pub fn load_dataset(path: &Path) -> Result<(Dataset, FeatureNames)> {
    let file = load_data(path)?;
    let dataset = file.to_dataset().map_err(|e| match e {
        Error::Invalid(m) => Error::Invalid(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok((dataset, file.names))
}

pub fn save_data(file: &DataFile, path: &Path, overwrite: bool) -> Result<()> {
    write_atomic(path, file.to_text()?.as_bytes(), overwrite)
}

pub fn save_dataset(dataset: &Dataset, names: &FeatureNames, path: &Path, overwrite: bool) -> Result<()> {
    save_data(&DataFile::from_dataset(dataset, names.clone()), path, overwrite)
}

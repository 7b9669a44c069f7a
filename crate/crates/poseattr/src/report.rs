//! JSON documents and text tables emitted by the command-line tools. Every
//! JSON document carries `schema` and `schema_version` fields.

use poseattr_core::analysis::{ImportanceMetric, ImportanceReport};
use poseattr_core::{FitReport, Model, SolverConfig};
use serde::Serialize;

use crate::bench::BenchResult;
use crate::datafile::FeatureNames;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Hyperparameters {
    pub lambda1: f64,
    pub lambda2: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl From<&SolverConfig> for Hyperparameters {
    fn from(c: &SolverConfig) -> Self {
        Hyperparameters {
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            tol: c.tol,
            max_iters: c.max_iters,
            epsilon: c.epsilon,
            seed: c.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub schema: &'static str,
    pub schema_version: u32,
    pub ablation: &'static str,
    pub hyperparameters: Hyperparameters,
    pub standardized: bool,
    pub train_instances: usize,
    pub test_instances: Option<usize>,
    pub converged: bool,
    pub iterations_run: usize,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub objective_trace: Vec<f64>,
    pub loss_trace: Vec<f64>,
    pub wall_time_seconds: f64,
    pub train_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl FitSummary {
    pub fn new(ablation: &'static str, config: &SolverConfig, report: &FitReport) -> Self {
        FitSummary {
            schema: "poseattr.fit-report",
            schema_version: SCHEMA_VERSION,
            ablation,
            hyperparameters: config.into(),
            standardized: false,
            train_instances: 0,
            test_instances: None,
            converged: report.converged,
            iterations_run: report.iterations_run,
            initial_objective: report.initial_objective,
            final_objective: report.final_objective(),
            objective_trace: report.objective_trace.clone(),
            loss_trace: report.loss_trace.clone(),
            wall_time_seconds: report.wall_time,
            train_accuracy: 0.0,
            test_accuracy: None,
            warning: (!report.converged).then(|| {
                format!(
                    "solver stopped after {} iterations without meeting tol = {}",
                    report.iterations_run, config.tol
                )
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionRecord {
    pub index: usize,
    pub class_index: usize,
    pub class: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Predictions {
    pub schema: &'static str,
    pub schema_version: u32,
    pub instances: usize,
    pub predictions: Vec<PredictionRecord>,
    /// Present only when the input carried labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

impl Predictions {
    pub fn new(classes: &[usize], names: &[String], accuracy: Option<f64>) -> Self {
        Predictions {
            schema: "poseattr.predictions",
            schema_version: SCHEMA_VERSION,
            instances: classes.len(),
            predictions: classes
                .iter()
                .enumerate()
                .map(|(index, &k)| PredictionRecord {
                    index,
                    class_index: k,
                    class: names[k].clone(),
                })
                .collect(),
            accuracy,
        }
    }
}

/// Which rows and class columns of the importance tables to emit. `None`
/// keeps everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Selection {
    pub joints: Option<Vec<usize>>,
    pub objects: Option<Vec<usize>>,
    pub classes: Option<Vec<usize>>,
}

impl Selection {
    pub fn validate(&self, model: &Model) -> Result<(), String> {
        let layout = model.layout();
        let check = |flag: &str, picked: &Option<Vec<usize>>, bound: usize| match picked {
            Some(v) => match v.iter().find(|&&i| i >= bound) {
                Some(i) => Err(format!("{flag}: index {i} out of range (0..{bound})")),
                None => Ok(()),
            },
            None => Ok(()),
        };
        check("--joints", &self.joints, layout.joint_count())?;
        check("--objects", &self.objects, layout.object_count())?;
        check("--classes", &self.classes, model.class_count())
    }

    fn pick(list: &Option<Vec<usize>>, n: usize) -> Vec<usize> {
        list.clone().unwrap_or_else(|| (0..n).collect())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JointRow {
    pub index: usize,
    pub name: String,
    pub by_class: Vec<f64>,
    pub normalized: Vec<f64>,
    pub overall: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockRow {
    pub object: usize,
    pub object_name: String,
    pub modality: usize,
    pub modality_name: String,
    pub by_class: Vec<f64>,
    pub normalized: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObjectRow {
    pub index: usize,
    pub name: String,
    pub by_class: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroColumns {
    pub joints: Vec<usize>,
    pub object_modalities: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImportanceDocument {
    pub schema: &'static str,
    pub schema_version: u32,
    pub metric: &'static str,
    pub selection: Selection,
    pub class_indices: Vec<usize>,
    pub classes: Vec<String>,
    pub joints: Vec<JointRow>,
    pub object_modalities: Vec<BlockRow>,
    pub objects: Vec<ObjectRow>,
    /// Classes whose weights are all zero on that side; their normalized
    /// columns are left at zero.
    pub zero_columns: ZeroColumns,
}

pub fn metric_name(metric: ImportanceMetric) -> &'static str {
    match metric {
        ImportanceMetric::BlockNorm => "block-norm",
        ImportanceMetric::SignedSum => "signed-sum",
    }
}

impl ImportanceDocument {
    /// Normalization always spans every joint / block, so a selected subset
    /// shows its share of the full per-class mass.
    pub fn new(model: &Model, names: &FeatureNames, metric: ImportanceMetric, selection: Selection) -> Self {
        let report = ImportanceReport::from_model(model, metric);
        let layout = model.layout();
        let classes = Selection::pick(&selection.classes, model.class_count());
        let joints = Selection::pick(&selection.joints, layout.joint_count());
        let objects = Selection::pick(&selection.objects, layout.object_count());
        let m = layout.modality_count();
        let cols = |table: &poseattr_core::Matrix, r: usize| classes.iter().map(|&c| table[(r, c)]).collect::<Vec<_>>();

        let joint_rows = joints
            .iter()
            .map(|&j| JointRow {
                index: j,
                name: names.joint(j),
                by_class: cols(&report.joint_by_class, j),
                normalized: cols(&report.joint_normalized.matrix, j),
                overall: report.joint_overall[j],
            })
            .collect();
        let block_rows = objects
            .iter()
            .flat_map(|&o| (0..m).map(move |k| (o, k)))
            .map(|(o, k)| BlockRow {
                object: o,
                object_name: names.object(o),
                modality: k,
                modality_name: names.modality(k),
                by_class: cols(&report.object_modality_by_class, o * m + k),
                normalized: cols(&report.object_modality_normalized.matrix, o * m + k),
            })
            .collect();
        let object_rows = objects
            .iter()
            .map(|&o| ObjectRow {
                index: o,
                name: names.object(o),
                by_class: cols(&report.object_by_class, o),
            })
            .collect();
        ImportanceDocument {
            schema: "poseattr.importance",
            schema_version: SCHEMA_VERSION,
            metric: metric_name(metric),
            selection,
            class_indices: classes.clone(),
            classes: classes.iter().map(|&c| model.class_names()[c].clone()).collect(),
            joints: joint_rows,
            object_modalities: block_rows,
            objects: object_rows,
            zero_columns: ZeroColumns {
                joints: report.joint_normalized.zero_columns.clone(),
                object_modalities: report.object_modality_normalized.zero_columns.clone(),
            },
        }
    }

    pub fn render_table(&self) -> String {
        let mut header = vec![String::from("joint")];
        header.extend(self.classes.iter().cloned());
        header.push("overall".into());
        let rows: Vec<Vec<String>> = self
            .joints
            .iter()
            .map(|r| {
                let mut row = vec![r.name.clone()];
                row.extend(r.normalized.iter().map(|v| format!("{v:.4}")));
                row.push(format!("{:.4}", r.overall));
                row
            })
            .collect();
        let mut out = format!("Joint importance ({}, normalized per class)\n", self.metric);
        out.push_str(&aligned(&header, &rows));

        let mut header = vec![String::from("object/modality")];
        header.extend(self.classes.iter().cloned());
        let rows: Vec<Vec<String>> = self
            .object_modalities
            .iter()
            .map(|r| {
                let mut row = vec![format!("{}/{}", r.object_name, r.modality_name)];
                row.extend(r.normalized.iter().map(|v| format!("{v:.4}")));
                row
            })
            .collect();
        out.push_str(&format!("\nObject attribute importance ({}, normalized per class)\n", self.metric));
        out.push_str(&aligned(&header, &rows));
        if !self.zero_columns.joints.is_empty() || !self.zero_columns.object_modalities.is_empty() {
            out.push_str(&format!(
                "\nall-zero classes: joints {:?}, object attributes {:?}\n",
                self.zero_columns.joints, self.zero_columns.object_modalities
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchDocument<'a> {
    pub schema: &'static str,
    pub schema_version: u32,
    #[serde(flatten)]
    pub result: &'a BenchResult,
}

impl<'a> BenchDocument<'a> {
    pub fn new(result: &'a BenchResult) -> Self {
        BenchDocument {
            schema: "poseattr.bench",
            schema_version: SCHEMA_VERSION,
            result,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub mode: &'static str,
    pub lambda1: f64,
    pub lambda2: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub iterations_run: usize,
    pub converged: bool,
    pub model: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationDocument {
    pub schema: &'static str,
    pub schema_version: u32,
    pub train_fraction: f64,
    pub seed: u64,
    pub train_instances: usize,
    pub test_instances: usize,
    pub rows: Vec<AblationRow>,
}

impl AblationDocument {
    pub fn render_table(&self) -> String {
        let header: Vec<String> = ["mode", "lambda1", "lambda2", "train acc", "test acc", "iters"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.mode.to_string(),
                    format!("{}", r.lambda1),
                    format!("{}", r.lambda2),
                    format!("{:.4}", r.train_accuracy),
                    format!("{:.4}", r.test_accuracy),
                    format!("{}{}", r.iterations_run, if r.converged { "" } else { "*" }),
                ]
            })
            .collect();
        aligned(&header, &rows)
    }
}

/// Left-aligned first column, right-aligned others.
fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|k| rows.iter().map(|r| r[k].len()).chain([header[k].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (k, cell) in cells.iter().enumerate() {
            let w = widths[k];
            if k == 0 {
                s.push_str(&format!("{cell:<w$}"));
            } else {
                s.push_str(&format!("  {cell:>w$}"));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(header);
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

//! Throughput measurement for prediction and fitting.
//!
//! Prediction is timed frame by frame over a dataset, cycling until a minimum
//! wall time has accumulated, after one untimed warm-up pass. Each frame is
//! one `scores + argmax` evaluation on pre-extracted contiguous feature
//! vectors; the predicted classes feed a sink so the work cannot be elided.

use std::hint::black_box;
use std::time::{Duration, Instant};

use poseattr_core::model::argmax;
use poseattr_core::{fit, Dataset, Matrix, Model, SolverConfig};
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_MIN_DURATION: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BenchDims {
    pub d_t: usize,
    pub d_o: usize,
    pub classes: usize,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    /// Frames predicted per second of wall time.
    pub predictions_per_second: f64,
    /// Mean wall time of one frame; the exact reciprocal of the rate.
    pub seconds_per_frame: f64,
    /// Mean wall time of one fit, `None` when no fit was timed.
    pub fit_seconds: Option<f64>,
    pub dims: BenchDims,
    /// Frames timed (prediction) or fits timed (fitting).
    pub repetitions: usize,
    /// Iteration count of each timed fit.
    pub fit_iterations: Vec<usize>,
}

struct Frames {
    skeleton: Vec<f64>,
    objects: Vec<f64>,
    d_t: usize,
    d_o: usize,
}

impl Frames {
    // Instance-major copies so each frame reads contiguous memory, as a
    // streaming recognizer would.
    fn new(skeleton: &Matrix, objects: &Matrix) -> Self {
        Frames {
            skeleton: skeleton.transpose().into_vec(),
            objects: objects.transpose().into_vec(),
            d_t: skeleton.rows(),
            d_o: objects.rows(),
        }
    }

    fn len(&self) -> usize {
        self.skeleton.len() / self.d_t
    }

    fn get(&self, i: usize) -> (&[f64], &[f64]) {
        (
            &self.skeleton[i * self.d_t..(i + 1) * self.d_t],
            &self.objects[i * self.d_o..(i + 1) * self.d_o],
        )
    }
}

// One pass over every frame; returns a checksum of predicted classes.
fn predict_pass(model: &Model, frames: &Frames, scores: &mut [f64]) -> usize {
    let mut sink = 0usize;
    for i in 0..frames.len() {
        let (t, o) = frames.get(i);
        model.scores_into(black_box(t), black_box(o), scores);
        sink = sink.wrapping_add(argmax(scores));
    }
    black_box(sink)
}

/// Measures single-threaded prediction throughput of `model` over the
/// instances of `dataset`.
pub fn bench_predict(model: &Model, dataset: &Dataset, min_duration: Duration) -> Result<BenchResult> {
    if dataset.layout() != model.layout() {
        return Err(Error::Invalid("dataset layout does not match the model layout".into()));
    }
    bench_predict_features(model, dataset.skeleton(), dataset.objects(), min_duration)
}

/// Same as [`bench_predict`] on raw `d_T x N` / `d_O x N` features, which
/// need not be labeled.
pub fn bench_predict_features(
    model: &Model,
    skeleton: &Matrix,
    objects: &Matrix,
    min_duration: Duration,
) -> Result<BenchResult> {
    let layout = model.layout();
    if skeleton.rows() != layout.skeleton_dim() || objects.rows() != layout.object_dim() {
        return Err(Error::Invalid("feature dimensions do not match the model layout".into()));
    }
    if skeleton.cols() == 0 || skeleton.cols() != objects.cols() {
        return Err(Error::Invalid("need the same nonzero number of skeleton and object instances".into()));
    }
    let frames = Frames::new(skeleton, objects);
    let mut scores = vec![0.0; model.class_count()];
    predict_pass(model, &frames, &mut scores);

    let mut frames_done = 0usize;
    let start = Instant::now();
    let elapsed = loop {
        predict_pass(model, &frames, &mut scores);
        frames_done += frames.len();
        let elapsed = start.elapsed();
        if elapsed >= min_duration {
            break elapsed;
        }
    };
    let seconds_per_frame = elapsed.as_secs_f64() / frames_done as f64;
    Ok(BenchResult {
        predictions_per_second: 1.0 / seconds_per_frame,
        seconds_per_frame,
        fit_seconds: None,
        dims: BenchDims {
            d_t: layout.skeleton_dim(),
            d_o: layout.object_dim(),
            classes: model.class_count(),
            instances: skeleton.cols(),
        },
        repetitions: frames_done,
        fit_iterations: Vec::new(),
    })
}

/// Times `repetitions` independent fits of `dataset` and one prediction pass
/// over it with each fitted model.
pub fn bench_fit(dataset: &Dataset, config: &SolverConfig, repetitions: usize) -> Result<BenchResult> {
    if repetitions == 0 {
        return Err(Error::Invalid("repetitions must be at least 1".into()));
    }
    let frames = Frames::new(dataset.skeleton(), dataset.objects());
    let mut fit_total = 0.0;
    let mut predict_total = 0.0;
    let mut fit_iterations = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        let (model, report) = fit(black_box(dataset), config)?;
        fit_total += start.elapsed().as_secs_f64();
        fit_iterations.push(report.iterations_run);

        let mut scores = vec![0.0; model.class_count()];
        let start = Instant::now();
        predict_pass(&model, &frames, &mut scores);
        predict_total += start.elapsed().as_secs_f64();
    }
    // Guard against a clock too coarse to register a single pass.
    let seconds_per_frame = (predict_total / (repetitions * frames.len()) as f64).max(1e-12);
    Ok(BenchResult {
        predictions_per_second: 1.0 / seconds_per_frame,
        seconds_per_frame,
        fit_seconds: Some(fit_total / repetitions as f64),
        dims: dims(dataset),
        repetitions,
        fit_iterations,
    })
}

fn dims(dataset: &Dataset) -> BenchDims {
    BenchDims {
        d_t: dataset.layout().skeleton_dim(),
        d_o: dataset.layout().object_dim(),
        classes: dataset.class_count(),
        instances: dataset.len(),
    }
}

/// Aligned two-row table: processing speed and time per frame.
pub fn render_table(result: &BenchResult) -> String {
    let d = result.dims;
    let column = format!("d_T={} d_O={} C={} N={}", d.d_t, d.d_o, d.classes, d.instances);
    let rows = [
        ("", column),
        ("Processing Speed (Hz)", format!("{:.3e}", result.predictions_per_second)),
        ("Time Per Frame (sec)", format!("{:.3e}", result.seconds_per_frame)),
    ];
    let label_width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let value_width = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (label, value) in rows {
        out.push_str(&format!("{label:<label_width$}  {value:>value_width$}\n"));
    }
    if let Some(fit) = result.fit_seconds {
        out.push_str(&format!("{:<label_width$}  {:>value_width$}\n", "Fit Time (sec)", format!("{fit:.3e}")));
    }
    out
}

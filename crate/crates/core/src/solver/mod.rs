//! Alternating iteratively reweighted solver.
//!
//! One iteration:
//!
//! 1. rebuild the reweighting diagonals `D_S^c` and `D_A^c` for every class
//!    from the current `W` and `U`;
//! 2. update every column `w_c` with `U` held fixed;
//! 3. update every column `u_c` with the new `W` held fixed.
//!
//! Each half-step minimizes a quadratic that majorizes the objective at the
//! current iterate, so the objective never increases.

mod diagnostics;
mod reweight;
mod update;

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::Model;
use crate::objective::{self, check_lambda};
use update::{solve_reweighted, Side};

pub use diagnostics::{
    check_lemma1, smoothed_gradient, smoothed_objective, stationarity_residual, SmoothedGradient,
};
pub use reweight::{build_d_a, build_d_s};
pub use update::{update_u_c, update_w_c};

/// How the independent per-class solves inside a half-step are scheduled.
///
/// Results are bit-identical either way. Without the `parallel` feature,
/// `Parallel` runs sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

/// Scale applied to the standard-normal initial weights.
pub const INIT_SCALE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Weight of the skeletal (per-joint group) norm.
    pub lambda1: f64,
    /// Weight of the attribute (per-object-modality group) norm.
    pub lambda2: f64,
    /// Relative objective decrease below which the solver stops.
    pub tol: f64,
    pub max_iters: usize,
    /// Floor on block norms when building the reweighting diagonals.
    pub epsilon: f64,
    /// Seed of the random initialization.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda1: 0.1,
            lambda2: 0.1,
            tol: 1e-6,
            max_iters: 100,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        check_lambda("lambda1", self.lambda1)?;
        check_lambda("lambda2", self.lambda2)?;
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field,
                    reason: format!("must be finite and > 0, got {v}"),
                })
            }
        };
        positive("tol", self.tol)?;
        positive("epsilon", self.epsilon)?;
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig {
                field: "max_iters",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Objective at the random initialization.
    pub initial_objective: f64,
    /// Objective after each completed iteration.
    pub objective_trace: Vec<f64>,
    /// Squared-error loss after each completed iteration.
    pub loss_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    /// Wall time of the whole fit in seconds (0 without the `std` feature).
    pub wall_time: f64,
}

impl FitReport {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(self.initial_objective)
    }

    /// Whether every step of the trace is non-increasing up to the relative
    /// slack `rel`.
    pub fn is_monotone(&self, rel: f64) -> bool {
        self.objective_trace
            .windows(2)
            .all(|p| p[1] <= p[0] * (1.0 + rel))
    }
}

/// Products of the observation matrices reused by every update.
#[derive(Debug, Clone)]
struct NormalEquations {
    /// `T T^T`
    tt: Matrix,
    /// `O O^T`
    oo: Matrix,
    /// `T O^T`
    to: Matrix,
    /// `T Y`
    ty: Matrix,
    /// `O Y`
    oy: Matrix,
}

impl NormalEquations {
    fn new(dataset: &Dataset) -> Self {
        let t = dataset.skeleton();
        let o = dataset.objects();
        NormalEquations {
            tt: t.gram(),
            oo: o.gram(),
            to: t.mul_transpose(o),
            ty: t.transpose().transpose_mul(dataset.labels()),
            oy: o.transpose().transpose_mul(dataset.labels()),
        }
    }
}

/// Step-by-step access to the alternating solver. [`fit`] drives it to
/// convergence; tests use it to observe the half-steps.
#[derive(Debug, Clone)]
pub struct AlternatingSolver<'a> {
    dataset: &'a Dataset,
    config: SolverConfig,
    normal: NormalEquations,
    w: Matrix,
    u: Matrix,
    d_s: Vec<Vec<f64>>,
    d_a: Vec<Vec<f64>>,
    execution: Execution,
}

impl<'a> AlternatingSolver<'a> {
    /// Starts from seeded Gaussian weights scaled by [`INIT_SCALE`].
    pub fn new(dataset: &'a Dataset, config: SolverConfig) -> Result<Self> {
        let (w, u) = initial_weights(dataset, config.seed);
        AlternatingSolver::with_weights(dataset, config, w, u)
    }

    pub fn with_weights(dataset: &'a Dataset, config: SolverConfig, w: Matrix, u: Matrix) -> Result<Self> {
        config.validate()?;
        objective::check_weights(dataset, &w, &u)?;
        let mut solver = AlternatingSolver {
            dataset,
            config,
            normal: NormalEquations::new(dataset),
            w,
            u,
            d_s: Vec::new(),
            d_a: Vec::new(),
            execution: Execution::Sequential,
        };
        solver.reweight();
        Ok(solver)
    }

    pub fn set_execution(&mut self, execution: Execution) {
        self.execution = execution;
    }

    /// Rebuilds `D_S^c` and `D_A^c` for every class from the current weights.
    pub fn reweight(&mut self) {
        let layout = self.dataset.layout();
        let eps = self.config.epsilon;
        let classes = self.dataset.class_count();
        self.d_s = (0..classes)
            .map(|c| reweight::block_diagonal(&self.w.column(c), layout.joint_ranges(), eps))
            .collect();
        self.d_a = (0..classes)
            .map(|c| reweight::block_diagonal(&self.u.column(c), layout.attribute_ranges(), eps))
            .collect();
    }

    /// Replaces every `w_c` with its closed-form update, `U` and `D_S` fixed.
    pub fn update_skeleton_weights(&mut self) -> Result<()> {
        let n = &self.normal;
        let u = &self.u;
        let d_s = &self.d_s;
        let lambda = self.config.lambda1;
        let columns = per_class(self.execution, self.dataset.class_count(), |c| {
            let cross = n.to.mul_vec(&u.column(c));
            let rhs: Vec<f64> = n.ty.column(c).iter().zip(&cross).map(|(a, b)| a - b).collect();
            solve_reweighted(&n.tt, &d_s[c], lambda, &rhs, Side::Skeleton)
        })?;
        for (c, col) in columns.iter().enumerate() {
            self.w.set_column(c, col);
        }
        Ok(())
    }

    /// Replaces every `u_c` with its closed-form update, `W` and `D_A` fixed.
    pub fn update_object_weights(&mut self) -> Result<()> {
        let n = &self.normal;
        let w = &self.w;
        let d_a = &self.d_a;
        let lambda = self.config.lambda2;
        let columns = per_class(self.execution, self.dataset.class_count(), |c| {
            let cross = n.to.transpose_mul_vec(&w.column(c));
            let rhs: Vec<f64> = n.oy.column(c).iter().zip(&cross).map(|(a, b)| a - b).collect();
            solve_reweighted(&n.oo, &d_a[c], lambda, &rhs, Side::Objects)
        })?;
        for (c, col) in columns.iter().enumerate() {
            self.u.set_column(c, col);
        }
        Ok(())
    }

    /// One full iteration: reweight, update `W`, update `U`.
    pub fn iterate(&mut self) -> Result<()> {
        self.reweight();
        self.update_skeleton_weights()?;
        self.update_object_weights()
    }

    pub fn skeleton_weights(&self) -> &Matrix {
        &self.w
    }

    pub fn object_weights(&self) -> &Matrix {
        &self.u
    }

    /// Current reweighting diagonals `D_S^c`, one per class.
    pub fn skeleton_reweighting(&self) -> &[Vec<f64>] {
        &self.d_s
    }

    pub fn object_reweighting(&self) -> &[Vec<f64>] {
        &self.d_a
    }

    pub fn loss(&self) -> f64 {
        objective::loss(self.dataset, &self.w, &self.u).expect("solver keeps weight shapes")
    }

    pub fn objective(&self) -> f64 {
        objective::objective(self.dataset, &self.w, &self.u, self.config.lambda1, self.config.lambda2)
            .expect("solver keeps weight shapes and validated lambdas")
    }

    pub fn into_model(self) -> Result<Model> {
        Model::new(
            self.dataset.layout().clone(),
            self.w,
            self.u,
            self.dataset.class_names().to_vec(),
            self.config,
        )
    }
}

/// Runs the alternating solver until the relative objective decrease drops
/// below `config.tol` or `config.max_iters` iterations have run.
///
/// Non-convergence is reported in the [`FitReport`], not as an error.
pub fn fit(dataset: &Dataset, config: &SolverConfig) -> Result<(Model, FitReport)> {
    fit_with(dataset, config, Execution::default())
}

/// [`fit`] with an explicit scheduling of the per-class solves.
pub fn fit_with(dataset: &Dataset, config: &SolverConfig, execution: Execution) -> Result<(Model, FitReport)> {
    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    let mut solver = AlternatingSolver::new(dataset, config.clone())?;
    solver.set_execution(execution);
    let initial_objective = solver.objective();
    let mut objective_trace = Vec::with_capacity(config.max_iters);
    let mut loss_trace = Vec::with_capacity(config.max_iters);
    let mut previous = initial_objective;
    let mut converged = false;

    for _ in 0..config.max_iters {
        solver.iterate()?;
        let current = solver.objective();
        objective_trace.push(current);
        loss_trace.push(solver.loss());
        if !current.is_finite() {
            return Err(Error::Singular(format!(
                "objective became non-finite ({current}) after iteration {}",
                objective_trace.len()
            )));
        }
        if (previous - current).abs() / previous.max(1.0) < config.tol {
            converged = true;
            break;
        }
        previous = current;
    }

    #[cfg(feature = "std")]
    let wall_time = started.elapsed().as_secs_f64();
    #[cfg(not(feature = "std"))]
    let wall_time = 0.0;

    let report = FitReport {
        initial_objective,
        iterations_run: objective_trace.len(),
        objective_trace,
        loss_trace,
        converged,
        wall_time,
    };
    Ok((solver.into_model()?, report))
}

/// Seeded `N(0, 1) * INIT_SCALE` weights; `W` is drawn before `U`, both
/// row-major.
pub fn initial_weights(dataset: &Dataset, seed: u64) -> (Matrix, Matrix) {
    let layout = dataset.layout();
    let classes = dataset.class_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rows| {
        let mut m = Matrix::zeros(rows, classes);
        for v in m.as_mut_slice() {
            let z: f64 = rng.sample(StandardNormal);
            *v = INIT_SCALE * z;
        }
        m
    };
    let w = draw(layout.skeleton_dim());
    let u = draw(layout.object_dim());
    (w, u)
}

// Class columns are independent given the fixed half of the model; results
// are collected in class order either way.
fn per_class<F>(execution: Execution, classes: usize, solve: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..classes).into_par_iter().map(solve).collect()
        }
        _ => (0..classes).map(solve).collect(),
    }
}

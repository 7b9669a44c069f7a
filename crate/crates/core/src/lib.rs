//! Activity recognition from skeleton joints and object attributes as a
//! structured-sparsity regularized regression.
//!
//! Instances are columns of two observation matrices: `T` (skeleton
//! features, `d_T x N`, one block per body joint) and `O` (object features,
//! `d_O x N`, one block per object and attribute modality). A model holds
//! weight matrices `W` (`d_T x C`) and `U` (`d_O x C`) fitted by minimizing
//!
//! ```text
//! ||T^T W + O^T U - Y||_F^2 + lambda1 ||W||_S + lambda2 ||U||_A
//! ```
//!
//! where `||.||_S` sums the Euclidean norms of per-joint blocks of every
//! class column and `||.||_A` does the same over object/modality blocks.
//! The solver alternates closed-form reweighted updates of `W` and `U`; each
//! iteration never increases the objective.
//!
//! The crate is `no_std` (with `alloc`) when built without the `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod cholesky;
pub mod data;
mod error;
pub mod layout;
mod math;
pub mod matrix;
pub mod model;
pub mod objective;
pub mod solver;

pub use analysis::{ImportanceMetric, ImportanceReport, NormalizedMatrix};
pub use data::{Dataset, GeneratedData, Standardizer, SynthSpec};
pub use error::{Error, Result};
pub use layout::FeatureLayout;
pub use matrix::Matrix;
pub use model::{Model, Prediction};
pub use objective::{attribute_norm, loss, objective, skeletal_norm};
pub use solver::{fit, fit_with, Execution, FitReport, SolverConfig};

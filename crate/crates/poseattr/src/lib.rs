//! File formats, benchmark harness and command-line front end for
//! [`poseattr_core`].

pub mod atomic;
pub mod bench;
pub mod cli;
pub mod datafile;
mod error;
pub mod fixture;
pub mod modelfile;
pub mod report;

pub use datafile::{load_data, load_dataset, save_data, save_dataset, DataFile, FeatureNames};
pub use error::{Error, Result};
pub use modelfile::{load_model, save_model, ModelFile};
pub use poseattr_core;

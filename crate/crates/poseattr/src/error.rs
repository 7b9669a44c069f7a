use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{} already exists (pass --force to overwrite)", .0.display())]
    Exists(PathBuf),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] poseattr_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for numerical failures inside the solver, 1 for
    /// everything else (bad input, bad flags, I/O).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(poseattr_core::Error::Singular(_)) => 2,
            _ => 1,
        }
    }
}

use std::path::PathBuf;

use crate::model::Support;

/// Errors raised by the analysis routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{}", rank_deficient_message(.support, *.rank, *.cols))]
    RankDeficient {
        support: Option<Support>,
        rank: usize,
        cols: usize,
    },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("combinatorial budget exceeded: {what} needs {count} items, cap is {cap}")]
    BudgetExceeded {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", .path.display())]
    Parse { path: PathBuf, message: String },
}

fn rank_deficient_message(support: &Option<Support>, rank: usize, cols: usize) -> String {
    match support {
        Some(s) => format!("submatrix on support {s} is rank deficient (rank {rank} < {cols} columns)"),
        None => format!("matrix is rank deficient (rank {rank} < {cols} columns)"),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a support to a rank-deficiency error coming from the linear algebra layer.
    pub(crate) fn on_support(self, omega: &Support) -> Self {
        match self {
            Error::RankDeficient { rank, cols, .. } => Error::RankDeficient {
                support: Some(omega.clone()),
                rank,
                cols,
            },
            other => other,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 3,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

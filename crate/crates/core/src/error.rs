use serde_json::{json, Value};
use thiserror::Error;

/// Evidence that a matrix admits no positive diagonal symmetrizer.
#[derive(Debug, Clone, PartialEq)]
pub enum SymmetrizerWitness {
    /// `a[row][col] > 0` but `a[col][row] == 0`.
    SignAsymmetric { row: usize, col: usize },
    /// The edge `(row, col)` closes a cycle whose weight product does not
    /// balance; `mismatch` is `|d_i a_ij - d_j a_ji|` relative to `‖DA‖_∞`.
    CycleMismatch {
        row: usize,
        col: usize,
        mismatch: f64,
    },
    /// No symmetrizer was supplied where one is required.
    Missing,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows} rows, row {row} has {cols} columns)")]
    NotSquare {
        rows: usize,
        row: usize,
        cols: usize,
    },

    #[error("network needs at least 2 nodes, got {n}")]
    TooSmall { n: usize },

    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("entry ({row}, {col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("diagonal entry ({index}, {index}) = {value} is nonzero")]
    NonzeroDiagonal { index: usize, value: f64 },

    #[error("network is not irreducible: node {to} is unreachable from node {from}")]
    NotIrreducible { from: usize, to: usize },

    #[error("matrix is not symmetrizable: {0:?}")]
    NotSymmetrizable(SymmetrizerWitness),

    #[error("unknown nonlinearity kind `{0}`")]
    UnknownKind(String),

    #[error("second-largest eigenvalue of H1 is not simple (gap {gap:e})")]
    NotSimple { gap: f64 },

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Jacobian is singular even with Tikhonov damping")]
    SingularJacobian,

    #[error("integration produced a non-finite state at t = {time}")]
    StepFailure { time: f64 },

    #[error("per-node nonlinearities differ; analytic x+ requires identical psi")]
    NotIdenticalPsi,

    #[error("could not draw an irreducible network after {attempts} attempts")]
    InfeasibleAfterRetries { attempts: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Input could not be read or parsed.
    Io,
    /// The input violates the network model (sign, diagonal, connectivity, symmetry).
    Model,
    /// A numerical routine failed.
    Numerical,
    /// Bad parameters.
    Usage,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Parse(_)
            | Error::NotSquare { .. } => ErrorClass::Io,
            Error::TooSmall { .. }
            | Error::NonFinite { .. }
            | Error::NegativeEntry { .. }
            | Error::NonzeroDiagonal { .. }
            | Error::NotIrreducible { .. }
            | Error::NotSymmetrizable(_)
            | Error::NotIdenticalPsi => ErrorClass::Model,
            Error::NotSimple { .. }
            | Error::NoConvergence { .. }
            | Error::SingularJacobian
            | Error::StepFailure { .. }
            | Error::InfeasibleAfterRetries { .. } => ErrorClass::Numerical,
            Error::UnknownKind(_) | Error::InvalidParameter(_) => ErrorClass::Usage,
        }
    }

    fn variant_name(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::TooSmall { .. } => "TooSmall",
            Error::NonFinite { .. } => "NonFinite",
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::NonzeroDiagonal { .. } => "NonzeroDiagonal",
            Error::NotIrreducible { .. } => "NotIrreducible",
            Error::NotSymmetrizable(_) => "NotSymmetrizable",
            Error::UnknownKind(_) => "UnknownKind",
            Error::NotSimple { .. } => "NotSimple",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SingularJacobian => "SingularJacobian",
            Error::StepFailure { .. } => "StepFailure",
            Error::NotIdenticalPsi => "NotIdenticalPsi",
            Error::InfeasibleAfterRetries { .. } => "InfeasibleAfterRetries",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }

    /// Machine-readable description, including the offending indices where
    /// the error carries them.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.variant_name(),
            "message": self.to_string(),
        });
        let extra = match self {
            Error::NegativeEntry { row, col, value } => {
                json!({ "row": row, "col": col, "value": value })
            }
            Error::NonzeroDiagonal { index, value } => {
                json!({ "row": index, "col": index, "value": value })
            }
            Error::NonFinite { row, col } => json!({ "row": row, "col": col }),
            Error::NotIrreducible { from, to } => json!({ "from": from, "to": to }),
            Error::NotSymmetrizable(SymmetrizerWitness::SignAsymmetric { row, col }) => {
                json!({ "row": row, "col": col, "witness": "sign_asymmetric" })
            }
            Error::NotSymmetrizable(SymmetrizerWitness::CycleMismatch { row, col, mismatch }) => {
                json!({ "row": row, "col": col, "witness": "cycle_mismatch", "mismatch": mismatch })
            }
            Error::NotSquare { rows, row, cols } => {
                json!({ "rows": rows, "row": row, "cols": cols })
            }
            _ => json!({}),
        };
        if let (Some(obj), Value::Object(extra)) = (v.as_object_mut(), extra) {
            obj.extend(extra);
        }
        v
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Dense and sparse matrices, reverse-mode differentiation, Adam and
//! parameter checkpoints.

mod adam;
mod init;
mod matrix;
mod params;
mod sparse;
mod tape;

pub use adam::{AdamConfig, AdamState};
pub use init::{dropout, dropout_mask, xavier_uniform};
pub use matrix::Matrix;
pub use params::ParamSet;
pub use sparse::CsrMatrix;
pub use tape::{sigmoid, softplus, Gradients, Neighborhoods, Tape, UnaryOp, Var};

pub(crate) use matrix::dot;
pub(crate) use tape::softmax_in_place;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("index {index:?} out of range for shape {shape:?}")]
    IndexOutOfRange {
        index: (usize, usize),
        shape: (usize, usize),
    },
    #[error("{0}: empty input")]
    EmptyInput(&'static str),
    #[error("backward requires a 1x1 loss, got {0:?}")]
    NotScalar((usize, usize)),
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("i/o error: {0}")]
    Io(String),
}

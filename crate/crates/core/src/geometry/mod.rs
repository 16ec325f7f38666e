//! Tensor calculus over a chart.

pub mod connection;
pub mod lie;
pub mod matrix;
pub mod metric;
pub mod structure;
pub mod tensor;

use thiserror::Error;

use crate::exprfield::{ExprError, ParseError};

pub use connection::{levi_civita, ricci, Connection, ShiftClass};
pub use lie::{bracket, lie_derivative, lie_derivative_connection};
pub use metric::parse_line_element;
pub use structure::{
    annihilator_forms, asd_frame, check_hypercomplex_frame, curvature_type_split, Ambient, AsdFrame, CurvatureSplit,
    FrameReport,
};
pub use tensor::{Slot, TensorField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not symmetric: {0}")]
    NotSymmetric(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("missing structure: {0}")]
    MissingStructure(String),
    #[error("expected dimension {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("J does not square to -Id")]
    NotAlmostComplex,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

//! Exact arithmetic on rational functions of coordinates and auxiliary
//! generators.

pub mod chart;
pub mod expr;
pub mod gcd;
pub mod parse;
pub mod poly;

pub use chart::{Chart, ChartError, GeneratorDecl, TrigPair};
pub use expr::{q, Expr, ExprError};
pub use parse::ParseError;
pub use poly::Poly;

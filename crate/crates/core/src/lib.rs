pub mod exprfield;
pub mod geometry;
pub mod liealg;
pub mod prolong;
pub mod symsys;

//! Fast algorithms for the discrete cosine and sine transforms, derived from
//! polynomial algebra, expressed as structured sparse-matrix formulas.

pub mod chebyshev;
pub mod cli;
pub mod formula;
pub mod planner;
pub mod reference;
pub mod rules;

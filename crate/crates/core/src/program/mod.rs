//! The ProbLog-style language with polynomial-weighted continuous facts.
//!
//! ```text
//! 0.6 :: heads.
//! -0.024719432823743857 + 0.0005171566890546171*I :: int_low(I).
//! int_low(I) :- intelligence(I), ininterval(I, 50, 70).
//! average :- intelligence(I), ininterval(I, 65, 85).
//! query(average).
//! ```
//!
//! [`parse`] and [`print`] convert between text and [`Program`]; [`load`]
//! checks the semantics and turns continuous facts into attribute densities.

mod ast;
mod emit;
mod load;
mod parser;
mod printer;
mod types;
pub mod weight;

pub use ast::*;
pub use emit::{density_fragment, piece_names, variable_names, FragmentOptions};
pub use load::{load, Attribute, AttributeDensity, HybridProgram, Piece, Weight, DENSITY_TOLERANCE};
pub use parser::{parse, parse_atom, parse_poly_expr};
pub use printer::print;
pub use types::ArgumentTypes;

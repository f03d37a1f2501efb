//! Exact reals of the form `rational + Σ rational * ξ_j` over a declared
//! irrational basis, plus the phase arithmetic that evaluates them mod 1.

mod basis;
pub mod linalg;
pub mod phase;
mod qaffine;

pub use basis::{BasisEntry, IrrationalBasis};
pub use phase::{e, frac_mul_int, wrap01, DoubleDouble, LinearPhase};
pub use qaffine::{
    describe_relation, dot_phase, find_integer_relation, format_rational, independent_mod1,
    parse_rational, product_phase, rat, rational_to_f64, QAffineJson, QAffineReal, Rational,
};

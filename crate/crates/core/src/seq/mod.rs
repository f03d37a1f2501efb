//! Nilsequence expressions: `e(s)`, `q(t)`, `ω(α, β)`, orbit sequences,
//! floor-sequence probes, and their products, sums, conjugates and shifts.

mod expr;
mod family;
pub mod json;

pub use expr::{
    eval, floor_linear_value, floor_quad_value, heisenberg_closed_form, shift, NilseqExpr,
    OrbitSpec, Param,
};
pub use family::{m_sequence, MFamilyParams};
pub use json::{parse_document, ExprDocument};

//! Exact classification calculus over `Sp_{2d}(Q)`: symplectic membership,
//! the skew normal form, witnesses relating canonical parameters, and the
//! reduction of connected systems to Heisenberg coordinates.

mod matrix;
mod reduce;
mod symplectic;
mod witness;

use std::sync::Arc;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactnum::{IrrationalBasis, QAffineReal};
use crate::nilsys::PolarizedSystem;
use crate::seq::json::{basis_from_value, check_schema, leaf_json, parse_leaf, SCHEMA};

pub use matrix::RatMatrix;
pub use reduce::{polarized_to_heisenberg, Reduction};
pub use symplectic::{
    is_symplectic, j_matrix, skew_normal_form, symplectic_diag, symplectic_shear_lower,
    symplectic_shear_upper,
};
pub use witness::{
    apply_witness, bridge_statistic, compose_witness, decide_equivalence, forced_t_prime,
    inverse_witness, search_witness, verify_witness, BridgeStat, ClassParams, ClassWitness,
    Decision, SearchBounds, SearchOutcome,
};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// `{"t": ..., "pairs": [[alpha, beta], ...]}` with optional `schema` and `basis`.
pub fn params_from_json(v: &Value) -> Result<ClassParams> {
    check_schema(v)?;
    let basis = basis_from_value(v)?;
    let t = match v.get("t") {
        Some(t) => parse_leaf(t, &basis)?,
        None => QAffineReal::zero(&basis),
    };
    let pairs = match v.get("pairs") {
        None => Vec::new(),
        Some(p) => p
            .as_array()
            .ok_or_else(|| perr("`pairs` must be an array"))?
            .iter()
            .map(|pair| match pair.as_array().map(Vec::as_slice) {
                Some([a, b]) => Ok((parse_leaf(a, &basis)?, parse_leaf(b, &basis)?)),
                _ => Err(perr("each pair must be a two-element array")),
            })
            .collect::<Result<Vec<_>>>()?,
    };
    ClassParams::new(t, pairs)
}

pub fn params_to_json(p: &ClassParams) -> Value {
    json!({
        "schema": SCHEMA,
        "basis": serde_json::to_value(&**p.t().basis()).unwrap_or(Value::Null),
        "t": leaf_json(p.t()),
        "pairs": p.pairs().iter().map(|(a, b)| json!([leaf_json(a), leaf_json(b)])).collect::<Vec<_>>(),
    })
}

fn int_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) if n.is_i64() => Ok(BigInt::from(n.as_i64().unwrap_or(0))),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| perr(format!("bad integer `{s}`"))),
        other => Err(perr(format!("expected an integer, got {other}"))),
    }
}

fn int_list(v: Option<&Value>, what: &str) -> Result<Vec<BigInt>> {
    match v {
        None => Ok(Vec::new()),
        Some(Value::Array(a)) => a.iter().map(int_from_json).collect(),
        Some(_) => Err(perr(format!("`{what}` must be an array"))),
    }
}

fn rational_text(v: &Value) -> Result<String> {
    match v {
        Value::Number(n) if n.is_i64() => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        other => Err(perr(format!(
            "matrix entries must be integers or rational strings, got {other}"
        ))),
    }
}

pub fn matrix_from_json(v: &Value) -> Result<RatMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| perr("a matrix is an array of rows"))?
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| perr("a matrix row must be an array"))?
                .iter()
                .map(rational_text)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RatMatrix::from_strings(&rows)
}

pub fn matrix_to_json(m: &RatMatrix) -> Value {
    json!(m.to_strings())
}

/// `{"q": [[...]], "m": 2, "k": [1], "l": [0]}`; `q` defaults to the identity.
pub fn witness_from_json(v: &Value) -> Result<ClassWitness> {
    check_schema(v)?;
    let k = int_list(v.get("k"), "k")?;
    let l = int_list(v.get("l"), "l")?;
    let q = match v.get("q") {
        Some(q) => matrix_from_json(q)?,
        None => RatMatrix::identity(2 * k.len()),
    };
    let m = match v.get("m") {
        Some(m) => int_from_json(m)?,
        None => BigInt::from(1),
    };
    ClassWitness::new(q, m, k, l)
}

pub fn witness_to_json(w: &ClassWitness) -> Value {
    let strs = |v: &[BigInt]| {
        v.iter()
            .map(|x| Value::String(x.to_string()))
            .collect::<Vec<_>>()
    };
    json!({
        "schema": SCHEMA,
        "q": matrix_to_json(w.q()),
        "m": w.m().to_string(),
        "k": strs(w.k()),
        "l": strs(w.l()),
    })
}

/// `{"a": [[int]], "delta": [...], "gamma0": ...}` describing a connected system.
pub fn polarized_from_json(v: &Value) -> Result<PolarizedSystem> {
    check_schema(v)?;
    let basis: Arc<IrrationalBasis> = basis_from_value(v)?;
    let a: Vec<Vec<i64>> =
        serde_json::from_value(v.get("a").cloned().ok_or_else(|| perr("missing `a`"))?)
            .map_err(|e| perr(format!("`a` must be an integer matrix: {e}")))?;
    let delta = v
        .get("delta")
        .and_then(Value::as_array)
        .ok_or_else(|| perr("`delta` must be an array"))?
        .iter()
        .map(|x| parse_leaf(x, &basis))
        .collect::<Result<Vec<_>>>()?;
    let gamma0 = match v.get("gamma0") {
        Some(g) => parse_leaf(g, &basis)?,
        None => QAffineReal::zero(&basis),
    };
    PolarizedSystem::new(delta.len() / 2, a, delta, gamma0)
}

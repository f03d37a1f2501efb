//! JSON wire form for expressions.
//!
//! ```json
//! {"schema": "nilseq/1",
//!  "basis": {"name": "std", "entries": [...]},
//!  "params": {"a": "xi1", "b": {"const": "1/3", "coeffs": {"xi2": "1"}}},
//!  "expr": {"prod": [{"quad": "a"}, {"omega": ["a", "b"]}]}}
//! ```
//!
//! A leaf is a parameter name, QAffine text such as `"1/2 + xi1"`, or an
//! inline `{"const", "coeffs"}` object. `basis` and `params` are optional;
//! the default basis is the standard one.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exactnum::{IrrationalBasis, QAffineJson, QAffineReal};
use crate::nilsys::{AffineSkewSystem, HeisenbergSystem};

use super::expr::{NilseqExpr, OrbitSpec};

pub const SCHEMA: &str = "nilseq/1";

/// A parsed expression file.
#[derive(Debug, Clone)]
pub struct ExprDocument {
    pub basis: Arc<IrrationalBasis>,
    pub params: BTreeMap<String, QAffineReal>,
    pub expr: NilseqExpr,
}

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

struct Ctx<'a> {
    basis: &'a Arc<IrrationalBasis>,
    params: &'a BTreeMap<String, QAffineReal>,
}

impl Ctx<'_> {
    fn leaf(&self, v: &Value) -> Result<QAffineReal> {
        match v {
            Value::String(s) => match self.params.get(s.trim()) {
                Some(q) => Ok(q.clone()),
                None => QAffineReal::parse(s, self.basis),
            },
            Value::Number(n) if n.is_i64() => Ok(QAffineReal::from_ratio(
                n.as_i64().unwrap_or(0),
                1,
                self.basis,
            )),
            Value::Object(_) => {
                let j: QAffineJson = serde_json::from_value(v.clone())
                    .map_err(|e| perr(format!("bad value object: {e}")))?;
                QAffineReal::from_json(&j, self.basis)
            }
            other => Err(perr(format!("expected a parameter, got {other}"))),
        }
    }

    fn leaf_pair(&self, v: &Value, what: &str) -> Result<(QAffineReal, QAffineReal)> {
        match v.as_array().map(Vec::as_slice) {
            Some([a, b]) => Ok((self.leaf(a)?, self.leaf(b)?)),
            _ => Err(perr(format!("`{what}` takes a two-element array"))),
        }
    }

    fn leaf_list(&self, v: Option<&Value>, what: &str) -> Result<Vec<QAffineReal>> {
        let arr = v
            .and_then(Value::as_array)
            .ok_or_else(|| perr(format!("orbit field `{what}` must be an array")))?;
        arr.iter().map(|x| self.leaf(x)).collect()
    }

    fn node(&self, v: &Value) -> Result<NilseqExpr> {
        let obj = v
            .as_object()
            .filter(|o| o.len() == 1)
            .ok_or_else(|| perr(format!("expression node must be a one-key object, got {v}")))?;
        let (kind, body) = obj.iter().next().expect("one key");
        match kind.as_str() {
            "exp" => Ok(NilseqExpr::exp(self.leaf(body)?)),
            "quad" => Ok(NilseqExpr::quad(self.leaf(body)?)),
            "omega" => {
                let (a, b) = self.leaf_pair(body, "omega")?;
                NilseqExpr::omega(a, b)
            }
            "floor_linear" => {
                let (a, b) = self.leaf_pair(body, "floor_linear")?;
                NilseqExpr::floor_linear(a, b)
            }
            "floor_quad" => {
                let (a, b) = self.leaf_pair(body, "floor_quad")?;
                NilseqExpr::floor_quad(a, b)
            }
            "prod" => {
                let arr = body
                    .as_array()
                    .ok_or_else(|| perr("`prod` takes an array"))?;
                Ok(NilseqExpr::product(
                    arr.iter()
                        .map(|c| self.node(c))
                        .collect::<Result<Vec<_>>>()?,
                ))
            }
            "sum" => {
                let arr = body
                    .as_array()
                    .ok_or_else(|| perr("`sum` takes an array"))?;
                let terms = arr
                    .iter()
                    .map(|t| {
                        let coef = parse_coef(t.get("coef"))?;
                        let e = t.get("expr").ok_or_else(|| perr("sum term needs `expr`"))?;
                        Ok((coef, self.node(e)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(NilseqExpr::sum(terms))
            }
            "conj" => Ok(self.node(body)?.conj()),
            "shift" => {
                let k = body
                    .get("k")
                    .and_then(Value::as_i64)
                    .ok_or_else(|| perr("`shift` needs integer `k`"))?;
                let e = body
                    .get("expr")
                    .ok_or_else(|| perr("`shift` needs `expr`"))?;
                Ok(self.node(e)?.shift(k))
            }
            "orbit" => self.orbit(body),
            other => Err(perr(format!("unknown expression node `{other}`"))),
        }
    }

    fn orbit(&self, body: &Value) -> Result<NilseqExpr> {
        let system = body
            .get("system")
            .and_then(Value::as_str)
            .ok_or_else(|| perr("`orbit` needs `system`"))?;
        match system {
            "heisenberg" => {
                let alpha = self.leaf_list(body.get("alpha"), "alpha")?;
                let beta = self.leaf_list(body.get("beta"), "beta")?;
                let gamma = match body.get("gamma") {
                    Some(g) => self.leaf(g)?,
                    None => QAffineReal::zero(self.basis),
                };
                Ok(NilseqExpr::heisenberg_orbit(HeisenbergSystem::new(
                    alpha, beta, gamma,
                )?))
            }
            "affine" => {
                let a = body
                    .get("alpha")
                    .ok_or_else(|| perr("affine orbit needs `alpha`"))?;
                let b = body
                    .get("beta")
                    .ok_or_else(|| perr("affine orbit needs `beta`"))?;
                Ok(NilseqExpr::affine_orbit(AffineSkewSystem::new(
                    self.leaf(a)?,
                    self.leaf(b)?,
                )?))
            }
            other => Err(perr(format!("unknown orbit system `{other}`"))),
        }
    }
}

fn parse_coef(v: Option<&Value>) -> Result<Complex64> {
    match v {
        None => Ok(Complex64::new(1.0, 0.0)),
        Some(Value::Number(x)) => Ok(Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
        Some(Value::Array(a)) if a.len() == 2 => {
            let re = a[0]
                .as_f64()
                .ok_or_else(|| perr("coefficient must be numeric"))?;
            let im = a[1]
                .as_f64()
                .ok_or_else(|| perr("coefficient must be numeric"))?;
            Ok(Complex64::new(re, im))
        }
        Some(other) => Err(perr(format!("bad coefficient {other}"))),
    }
}

/// Parses an expression node against a basis and named parameters.
pub fn expr_from_json(
    v: &Value,
    basis: &Arc<IrrationalBasis>,
    params: &BTreeMap<String, QAffineReal>,
) -> Result<NilseqExpr> {
    Ctx { basis, params }.node(v)
}

/// Parses a full document. A bare expression node (no `expr` key) is also
/// accepted and read over the standard basis.
pub fn parse_document(text: &str) -> Result<ExprDocument> {
    let v: Value = serde_json::from_str(text).map_err(|e| perr(format!("invalid JSON: {e}")))?;
    document_from_value(&v)
}

pub fn document_from_value(v: &Value) -> Result<ExprDocument> {
    let Some(expr_v) = v.get("expr") else {
        let basis = IrrationalBasis::standard();
        let params = BTreeMap::new();
        let expr = expr_from_json(v, &basis, &params)?;
        return Ok(ExprDocument {
            basis,
            params,
            expr,
        });
    };
    check_schema(v)?;
    let basis = basis_from_value(v)?;
    let mut params = BTreeMap::new();
    if let Some(p) = v.get("params") {
        let obj = p
            .as_object()
            .ok_or_else(|| perr("`params` must be an object"))?;
        for (name, val) in obj {
            let ctx = Ctx {
                basis: &basis,
                params: &params,
            };
            let q = ctx.leaf(val)?;
            params.insert(name.clone(), q);
        }
    }
    let expr = expr_from_json(expr_v, &basis, &params)?;
    Ok(ExprDocument {
        basis,
        params,
        expr,
    })
}

/// Checks an optional `"schema"` field.
pub fn check_schema(v: &Value) -> Result<()> {
    match v.get("schema") {
        Some(schema) if schema.as_str() != Some(SCHEMA) => Err(perr(format!(
            "unsupported schema {schema}, expected \"{SCHEMA}\""
        ))),
        _ => Ok(()),
    }
}

/// Reads the optional `"basis"` field of a document; absent means standard.
pub fn basis_from_value(v: &Value) -> Result<Arc<IrrationalBasis>> {
    match v.get("basis") {
        None | Some(Value::Null) => Ok(IrrationalBasis::standard()),
        Some(b) => {
            let raw: IrrationalBasis =
                serde_json::from_value(b.clone()).map_err(|e| perr(format!("bad basis: {e}")))?;
            IrrationalBasis::new(raw.name, raw.entries)
        }
    }
}

/// Parses a single leaf value (QAffine text, integer or object).
pub fn parse_leaf(v: &Value, basis: &Arc<IrrationalBasis>) -> Result<QAffineReal> {
    Ctx {
        basis,
        params: &BTreeMap::new(),
    }
    .leaf(v)
}

pub fn leaf_json(q: &QAffineReal) -> Value {
    Value::String(q.to_string())
}

pub fn expr_to_json(e: &NilseqExpr) -> Value {
    match e {
        NilseqExpr::Exp(s) => json!({ "exp": leaf_json(s.value()) }),
        NilseqExpr::Quad(t) => json!({ "quad": leaf_json(t.value()) }),
        NilseqExpr::Omega(a, b, _) => {
            json!({ "omega": [leaf_json(a.value()), leaf_json(b.value())] })
        }
        NilseqExpr::FloorLinear(a, b) => {
            json!({ "floor_linear": [leaf_json(a.value()), leaf_json(b.value())] })
        }
        NilseqExpr::FloorQuad(a, b) => {
            json!({ "floor_quad": [leaf_json(a.value()), leaf_json(b.value())] })
        }
        NilseqExpr::Product(cs) => {
            json!({ "prod": cs.iter().map(expr_to_json).collect::<Vec<_>>() })
        }
        NilseqExpr::Sum(ts) => json!({
            "sum": ts
                .iter()
                .map(|(c, e)| json!({ "coef": [c.re, c.im], "expr": expr_to_json(e) }))
                .collect::<Vec<_>>()
        }),
        NilseqExpr::Conj(c) => json!({ "conj": expr_to_json(c) }),
        NilseqExpr::Shift(k, c) => json!({ "shift": { "k": k, "expr": expr_to_json(c) } }),
        NilseqExpr::Orbit(OrbitSpec::Heisenberg(s)) => json!({
            "orbit": {
                "system": "heisenberg",
                "alpha": s.alpha().iter().map(leaf_json).collect::<Vec<_>>(),
                "beta": s.beta().iter().map(leaf_json).collect::<Vec<_>>(),
                "gamma": leaf_json(s.gamma()),
            }
        }),
        NilseqExpr::Orbit(OrbitSpec::Affine(s)) => json!({
            "orbit": { "system": "affine", "alpha": leaf_json(s.alpha()), "beta": leaf_json(s.beta()) }
        }),
    }
}

pub fn document_to_json(doc: &ExprDocument) -> Value {
    let params: Map<String, Value> = doc
        .params
        .iter()
        .map(|(k, v)| (k.clone(), leaf_json(v)))
        .collect();
    json!({
        "schema": SCHEMA,
        "basis": serde_json::to_value(&*doc.basis).unwrap_or(Value::Null),
        "params": params,
        "expr": expr_to_json(&doc.expr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_document() {
        let text = r#"{
            "schema": "nilseq/1",
            "params": {"a": "xi1", "b": {"const": "1/3", "coeffs": {"xi2": "1"}}},
            "expr": {"prod": [{"quad": "a"}, {"omega": ["a", "b"]}, {"exp": "1/2"}]}
        }"#;
        let doc = parse_document(text).unwrap();
        assert_eq!(doc.params["b"].to_string(), "1/3 + xi2");
        let q = |t: &str| QAffineReal::parse(t, &doc.basis).unwrap();
        let want = NilseqExpr::product([
            NilseqExpr::quad(q("xi1")),
            NilseqExpr::omega(q("xi1"), q("1/3 + xi2")).unwrap(),
            NilseqExpr::exp(q("1/2")),
        ]);
        assert_eq!(doc.expr, want);
    }

    #[test]
    fn round_trip_all_nodes() {
        let text = r#"{"sum": [
            {"coef": [0.5, -1], "expr": {"shift": {"k": 3, "expr": {"floor_linear": ["xi1", "xi2"]}}}},
            {"coef": 2, "expr": {"conj": {"floor_quad": ["xi3", "1/7"]}}},
            {"expr": {"orbit": {"system": "heisenberg", "alpha": ["xi1"], "beta": ["xi2"], "gamma": "xi4"}}},
            {"expr": {"orbit": {"system": "affine", "alpha": "xi1", "beta": "-1/2 + xi3"}}}
        ]}"#;
        let doc = parse_document(text).unwrap();
        let back = document_from_value(&document_to_json(&doc)).unwrap();
        assert_eq!(doc.expr, back.expr);
        for n in [-5i64, 0, 12] {
            assert_eq!(doc.expr.eval(n).unwrap(), back.expr.eval(n).unwrap());
        }
    }

    #[test]
    fn custom_basis() {
        let text = r#"{"schema": "nilseq/1",
            "basis": {"name": "golden", "entries": [{"label": "phi", "approx": 1.618033988749895}]},
            "expr": {"quad": "phi - 1"}}"#;
        let doc = parse_document(text).unwrap();
        assert_eq!(doc.basis.name, "golden");
        assert!((doc.expr.eval(2).unwrap() - crate::exactnum::e(0.618033988749895)).norm() < 1e-14);
    }

    #[test]
    fn errors() {
        assert!(parse_document("{").is_err());
        assert!(parse_document(r#"{"nope": 1}"#).is_err());
        assert!(parse_document(r#"{"exp": "zeta"}"#).is_err());
        assert!(parse_document(r#"{"schema": "other", "expr": {"exp": "1"}}"#).is_err());
        assert!(parse_document(r#"{"omega": ["xi1"]}"#).is_err());
    }
}

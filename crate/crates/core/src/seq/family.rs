use crate::error::{Error, Result};
use crate::exactnum::{describe_relation, find_integer_relation, QAffineReal};

use super::expr::NilseqExpr;

/// Parameters of `e(s) q(t) ω(α_1, β_1) ⋯ ω(α_d, β_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MFamilyParams {
    pub s: QAffineReal,
    pub t: QAffineReal,
    pub pairs: Vec<(QAffineReal, QAffineReal)>,
}

impl MFamilyParams {
    pub fn new(
        s: QAffineReal,
        t: QAffineReal,
        pairs: Vec<(QAffineReal, QAffineReal)>,
    ) -> Result<Self> {
        let p = MFamilyParams { s, t, pairs };
        p.validate()?;
        Ok(p)
    }

    pub fn d(&self) -> usize {
        self.pairs.len()
    }

    /// `α_1..α_d, β_1..β_d` in that order.
    pub fn frequencies(&self) -> Vec<QAffineReal> {
        let mut v: Vec<QAffineReal> = self.pairs.iter().map(|p| p.0.clone()).collect();
        v.extend(self.pairs.iter().map(|p| p.1.clone()));
        v
    }

    pub fn frequency_names(&self) -> Vec<String> {
        let d = self.d();
        (1..=d)
            .map(|i| format!("alpha{i}"))
            .chain((1..=d).map(|i| format!("beta{i}")))
            .collect()
    }

    /// The `α`'s and `β`'s must be rationally independent mod 1.
    pub fn validate(&self) -> Result<()> {
        self.s.add(&self.t)?;
        let freqs = self.frequencies();
        if let Some(first) = freqs.first() {
            first.add(&self.s)?;
        }
        if let Some(rel) = find_integer_relation(&freqs)? {
            return Err(Error::Dependent(describe_relation(
                &rel,
                &self.frequency_names(),
            )));
        }
        Ok(())
    }
}

pub fn m_sequence(p: &MFamilyParams) -> Result<NilseqExpr> {
    p.validate()?;
    let mut parts = Vec::with_capacity(p.d() + 2);
    if !p.s.mod1().is_zero() {
        parts.push(NilseqExpr::exp(p.s.clone()));
    }
    if !p.t.mod1().is_zero() {
        parts.push(NilseqExpr::quad(p.t.clone()));
    }
    for (a, b) in &p.pairs {
        parts.push(NilseqExpr::omega(a.clone(), b.clone())?);
    }
    Ok(NilseqExpr::product(parts))
}

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One declared irrational: a label, a float approximation, and a free-text
/// definition (e.g. `sqrt(2)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub label: String,
    pub approx: f64,
    #[serde(default)]
    pub definition: String,
}

/// An ordered list of reals that the user asserts are rationally independent
/// together with 1. The assertion is recorded, never proven.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrationalBasis {
    pub name: String,
    pub entries: Vec<BasisEntry>,
}

impl IrrationalBasis {
    pub fn new(name: impl Into<String>, entries: Vec<BasisEntry>) -> Result<Arc<Self>> {
        let basis = IrrationalBasis {
            name: name.into(),
            entries,
        };
        basis.validate()?;
        Ok(Arc::new(basis))
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            if !e.approx.is_finite() {
                return Err(Error::NonFinite(format!("basis entry `{}`", e.label)));
            }
            if e.label.is_empty() || !is_label(&e.label) {
                return Err(Error::InvalidInput(format!(
                    "basis label `{}` must start with a letter and contain only [A-Za-z0-9_]",
                    e.label
                )));
            }
            if self.entries[..i].iter().any(|o| o.label == e.label) {
                return Err(Error::InvalidInput(format!(
                    "duplicate basis label `{}`",
                    e.label
                )));
            }
        }
        Ok(())
    }

    /// The four-element basis `xi1 = √2, xi2 = √3, xi3 = √5, xi4 = π − 3`.
    pub fn standard() -> Arc<Self> {
        let entry = |label: &str, approx: f64, definition: &str| BasisEntry {
            label: label.into(),
            approx,
            definition: definition.into(),
        };
        Arc::new(IrrationalBasis {
            name: "std".into(),
            entries: vec![
                entry("xi1", std::f64::consts::SQRT_2, "sqrt(2)"),
                entry("xi2", 1.7320508075688772, "sqrt(3)"),
                entry("xi3", 2.23606797749979, "sqrt(5)"),
                entry("xi4", std::f64::consts::PI - 3.0, "pi - 3"),
            ],
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.label == label)
    }

    pub fn approx(&self, idx: usize) -> f64 {
        self.entries[idx].approx
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.entries[idx].label
    }
}

pub(crate) fn is_label(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Structural equality, short-circuited on pointer identity.
pub(crate) fn same_basis(a: &Arc<IrrationalBasis>, b: &Arc<IrrationalBasis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exactnum::{e, wrap01, DoubleDouble, LinearPhase, QAffineReal};

use super::heisenberg::{check_index, triangular};

/// Largest `|n|` for which the iterated orbit is cross-checked.
pub const ITERATION_CHECK_LIMIT: i64 = 100_000;

const AGREEMENT_TOL: f64 = 1e-9;

/// The skew transformation `(x, y) ↦ (x + α, y + x + β)` on `T^2` observed
/// through `f(x, y) = e(y)` from `x_0 = (0, 0)`.
#[derive(Debug, Clone)]
pub struct AffineSkewSystem {
    alpha: QAffineReal,
    beta: QAffineReal,
    alpha_phase: LinearPhase,
    beta_phase: LinearPhase,
}

impl PartialEq for AffineSkewSystem {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.beta == other.beta
    }
}

fn dd_of(q: &QAffineReal) -> DoubleDouble {
    DoubleDouble::from_rational(q.const_term()).add(q.irrational_dd())
}

/// Torus point carried in double-double and kept in `[0, 1)`.
#[derive(Debug, Clone, Copy)]
struct TorusState {
    x: DoubleDouble,
    y: DoubleDouble,
}

impl AffineSkewSystem {
    pub fn new(alpha: QAffineReal, beta: QAffineReal) -> Result<Self> {
        alpha.add(&beta)?;
        Ok(AffineSkewSystem {
            alpha_phase: alpha.phase(),
            beta_phase: beta.phase(),
            alpha,
            beta,
        })
    }

    pub fn alpha(&self) -> &QAffineReal {
        &self.alpha
    }

    pub fn beta(&self) -> &QAffineReal {
        &self.beta
    }

    /// `e(n(n-1)/2 α + n β)`.
    pub fn closed_form(&self, n: i64) -> Result<Complex64> {
        check_index(n)?;
        let ph = self.alpha_phase.frac_times(triangular(n)) + self.beta_phase.frac_times(n as i128);
        Ok(e(wrap01(ph)))
    }

    fn step(&self, s: TorusState, a: DoubleDouble, b: DoubleDouble) -> TorusState {
        TorusState {
            x: s.x.add(a).frac(),
            y: s.y.add(s.x).add(b).frac(),
        }
    }

    fn step_back(&self, s: TorusState, a: DoubleDouble, b: DoubleDouble) -> TorusState {
        let x = s.x.sub(a).frac();
        TorusState {
            x,
            y: s.y.sub(x).sub(b).frac(),
        }
    }

    /// `f(T^n x_0)` by applying the map `|n|` times (or its inverse).
    pub fn iterate(&self, n: i64) -> Complex64 {
        let (a, b) = (dd_of(&self.alpha), dd_of(&self.beta));
        let mut s = TorusState {
            x: DoubleDouble::ZERO,
            y: DoubleDouble::ZERO,
        };
        for _ in 0..n.unsigned_abs() {
            s = if n > 0 {
                self.step(s, a, b)
            } else {
                self.step_back(s, a, b)
            };
        }
        e(s.y.to_f64())
    }

    /// Closed form, cross-checked against iteration when `|n| <= 10^5`.
    pub fn orbit_value(&self, n: i64) -> Result<Complex64> {
        let closed = self.closed_form(n)?;
        if n.abs() <= ITERATION_CHECK_LIMIT {
            let it = self.iterate(n);
            if (it - closed).norm() > AGREEMENT_TOL {
                return Err(Error::Consistency(format!(
                    "affine orbit at n = {n}: closed form {closed} vs iteration {it}"
                )));
            }
        }
        Ok(closed)
    }

    /// Iterated values `e(y_n)` for `n = 0..=n_max` in one pass of the skew map.
    pub fn iterate_values(&self, n_max: i64) -> Result<Vec<Complex64>> {
        if n_max < 0 {
            return Err(Error::InvalidInput("n_max must be non-negative".into()));
        }
        let (a, b) = (dd_of(&self.alpha), dd_of(&self.beta));
        let mut s = TorusState {
            x: DoubleDouble::ZERO,
            y: DoubleDouble::ZERO,
        };
        let mut out = Vec::with_capacity(n_max as usize + 1);
        for _ in 0..=n_max {
            out.push(e(s.y.to_f64()));
            s = self.step(s, a, b);
        }
        Ok(out)
    }

    /// Values for `n = 0..=n_max`, with a single iteration pass checking
    /// every closed-form value up to `10^5`.
    pub fn orbit_values(&self, n_max: i64) -> Result<Vec<Complex64>> {
        let iterated = self.iterate_values(n_max.min(ITERATION_CHECK_LIMIT))?;
        (0..=n_max)
            .map(|n| {
                let closed = self.closed_form(n)?;
                if let Some(it) = iterated.get(n as usize) {
                    if (it - closed).norm() > AGREEMENT_TOL {
                        return Err(Error::Consistency(format!(
                            "affine orbit at n = {n}: closed form {closed} vs iteration {it}"
                        )));
                    }
                }
                Ok(closed)
            })
            .collect()
    }

    /// Minimal iff `α` is irrational.
    pub fn is_minimal(&self) -> bool {
        !self.alpha.is_rational()
    }
}

pub fn affine_orbit_value(sys: &AffineSkewSystem, n: i64) -> Result<Complex64> {
    sys.orbit_value(n)
}

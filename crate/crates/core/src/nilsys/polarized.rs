use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exactnum::linalg::rank;
use crate::exactnum::{dot_phase, e, independent_mod1, rat, LinearPhase, QAffineReal};

use super::heisenberg::{check_index, dot_frac, triangular};

/// Element `(x, z)` of `R^{2d} × S^1` with the polarized product.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedElement {
    pub x: Vec<f64>,
    pub z: Complex64,
}

impl PolarizedElement {
    pub fn identity(dim: usize) -> Self {
        PolarizedElement {
            x: vec![0.0; dim],
            z: Complex64::new(1.0, 0.0),
        }
    }
}

/// Connected two-step system on `R^{2d} × S^1` with multiplication
/// `(x, z)(x', z') = (x + x', z z' e(<A x | x'>))` and translation
/// `τ = (δ, e(γ_0))`.
#[derive(Debug, Clone)]
pub struct PolarizedSystem {
    d: usize,
    a: Vec<Vec<i64>>,
    delta: Vec<QAffineReal>,
    gamma0: QAffineReal,
    delta_phase: Vec<LinearPhase>,
    gamma_phase: LinearPhase,
    quad_phase: LinearPhase,
}

fn mat_vec(a: &[Vec<i64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(c, v)| *c as f64 * v).sum())
        .collect()
}

impl PolarizedSystem {
    pub fn new(
        d: usize,
        a: Vec<Vec<i64>>,
        delta: Vec<QAffineReal>,
        gamma0: QAffineReal,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput(
                "polarized dimension must be >= 1".into(),
            ));
        }
        let n = 2 * d;
        if a.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.len(),
            });
        }
        if let Some(row) = a.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        if delta.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: delta.len(),
            });
        }
        let b = skew_part(&a);
        let brows: Vec<Vec<BigRational>> = b
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| BigRational::from_integer(BigInt::from(*v)))
                    .collect()
            })
            .collect();
        if rank(&brows) != n {
            return Err(Error::Singular("A^T - A is singular".into()));
        }
        // <A δ | δ>, computed exactly on the rational side
        let a_delta: Vec<QAffineReal> = a
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&delta)
                    .try_fold(QAffineReal::zero(gamma0.basis()), |acc, (c, v)| {
                        acc.add(&v.scale(&rat(*c, 1)))
                    })
            })
            .collect::<Result<_>>()?;
        let quad_phase = dot_phase(&a_delta, &delta)?;
        Ok(PolarizedSystem {
            d,
            delta_phase: delta.iter().map(QAffineReal::phase).collect(),
            gamma_phase: gamma0.phase(),
            quad_phase,
            a,
            delta,
            gamma0,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn a(&self) -> &[Vec<i64>] {
        &self.a
    }

    pub fn delta(&self) -> &[QAffineReal] {
        &self.delta
    }

    pub fn gamma0(&self) -> &QAffineReal {
        &self.gamma0
    }

    /// `B = A^T - A`, the matrix of the commutator pairing.
    pub fn b_matrix(&self) -> Vec<Vec<i64>> {
        skew_part(&self.a)
    }

    fn check(&self, g: &PolarizedElement) -> Result<()> {
        if g.x.len() != 2 * self.d {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.d,
                got: g.x.len(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, g: &PolarizedElement, h: &PolarizedElement) -> Result<PolarizedElement> {
        self.check(g)?;
        self.check(h)?;
        let z = g.z * h.z * e(dot_frac(&mat_vec(&self.a, &g.x), &h.x));
        Ok(PolarizedElement {
            x: g.x.iter().zip(&h.x).map(|(p, q)| p + q).collect(),
            z: z / z.norm(),
        })
    }

    pub fn inv(&self, g: &PolarizedElement) -> Result<PolarizedElement> {
        self.check(g)?;
        let z = g.z.conj() * e(dot_frac(&mat_vec(&self.a, &g.x), &g.x));
        Ok(PolarizedElement {
            x: g.x.iter().map(|v| -v).collect(),
            z: z / z.norm(),
        })
    }

    /// `g h g^{-1} h^{-1} = (0, e(x^T B x'))` with `B = A^T - A`.
    pub fn commutator(
        &self,
        g: &PolarizedElement,
        h: &PolarizedElement,
    ) -> Result<PolarizedElement> {
        self.check(g)?;
        self.check(h)?;
        let b = self.b_matrix();
        Ok(PolarizedElement {
            x: vec![0.0; 2 * self.d],
            z: e(dot_frac(&g.x, &mat_vec(&b, &h.x))),
        })
    }

    /// `τ^n = (n δ, e(n γ_0 + n(n-1)/2 <A δ | δ>))`.
    pub fn tau_pow(&self, n: i64) -> Result<PolarizedElement> {
        check_index(n)?;
        let x = self
            .delta_phase
            .iter()
            .map(|p| {
                p.times_f64(n)
                    .ok_or_else(|| Error::Overflow(format!("tau^{n}")))
            })
            .collect::<Result<_>>()?;
        let ph = self.gamma_phase.frac_times(n as i128) + self.quad_phase.frac_times(triangular(n));
        Ok(PolarizedElement { x, z: e(ph) })
    }

    /// Minimal iff the coordinates of `δ` are rationally independent mod 1.
    pub fn is_minimal(&self) -> bool {
        independent_mod1(&self.delta).unwrap_or(false)
    }
}

fn skew_part(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[j][i] - a[i][j]).collect())
        .collect()
}

pub fn polarized_mul(
    sys: &PolarizedSystem,
    g: &PolarizedElement,
    h: &PolarizedElement,
) -> Result<PolarizedElement> {
    sys.mul(g, h)
}

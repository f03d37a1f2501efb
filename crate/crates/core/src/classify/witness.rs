use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{describe_relation, find_integer_relation, QAffineReal};
use crate::seq::{m_sequence, MFamilyParams};

use super::matrix::RatMatrix;
use super::symplectic::{is_symplectic, j_matrix};

/// Canonical parameters `q(t) ω(α_1, β_1) ⋯ ω(α_d, β_d)` of a class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassParams {
    t: QAffineReal,
    pairs: Vec<(QAffineReal, QAffineReal)>,
}

impl ClassParams {
    /// Reduces `t` mod 1 and checks that the `2d` frequencies are independent mod 1.
    pub fn new(t: QAffineReal, pairs: Vec<(QAffineReal, QAffineReal)>) -> Result<Self> {
        for (a, b) in &pairs {
            t.sub(a)?;
            t.sub(b)?;
        }
        let p = ClassParams { t: t.mod1(), pairs };
        if p.d() > 0 {
            let xs = p.vector();
            if let Some(rel) = find_integer_relation(&xs)? {
                return Err(Error::Dependent(describe_relation(&rel, &p.names())));
            }
        }
        Ok(p)
    }

    pub fn d(&self) -> usize {
        self.pairs.len()
    }

    pub fn t(&self) -> &QAffineReal {
        &self.t
    }

    pub fn pairs(&self) -> &[(QAffineReal, QAffineReal)] {
        &self.pairs
    }

    pub fn alphas(&self) -> Vec<QAffineReal> {
        self.pairs.iter().map(|p| p.0.clone()).collect()
    }

    pub fn betas(&self) -> Vec<QAffineReal> {
        self.pairs.iter().map(|p| p.1.clone()).collect()
    }

    /// `(α_1, …, α_d, β_1, …, β_d)`.
    pub fn vector(&self) -> Vec<QAffineReal> {
        let mut v = self.alphas();
        v.extend(self.betas());
        v
    }

    fn names(&self) -> Vec<String> {
        let d = self.d();
        (1..=d)
            .map(|i| format!("alpha{i}"))
            .chain((1..=d).map(|i| format!("beta{i}")))
            .collect()
    }

    fn from_vector(t: QAffineReal, v: Vec<QAffineReal>) -> Result<Self> {
        let d = v.len() / 2;
        let pairs = (0..d).map(|i| (v[i].clone(), v[d + i].clone())).collect();
        Self::new(t, pairs)
    }

    /// The nilsequence `q(t) Π ω(α_i, β_i)`.
    pub fn sequence(&self) -> Result<crate::seq::NilseqExpr> {
        let zero = QAffineReal::zero(self.t.basis());
        m_sequence(&MFamilyParams::new(
            zero,
            self.t.clone(),
            self.pairs.clone(),
        )?)
    }
}

/// Data `(Q, m, k, ℓ)` relating two canonical parameter sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassWitness {
    q: RatMatrix,
    m: BigInt,
    k: Vec<BigInt>,
    l: Vec<BigInt>,
}

impl ClassWitness {
    pub fn new(q: RatMatrix, m: BigInt, k: Vec<BigInt>, l: Vec<BigInt>) -> Result<Self> {
        let d = k.len();
        if l.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: l.len(),
            });
        }
        if q.rows() != 2 * d || q.cols() != 2 * d {
            return Err(Error::DimensionMismatch {
                expected: 2 * d,
                got: q.rows(),
            });
        }
        if !m.is_positive() {
            return Err(Error::InvalidInput(format!("m must be >= 1, got {m}")));
        }
        if !is_symplectic(&q)? {
            return Err(Error::InvalidInput(format!("Q = {q} is not symplectic")));
        }
        Ok(ClassWitness { q, m, k, l })
    }

    pub fn identity(d: usize) -> Self {
        ClassWitness {
            q: RatMatrix::identity(2 * d),
            m: BigInt::one(),
            k: vec![BigInt::zero(); d],
            l: vec![BigInt::zero(); d],
        }
    }

    fn from_shift(q: RatMatrix, m: BigInt, c: Vec<BigInt>) -> Result<Self> {
        let d = c.len() / 2;
        Self::new(q, m, c[..d].to_vec(), c[d..].to_vec())
    }

    pub fn d(&self) -> usize {
        self.k.len()
    }

    pub fn q(&self) -> &RatMatrix {
        &self.q
    }

    pub fn m(&self) -> &BigInt {
        &self.m
    }

    pub fn k(&self) -> &[BigInt] {
        &self.k
    }

    pub fn l(&self) -> &[BigInt] {
        &self.l
    }

    /// `c = (k, ℓ)`.
    pub fn shift_vector(&self) -> Vec<BigInt> {
        self.k.iter().chain(&self.l).cloned().collect()
    }

    /// `c / m` as rationals.
    fn shift(&self) -> Vec<BigRational> {
        self.shift_vector()
            .into_iter()
            .map(|c| BigRational::new(c, self.m.clone()))
            .collect()
    }

    /// Largest `|k_i|`, `|ℓ_i|`.
    pub fn max_shift(&self) -> BigInt {
        self.shift_vector()
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

fn check_dims(p: &ClassParams, pp: &ClassParams, w: &ClassWitness) -> Result<()> {
    for d in [pp.d(), w.d()] {
        if d != p.d() {
            return Err(Error::DimensionMismatch {
                expected: p.d(),
                got: d,
            });
        }
    }
    p.t.sub(&pp.t)?;
    Ok(())
}

fn add_rationals(x: &[QAffineReal], s: &[BigRational]) -> Vec<QAffineReal> {
    x.iter().zip(s).map(|(a, r)| a.add_rational(r)).collect()
}

/// `u^T J x` for a rational `u`.
fn symplectic_pairing(
    u: &[BigRational],
    x: &[QAffineReal],
    basis_of: &QAffineReal,
) -> Result<QAffineReal> {
    let jx = j_matrix(u.len() / 2).mul_qvec(x)?;
    u.iter()
        .zip(&jx)
        .try_fold(QAffineReal::zero(basis_of.basis()), |acc, (a, y)| {
            acc.add(&y.scale(a))
        })
}

/// `m (t - t') - Σ (k_i β_i - ℓ_i α_i)`.
fn t_defect(p: &ClassParams, t_prime: &QAffineReal, w: &ClassWitness) -> Result<QAffineReal> {
    let c: Vec<BigRational> = w
        .shift_vector()
        .into_iter()
        .map(BigRational::from_integer)
        .collect();
    let m = BigRational::from_integer(w.m.clone());
    p.t.sub(t_prime)?
        .scale(&m)
        .sub(&symplectic_pairing(&c, &p.vector(), &p.t)?)
}

/// Exact check of `Q (x + c/m) = x'` and `m (t - t') - Σ (k_i β_i - ℓ_i α_i) ∈ Z`.
pub fn verify_witness(p: &ClassParams, pp: &ClassParams, w: &ClassWitness) -> Result<bool> {
    check_dims(p, pp, w)?;
    let image = w.q.mul_qvec(&add_rationals(&p.vector(), &w.shift()))?;
    for (a, b) in image.iter().zip(pp.vector()) {
        if !a.sub(&b)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(t_defect(p, &pp.t, w)?.is_integer())
}

/// `t - Σ (k_i β_i - ℓ_i α_i) / m` mod 1, the canonical admissible `t'`.
pub fn forced_t_prime(p: &ClassParams, w: &ClassWitness) -> Result<QAffineReal> {
    let c: Vec<BigRational> = w.shift();
    Ok(p.t.sub(&symplectic_pairing(&c, &p.vector(), &p.t)?)?.mod1())
}

/// The parameters that `w` carries `p` to, with the given `t'`.
pub fn apply_witness(
    p: &ClassParams,
    w: &ClassWitness,
    t_prime: &QAffineReal,
) -> Result<ClassParams> {
    if w.d() != p.d() {
        return Err(Error::DimensionMismatch {
            expected: p.d(),
            got: w.d(),
        });
    }
    if !t_defect(p, t_prime, w)?.is_integer() {
        return Err(Error::InvalidInput(format!(
            "t' = {t_prime} violates m(t - t') ≡ Σ(k_i β_i - ℓ_i α_i) mod 1"
        )));
    }
    let image = w.q.mul_qvec(&add_rationals(&p.vector(), &w.shift()))?;
    ClassParams::from_vector(t_prime.clone(), image)
}

fn lcm_dens(xs: &[BigRational]) -> BigInt {
    xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// The smallest witness `(Q, m, m s)` from `p` to `pp` whose shift is `c/m = s`,
/// or `None` when `(t - t') - s^T J x` is irrational.
fn complete_witness(
    p: &ClassParams,
    pp: &ClassParams,
    q: RatMatrix,
    s: &[BigRational],
) -> Result<Option<ClassWitness>> {
    let rho =
        p.t.sub(&pp.t)?
            .sub(&symplectic_pairing(s, &p.vector(), &p.t)?)?;
    if !rho.is_rational() {
        return Ok(None);
    }
    let m = lcm_dens(s).lcm(rho.const_term().denom());
    let mq = BigRational::from_integer(m.clone());
    let c = s.iter().map(|x| (x * &mq).to_integer()).collect();
    Ok(Some(ClassWitness::from_shift(q, m, c)?))
}

fn expect_verified(
    p: &ClassParams,
    pp: &ClassParams,
    w: ClassWitness,
    what: &str,
) -> Result<ClassWitness> {
    if !verify_witness(p, pp, &w)? {
        return Err(Error::Consistency(format!(
            "{what} witness failed verification"
        )));
    }
    Ok(w)
}

/// Given `w: p → pp`, a witness `pp → p`.
pub fn inverse_witness(
    p: &ClassParams,
    pp: &ClassParams,
    w: &ClassWitness,
) -> Result<ClassWitness> {
    if !verify_witness(p, pp, w)? {
        return Err(Error::InvalidInput(
            "witness does not relate the given parameters".into(),
        ));
    }
    let qi = w.q.inverse()?;
    // x = Q^{-1} x' - c/m = Q^{-1} (x' - Q c/m)
    let s: Vec<BigRational> = w.q.mul_vec(&w.shift())?.into_iter().map(|x| -x).collect();
    let inv = complete_witness(pp, p, qi, &s)?
        .ok_or_else(|| Error::Consistency("inverse witness has an irrational t-defect".into()))?;
    expect_verified(pp, p, inv, "inverse")
}

/// Given `w1: p → p1` and `w2: p1 → p2`, a witness `p → p2`.
pub fn compose_witness(
    p: &ClassParams,
    p1: &ClassParams,
    p2: &ClassParams,
    w1: &ClassWitness,
    w2: &ClassWitness,
) -> Result<ClassWitness> {
    if !verify_witness(p, p1, w1)? || !verify_witness(p1, p2, w2)? {
        return Err(Error::InvalidInput("witnesses do not form a chain".into()));
    }
    // x'' = Q2 Q1 (x + c1/m1 + Q1^{-1} c2/m2)
    let back = w1.q.inverse()?.mul_vec(&w2.shift())?;
    let s: Vec<BigRational> = w1.shift().iter().zip(&back).map(|(a, b)| a + b).collect();
    let q = w2.q.mul(&w1.q)?;
    let w = complete_witness(p, p2, q, &s)?
        .ok_or_else(|| Error::Consistency("composed witness has an irrational t-defect".into()))?;
    expect_verified(p, p2, w, "composed")
}

/// Outcome of the exact equivalence decision.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    /// Equivalent; the witness has the smallest admissible `m`.
    Equivalent(ClassWitness),
    Inequivalent(String),
}

/// Decides whether `p` and `pp` define the same class.
///
/// Independence makes the coefficient matrix `X` of `x` (rows over the
/// irrational basis) of full row rank, so `Q X = X'` has at most one
/// solution `Q = X' X^T (X X^T)^{-1}`. The shift is then `Q^{-1} r' - r` on
/// the constant terms, and `m` is the least common denominator of the shift
/// and of the rational t-defect.
pub fn decide_equivalence(p: &ClassParams, pp: &ClassParams) -> Result<Decision> {
    p.t.sub(&pp.t)?;
    let d = p.d();
    if pp.d() != d {
        return Ok(Decision::Inequivalent(format!(
            "d = {d} and d' = {} differ",
            pp.d()
        )));
    }
    let x = p.vector();
    let xp = pp.vector();
    let q = if d == 0 {
        RatMatrix::zeros(0, 0)
    } else {
        let coeffs = |v: &[QAffineReal]| {
            RatMatrix::from_rows(v.iter().map(QAffineReal::coeff_row).collect())
        };
        let (cx, cxp) = (coeffs(&x)?, coeffs(&xp)?);
        let gram = cx.mul(&cx.transpose())?;
        let q = cxp.mul(&cx.transpose())?.mul(&gram.inverse()?)?;
        if q.mul(&cx)? != cxp {
            return Ok(Decision::Inequivalent(
                "the irrational parts are not related by a rational linear map".into(),
            ));
        }
        if !is_symplectic(&q)? {
            return Ok(Decision::Inequivalent(format!(
                "the only linear map relating the irrational parts, {q}, is not symplectic"
            )));
        }
        q
    };
    let r: Vec<BigRational> = x.iter().map(|v| v.const_term().clone()).collect();
    let rp: Vec<BigRational> = xp.iter().map(|v| v.const_term().clone()).collect();
    let s: Vec<BigRational> = if d == 0 {
        Vec::new()
    } else {
        q.inverse()?
            .mul_vec(&rp)?
            .iter()
            .zip(&r)
            .map(|(a, b)| a - b)
            .collect()
    };
    match complete_witness(p, pp, q, &s)? {
        Some(w) => Ok(Decision::Equivalent(expect_verified(p, pp, w, "decided")?)),
        None => Ok(Decision::Inequivalent(
            "t - t' - s^T J x is irrational".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    pub m_max: u64,
    pub shift_max: u64,
    pub height_max: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found(ClassWitness),
    /// A witness exists but every witness exceeds the bounds; the smallest is attached.
    OutsideBounds(ClassWitness),
    /// No witness exists at all.
    Inequivalent(String),
}

/// Bounded witness search, answered exactly through [`decide_equivalence`].
///
/// All witnesses share the same `Q`, and their `(m, c)` are integer multiples
/// of the minimal one, so the minimal witness is within bounds whenever any
/// witness is.
pub fn search_witness(
    p: &ClassParams,
    pp: &ClassParams,
    bounds: SearchBounds,
) -> Result<SearchOutcome> {
    Ok(match decide_equivalence(p, pp)? {
        Decision::Inequivalent(why) => SearchOutcome::Inequivalent(why),
        Decision::Equivalent(w) => {
            let fits = w.m <= BigInt::from(bounds.m_max)
                && w.max_shift() <= BigInt::from(bounds.shift_max)
                && w.q.height() <= BigInt::from(bounds.height_max);
            if fits {
                SearchOutcome::Found(w)
            } else {
                SearchOutcome::OutsideBounds(w)
            }
        }
    })
}

/// Result of the numeric bridge check on `n ∈ mZ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeStat {
    /// `max |w_n - w_0|` where `w_n = r_{n+m} conj(r_n)`.
    pub max_deviation: f64,
    pub points: usize,
    pub skipped: usize,
}

const BRIDGE_FLOOR: f64 = 1e-3;

/// For a verified witness with `Q = I`, the ratio `r_n = b_n / a_n` of the two
/// sequences on `n ∈ mZ` is a character `v^n`, so `r_{n+m} conj(r_n)` is constant.
/// Points where `|a_n| < 1e-3` are skipped.
pub fn bridge_statistic(
    p: &ClassParams,
    pp: &ClassParams,
    w: &ClassWitness,
    n_max: i64,
) -> Result<BridgeStat> {
    if !verify_witness(p, pp, w)? {
        return Err(Error::InvalidInput(
            "witness does not relate the given parameters".into(),
        ));
    }
    if *w.q() != RatMatrix::identity(2 * p.d()) {
        return Err(Error::InvalidInput(
            "the pointwise bridge holds only for Q = I".into(),
        ));
    }
    let step: i64 =
        w.m.clone()
            .try_into()
            .map_err(|_| Error::Overflow(format!("m = {} does not fit in i64", w.m)))?;
    let (a, b) = (p.sequence()?, pp.sequence()?);
    let mut ratios: Vec<Option<Complex64>> = Vec::new();
    let mut n = 0;
    while n <= n_max {
        let an = a.eval(n)?;
        ratios.push(
            (an.norm() >= BRIDGE_FLOOR)
                .then(|| b.eval(n).map(|bn| bn * an.conj() / an.norm_sqr()))
                .transpose()?,
        );
        n += step;
    }
    let skipped = ratios.iter().filter(|r| r.is_none()).count();
    let mut reference = None;
    let mut max_deviation: f64 = 0.0;
    let mut points = 0;
    for pair in ratios.windows(2) {
        if let [Some(r0), Some(r1)] = pair {
            let wv = r1 * r0.conj();
            let base = *reference.get_or_insert(wv);
            max_deviation = max_deviation.max((wv - base).norm());
            points += 1;
        }
    }
    Ok(BridgeStat {
        max_deviation,
        points,
        skipped,
    })
}

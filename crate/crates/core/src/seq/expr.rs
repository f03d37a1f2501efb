use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exactnum::{e, product_phase, wrap01, LinearPhase, QAffineReal};
use crate::nilsys::{triangular, AffineSkewSystem, HeisenbergSystem, MAX_ORBIT_INDEX};
use crate::theta::{kappa_shifted, KappaAccuracy};

/// A parameter together with its prepared phase.
#[derive(Debug, Clone)]
pub struct Param {
    value: QAffineReal,
    phase: LinearPhase,
}

impl Param {
    pub fn new(value: QAffineReal) -> Self {
        Param {
            phase: value.phase(),
            value,
        }
    }

    pub fn value(&self) -> &QAffineReal {
        &self.value
    }

    fn split(&self, n: i64) -> Result<(i128, f64)> {
        self.phase
            .split_times(n)
            .ok_or_else(|| Error::Overflow(format!("{n} * ({})", self.value)))
    }
}

impl PartialEq for Param {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

/// Which function on the phase space an orbit node observes.
#[derive(Debug, Clone, PartialEq)]
pub enum OrbitSpec {
    /// `c1_gaussian` on `N_d` from the identity coset.
    Heisenberg(Box<HeisenbergSystem>),
    /// `f(x, y) = e(y)` on `T^2` from the origin.
    Affine(Box<AffineSkewSystem>),
}

/// Expression tree for nilsequences built from the elementary families.
#[derive(Debug, Clone, PartialEq)]
pub enum NilseqExpr {
    /// `e(n s)`.
    Exp(Param),
    /// `q_n(t) = e(n(n-1)/2 t)`.
    Quad(Param),
    /// `ω_n(α, β) = κ(nα, nβ) e(n(n-1)/2 αβ)`; the third field is the phase of `αβ`.
    Omega(Param, Param, LinearPhase),
    Product(Vec<NilseqExpr>),
    Sum(Vec<(Complex64, NilseqExpr)>),
    Conj(Box<NilseqExpr>),
    Shift(i64, Box<NilseqExpr>),
    Orbit(OrbitSpec),
    /// `e(⌊nα⌋ β)`.
    FloorLinear(Param, Param),
    /// `e(⌊nα⌋ n β)`.
    FloorQuad(Param, Param),
}

impl NilseqExpr {
    pub fn exp(s: QAffineReal) -> Self {
        NilseqExpr::Exp(Param::new(s))
    }

    pub fn quad(t: QAffineReal) -> Self {
        NilseqExpr::Quad(Param::new(t))
    }

    pub fn omega(alpha: QAffineReal, beta: QAffineReal) -> Result<Self> {
        let cross = product_phase(&alpha, &beta)?;
        Ok(NilseqExpr::Omega(
            Param::new(alpha),
            Param::new(beta),
            cross,
        ))
    }

    /// The constant sequence 1 (the empty product).
    pub fn one() -> Self {
        NilseqExpr::Product(Vec::new())
    }

    /// Product with nested products flattened.
    pub fn product(children: impl IntoIterator<Item = NilseqExpr>) -> Self {
        let mut out = Vec::new();
        for c in children {
            match c {
                NilseqExpr::Product(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        NilseqExpr::Product(out)
    }

    pub fn sum(terms: impl IntoIterator<Item = (Complex64, NilseqExpr)>) -> Self {
        NilseqExpr::Sum(terms.into_iter().collect())
    }

    pub fn conj(self) -> Self {
        NilseqExpr::Conj(Box::new(self))
    }

    /// `n ↦ a_{n+k}`; nested shifts compose into one.
    pub fn shift(self, k: i64) -> Self {
        match self {
            NilseqExpr::Shift(j, inner) => match j.checked_add(k) {
                Some(0) => *inner,
                Some(s) => NilseqExpr::Shift(s, inner),
                None => NilseqExpr::Shift(k, Box::new(NilseqExpr::Shift(j, inner))),
            },
            other if k == 0 => other,
            other => NilseqExpr::Shift(k, Box::new(other)),
        }
    }

    pub fn heisenberg_orbit(sys: HeisenbergSystem) -> Self {
        NilseqExpr::Orbit(OrbitSpec::Heisenberg(Box::new(sys)))
    }

    pub fn affine_orbit(sys: AffineSkewSystem) -> Self {
        NilseqExpr::Orbit(OrbitSpec::Affine(Box::new(sys)))
    }

    pub fn floor_linear(alpha: QAffineReal, beta: QAffineReal) -> Result<Self> {
        alpha.add(&beta)?;
        Ok(NilseqExpr::FloorLinear(Param::new(alpha), Param::new(beta)))
    }

    pub fn floor_quad(alpha: QAffineReal, beta: QAffineReal) -> Result<Self> {
        alpha.add(&beta)?;
        Ok(NilseqExpr::FloorQuad(Param::new(alpha), Param::new(beta)))
    }

    /// True when every value has modulus one (no κ, sums or orbits of
    /// non-unimodular functions).
    pub fn is_unimodular(&self) -> bool {
        match self {
            NilseqExpr::Exp(_)
            | NilseqExpr::Quad(_)
            | NilseqExpr::FloorLinear(..)
            | NilseqExpr::FloorQuad(..) => true,
            NilseqExpr::Orbit(OrbitSpec::Affine(_)) => true,
            NilseqExpr::Product(c) => c.iter().all(NilseqExpr::is_unimodular),
            NilseqExpr::Conj(c) | NilseqExpr::Shift(_, c) => c.is_unimodular(),
            NilseqExpr::Omega(..) | NilseqExpr::Sum(_) | NilseqExpr::Orbit(_) => false,
        }
    }

    /// The value at index `n`, for `|n| <= 2^52`.
    pub fn eval(&self, n: i64) -> Result<Complex64> {
        if n.unsigned_abs() > MAX_ORBIT_INDEX as u64 {
            return Err(Error::Overflow(format!("index {n} exceeds 2^52")));
        }
        match self {
            NilseqExpr::Exp(s) => Ok(e(s.phase.frac_times(n as i128))),
            NilseqExpr::Quad(t) => Ok(e(t.phase.frac_times(triangular(n)))),
            NilseqExpr::Omega(a, b, cross) => omega_value(a, b, cross, n),
            NilseqExpr::Product(cs) => cs
                .iter()
                .try_fold(Complex64::new(1.0, 0.0), |acc, c| Ok(acc * c.eval(n)?)),
            NilseqExpr::Sum(ts) => ts.iter().try_fold(Complex64::new(0.0, 0.0), |acc, (w, c)| {
                Ok(acc + w * c.eval(n)?)
            }),
            NilseqExpr::Conj(c) => Ok(c.eval(n)?.conj()),
            NilseqExpr::Shift(k, c) => {
                let m = n
                    .checked_add(*k)
                    .ok_or_else(|| Error::Overflow(format!("index {n} + {k}")))?;
                c.eval(m)
            }
            NilseqExpr::Orbit(OrbitSpec::Heisenberg(s)) => s.orbit_value(n),
            NilseqExpr::Orbit(OrbitSpec::Affine(s)) => s.closed_form(n),
            NilseqExpr::FloorLinear(a, b) => {
                let (fl, _) = a.split(n)?;
                Ok(e(b.phase.frac_times(fl)))
            }
            NilseqExpr::FloorQuad(a, b) => {
                let (fl, _) = a.split(n)?;
                let m = fl
                    .checked_mul(n as i128)
                    .ok_or_else(|| Error::Overflow(format!("floor({n} * alpha) * {n}")))?;
                Ok(e(b.phase.frac_times(m)))
            }
        }
    }

    /// Values at `n0, n0 + 1, ..., n1 - 1`.
    pub fn eval_range(&self, n0: i64, n1: i64) -> Result<Vec<Complex64>> {
        (n0..n1).map(|n| self.eval(n)).collect()
    }
}

fn omega_value(a: &Param, b: &Param, cross: &LinearPhase, n: i64) -> Result<Complex64> {
    let s = a.phase.frac_times(n as i128);
    let (fl, f) = b.split(n)?;
    // write nβ = j + t0 with t0 ∈ [-1/2, 1/2)
    let (j, t0) = if f >= 0.5 { (fl + 1, f - 1.0) } else { (fl, f) };
    let k = kappa_shifted(s, j, t0, &KappaAccuracy::default());
    Ok(k * e(wrap01(cross.frac_times(triangular(n)))))
}

pub fn eval(expr: &NilseqExpr, n: i64) -> Result<Complex64> {
    expr.eval(n)
}

pub fn shift(expr: NilseqExpr, k: i64) -> NilseqExpr {
    expr.shift(k)
}

pub fn floor_linear_value(alpha: &QAffineReal, beta: &QAffineReal, n: i64) -> Result<Complex64> {
    NilseqExpr::floor_linear(alpha.clone(), beta.clone())?.eval(n)
}

pub fn floor_quad_value(alpha: &QAffineReal, beta: &QAffineReal, n: i64) -> Result<Complex64> {
    NilseqExpr::floor_quad(alpha.clone(), beta.clone())?.eval(n)
}

/// `e(γ) ω(α_1, β_1) ⋯ ω(α_d, β_d)` as an expression: the closed form of the
/// Heisenberg orbit sequence.
pub fn heisenberg_closed_form(sys: &HeisenbergSystem) -> Result<NilseqExpr> {
    let mut parts = vec![NilseqExpr::exp(sys.gamma().clone())];
    for (a, b) in sys.alpha().iter().zip(sys.beta()) {
        parts.push(NilseqExpr::omega(a.clone(), b.clone())?);
    }
    Ok(NilseqExpr::product(parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::IrrationalBasis;
    use crate::theta::kappa;
    use proptest::prelude::*;

    fn q(t: &str) -> QAffineReal {
        QAffineReal::parse(t, &IrrationalBasis::standard()).unwrap()
    }

    fn near(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn elementary_examples() {
        let v = NilseqExpr::quad(q("1/8")).eval(4).unwrap();
        assert!(near(v, Complex64::new(0.0, -1.0), 1e-15));
        let ex = NilseqExpr::exp(q("1/2"));
        for n in -5..5i64 {
            let want = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!(near(ex.eval(n).unwrap(), Complex64::new(want, 0.0), 1e-15));
        }
        let om = NilseqExpr::omega(q("xi1"), q("xi2")).unwrap();
        let k = kappa(
            q("xi1").to_float(),
            q("xi2").to_float(),
            &KappaAccuracy::default(),
        )
        .unwrap();
        assert!(near(om.eval(1).unwrap(), k, 1e-15));
        assert!(near(
            NilseqExpr::one().eval(17).unwrap(),
            Complex64::new(1.0, 0.0),
            0.0
        ));
    }

    #[test]
    fn omega_matches_float_formula() {
        let (a, b) = (q("xi1 - 1/3"), q("2*xi3 + 1/5"));
        let om = NilseqExpr::omega(a.clone(), b.clone()).unwrap();
        let (af, bf) = (a.to_float(), b.to_float());
        for n in -50i64..50 {
            let nf = n as f64;
            let want = kappa(nf * af, nf * bf, &KappaAccuracy::default()).unwrap()
                * e(nf * (nf - 1.0) / 2.0 * af * bf);
            assert!(near(om.eval(n).unwrap(), want, 1e-10), "n={n}");
            let k = kappa(nf * af, nf * bf, &KappaAccuracy::default()).unwrap();
            assert!((om.eval(n).unwrap().norm() - k.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn quad_times_exp_is_the_affine_orbit() {
        let (a, b) = (q("xi1"), q("xi4 + 1/7"));
        let expr = NilseqExpr::product([NilseqExpr::quad(a.clone()), NilseqExpr::exp(b.clone())]);
        let sys = AffineSkewSystem::new(a, b).unwrap();
        for n in [-1000i64, -3, 0, 1, 2, 77, 5000] {
            assert!(near(
                expr.eval(n).unwrap(),
                sys.orbit_value(n).unwrap(),
                1e-12
            ));
        }
    }

    #[test]
    fn omega_product_is_the_heisenberg_orbit() {
        let sys = HeisenbergSystem::new(
            vec![q("xi1"), q("xi3")],
            vec![q("xi2"), q("xi4")],
            q("1/3 + xi2"),
        )
        .unwrap();
        let expr = heisenberg_closed_form(&sys).unwrap();
        let orbit = NilseqExpr::heisenberg_orbit(sys.clone());
        for n in [-10_000i64, -999, -1, 0, 1, 2, 3, 1234, 9999, 10_000] {
            assert!(
                near(expr.eval(n).unwrap(), orbit.eval(n).unwrap(), 1e-11),
                "n={n}"
            );
        }
    }

    #[test]
    fn shift_examples() {
        let s = q("xi2");
        let ex = NilseqExpr::exp(s.clone()).shift(3);
        let sf = s.to_float();
        for n in 0..20i64 {
            let want = e(3.0 * sf) * e(n as f64 * sf);
            assert!(near(ex.eval(n).unwrap(), want, 1e-12));
        }
        let t = q("xi1");
        let quad = NilseqExpr::quad(t.clone());
        let sh = quad.clone().shift(7);
        let tf = t.to_float();
        for n in 0..20i64 {
            let want = quad.eval(7).unwrap() * e(n as f64 * 7.0 * tf) * quad.eval(n).unwrap();
            assert!(near(sh.eval(n).unwrap(), want, 1e-11));
        }
        let a = quad.clone().shift(2).shift(3);
        assert_eq!(a, quad.clone().shift(5));
        assert_eq!(quad.clone().shift(4).shift(-4), quad);
    }

    #[test]
    fn floor_examples() {
        let (a, b) = (q("xi1"), q("xi2"));
        let bf = b.to_float();
        assert!(near(
            floor_linear_value(&a, &b, 0).unwrap(),
            Complex64::new(1.0, 0.0),
            0.0
        ));
        assert!(near(floor_linear_value(&a, &b, 1).unwrap(), e(bf), 1e-15));
        assert!(near(
            floor_linear_value(&a, &b, 2).unwrap(),
            e(2.0 * bf),
            1e-15
        ));
        assert!(near(
            floor_quad_value(&a, &b, 0).unwrap(),
            Complex64::new(1.0, 0.0),
            0.0
        ));
        assert!(near(floor_quad_value(&a, &b, 1).unwrap(), e(bf), 1e-15));
        assert!(near(
            floor_quad_value(&q("1/2"), &b, 3).unwrap(),
            e(3.0 * bf),
            1e-14
        ));
        // exact rational boundary: ⌊4 * 1/2⌋ = 2 with no float wobble
        assert!(near(
            floor_linear_value(&q("1/2"), &b, 4).unwrap(),
            e(2.0 * bf),
            1e-14
        ));
        assert!(near(
            floor_linear_value(&q("1/3"), &b, -3).unwrap(),
            e(-bf),
            1e-14
        ));
    }

    #[test]
    fn rational_quad_phase_is_exact_at_large_n() {
        let quad = NilseqExpr::quad(q("3/7"));
        for n in [999_999i64, 1_000_000, 123_456_789_012] {
            let nn = triangular(n);
            let want = e((nn * 3 % 7) as f64 / 7.0);
            assert!(near(quad.eval(n).unwrap(), want, 1e-12));
        }
    }

    #[test]
    fn large_index_errors() {
        assert!(NilseqExpr::exp(q("xi1")).eval(1i64 << 53).is_err());
        assert!(NilseqExpr::exp(q("xi1")).eval(1i64 << 52).is_ok());
    }

    fn sample() -> NilseqExpr {
        NilseqExpr::sum([
            (
                Complex64::new(0.5, -1.0),
                NilseqExpr::product([
                    NilseqExpr::quad(q("xi1")),
                    NilseqExpr::omega(q("xi2"), q("xi3")).unwrap(),
                ]),
            ),
            (
                Complex64::new(2.0, 0.0),
                NilseqExpr::floor_linear(q("xi1"), q("xi4")).unwrap().conj(),
            ),
        ])
    }

    proptest! {
        #[test]
        fn unimodular_products(n in -100_000i64..100_000, s in 0u8..3) {
            let expr = NilseqExpr::product([
                NilseqExpr::exp(q("xi3 - 1/4")),
                NilseqExpr::quad(q("xi1")),
                NilseqExpr::floor_quad(q("xi2"), q("xi4")).unwrap(),
                NilseqExpr::floor_linear(q("xi1"), q("xi2")).unwrap(),
            ]).shift(s as i64);
            prop_assert!(expr.is_unimodular());
            prop_assert!((expr.eval(n).unwrap().norm() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn conjugation(n in -1000i64..1000) {
            let a = sample();
            prop_assert!(near(a.clone().conj().eval(n).unwrap(), a.eval(n).unwrap().conj(), 0.0));
        }

        #[test]
        fn shift_homomorphism(j in -1000i64..1000, k in -1000i64..1000, n in -1000i64..1000) {
            let a = sample();
            let lhs = a.clone().shift(j + k).eval(n).unwrap();
            let rhs = a.clone().shift(j).shift(k).eval(n).unwrap();
            prop_assert!(near(lhs, rhs, 1e-12));
            prop_assert!(near(a.clone().shift(k).eval(n).unwrap(), a.eval(n + k).unwrap(), 0.0));
        }
    }
}

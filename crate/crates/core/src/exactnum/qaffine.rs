use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::basis::{is_label, same_basis, IrrationalBasis};
use super::linalg::{left_kernel_vector, primitive_integer_vector};
use super::phase::{DoubleDouble, LinearPhase};
use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("bad rational `{s}`")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A real number `c + Σ q_j ξ_j` with rational `c, q_j` over a declared
/// irrational basis `ξ`.
#[derive(Debug, Clone)]
pub struct QAffineReal {
    konst: Rational,
    coeffs: BTreeMap<usize, Rational>,
    basis: Arc<IrrationalBasis>,
}

impl PartialEq for QAffineReal {
    fn eq(&self, other: &Self) -> bool {
        same_basis(&self.basis, &other.basis)
            && self.konst == other.konst
            && self.coeffs == other.coeffs
    }
}

impl QAffineReal {
    pub fn new(
        konst: Rational,
        coeffs: impl IntoIterator<Item = (usize, Rational)>,
        basis: &Arc<IrrationalBasis>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, c) in coeffs {
            if i >= basis.len() {
                return Err(Error::InvalidInput(format!(
                    "basis index {i} out of range for `{}`",
                    basis.name
                )));
            }
            let slot: &mut Rational = map.entry(i).or_insert_with(Rational::zero);
            *slot += c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(QAffineReal {
            konst,
            coeffs: map,
            basis: basis.clone(),
        })
    }

    pub fn zero(basis: &Arc<IrrationalBasis>) -> Self {
        Self::rational(Rational::zero(), basis)
    }

    pub fn rational(r: Rational, basis: &Arc<IrrationalBasis>) -> Self {
        QAffineReal {
            konst: r,
            coeffs: BTreeMap::new(),
            basis: basis.clone(),
        }
    }

    pub fn from_ratio(n: i64, d: i64, basis: &Arc<IrrationalBasis>) -> Self {
        Self::rational(rat(n, d), basis)
    }

    /// The basis symbol with the given label.
    pub fn symbol(label: &str, basis: &Arc<IrrationalBasis>) -> Result<Self> {
        let i = basis
            .index_of(label)
            .ok_or_else(|| Error::InvalidInput(format!("unknown basis label `{label}`")))?;
        Ok(QAffineReal {
            konst: Rational::zero(),
            coeffs: BTreeMap::from([(i, Rational::one())]),
            basis: basis.clone(),
        })
    }

    pub fn const_term(&self) -> &Rational {
        &self.konst
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, Rational> {
        &self.coeffs
    }

    pub fn basis(&self) -> &Arc<IrrationalBasis> {
        &self.basis
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if same_basis(&self.basis, &other.basis) {
            Ok(())
        } else {
            Err(Error::BasisMismatch(
                self.basis.name.clone(),
                other.basis.name.clone(),
            ))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        let mut coeffs = self.coeffs.clone();
        for (i, c) in &other.coeffs {
            let slot = coeffs.entry(*i).or_insert_with(Rational::zero);
            *slot += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(QAffineReal {
            konst: &self.konst + &other.konst,
            coeffs,
            basis: self.basis.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.basis);
        }
        QAffineReal {
            konst: &self.konst * c,
            coeffs: self.coeffs.iter().map(|(i, v)| (*i, v * c)).collect(),
            basis: self.basis.clone(),
        }
    }

    pub fn add_rational(&self, r: &Rational) -> Self {
        let mut out = self.clone();
        out.konst += r;
        out
    }

    /// Reduces the constant term into `[0, 1)`; coefficients are untouched.
    pub fn mod1(&self) -> Self {
        let mut out = self.clone();
        out.konst = &self.konst - self.konst.floor();
        out
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_integer(&self) -> bool {
        self.coeffs.is_empty() && self.konst.is_integer()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.konst.is_zero()
    }

    /// `const + Σ coeff * approx`, accumulated left to right in basis order.
    pub fn to_float(&self) -> f64 {
        let mut acc = rational_to_f64(&self.konst);
        for (i, c) in &self.coeffs {
            acc += rational_to_f64(c) * self.basis.approx(*i);
        }
        acc
    }

    /// Double-double image of the irrational part `Σ coeff * approx`.
    pub fn irrational_dd(&self) -> DoubleDouble {
        self.coeffs.iter().fold(DoubleDouble::ZERO, |acc, (i, c)| {
            acc.add(DoubleDouble::from_rational(c).mul_f64(self.basis.approx(*i)))
        })
    }

    /// Prepared form for evaluating `frac(n * self)`.
    pub fn phase(&self) -> LinearPhase {
        LinearPhase::new(&self.konst, self.irrational_dd())
    }

    /// Coefficient row over the full basis (constant term excluded).
    pub fn coeff_row(&self) -> Vec<Rational> {
        (0..self.basis.len())
            .map(|i| self.coeffs.get(&i).cloned().unwrap_or_else(Rational::zero))
            .collect()
    }

    /// Parses `1/2 + xi1 - 3/4*xi2` style text over `basis`.
    pub fn parse(text: &str, basis: &Arc<IrrationalBasis>) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty value".into()));
        }
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-')
                && bytes[i - 1] != b'*'
                && bytes[i - 1] != b'/'
            {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        let mut out = Self::zero(basis);
        for term in terms {
            let (sign, body) = match term.as_bytes()[0] {
                b'-' => (-Rational::one(), &term[1..]),
                b'+' => (Rational::one(), &term[1..]),
                _ => (Rational::one(), term),
            };
            if body.is_empty() {
                return Err(Error::Parse(format!("dangling sign in `{text}`")));
            }
            let (coef, label) = match body.split_once('*') {
                Some((c, l)) => (parse_rational(c)?, Some(l)),
                None if is_label(body) => (Rational::one(), Some(body)),
                None => (parse_rational(body)?, None),
            };
            let value = match label {
                Some(l) => QAffineReal::symbol(l, basis)?.scale(&coef),
                None => QAffineReal::rational(coef, basis),
            };
            out = out.add(&value.scale(&sign))?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> QAffineJson {
        QAffineJson {
            konst: format_rational(&self.konst),
            coeffs: self
                .coeffs
                .iter()
                .map(|(i, c)| (self.basis.label(*i).to_string(), format_rational(c)))
                .collect(),
            basis: Some(self.basis.name.clone()),
        }
    }

    pub fn from_json(j: &QAffineJson, basis: &Arc<IrrationalBasis>) -> Result<Self> {
        if let Some(name) = &j.basis {
            if name != &basis.name {
                return Err(Error::BasisMismatch(name.clone(), basis.name.clone()));
            }
        }
        let mut coeffs = Vec::new();
        for (label, c) in &j.coeffs {
            let i = basis
                .index_of(label)
                .ok_or_else(|| Error::InvalidInput(format!("unknown basis label `{label}`")))?;
            coeffs.push((i, parse_rational(c)?));
        }
        QAffineReal::new(parse_rational(&j.konst)?, coeffs, basis)
    }
}

impl fmt::Display for QAffineReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.konst.is_zero() || self.coeffs.is_empty() {
            write!(f, "{}", format_rational(&self.konst))?;
            first = false;
        }
        for (i, c) in &self.coeffs {
            let label = self.basis.label(*i);
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag.is_one() {
                write!(f, "{label}")?;
            } else {
                write!(f, "{}*{label}", format_rational(&mag))?;
            }
            first = false;
        }
        Ok(())
    }
}

/// Wire form: `{"const":"p/q","coeffs":{"xi1":"r/s"},"basis":"name"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAffineJson {
    #[serde(rename = "const")]
    pub konst: String,
    #[serde(default)]
    pub coeffs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

fn check_common_basis(xs: &[QAffineReal]) -> Result<()> {
    if let Some(first) = xs.first() {
        for x in &xs[1..] {
            first.check_basis(x)?;
        }
    }
    Ok(())
}

/// A primitive integer vector `n` with `Σ n_i x_i` rational, if one exists.
pub fn find_integer_relation(xs: &[QAffineReal]) -> Result<Option<Vec<BigInt>>> {
    check_common_basis(xs)?;
    let Some(first) = xs.first() else {
        return Ok(None);
    };
    let rows: Vec<Vec<Rational>> = xs.iter().map(QAffineReal::coeff_row).collect();
    Ok(left_kernel_vector(&rows, first.basis.len()).map(|c| primitive_integer_vector(&c)))
}

/// True iff no nontrivial integer combination of `xs` is rational.
pub fn independent_mod1(xs: &[QAffineReal]) -> Result<bool> {
    Ok(find_integer_relation(xs)?.is_none())
}

/// Human-readable form of an integer relation, e.g. `2*x1 - 1*x2`.
pub fn describe_relation(rel: &[BigInt], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (n, name) in rel.iter().zip(names) {
        if !n.is_zero() {
            parts.push(format!("({n})*{name}"));
        }
    }
    format!("{} is rational", parts.join(" + "))
}

/// Phase of the product `a * b` (exact rational part plus a double-double
/// image of the rest).
pub fn product_phase(a: &QAffineReal, b: &QAffineReal) -> Result<LinearPhase> {
    dot_phase(std::slice::from_ref(a), std::slice::from_ref(b))
}

/// Phase of `Σ a_j b_j`.
pub fn dot_phase(a: &[QAffineReal], b: &[QAffineReal]) -> Result<LinearPhase> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut r = Rational::zero();
    let mut f = DoubleDouble::ZERO;
    for (x, y) in a.iter().zip(b) {
        x.check_basis(y)?;
        r += &x.konst * &y.konst;
        let (fx, fy) = (x.irrational_dd(), y.irrational_dd());
        let rx = DoubleDouble::from_rational(&x.konst);
        let ry = DoubleDouble::from_rational(&y.konst);
        f = f.add(rx.mul(fy)).add(ry.mul(fx)).add(fx.mul(fy));
    }
    Ok(LinearPhase::new(&r, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn std() -> Arc<IrrationalBasis> {
        IrrationalBasis::standard()
    }

    fn xi(i: usize) -> QAffineReal {
        QAffineReal::symbol(&format!("xi{i}"), &std()).unwrap()
    }

    fn r(n: i64, d: i64) -> QAffineReal {
        QAffineReal::from_ratio(n, d, &std())
    }

    #[test]
    fn add_examples() {
        assert_eq!(r(1, 2).add(&r(1, 3)).unwrap(), r(5, 6));
        let z = xi(1).add(&xi(1).scale(&rat(-1, 1))).unwrap();
        assert!(z.is_zero());
        assert!(z.coeffs().is_empty());
        let s = r(1, 2)
            .add(&xi(1))
            .unwrap()
            .add(&r(1, 2).add(&xi(2)).unwrap())
            .unwrap();
        assert_eq!(s, QAffineReal::parse("1 + xi1 + xi2", &std()).unwrap());
    }

    #[test]
    fn basis_mismatch_is_error() {
        let other = IrrationalBasis::new("other", vec![]).unwrap();
        let a = QAffineReal::from_ratio(1, 2, &other);
        assert!(matches!(a.add(&r(1, 2)), Err(Error::BasisMismatch(..))));
    }

    #[test]
    fn scale_examples() {
        assert_eq!(xi(1).scale(&rat(1, 2)).scale(&rat(2, 1)), xi(1));
        assert!(QAffineReal::parse("3 + xi2", &std())
            .unwrap()
            .scale(&rat(0, 1))
            .is_zero());
        assert_eq!(r(3, 5).scale(&rat(1, 3)), r(1, 5));
    }

    #[test]
    fn mod1_examples() {
        assert_eq!(r(7, 3).mod1(), r(1, 3));
        let a = QAffineReal::parse("-1/4 + xi1", &std()).unwrap();
        assert_eq!(a.mod1(), QAffineReal::parse("3/4 + xi1", &std()).unwrap());
        assert_eq!(xi(1).mod1(), xi(1));
    }

    #[test]
    fn is_integer_examples() {
        assert!(r(4, 2).is_integer());
        assert!(!r(1, 2).is_integer());
        let a = xi(1).sub(&xi(1)).unwrap().add(&r(3, 1)).unwrap();
        assert!(a.is_integer());
    }

    #[test]
    fn independence_examples() {
        assert!(independent_mod1(&[xi(1), xi(2)]).unwrap());
        assert!(!independent_mod1(&[xi(1), xi(1).scale(&rat(2, 1))]).unwrap());
        let a = QAffineReal::parse("1/2 + xi1", &std()).unwrap();
        assert!(!independent_mod1(&[a, xi(1)]).unwrap());
        let rel = find_integer_relation(&[xi(1), xi(1).scale(&rat(2, 1))])
            .unwrap()
            .unwrap();
        assert_eq!(rel, vec![BigInt::from(2), BigInt::from(-1)]);
    }

    #[test]
    fn to_float_examples() {
        assert_eq!(r(1, 2).to_float(), 0.5);
        assert_eq!(xi(1).to_float(), std::f64::consts::SQRT_2);
        let a = QAffineReal::parse("1/4 + xi1", &std()).unwrap();
        assert!((a.to_float() - 1.6642135623730951).abs() < 1e-15);
    }

    #[test]
    fn parse_and_display() {
        let a = QAffineReal::parse("-1/2 + 3/4*xi2 - xi1", &std()).unwrap();
        assert_eq!(a.to_string(), "-1/2 - xi1 + 3/4*xi2");
        assert_eq!(QAffineReal::parse(&a.to_string(), &std()).unwrap(), a);
        assert!(QAffineReal::parse("xi9", &std()).is_err());
        assert!(QAffineReal::parse("1/0", &std()).is_err());
        assert_eq!(
            QAffineReal::parse("-2*xi3", &std()).unwrap().to_string(),
            "-2*xi3"
        );
    }

    #[test]
    fn json_shape() {
        let a = QAffineReal::parse("1/3 + 2*xi1", &std()).unwrap();
        let j = serde_json::to_string(&a.to_json()).unwrap();
        assert_eq!(j, r#"{"const":"1/3","coeffs":{"xi1":"2"},"basis":"std"}"#);
        let back: QAffineJson = serde_json::from_str(&j).unwrap();
        assert_eq!(QAffineReal::from_json(&back, &std()).unwrap(), a);
    }

    #[test]
    fn product_phase_matches_float() {
        let a = QAffineReal::parse("1/2 + xi1", &std()).unwrap();
        let b = QAffineReal::parse("1/3 + xi2", &std()).unwrap();
        let p = product_phase(&a, &b).unwrap();
        let direct = a.to_float() * b.to_float();
        let got = p.frac_times(1);
        assert!((got - (direct - direct.floor())).abs() < 1e-14);
    }

    /// Brute-force search for `Σ n_i x_i` rational with |n_i| <= bound.
    fn brute_relation(xs: &[QAffineReal], bound: i64) -> bool {
        let k = xs.len();
        let mut n = vec![-bound; k];
        loop {
            if n.iter().any(|v| *v != 0) {
                let mut acc = QAffineReal::zero(&std());
                for (c, x) in n.iter().zip(xs) {
                    acc = acc.add(&x.scale(&rat(*c, 1))).unwrap();
                }
                if acc.is_rational() {
                    return true;
                }
            }
            let mut i = 0;
            loop {
                if i == k {
                    return false;
                }
                n[i] += 1;
                if n[i] > bound {
                    n[i] = -bound;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    fn arb_qaffine() -> impl Strategy<Value = QAffineReal> {
        (-6i64..=6, 1i64..=4, proptest::collection::vec(-3i64..=3, 4)).prop_map(|(n, d, cs)| {
            QAffineReal::new(
                rat(n, d),
                cs.into_iter().enumerate().map(|(i, c)| (i, rat(c, 1))),
                &std(),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mod1_idempotent_and_integral_offset(a in arb_qaffine()) {
            let m = a.mod1();
            prop_assert_eq!(m.mod1(), m.clone());
            prop_assert!(m.sub(&a).unwrap().is_integer());
        }

        #[test]
        fn independence_permutation_and_shift(a in arb_qaffine(), b in arb_qaffine(), c in -5i64..5) {
            let base = independent_mod1(&[a.clone(), b.clone()]).unwrap();
            prop_assert_eq!(base, independent_mod1(&[b.clone(), a.clone()]).unwrap());
            prop_assert_eq!(base, independent_mod1(&[a.add_rational(&rat(c, 3)), b.clone()]).unwrap());
        }

        #[test]
        fn independence_matches_brute_force(a in arb_qaffine(), b in arb_qaffine()) {
            // coefficients in [-3, 3] keep any relation within |n| <= 20
            let exact = independent_mod1(&[a.clone(), b.clone()]).unwrap();
            prop_assert_eq!(exact, !brute_relation(&[a, b], 20));
        }

        #[test]
        fn rational_singletons_are_dependent(n in -20i64..20, d in 1i64..9) {
            prop_assert!(!independent_mod1(&[r(n, d)]).unwrap());
        }

        #[test]
        fn float_of_sum(a in arb_qaffine(), b in arb_qaffine()) {
            let s = a.add(&b).unwrap().to_float();
            let t = a.to_float() + b.to_float();
            // ulp taken at the magnitude of the largest intermediate term
            let scale = [&a, &b].iter().map(|x| {
                rational_to_f64(x.const_term()).abs()
                    + x.coeffs().iter().map(|(i, c)| (rational_to_f64(c) * std().approx(*i)).abs()).sum::<f64>()
            }).sum::<f64>().max(f64::MIN_POSITIVE);
            let ulp = f64::EPSILON * 2f64.powi(scale.log2().floor() as i32);
            prop_assert!((s - t).abs() <= 4.0 * ulp, "{} vs {}", s, t);
        }
    }
}

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exactnum::{
    dot_phase, e, frac_mul_int, independent_mod1, wrap01, DoubleDouble, LinearPhase, QAffineReal,
};
use crate::theta::{kappa, KappaAccuracy};

/// Largest `|n|` accepted by the closed-form orbit machinery.
pub const MAX_ORBIT_INDEX: i64 = 1 << 52;

/// Fundamental-domain coordinates within this distance of 1 snap to 0.
const SNAP: f64 = 1e-12;

/// An element `(x, y, z)` of `H_d = R^d × R^d × S^1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergElement {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Complex64,
}

/// Lattice element `(k, l, 1)` of `Λ_d = Z^d × Z^d × {1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    pub k: Vec<i128>,
    pub l: Vec<i128>,
}

impl Lattice {
    pub fn zero(d: usize) -> Self {
        Lattice {
            k: vec![0; d],
            l: vec![0; d],
        }
    }

    pub fn to_element(&self) -> HeisenbergElement {
        HeisenbergElement {
            x: self.k.iter().map(|v| *v as f64).collect(),
            y: self.l.iter().map(|v| *v as f64).collect(),
            z: Complex64::new(1.0, 0.0),
        }
    }
}

/// A point of `N_d = H_d / Λ_d`, stored as its representative with
/// `x, y ∈ [0, 1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergPoint(HeisenbergElement);

impl HeisenbergPoint {
    pub fn new(g: HeisenbergElement) -> Result<Self> {
        let in_range = |v: &f64| (0.0..1.0).contains(v);
        if !g.x.iter().all(in_range) || !g.y.iter().all(in_range) {
            return Err(Error::InvalidInput(
                "point coordinates must lie in [0, 1)".into(),
            ));
        }
        Ok(HeisenbergPoint(g))
    }

    pub fn element(&self) -> &HeisenbergElement {
        &self.0
    }

    pub fn into_element(self) -> HeisenbergElement {
        self.0
    }
}

/// `<a|b>` mod 1, with products and sum carried in double-double.
pub(crate) fn dot_frac(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(DoubleDouble::ZERO, |acc, (x, y)| {
            acc.add(DoubleDouble::from_f64(*x).mul_f64(*y)).frac()
        })
        .to_f64()
}

fn unit(z: Complex64) -> Complex64 {
    z / z.norm()
}

impl HeisenbergElement {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Complex64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidInput(
                "Heisenberg dimension must be >= 1".into(),
            ));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite("Heisenberg element".into()));
        }
        if (z.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "central coordinate |z| = {} != 1",
                z.norm()
            )));
        }
        Ok(HeisenbergElement { x, y, z })
    }

    pub fn identity(d: usize) -> Self {
        HeisenbergElement {
            x: vec![0.0; d],
            y: vec![0.0; d],
            z: Complex64::new(1.0, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Multiplies the central coordinate by a unit complex number.
    pub fn with_central(&self, u: Complex64) -> Self {
        HeisenbergElement {
            x: self.x.clone(),
            y: self.y.clone(),
            z: unit(self.z * u),
        }
    }
}

fn check_dims(g: &HeisenbergElement, h: &HeisenbergElement) -> Result<()> {
    if g.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: h.dim(),
        });
    }
    Ok(())
}

/// `(x, y, z)(x', y', z') = (x + x', y + y', z z' e(<x|y'>))`.
pub fn h_mul(g: &HeisenbergElement, h: &HeisenbergElement) -> Result<HeisenbergElement> {
    check_dims(g, h)?;
    Ok(HeisenbergElement {
        x: g.x.iter().zip(&h.x).map(|(a, b)| a + b).collect(),
        y: g.y.iter().zip(&h.y).map(|(a, b)| a + b).collect(),
        z: unit(g.z * h.z * e(dot_frac(&g.x, &h.y))),
    })
}

pub fn h_inv(g: &HeisenbergElement) -> HeisenbergElement {
    HeisenbergElement {
        x: g.x.iter().map(|v| -v).collect(),
        y: g.y.iter().map(|v| -v).collect(),
        z: unit(g.z.conj() * e(dot_frac(&g.x, &g.y))),
    }
}

/// `g h g^{-1} h^{-1} = (0, 0, e(<x|y'> - <x'|y>))`.
pub fn h_commutator(g: &HeisenbergElement, h: &HeisenbergElement) -> Result<HeisenbergElement> {
    check_dims(g, h)?;
    let d = g.dim();
    Ok(HeisenbergElement {
        x: vec![0.0; d],
        y: vec![0.0; d],
        z: e(dot_frac(&g.x, &h.y) - dot_frac(&h.x, &g.y)),
    })
}

/// Splits `v` into `(floor, frac)` with fractions within `SNAP` of 1 moved to 0.
fn floor_snap(v: f64) -> (i128, f64) {
    let f = v.floor();
    let r = v - f;
    if r >= 1.0 - SNAP {
        (f as i128 + 1, 0.0)
    } else {
        (f as i128, r)
    }
}

/// Right-coset representative: returns `p` with `x, y ∈ [0, 1)^d` and
/// `(k, l)` such that `p · (k, l, 1) = g`.
pub fn reduce_to_fundamental(g: &HeisenbergElement) -> (HeisenbergPoint, Lattice) {
    let (k, xf): (Vec<i128>, Vec<f64>) = g.x.iter().map(|v| floor_snap(*v)).unzip();
    let (l, yf): (Vec<i128>, Vec<f64>) = g.y.iter().map(|v| floor_snap(*v)).unzip();
    // p = (x_f, y_f, z e(-<x_f|l>)); the pairing is reduced mod 1 termwise
    let phase: f64 = xf.iter().zip(&l).map(|(x, li)| frac_mul_int(*li, *x)).sum();
    let p = HeisenbergElement {
        x: xf,
        y: yf,
        z: unit(g.z * e(-phase)),
    };
    (HeisenbergPoint(p), Lattice { k, l })
}

/// `f~(x, y, z) = z Π_j κ(x_j, y_j)`: the Gaussian weight-one function,
/// invariant under right translation by `Λ_d`.
pub fn c1_gaussian(g: &HeisenbergElement) -> Result<Complex64> {
    let acc = KappaAccuracy::default();
    let mut v = g.z;
    for (x, y) in g.x.iter().zip(&g.y) {
        v *= kappa(*x, *y, &acc)?;
    }
    Ok(v)
}

/// Translation `τ = (α, β, e(γ))` on `N_d`.
#[derive(Debug, Clone)]
pub struct HeisenbergSystem {
    alpha: Vec<QAffineReal>,
    beta: Vec<QAffineReal>,
    gamma: QAffineReal,
    alpha_phase: Vec<LinearPhase>,
    beta_phase: Vec<LinearPhase>,
    gamma_phase: LinearPhase,
    cross_phase: LinearPhase,
}

impl PartialEq for HeisenbergSystem {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.beta == other.beta && self.gamma == other.gamma
    }
}

/// `n(n-1)/2` exactly.
pub fn triangular(n: i64) -> i128 {
    let n = n as i128;
    n * (n - 1) / 2
}

pub(crate) fn check_index(n: i64) -> Result<()> {
    if n.unsigned_abs() > MAX_ORBIT_INDEX as u64 {
        return Err(Error::Overflow(format!("index {n} exceeds 2^52")));
    }
    Ok(())
}

impl HeisenbergSystem {
    pub fn new(
        alpha: Vec<QAffineReal>,
        beta: Vec<QAffineReal>,
        gamma: QAffineReal,
    ) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidInput(
                "Heisenberg dimension must be >= 1".into(),
            ));
        }
        if alpha.len() != beta.len() {
            return Err(Error::DimensionMismatch {
                expected: alpha.len(),
                got: beta.len(),
            });
        }
        let cross_phase = dot_phase(&alpha, &beta)?;
        // dot_phase checked α/β pairs; γ must share the basis too
        gamma.add(&alpha[0])?;
        Ok(HeisenbergSystem {
            alpha_phase: alpha.iter().map(QAffineReal::phase).collect(),
            beta_phase: beta.iter().map(QAffineReal::phase).collect(),
            gamma_phase: gamma.phase(),
            cross_phase,
            alpha,
            beta,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[QAffineReal] {
        &self.alpha
    }

    pub fn beta(&self) -> &[QAffineReal] {
        &self.beta
    }

    pub fn gamma(&self) -> &QAffineReal {
        &self.gamma
    }

    /// `τ` itself as a group element.
    pub fn tau(&self) -> HeisenbergElement {
        HeisenbergElement {
            x: self.alpha.iter().map(QAffineReal::to_float).collect(),
            y: self.beta.iter().map(QAffineReal::to_float).collect(),
            z: e(self.gamma.to_float()),
        }
    }

    fn central_phase(&self, n: i64) -> f64 {
        self.gamma_phase.frac_times(n as i128) + self.cross_phase.frac_times(triangular(n))
    }

    /// `τ^n = (nα, nβ, e(nγ) e(n(n-1)/2 <α|β>))`.
    pub fn tau_pow(&self, n: i64) -> Result<HeisenbergElement> {
        check_index(n)?;
        let coord = |p: &LinearPhase| {
            p.times_f64(n)
                .ok_or_else(|| Error::Overflow(format!("coordinate of tau^{n}")))
        };
        Ok(HeisenbergElement {
            x: self.alpha_phase.iter().map(coord).collect::<Result<_>>()?,
            y: self.beta_phase.iter().map(coord).collect::<Result<_>>()?,
            z: e(self.central_phase(n)),
        })
    }

    /// `reduce_to_fundamental(τ^n)`, computed from the exact parameter data
    /// so that the fractional coordinates stay accurate for large `n`.
    pub fn orbit_point(&self, n: i64) -> Result<(HeisenbergPoint, Lattice)> {
        check_index(n)?;
        let split = |p: &LinearPhase| -> Result<(i128, f64)> {
            let (i, f) = p
                .split_times(n)
                .ok_or_else(|| Error::Overflow(format!("coordinate of tau^{n}")))?;
            Ok(if f >= 1.0 - SNAP {
                (i + 1, 0.0)
            } else {
                (i, f)
            })
        };
        let (k, xf): (Vec<i128>, Vec<f64>) = self
            .alpha_phase
            .iter()
            .map(split)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        let (l, yf): (Vec<i128>, Vec<f64>) = self
            .beta_phase
            .iter()
            .map(split)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        let pairing: f64 = xf.iter().zip(&l).map(|(x, li)| frac_mul_int(*li, *x)).sum();
        let z = e(wrap01(self.central_phase(n) - pairing));
        Ok((
            HeisenbergPoint(HeisenbergElement { x: xf, y: yf, z }),
            Lattice { k, l },
        ))
    }

    /// `f(T^n x_0)` with `f` induced by `c1_gaussian` and `x_0` the image of
    /// the identity.
    pub fn orbit_value(&self, n: i64) -> Result<Complex64> {
        let (p, _) = self.orbit_point(n)?;
        c1_gaussian(p.element())
    }

    /// Minimal iff `α_1..α_d, β_1..β_d` are rationally independent mod 1.
    pub fn is_minimal(&self) -> bool {
        let all: Vec<QAffineReal> = self.alpha.iter().chain(&self.beta).cloned().collect();
        independent_mod1(&all).unwrap_or(false)
    }
}

pub fn tau_pow(sys: &HeisenbergSystem, n: i64) -> Result<HeisenbergElement> {
    sys.tau_pow(n)
}

pub fn heisenberg_orbit_value(sys: &HeisenbergSystem, n: i64) -> Result<Complex64> {
    sys.orbit_value(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::IrrationalBasis;
    use crate::theta::kappa_centered;
    use proptest::prelude::*;

    fn el(x: f64, y: f64, z: Complex64) -> HeisenbergElement {
        HeisenbergElement::new(vec![x], vec![y], z).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn close(a: &HeisenbergElement, b: &HeisenbergElement, tol: f64) -> bool {
        a.x.iter().zip(&b.x).all(|(p, q)| (p - q).abs() < tol)
            && a.y.iter().zip(&b.y).all(|(p, q)| (p - q).abs() < tol)
            && (a.z - b.z).norm() < tol
    }

    fn sys1(alpha: &str, beta: &str, gamma: &str) -> HeisenbergSystem {
        let b = IrrationalBasis::standard();
        HeisenbergSystem::new(
            vec![QAffineReal::parse(alpha, &b).unwrap()],
            vec![QAffineReal::parse(beta, &b).unwrap()],
            QAffineReal::parse(gamma, &b).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn mul_examples() {
        let p = h_mul(&el(0.5, 0.0, one()), &el(0.0, 0.5, one())).unwrap();
        assert!(close(&p, &el(0.5, 0.5, Complex64::new(0.0, 1.0)), 1e-15));
        let g = el(0.3, -1.2, e(0.1));
        assert!(close(
            &h_mul(&g, &HeisenbergElement::identity(1)).unwrap(),
            &g,
            1e-15
        ));
        let a = h_mul(&el(1.0, 0.0, one()), &el(0.0, 1.0, one())).unwrap();
        let b = h_mul(&a, &el(0.0, 0.0, -one())).unwrap();
        assert!(close(&b, &el(1.0, 1.0, -one()), 1e-15));
    }

    #[test]
    fn inverse_examples() {
        let i = Complex64::new(0.0, 1.0);
        assert!(close(&h_inv(&el(0.0, 0.0, i)), &el(0.0, 0.0, -i), 1e-15));
        assert!(close(
            &h_inv(&el(1.0, 1.0, one())),
            &el(-1.0, -1.0, one()),
            1e-15
        ));
        let g = el(0.5, 0.5, one());
        let gi = h_inv(&g);
        assert!(close(&gi, &el(-0.5, -0.5, e(0.25)), 1e-15));
        assert!(close(
            &h_mul(&g, &gi).unwrap(),
            &HeisenbergElement::identity(1),
            1e-15
        ));
    }

    #[test]
    fn commutator_examples() {
        let c = h_commutator(&el(0.5, 0.0, one()), &el(0.0, 1.0, one())).unwrap();
        assert!(close(&c, &el(0.0, 0.0, -one()), 1e-15));
        let g = el(0.3, 0.9, e(0.2));
        assert!(close(
            &h_commutator(&g, &g).unwrap(),
            &HeisenbergElement::identity(1),
            1e-15
        ));
        let c = h_commutator(&el(1.0, 0.0, one()), &el(0.0, 1.0, one())).unwrap();
        assert!(close(&c, &HeisenbergElement::identity(1), 1e-15));
        // agrees with the group word g h g^-1 h^-1
        let (g, h) = (el(0.37, -1.1, e(0.3)), el(2.2, 0.45, e(0.8)));
        let word = h_mul(
            &h_mul(&h_mul(&g, &h).unwrap(), &h_inv(&g)).unwrap(),
            &h_inv(&h),
        )
        .unwrap();
        assert!(close(&word, &h_commutator(&g, &h).unwrap(), 1e-12));
    }

    #[test]
    fn dimension_checks() {
        let g2 = HeisenbergElement::identity(2);
        assert!(h_mul(&el(0.0, 0.0, one()), &g2).is_err());
        assert!(HeisenbergElement::new(vec![0.0], vec![0.0], Complex64::new(2.0, 0.0)).is_err());
        assert!(HeisenbergElement::new(vec![], vec![], one()).is_err());
    }

    #[test]
    fn reduce_examples() {
        let g = el(1.25, -0.5, one());
        let (p, lat) = reduce_to_fundamental(&g);
        assert_eq!(
            lat,
            Lattice {
                k: vec![1],
                l: vec![-1]
            }
        );
        assert!(close(p.element(), &el(0.25, 0.5, e(0.25)), 1e-15));
        // brute force: p · (k, l, 1) reproduces g
        let back = h_mul(p.element(), &lat.to_element()).unwrap();
        assert!(close(&back, &g, 1e-14));

        let g = el(0.2, 0.7, e(0.3));
        let (p, lat) = reduce_to_fundamental(&g);
        assert_eq!(lat, Lattice::zero(1));
        assert!(close(p.element(), &g, 1e-15));

        let (p, _) = reduce_to_fundamental(&el(3.0, -2.0, one()));
        assert!(close(p.element(), &HeisenbergElement::identity(1), 1e-15));

        let (p, lat) = reduce_to_fundamental(&el(1.0 - 1e-14, 0.0, one()));
        assert_eq!(lat.k, vec![1]);
        assert_eq!(p.element().x, vec![0.0]);
    }

    #[test]
    fn tau_pow_examples() {
        let s = sys1("xi1", "xi1", "0");
        assert!(close(
            &s.tau_pow(0).unwrap(),
            &HeisenbergElement::identity(1),
            1e-15
        ));
        assert!(close(&s.tau_pow(1).unwrap(), &s.tau(), 1e-15));
        let mut acc = HeisenbergElement::identity(1);
        for _ in 0..5 {
            acc = h_mul(&acc, &s.tau()).unwrap();
        }
        assert!(close(&s.tau_pow(5).unwrap(), &acc, 1e-10));
    }

    #[test]
    fn tau_pow_is_a_homomorphism() {
        let s = sys1("xi1 + 1/3", "xi2", "xi4");
        // the float coordinates of τ^n carry ~|n| ulp of error, which enters
        // the cocycle phase multiplied by |m|; 1e-10 holds up to |n|, |m| ~ 100
        for &(n, m) in &[(3i64, 4i64), (-7, 12), (100, -99), (-100, -100), (57, 43)] {
            let lhs = s.tau_pow(n + m).unwrap();
            let rhs = h_mul(&s.tau_pow(n).unwrap(), &s.tau_pow(m).unwrap()).unwrap();
            assert!(close(&lhs, &rhs, 1e-10), "n={n} m={m}");
        }
        for &(n, m) in &[(1000i64, -999i64), (-1000, -1000), (517, 483)] {
            let lhs = s.tau_pow(n + m).unwrap();
            let rhs = h_mul(&s.tau_pow(n).unwrap(), &s.tau_pow(m).unwrap()).unwrap();
            assert!(close(&lhs, &rhs, 1e-8), "n={n} m={m}");
        }
    }

    #[test]
    fn gaussian_examples() {
        let k00 = kappa_centered(0.0, 0.0, &KappaAccuracy::default()).re;
        let v = c1_gaussian(&HeisenbergElement::identity(1)).unwrap();
        assert!((v - Complex64::new(k00, 0.0)).norm() < 1e-15);
        let v2 = c1_gaussian(&HeisenbergElement::identity(2)).unwrap();
        assert!((v2.re - k00 * k00).abs() < 1e-15);
        let g = el(0.31, 1.7, e(0.4));
        let u = e(0.123);
        let lhs = c1_gaussian(&g.with_central(u)).unwrap();
        assert!((lhs - u * c1_gaussian(&g).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn orbit_point_matches_generic_reduction() {
        let s = sys1("xi1", "xi2 + 1/2", "1/7 + xi3");
        for n in [-300i64, -17, -1, 0, 1, 2, 5, 99, 250] {
            let (p1, l1) = s.orbit_point(n).unwrap();
            let (p2, l2) = reduce_to_fundamental(&s.tau_pow(n).unwrap());
            assert_eq!(l1, l2);
            let (a, b) = (p1.element(), p2.element());
            assert!(close(a, b, 1e-9), "n={n} {:?} {:?}", a, b);
        }
    }

    #[test]
    fn orbit_value_matches_formula() {
        // e(nγ) κ(nα, nβ) e(n(n-1)/2 αβ), evaluated directly in floats for small n
        let s = sys1("xi1", "xi2", "xi4");
        let (a, b, g) = (
            s.alpha[0].to_float(),
            s.beta[0].to_float(),
            s.gamma.to_float(),
        );
        let acc = KappaAccuracy::default();
        for n in -40i64..40 {
            let nf = n as f64;
            let want =
                e(nf * g) * kappa(nf * a, nf * b, &acc).unwrap() * e(nf * (nf - 1.0) / 2.0 * a * b);
            let got = s.orbit_value(n).unwrap();
            assert!((got - want).norm() < 1e-10, "n={n}");
        }
        assert!((s.orbit_value(0).unwrap().re - kappa(0.0, 0.0, &acc).unwrap().re).abs() < 1e-15);
    }

    #[test]
    fn orbit_factorizes_in_dimension_two() {
        let b = IrrationalBasis::standard();
        let q = |t: &str| QAffineReal::parse(t, &b).unwrap();
        let s2 = HeisenbergSystem::new(
            vec![q("xi1"), q("xi3")],
            vec![q("xi2"), q("xi4")],
            q("1/5 + xi2"),
        )
        .unwrap();
        let sa = sys1("xi1", "xi2", "1/5 + xi2");
        let sb = sys1("xi3", "xi4", "0");
        for n in [-500i64, -3, 0, 7, 1234] {
            let want = sa.orbit_value(n).unwrap() * sb.orbit_value(n).unwrap();
            assert!((s2.orbit_value(n).unwrap() - want).norm() < 1e-11, "n={n}");
        }
    }

    #[test]
    fn coset_function_invariance() {
        let s = sys1("xi1", "xi3", "xi2");
        for n in [3i64, 77, 1001] {
            let g = s.tau_pow(n).unwrap();
            let (p, lat) = reduce_to_fundamental(&g);
            let back = h_mul(p.element(), &lat.to_element()).unwrap();
            let (f1, f2) = (
                c1_gaussian(&back).unwrap(),
                c1_gaussian(p.element()).unwrap(),
            );
            assert!((f1 - f2).norm() < 1e-9);
        }
    }

    #[test]
    fn minimality() {
        assert!(sys1("xi1", "xi2", "0").is_minimal());
        assert!(!sys1("xi1", "3*xi1", "0").is_minimal());
        assert!(!sys1("1/2", "xi1", "0").is_minimal());
    }

    fn arb_el() -> impl Strategy<Value = HeisenbergElement> {
        (-3.0f64..3.0, -3.0f64..3.0, 0.0f64..1.0).prop_map(|(x, y, t)| el(x, y, e(t)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn associativity(a in arb_el(), b in arb_el(), c in arb_el()) {
            let l = h_mul(&h_mul(&a, &b).unwrap(), &c).unwrap();
            let r = h_mul(&a, &h_mul(&b, &c).unwrap()).unwrap();
            prop_assert!(close(&l, &r, 1e-12));
        }

        #[test]
        fn commutator_is_central(a in arb_el(), b in arb_el(), c in arb_el()) {
            let k = h_commutator(&a, &b).unwrap();
            prop_assert!(k.x.iter().chain(&k.y).all(|v| *v == 0.0));
            let l = h_mul(&k, &c).unwrap();
            let r = h_mul(&c, &k).unwrap();
            prop_assert!(close(&l, &r, 1e-12));
        }

        #[test]
        fn right_lattice_invariance(g in arb_el(), k in -4i64..4, l in -4i64..4) {
            let lat = Lattice { k: vec![k as i128], l: vec![l as i128] }.to_element();
            let moved = h_mul(&g, &lat).unwrap();
            prop_assert!((c1_gaussian(&moved).unwrap() - c1_gaussian(&g).unwrap()).norm() < 1e-12);
        }
    }
}

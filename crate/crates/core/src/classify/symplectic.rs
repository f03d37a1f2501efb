use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

use super::matrix::RatMatrix;

/// `J_{2d} = [[0, I_d], [-I_d, 0]]`.
pub fn j_matrix(d: usize) -> RatMatrix {
    let mut j = RatMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        j.set(i, d + i, BigRational::one());
        j.set(d + i, i, -BigRational::one());
    }
    j
}

fn half_dim(m: &RatMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.rows().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "dimension {} is odd",
            m.rows()
        )));
    }
    Ok(m.rows() / 2)
}

/// `M^T J M = J`, cross-checked against the block criterion
/// (`A^T C`, `B^T D` symmetric and `A^T D - C^T B = I` for `M = [[A, B], [C, D]]`).
pub fn is_symplectic(m: &RatMatrix) -> Result<bool> {
    let d = half_dim(m)?;
    let j = j_matrix(d);
    let direct = m.transpose().mul(&j)?.mul(m)? == j;
    let a = m.block(0, d, 0, d);
    let b = m.block(0, d, d, 2 * d);
    let c = m.block(d, 2 * d, 0, d);
    let dd = m.block(d, 2 * d, d, 2 * d);
    let blocks = a.transpose().mul(&c)?.is_symmetric()
        && b.transpose().mul(&dd)?.is_symmetric()
        && a.transpose().mul(&dd)?.sub(&c.transpose().mul(&b)?)? == RatMatrix::identity(d);
    if direct != blocks {
        return Err(Error::Consistency(format!(
            "symplectic tests disagree on {m}: direct {direct}, block {blocks}"
        )));
    }
    Ok(direct)
}

fn pairing(b: &RatMatrix, u: &[BigRational], v: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (i, ui) in u.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, vj) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            let bij = b.get(i, j);
            if !bij.is_zero() {
                acc += ui * bij * vj;
            }
        }
    }
    acc
}

/// `Φ` over `Q` with `Φ^T J Φ = B`, for skew-symmetric nonsingular `B`,
/// by symplectic Gram–Schmidt on the form `u^T B v`.
pub fn skew_normal_form(b: &RatMatrix) -> Result<RatMatrix> {
    let d = half_dim(b)?;
    if !b.is_skew() {
        return Err(Error::InvalidInput("matrix is not skew-symmetric".into()));
    }
    let n = 2 * d;
    let mut pool: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut es = Vec::with_capacity(d);
    let mut fs = Vec::with_capacity(d);
    while !pool.is_empty() {
        let e = pool.remove(0);
        let Some(pos) = pool.iter().position(|v| !pairing(b, &e, v).is_zero()) else {
            return Err(Error::Singular("skew form is degenerate".into()));
        };
        let raw = pool.remove(pos);
        let w = pairing(b, &e, &raw).recip();
        let f: Vec<BigRational> = raw.iter().map(|x| x * &w).collect();
        // v ← v - ω(v, f) e + ω(v, e) f makes v orthogonal to e and f
        for v in pool.iter_mut() {
            let vf = pairing(b, v, &f);
            let ve = pairing(b, v, &e);
            for k in 0..n {
                let t = &vf * &e[k] - &ve * &f[k];
                v[k] -= t;
            }
        }
        es.push(e);
        fs.push(f);
    }
    // P has columns e_1..e_d, f_1..f_d, so P^T B P = J and Φ = P^{-1}
    let mut p = RatMatrix::zeros(n, n);
    for (c, col) in es.iter().chain(&fs).enumerate() {
        for (r, x) in col.iter().enumerate() {
            p.set(r, c, x.clone());
        }
    }
    let phi = p.inverse()?;
    if phi.transpose().mul(&j_matrix(d))?.mul(&phi)? != *b {
        return Err(Error::Consistency(
            "skew normal form failed its defining identity".into(),
        ));
    }
    Ok(phi)
}

/// Standard generators of `Sp_{2d}(Z)`-type used for testing and sampling:
/// `[[I, S], [0, I]]` and `[[I, 0], [S, I]]` for symmetric `S`, `[[A, 0], [0, A^{-T}]]`, and `J`.
pub fn symplectic_shear_upper(s: &RatMatrix) -> Result<RatMatrix> {
    shear(s, true)
}

pub fn symplectic_shear_lower(s: &RatMatrix) -> Result<RatMatrix> {
    shear(s, false)
}

fn shear(s: &RatMatrix, upper: bool) -> Result<RatMatrix> {
    if !s.is_symmetric() {
        return Err(Error::InvalidInput("shear block must be symmetric".into()));
    }
    let d = s.rows();
    let mut m = RatMatrix::identity(2 * d);
    for i in 0..d {
        for j in 0..d {
            let (r, c) = if upper { (i, d + j) } else { (d + i, j) };
            m.set(r, c, s.get(i, j).clone());
        }
    }
    Ok(m)
}

pub fn symplectic_diag(a: &RatMatrix) -> Result<RatMatrix> {
    let d = a.rows();
    let ait = a.inverse()?.transpose();
    let mut m = RatMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            m.set(i, j, a.get(i, j).clone());
            m.set(d + i, d + j, ait.get(i, j).clone());
        }
    }
    Ok(m)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::exactnum::rat;
    use num_bigint::BigInt;

    fn scaled_j(d: usize, c: &BigRational) -> RatMatrix {
        j_matrix(d).scale(c)
    }

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn j_properties() {
        let j1 = j_matrix(1);
        assert_eq!(j1, RatMatrix::from_i64(&[vec![0, 1], vec![-1, 0]]).unwrap());
        for d in 1..4 {
            let j = j_matrix(d);
            assert_eq!(j.mul(&j).unwrap(), RatMatrix::identity(2 * d).neg());
            assert_eq!(j.transpose(), j.neg());
        }
    }

    #[test]
    fn symplectic_examples() {
        assert!(is_symplectic(&j_matrix(2)).unwrap());
        assert!(is_symplectic(&RatMatrix::identity(4)).unwrap());
        assert!(is_symplectic(&RatMatrix::from_i64(&[vec![1, 1], vec![0, 1]]).unwrap()).unwrap());
        assert!(!is_symplectic(&RatMatrix::from_i64(&[vec![2, 0], vec![0, 1]]).unwrap()).unwrap());
        assert!(is_symplectic(&RatMatrix::identity(3)).is_err());
        // dimension 2: symplectic iff det = 1
        let m = RatMatrix::from_rows(vec![vec![rat(3, 2), rat(1, 3)], vec![rat(3, 4), rat(5, 6)]])
            .unwrap();
        assert_eq!(m.det().unwrap(), int(1));
        assert!(is_symplectic(&m).unwrap());
    }

    #[test]
    fn normal_form_examples() {
        assert_eq!(
            skew_normal_form(&j_matrix(2)).unwrap(),
            RatMatrix::identity(4)
        );
        let c = rat(5, 3);
        let b = scaled_j(1, &c);
        let phi = skew_normal_form(&b).unwrap();
        assert_eq!(
            phi.transpose()
                .mul(&j_matrix(1))
                .unwrap()
                .mul(&phi)
                .unwrap(),
            b
        );
        let b4 = RatMatrix::from_i64(&[
            vec![0, 2, -1, 3],
            vec![-2, 0, 4, 0],
            vec![1, -4, 0, 5],
            vec![-3, 0, -5, 0],
        ])
        .unwrap();
        assert_ne!(b4.det().unwrap(), int(0));
        let phi = skew_normal_form(&b4).unwrap();
        assert_eq!(
            phi.transpose()
                .mul(&j_matrix(2))
                .unwrap()
                .mul(&phi)
                .unwrap(),
            b4
        );
    }

    #[test]
    fn normal_form_errors() {
        let sing = RatMatrix::from_i64(&[
            vec![0, 1, 0, 0],
            vec![-1, 0, 0, 0],
            vec![0, 0, 0, 0],
            vec![0, 0, 0, 0],
        ])
        .unwrap();
        assert!(matches!(skew_normal_form(&sing), Err(Error::Singular(_))));
        let not_skew = RatMatrix::from_i64(&[vec![1, 1], vec![-1, 0]]).unwrap();
        assert!(skew_normal_form(&not_skew).is_err());
    }

    #[test]
    fn generators_are_symplectic() {
        let s =
            RatMatrix::from_rows(vec![vec![int(2), rat(1, 2)], vec![rat(1, 2), int(-1)]]).unwrap();
        assert!(is_symplectic(&symplectic_shear_upper(&s).unwrap()).unwrap());
        assert!(is_symplectic(&symplectic_shear_lower(&s).unwrap()).unwrap());
        let a = RatMatrix::from_i64(&[vec![2, 1], vec![1, 1]]).unwrap();
        let g = symplectic_diag(&a).unwrap();
        assert!(is_symplectic(&g).unwrap());
        assert!(is_symplectic(&g.inverse().unwrap()).unwrap());
    }

    use proptest::prelude::*;

    fn small_symmetric(d: usize, vals: &[i64]) -> RatMatrix {
        let mut s = RatMatrix::zeros(d, d);
        let mut it = vals.iter().cycle();
        for i in 0..d {
            for j in i..d {
                let v = int(*it.next().unwrap());
                s.set(i, j, v.clone());
                s.set(j, i, v);
            }
        }
        s
    }

    /// A product of shears, `J` and a unimodular diagonal block.
    pub(crate) fn generator_word(d: usize, word: &[(u8, Vec<i64>)]) -> RatMatrix {
        let mut m = RatMatrix::identity(2 * d);
        for (kind, vals) in word {
            let g = match kind % 4 {
                0 => symplectic_shear_upper(&small_symmetric(d, vals)).unwrap(),
                1 => symplectic_shear_lower(&small_symmetric(d, vals)).unwrap(),
                2 => j_matrix(d),
                _ => {
                    let mut a = RatMatrix::identity(d);
                    if d > 1 {
                        a.set(0, 1, int(vals[0]));
                    } else {
                        a.set(
                            0,
                            0,
                            BigRational::new(BigInt::from(vals[0].abs() + 1), BigInt::from(2)),
                        );
                    }
                    symplectic_diag(&a).unwrap()
                }
            };
            m = g.mul(&m).unwrap();
        }
        m
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn random_skew_normal_form(vals in proptest::collection::vec(-5i64..=5, 6), den in 1i64..4) {
            let idx = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
            let mut b = RatMatrix::zeros(4, 4);
            for (v, (i, j)) in vals.iter().zip(idx) {
                let x = BigRational::new(BigInt::from(*v), BigInt::from(den));
                b.set(i, j, x.clone());
                b.set(j, i, -x);
            }
            prop_assume!(!b.det().unwrap().is_zero());
            let phi = skew_normal_form(&b).unwrap();
            prop_assert_eq!(phi.transpose().mul(&j_matrix(2)).unwrap().mul(&phi).unwrap(), b);
        }

        #[test]
        fn generator_products_are_symplectic(
            d in 1usize..3,
            w1 in proptest::collection::vec((0u8..4, proptest::collection::vec(-3i64..=3, 3)), 1..5),
            w2 in proptest::collection::vec((0u8..4, proptest::collection::vec(-3i64..=3, 3)), 1..5),
        ) {
            let m = generator_word(d, &w1);
            let n = generator_word(d, &w2);
            prop_assert!(is_symplectic(&m).unwrap());
            prop_assert!(is_symplectic(&m.mul(&n).unwrap()).unwrap());
            prop_assert!(is_symplectic(&m.inverse().unwrap()).unwrap());
            prop_assert_eq!(m.det().unwrap(), int(1));
        }
    }
}

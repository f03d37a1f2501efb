//! Dense exact linear algebra over `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Reduced row echelon form in place. Returns the pivot columns.
#[allow(clippy::needless_range_loop)]
pub fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<BigRational>]) -> usize {
    let mut w = m.to_vec();
    rref(&mut w).len()
}

/// A nonzero vector `c` with `Σ c_i * rows[i] = 0`, if one exists.
pub fn left_kernel_vector(rows: &[Vec<BigRational>], width: usize) -> Option<Vec<BigRational>> {
    let k = rows.len();
    if k == 0 {
        return None;
    }
    // columns of the transpose are the rows
    let mut t: Vec<Vec<BigRational>> = (0..width)
        .map(|j| (0..k).map(|i| rows[i][j].clone()).collect())
        .collect();
    let pivots = rref(&mut t);
    let free = (0..k).find(|c| !pivots.contains(c))?;
    let mut c = vec![BigRational::zero(); k];
    c[free] = BigRational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        c[pc] = -t[r][free].clone();
    }
    Some(c)
}

/// Scales a rational vector to a primitive integer vector with a positive
/// leading nonzero entry.
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &l).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let mut out: Vec<BigInt> = if g.is_zero() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    };
    if out
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative())
    {
        for x in out.iter_mut() {
            *x = -x.clone();
        }
    }
    out
}

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exactnum::e;

use super::heisenberg::HeisenbergElement;

/// Fiber Fourier coefficient `f_χ(x) = ∫_{S^1} f(u·x) conj(χ(u)) du`,
/// by the `M`-point rule over `u = e(m/M)`. Exact for functions whose fiber
/// weights `w` satisfy `|w - χ| < M`.
pub fn fiber_fourier<F>(f: F, point: &HeisenbergElement, chi: i64, m: usize) -> Result<Complex64>
where
    F: Fn(&HeisenbergElement) -> Result<Complex64>,
{
    let need = 2 * chi.unsigned_abs() as usize + 2;
    if m < need {
        return Err(Error::InvalidInput(format!(
            "fiber quadrature needs M >= 2|chi| + 2 = {need}, got {m}"
        )));
    }
    let mf = m as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let t = j as f64 / mf;
        let v = f(&point.with_central(e(t)))?;
        // e(-chi * j / M) with the product reduced exactly
        let ph = ((chi as i128 * j as i128).rem_euclid(m as i128)) as f64 / mf;
        acc += v * e(-ph);
    }
    Ok(acc / mf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilsys::heisenberg::c1_gaussian;

    fn pt() -> HeisenbergElement {
        HeisenbergElement::new(vec![0.31, 0.8], vec![0.55, 0.02], e(0.17)).unwrap()
    }

    #[test]
    fn gaussian_is_pure_weight_one() {
        let p = pt();
        let direct = c1_gaussian(&p).unwrap();
        let f1 = fiber_fourier(c1_gaussian, &p, 1, 8).unwrap();
        assert!((f1 - direct).norm() < 1e-12);
        for chi in [0, -1, 2] {
            assert!(fiber_fourier(c1_gaussian, &p, chi, 8).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn constant_has_weight_zero() {
        let one = |_: &HeisenbergElement| Ok(Complex64::new(1.0, 0.0));
        let v = fiber_fourier(one, &pt(), 0, 4).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mixed_weights_separate() {
        // 2 f + 3 z^2 f-bar-free: weights 1 and 3
        let g = |h: &HeisenbergElement| Ok(2.0 * c1_gaussian(h)? + 3.0 * h.z * h.z * h.z);
        let p = pt();
        let f3 = fiber_fourier(g, &p, 3, 8).unwrap();
        assert!((f3 - 3.0 * p.z.powu(3)).norm() < 1e-12);
        let f1 = fiber_fourier(g, &p, 1, 8).unwrap();
        assert!((f1 - 2.0 * c1_gaussian(&p).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn rejects_small_m() {
        assert!(fiber_fourier(c1_gaussian, &pt(), 3, 7).is_err());
    }
}

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exactnum::QAffineReal;
use crate::nilsys::{HeisenbergSystem, PolarizedSystem};

use super::matrix::RatMatrix;
use super::symplectic::skew_normal_form;

/// Output of [`polarized_to_heisenberg`].
#[derive(Debug, Clone)]
pub struct Reduction {
    /// `Φ` with `Φ^T J Φ = A^T - A`.
    pub phi: RatMatrix,
    pub system: HeisenbergSystem,
    pub minimal: bool,
}

/// Rewrites a connected system in Heisenberg coordinates: translation
/// parameters `Φ δ` split as `(α, β)` and central component 0.
pub fn polarized_to_heisenberg(sys: &PolarizedSystem) -> Result<Reduction> {
    let b = RatMatrix::from_rows(
        sys.b_matrix()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| BigRational::from_integer(BigInt::from(*v)))
                    .collect()
            })
            .collect(),
    )?;
    let phi = skew_normal_form(&b)?;
    let image: Vec<QAffineReal> = phi.mul_qvec(sys.delta())?;
    let d = sys.d();
    let system = HeisenbergSystem::new(
        image[..d].to_vec(),
        image[d..].to_vec(),
        QAffineReal::zero(sys.gamma0().basis()),
    )?;
    let minimal = system.is_minimal();
    if minimal != sys.is_minimal() {
        return Err(Error::Consistency(
            "an invertible rational map changed the minimality of the translation".into(),
        ));
    }
    Ok(Reduction {
        phi,
        system,
        minimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::symplectic::j_matrix;
    use crate::exactnum::IrrationalBasis;

    fn q(t: &str) -> QAffineReal {
        QAffineReal::parse(t, &IrrationalBasis::standard()).unwrap()
    }

    fn b_of(sys: &PolarizedSystem) -> RatMatrix {
        let rows: Vec<Vec<i64>> = sys.b_matrix();
        RatMatrix::from_i64(&rows).unwrap()
    }

    #[test]
    fn heisenberg_special_case() {
        let sys = PolarizedSystem::new(
            1,
            vec![vec![0, 1], vec![0, 0]],
            vec![q("xi1"), q("xi2 + 1/3")],
            q("xi3"),
        )
        .unwrap();
        let r = polarized_to_heisenberg(&sys).unwrap();
        let phi = &r.phi;
        assert_eq!(
            phi.transpose().mul(&j_matrix(1)).unwrap().mul(phi).unwrap(),
            b_of(&sys)
        );
        assert!(r.minimal);
        // the output parameters are Φ δ
        let image = phi.mul_qvec(sys.delta()).unwrap();
        assert_eq!(r.system.alpha()[0], image[0]);
        assert_eq!(r.system.beta()[0], image[1]);
        assert!(r.system.gamma().is_zero());
    }

    #[test]
    fn dependent_translation_is_not_minimal() {
        let sys = PolarizedSystem::new(
            1,
            vec![vec![0, 2], vec![-1, 0]],
            vec![q("xi1"), q("2*xi1")],
            q("0"),
        )
        .unwrap();
        let r = polarized_to_heisenberg(&sys).unwrap();
        assert!(!r.minimal);
    }

    #[test]
    fn four_dimensional() {
        let a = vec![
            vec![1, 2, 0, -1],
            vec![0, 3, 1, 2],
            vec![4, -2, 0, 1],
            vec![0, 1, -3, 2],
        ];
        let sys = PolarizedSystem::new(2, a, vec![q("xi1"), q("xi2"), q("xi3"), q("xi4")], q("0"))
            .unwrap();
        let r = polarized_to_heisenberg(&sys).unwrap();
        assert_eq!(
            r.phi
                .transpose()
                .mul(&j_matrix(2))
                .unwrap()
                .mul(&r.phi)
                .unwrap(),
            b_of(&sys)
        );
        assert!(r.minimal);
    }
}

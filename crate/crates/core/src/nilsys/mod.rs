//! Group laws and orbits for the affine skew product, the Heisenberg
//! nilmanifolds `N_d = H_d / Λ_d`, and polarized connected two-step systems.

mod affine;
mod fiber;
mod heisenberg;
mod polarized;

pub use affine::{affine_orbit_value, AffineSkewSystem, ITERATION_CHECK_LIMIT};
pub use fiber::fiber_fourier;
pub use heisenberg::{
    c1_gaussian, h_commutator, h_inv, h_mul, heisenberg_orbit_value, reduce_to_fundamental,
    tau_pow, triangular, HeisenbergElement, HeisenbergPoint, HeisenbergSystem, Lattice,
    MAX_ORBIT_INDEX,
};
pub use polarized::{polarized_mul, PolarizedElement, PolarizedSystem};

/// Any of the three concrete systems, for the shared minimality predicate.
#[derive(Debug, Clone, Copy)]
pub enum SystemRef<'a> {
    Heisenberg(&'a HeisenbergSystem),
    Affine(&'a AffineSkewSystem),
    Polarized(&'a PolarizedSystem),
}

pub fn minimality_check(sys: SystemRef<'_>) -> bool {
    match sys {
        SystemRef::Heisenberg(s) => s.is_minimal(),
        SystemRef::Affine(s) => s.is_minimal(),
        SystemRef::Polarized(s) => s.is_minimal(),
    }
}

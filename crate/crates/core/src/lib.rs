//! Two-step nilsequences: theta-kernel sequences, quadratic exponentials and
//! Heisenberg orbits, their Cesàro averages, and exact class-equivalence
//! checks over the rational symplectic group.

pub mod average;
pub mod classify;
pub mod cli;
pub mod error;
pub mod exactnum;
pub mod nilsys;
pub mod selftest;
pub mod seq;
pub mod theta;

pub use error::{Error, Result};

//! Bound states and thermodynamics of the deformed five-parameter
//! exponential-type potential
//!
//! ```text
//! V(r) = p1 + p2 z / (1 - q z) + p3 z^2 / (1 - q z)^2,   z = exp(-2 alpha r)
//! ```
//!
//! in `D` dimensions, relativistic (Klein-Gordon, equal scalar and vector
//! parts) and non-relativistic, solved with the parametric
//! Nikiforov-Uvarov method and checked against a finite-difference oracle.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod nu;
pub mod oracle;
pub mod quadrature;
pub mod specfun;
pub mod spectrum;
pub mod table1;
pub mod thermo;
pub mod wavefunction;

pub use error::{Error, Result};
pub use model::{
    ApproxScheme, Coupling, EtaBranch, GammaCoeffs, PhysicalConstants, PotentialParams,
    RecastCoeffs, RecastForm, StateLabel,
};
pub use spectrum::{Branch, RootReport, SolveOutcome, SolverWindow};
pub use wavefunction::{RadialSolution, WExponent};

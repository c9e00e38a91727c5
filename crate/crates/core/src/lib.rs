//! Stabilized hybrid mixed finite elements for Biot's three-field
//! poroelasticity model on the unit square.
//!
//! The discretization couples P1 displacements enriched with edge bubbles,
//! piecewise-constant pressures, edgewise-constant Lagrange multipliers and a
//! broken lowest-order Raviart-Thomas Darcy velocity. Bubbles carry a diagonal
//! (perturbed) stiffness so they can be eliminated element by element together
//! with the velocity, leaving a system of P1-RT0-P0 size that is solved with
//! flexible GMRES and parameter-robust block preconditioners.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`mesh`] | structured triangulation with oriented edges |
//! | [`dofs`] | boundary specification and degree-of-freedom numbering |
//! | [`params`] | physical parameters |
//! | [`quadrature`] | triangle and interval rules |
//! | [`local`] | element matrices and load vectors |
//! | [`sparse`] | CSR storage and products |
//! | [`direct`] | sparse direct factorizations |
//! | [`system`] | global assembly, condensation, back-substitution, time stepping |
//! | [`krylov`] | flexible GMRES and preconditioned CG |
//! | [`amg`] | unsmoothed aggregation AMG |
//! | [`precond`] | block diagonal and triangular preconditioners, field-of-values probes |
//! | [`experiments`] | benchmark problems, error norms and sweeps |
//! | [`cli`] | command-line driver |

pub mod amg;
pub mod cli;
pub mod direct;
pub mod dofs;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod local;
pub mod mesh;
pub mod par;
pub mod params;
pub mod precond;
pub mod quadrature;
pub mod sparse;
pub mod system;

pub use error::{Error, Result};
pub use par::Exec;

//! Shock-layer equilibria of the viscous Burgers equation
//!
//! ```text
//! u_t + u u_x = eps u_xx,   -1 <= x <= 1,   u(-1) = alpha,  u(1) = -alpha
//! ```
//!
//! The crate builds the leading-order matched asymptotic equilibrium
//! `U(x, eps) = -alpha tanh((alpha/2)(x/eps + k))` and checks it numerically:
//!
//! - [`asymptotics`]: outer, inner and composite solutions, residuals,
//!   matching defects and the L2 bound.
//! - [`discretization`]: second-order finite differences and a damped Newton
//!   solve of the stationary problem.
//! - [`spectrum`]: the linearized Dirichlet eigenproblem, symmetrized by the
//!   exponential weight, and its exponentially small principal eigenvalue.
//! - [`evolution`]: implicit time stepping and L2 decay back to equilibrium.
//!
//! [`grid`] and [`tridiag`] hold the shared numerical plumbing.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod discretization;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod grid;
pub mod spectrum;
pub mod tridiag;

pub use asymptotics::{composite, CompositeProfile, MatchReport};
pub use discretization::{default_node_count, newton_solve_steady, SteadyResult};
pub use error::{Error, Result};
pub use evolution::{DecayFit, EvolveConfig, Trajectory};
pub use fit::LineFit;
pub use grid::{l2_norm, make_grid, validate_bc, BoundaryPair, Field, Grid};
pub use spectrum::{ResolutionRule, SpectrumOptions, SpectrumResult, SweepTable};
pub use tridiag::TriDiag;

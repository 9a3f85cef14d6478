//! Numerical laboratory for the fast-reaction limit of
//!
//! ```text
//! ∂t u = (v − F(u)) / ε
//! ∂t v = Δv + (F(u) − v) / ε
//! ```
//!
//! on a one-dimensional interval with homogeneous Neumann conditions and a
//! nonmonotone reaction function `F` (increasing, decreasing, increasing).
//!
//! The crate is split along the pipeline a study goes through:
//!
//! * [`model`]: the reaction function, its fold structure, the three monotone
//!   branch inverses `S₁ ≤ S₂ ≤ S₃`, a Wronskian nondegeneracy certificate, and
//!   the change of variables `I(u) = u + F(u)`, `A = F ∘ I⁻¹`.
//! * [`solver`]: Strang-split time stepping of the ε-system and a
//!   semi-implicit stepper for the pseudo-parabolic equation
//!   `∂t w = ΔA(w) + εΔ∂t w`.
//! * [`kinetics`]: empirical kinetic functions, Young-measure weights, the
//!   defect measure and the residuals of the kinetic identities.
//! * [`diagnostics`]: mass, energy, a priori norms and log-log rate fits.
//! * [`harness`]: configuration, single runs, ε-sweeps, the pseudo-parabolic
//!   comparison and artifact output.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod kinetics;
pub mod model;
pub mod solver;

pub use error::{Error, Result};

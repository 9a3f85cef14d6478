//! Time integration on a uniform cell-centered grid over `(0, L)` with
//! homogeneous Neumann conditions.
//!
//! * [`SystemStepper`] advances the ε-system by Strang splitting: half a step
//!   of the stiff per-cell reaction (backward Euler, damped Newton), a full
//!   θ-step of diffusion on `v`, and another half reaction step.
//! * [`PseudoParabolicStepper`] advances `∂t w = ΔA(w) + εΔ∂t w` with one
//!   symmetric tridiagonal solve per step.
//! * [`integrate`] drives either stepper, halving the step on failure.

mod init;
mod integrate;
mod pseudo;
mod system;
pub mod tridiag;

pub use init::{init_fields, InitProfile, VProfile};
pub use integrate::{integrate, IntegrationFailure, Observer, Stepper, Timed, Trajectory};
pub use pseudo::{plotnikov_stepper, step_plotnikov, PotentialFn, PseudoParabolicStepper, PseudoState};
pub use system::{step_system, SystemStepper};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Values below this are treated as roundoff undershoot and clamped.
pub const NEGATIVE_FLOOR: f64 = -1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_cells: usize,
    length: f64,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 8;

    pub fn new(n_cells: usize, length: f64) -> Result<Self> {
        if n_cells < Self::MIN_CELLS {
            return Err(Error::Invalid(format!(
                "grid needs at least {} cells, got {n_cells}",
                Self::MIN_CELLS
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Invalid(format!("domain length must be positive, got {length}")));
        }
        Ok(Self { n_cells, length })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }

    /// Discrete Neumann Laplacian `Δ_h v`.
    pub fn laplacian(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        tridiag::neumann_stencil(v, &mut out);
        let inv_h2 = 1.0 / (self.h() * self.h());
        out.iter_mut().for_each(|x| *x *= inv_h2);
        out
    }
}

/// `u`, `v` on the grid at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldState {
    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub snapshot_stride: usize,
    /// Implicitness of the diffusion substep, `0.5 ≤ θ ≤ 1`.
    pub theta: f64,
    /// Smallest step tried before the integration gives up.
    pub dt_min: f64,
}

impl SolverConfig {
    /// `min(0.25 h², 10 ε)`.
    pub fn default_dt(grid: &Grid1D, epsilon: f64) -> f64 {
        (0.25 * grid.h() * grid.h()).min(10.0 * epsilon)
    }

    pub fn new(grid: &Grid1D, epsilon: f64, t_end: f64) -> Self {
        let dt = Self::default_dt(grid, epsilon);
        Self {
            epsilon,
            dt,
            t_end,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            snapshot_stride: 16,
            theta: 1.0,
            dt_min: dt / 1024.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Invalid(m));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return fail(format!("T must be nonnegative, got {}", self.t_end));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return fail(format!("theta must lie in [0.5, 1], got {}", self.theta));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return fail("Newton tolerance and iteration cap must be positive".into());
        }
        if self.snapshot_stride == 0 {
            return fail("snapshot stride must be at least 1".into());
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt) {
            return fail(format!("dt_min must lie in (0, dt], got {}", self.dt_min));
        }
        Ok(())
    }
}

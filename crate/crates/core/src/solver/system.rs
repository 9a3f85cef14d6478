use super::tridiag::{neumann_stencil, NeumannSystem};
use super::{FieldState, Grid1D, SolverConfig, Stepper, NEGATIVE_FLOOR};
use crate::model::ReactionFunction;
use crate::{Error, Result};

const MAX_HALVINGS: usize = 8;

/// Strang-split stepper for the ε-system.
#[derive(Clone, Debug)]
pub struct SystemStepper {
    grid: Grid1D,
    rf: ReactionFunction,
    epsilon: f64,
    theta: f64,
    newton_tol: f64,
    newton_max_iter: usize,
    implicit: Option<(f64, NeumannSystem)>,
    scratch: Vec<f64>,
    clamped: usize,
}

impl SystemStepper {
    pub fn new(grid: Grid1D, rf: ReactionFunction, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            grid,
            rf,
            epsilon: cfg.epsilon,
            theta: cfg.theta,
            newton_tol: cfg.newton_tol,
            newton_max_iter: cfg.newton_max_iter,
            implicit: None,
            scratch: vec![0.0; grid.n_cells()],
            clamped: 0,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Backward Euler over `tau` for `u̇ = (v − F(u))/ε`, `v̇ = −u̇` in every
    /// cell. `u + v` is preserved exactly.
    pub fn react(&mut self, state: &mut FieldState, tau: f64) -> Result<()> {
        let r = tau / self.epsilon;
        for (j, (u, v)) in state.u.iter_mut().zip(state.v.iter_mut()).enumerate() {
            let s = *u + *v;
            let x = self.solve_cell(*u, s, r).ok_or(Error::StepFailure { cell: j })?;
            *u = x;
            *v = s - x;
            self.clamp(u);
            self.clamp(v);
        }
        Ok(())
    }

    fn clamp(&mut self, x: &mut f64) {
        if *x < NEGATIVE_FLOOR {
            *x = NEGATIVE_FLOOR;
            self.clamped += 1;
        }
    }

    /// Damped Newton for `G(x) = x − u − r(s − x − F(x)) = 0` from `x = u`.
    fn solve_cell(&self, u: f64, s: f64, r: f64) -> Option<f64> {
        let rf = &self.rf;
        let g = |x: f64| x - u - r * (s - x - rf.value(x));
        let mut x = u;
        let mut gx = g(x);
        if gx == 0.0 {
            return Some(x);
        }
        for _ in 0..self.newton_max_iter {
            let dg = 1.0 + r * (1.0 + rf.derivative(x));
            if !(dg.is_finite() && dg != 0.0) {
                return None;
            }
            let full = -gx / dg;
            if full.abs() <= self.newton_tol * (1.0 + x.abs()) {
                return Some(x + full);
            }
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let trial = x + lambda * full;
                let gt = g(trial);
                if gt.abs() < gx.abs() || gt == 0.0 {
                    accepted = Some((trial, gt));
                    break;
                }
                lambda *= 0.5;
            }
            let (next, gn) = accepted?;
            let moved = (next - x).abs();
            x = next;
            gx = gn;
            if gx == 0.0 || moved <= self.newton_tol * (1.0 + x.abs()) {
                return Some(x);
            }
        }
        None
    }

    /// θ-scheme for `∂t v = Δv` over `dt`.
    pub fn diffuse(&mut self, state: &mut FieldState, dt: f64) {
        let inv_h2 = 1.0 / (self.grid.h() * self.grid.h());
        let r = self.theta * dt * inv_h2;
        let rebuild = !matches!(&self.implicit, Some((cached, _)) if *cached == dt);
        if rebuild {
            self.implicit = Some((dt, NeumannSystem::new(self.grid.n_cells(), r)));
        }
        if self.theta < 1.0 {
            neumann_stencil(&state.v, &mut self.scratch);
            let explicit = (1.0 - self.theta) * dt * inv_h2;
            for (v, lv) in state.v.iter_mut().zip(&self.scratch) {
                *v += explicit * lv;
            }
        }
        if let Some((_, sys)) = &self.implicit {
            sys.solve(&mut state.v);
        }
        for j in 0..state.v.len() {
            let mut x = state.v[j];
            self.clamp(&mut x);
            state.v[j] = x;
        }
    }
}

impl Stepper for SystemStepper {
    type State = FieldState;

    fn step(&mut self, state: &mut FieldState, dt: f64) -> Result<()> {
        let mut trial = state.clone();
        self.react(&mut trial, 0.5 * dt)?;
        self.diffuse(&mut trial, dt);
        self.react(&mut trial, 0.5 * dt)?;
        trial.t = state.t + dt;
        *state = trial;
        Ok(())
    }

    fn clamp_count(&self) -> usize {
        self.clamped
    }
}

/// One Strang step of size `cfg.dt`.
pub fn step_system(state: &FieldState, grid: &Grid1D, rf: &ReactionFunction, cfg: &SolverConfig) -> Result<FieldState> {
    let mut stepper = SystemStepper::new(*grid, rf.clone(), cfg)?;
    let mut next = state.clone();
    stepper.step(&mut next, cfg.dt)?;
    Ok(next)
}

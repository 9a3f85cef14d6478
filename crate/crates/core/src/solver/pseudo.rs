use serde::{Deserialize, Serialize};

use super::tridiag::{neumann_stencil, NeumannSystem};
use super::{Grid1D, SolverConfig, Stepper};
use crate::model::PlotnikovMaps;
use crate::{Error, Result};

/// `w` on the grid at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoState {
    pub t: f64,
    pub w: Vec<f64>,
}

/// Semi-implicit stepper for `∂t w = ΔA(w) + εΔ∂t w`:
/// `(I − εΔ_h) z = dt Δ_h A(w)`, `w ← w + z`.
pub struct PseudoParabolicStepper<P> {
    grid: Grid1D,
    epsilon: f64,
    potential: P,
    system: NeumannSystem,
    a: Vec<f64>,
    z: Vec<f64>,
}

impl<P: FnMut(&[f64], &mut [f64]) -> Result<()>> PseudoParabolicStepper<P> {
    /// `potential(w, out)` must write `A(w_j)` into `out[j]`.
    pub fn new(grid: Grid1D, epsilon: f64, potential: P) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        let n = grid.n_cells();
        let r = epsilon / (grid.h() * grid.h());
        Ok(Self {
            grid,
            epsilon,
            potential,
            system: NeumannSystem::new(n, r),
            a: vec![0.0; n],
            z: vec![0.0; n],
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl<P: FnMut(&[f64], &mut [f64]) -> Result<()>> Stepper for PseudoParabolicStepper<P> {
    type State = PseudoState;

    fn step(&mut self, state: &mut PseudoState, dt: f64) -> Result<()> {
        (self.potential)(&state.w, &mut self.a)?;
        neumann_stencil(&self.a, &mut self.z);
        let scale = dt / (self.grid.h() * self.grid.h());
        self.z.iter_mut().for_each(|x| *x *= scale);
        self.system.solve(&mut self.z);
        for (w, dz) in state.w.iter_mut().zip(&self.z) {
            *w += dz;
        }
        state.t += dt;
        Ok(())
    }
}

/// Evaluates `A` on a whole grid vector.
pub trait PotentialFn: FnMut(&[f64], &mut [f64]) -> Result<()> {}

impl<T: FnMut(&[f64], &mut [f64]) -> Result<()>> PotentialFn for T {}

/// Stepper with `A = F ∘ I⁻¹`. `I⁻¹` is recomputed by safeguarded Newton
/// warm-started from the previous step's values.
pub fn plotnikov_stepper(
    grid: Grid1D,
    maps: &PlotnikovMaps,
    epsilon: f64,
) -> Result<PseudoParabolicStepper<impl PotentialFn + '_>> {
    if !maps.valid() {
        return Err(Error::Validity {
            min_slope: maps.min_slope(),
        });
    }
    let rf = maps.reaction();
    let hi = maps.lift(rf.u_max());
    let mut guess: Vec<f64> = vec![];
    let potential = move |w: &[f64], out: &mut [f64]| -> Result<()> {
        if guess.len() != w.len() {
            guess = w.iter().map(|&x| maps.unlift_unchecked(x.clamp(0.0, hi))).collect();
        }
        for (j, &wj) in w.iter().enumerate() {
            if !(-1e-9..=hi + 1e-9).contains(&wj) {
                return Err(Error::Domain { value: wj, lo: 0.0, hi });
            }
            let target = wj.clamp(0.0, hi);
            let u = warm_unlift(maps, target, guess[j]).unwrap_or_else(|| maps.unlift_unchecked(target));
            guess[j] = u;
            out[j] = rf.value(u);
        }
        Ok(())
    };
    PseudoParabolicStepper::new(grid, epsilon, potential)
}

fn warm_unlift(maps: &PlotnikovMaps, w: f64, start: f64) -> Option<f64> {
    let rf = maps.reaction();
    let mut u = start;
    for _ in 0..8 {
        let r = maps.lift(u) - w;
        let step = r / (1.0 + rf.derivative(u));
        u -= step;
        if !(0.0..=rf.u_max()).contains(&u) {
            return None;
        }
        if step.abs() <= 1e-15 * (1.0 + u.abs()) {
            return Some(u);
        }
    }
    None
}

/// One step of size `cfg.dt` with `A = F ∘ I⁻¹`.
pub fn step_plotnikov(state: &PseudoState, grid: &Grid1D, maps: &PlotnikovMaps, cfg: &SolverConfig) -> Result<PseudoState> {
    cfg.validate()?;
    let mut stepper = plotnikov_stepper(*grid, maps, cfg.epsilon)?;
    let mut next = state.clone();
    stepper.step(&mut next, cfg.dt)?;
    Ok(next)
}

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SolverConfig;
use crate::Error;

/// A state carrying its own time stamp.
pub trait Timed {
    fn time(&self) -> f64;
    fn is_finite(&self) -> bool;
}

impl Timed for super::FieldState {
    fn time(&self) -> f64 {
        self.t
    }

    fn is_finite(&self) -> bool {
        super::FieldState::is_finite(self)
    }
}

impl Timed for super::PseudoState {
    fn time(&self) -> f64 {
        self.t
    }

    fn is_finite(&self) -> bool {
        self.w.iter().all(|x| x.is_finite())
    }
}

pub trait Stepper {
    type State: Timed + Clone;

    /// Advances `state` by `dt`. On error `state` is left untouched.
    fn step(&mut self, state: &mut Self::State, dt: f64) -> crate::Result<()>;

    /// Number of negative undershoots clamped so far.
    fn clamp_count(&self) -> usize {
        0
    }
}

/// Receives every stored snapshot, in order.
pub trait Observer<S> {
    fn observe(&mut self, state: &S);
}

impl<S, F: FnMut(&S)> Observer<S> for F {
    fn observe(&mut self, state: &S) {
        self(state)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub snapshots: Vec<S>,
    /// Macro steps taken.
    pub steps: usize,
    /// Macro steps that needed `dt` halving.
    pub halved_steps: usize,
    pub clamped: usize,
}

impl<S: Timed> Trajectory<S> {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(Timed::time).collect()
    }

    pub fn first(&self) -> &S {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &S {
        self.snapshots.last().expect("trajectory holds the initial state")
    }
}

#[derive(Debug, Error)]
#[error("integration stopped: {error}")]
pub struct IntegrationFailure<S> {
    pub error: Error,
    pub partial: Trajectory<S>,
}

fn advance<T: Stepper>(stepper: &mut T, state: &mut T::State, dt: f64, dt_min: f64) -> crate::Result<bool> {
    let first = stepper.step(state, dt).and_then(|_| {
        if state.is_finite() {
            Ok(())
        } else {
            Err(Error::Invalid("non-finite state".into()))
        }
    });
    if first.is_ok() {
        return Ok(false);
    }
    let half = 0.5 * dt;
    if half < dt_min {
        return Err(Error::Underflow { t: state.time(), dt: half });
    }
    let saved = state.clone();
    for _ in 0..2 {
        if let Err(e) = advance(stepper, state, half, dt_min) {
            *state = saved;
            return Err(e);
        }
    }
    Ok(true)
}

/// Advances `initial` to `cfg.t_end` in macro steps of `cfg.dt` (the last
/// one shortened to land on `t_end`). A failing macro step is retried as two
/// half steps, recursively, down to `cfg.dt_min`. Every `snapshot_stride`-th
/// macro step and the final state are stored and passed to the observers.
pub fn integrate<T: Stepper>(
    initial: T::State,
    stepper: &mut T,
    cfg: &SolverConfig,
    observers: &mut [&mut dyn Observer<T::State>],
) -> Result<Trajectory<T::State>, IntegrationFailure<T::State>> {
    let mut traj = Trajectory {
        snapshots: vec![],
        steps: 0,
        halved_steps: 0,
        clamped: 0,
    };
    if let Err(error) = cfg.validate() {
        return Err(IntegrationFailure { error, partial: traj });
    }
    let t0 = initial.time();
    let span = cfg.t_end - t0;
    let n_steps = if span <= 0.0 { 0 } else { (span / cfg.dt * (1.0 - 1e-12)).ceil() as usize };
    for obs in observers.iter_mut() {
        obs.observe(&initial);
    }
    traj.snapshots.push(initial);
    let mut state = traj.snapshots[0].clone();
    for k in 1..=n_steps {
        let target = if k == n_steps { cfg.t_end } else { t0 + k as f64 * cfg.dt };
        let dt = target - state.time();
        match advance(stepper, &mut state, dt, cfg.dt_min) {
            Ok(halved) => traj.halved_steps += halved as usize,
            Err(error) => {
                traj.clamped = stepper.clamp_count();
                return Err(IntegrationFailure { error, partial: traj });
            }
        }
        traj.steps += 1;
        if k % cfg.snapshot_stride == 0 || k == n_steps {
            for obs in observers.iter_mut() {
                obs.observe(&state);
            }
            traj.snapshots.push(state.clone());
        }
    }
    traj.clamped = stepper.clamp_count();
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::super::{FieldState, Grid1D, SystemStepper};
    use super::*;
    use crate::model::ReactionFunction;

    struct Decay {
        calls: usize,
        fail_above: f64,
    }

    impl Stepper for Decay {
        type State = FieldState;

        fn step(&mut self, s: &mut FieldState, dt: f64) -> crate::Result<()> {
            self.calls += 1;
            if dt > self.fail_above {
                return Err(Error::StepFailure { cell: 0 });
            }
            s.u.iter_mut().for_each(|x| *x *= (-dt).exp());
            s.t += dt;
            Ok(())
        }
    }

    fn one_cell() -> FieldState {
        FieldState {
            t: 0.0,
            u: vec![1.0],
            v: vec![0.0],
        }
    }

    fn cfg(dt: f64, t_end: f64, stride: usize) -> SolverConfig {
        let g = Grid1D::new(8, 1.0).unwrap();
        let mut c = SolverConfig::new(&g, 1.0, t_end);
        c.dt = dt;
        c.dt_min = dt / 64.0;
        c.snapshot_stride = stride;
        c
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let mut st = Decay { calls: 0, fail_above: 1.0 };
        let traj = integrate(one_cell(), &mut st, &cfg(0.1, 0.0, 1), &mut []).unwrap();
        assert_eq!(traj.snapshots, vec![one_cell()]);
        assert_eq!(st.calls, 0);
    }

    #[test]
    fn snapshot_count_follows_stride() {
        for (n, s) in [(100usize, 10usize), (96, 16), (7, 3), (5, 1)] {
            let mut st = Decay { calls: 0, fail_above: 1.0 };
            let c = cfg(0.01, 0.01 * n as f64, s);
            let traj = integrate(one_cell(), &mut st, &c, &mut []).unwrap();
            assert_eq!(traj.steps, n);
            assert_eq!(traj.snapshots.len(), n.div_ceil(s) + 1);
            assert_eq!(traj.last().t, c.t_end);
            assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn failed_steps_are_halved() {
        let mut st = Decay { calls: 0, fail_above: 0.03 };
        let traj = integrate(one_cell(), &mut st, &cfg(0.1, 1.0, 1), &mut []).unwrap();
        assert_eq!(traj.halved_steps, 10);
        assert!((traj.last().u[0] - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn underflow_returns_partial_trajectory() {
        let mut st = Decay { calls: 0, fail_above: 1e-9 };
        let err = integrate(one_cell(), &mut st, &cfg(0.1, 1.0, 1), &mut []).unwrap_err();
        assert!(matches!(err.error, Error::Underflow { .. }));
        assert_eq!(err.partial.snapshots.len(), 1);
    }

    #[test]
    fn observers_see_every_snapshot_and_stationary_data_stays_put() {
        let g = Grid1D::new(16, 1.0).unwrap();
        let mut c = SolverConfig::new(&g, 1e-3, 0.01);
        c.snapshot_stride = 4;
        let mut st = SystemStepper::new(g, ReactionFunction::reference_cubic(), &c).unwrap();
        let init = FieldState {
            t: 0.0,
            u: vec![3.0; 16],
            v: vec![4.5; 16],
        };
        let mut seen = 0usize;
        let mut count = |_: &FieldState| seen += 1;
        let traj = integrate(init.clone(), &mut st, &c, &mut [&mut count]).unwrap();
        assert_eq!(seen, traj.snapshots.len());
        let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12);
        assert!(traj.snapshots.iter().all(|s| same(&s.u, &init.u) && same(&s.v, &init.v)));
    }
}

//! Conserved quantities, energy, a priori bounds and the cross-ε fit.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::model::{BranchStructure, ReactionFunction};
use crate::solver::{FieldState, Grid1D};
use crate::{Error, Result};

/// `Σ (u_j + v_j) h`.
pub fn total_mass(state: &FieldState, grid: &Grid1D) -> f64 {
    state.u.iter().zip(&state.v).map(|(u, v)| u + v).sum::<f64>() * grid.h()
}

/// `Σ [Ψ(u_j) + ½ v_j²] h` with `Ψ(u) = ∫₀^u F`.
pub fn energy(state: &FieldState, grid: &Grid1D, rf: &ReactionFunction) -> f64 {
    state.u.iter().zip(&state.v).map(|(&u, &v)| rf.primitive(u) + 0.5 * v * v).sum::<f64>() * grid.h()
}

/// Trapezoid weights for samples at `times`.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|k| {
            let left = if k > 0 { times[k] - times[k - 1] } else { 0.0 };
            let right = if k + 1 < n { times[k + 1] - times[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// Largest increase between consecutive snapshots (0 if none).
    pub max_increment: f64,
}

impl EnergyTrace {
    /// Increments never exceed `rel_tol · E(0)`.
    pub fn nonincreasing(&self, rel_tol: f64) -> bool {
        self.max_increment <= rel_tol * self.energy.first().copied().unwrap_or(0.0).abs()
    }
}

pub fn energy_trace(snapshots: &[FieldState], grid: &Grid1D, rf: &ReactionFunction) -> EnergyTrace {
    let energy: Vec<f64> = snapshots.iter().map(|s| self::energy(s, grid, rf)).collect();
    let max_increment = energy.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
    EnergyTrace {
        times: snapshots.iter().map(|s| s.t).collect(),
        energy,
        max_increment,
    }
}

/// `M = max(‖F(u₀)‖∞, ‖u₀‖∞, ‖v₀‖∞, f₊, β₊)`.
pub fn m_bound(initial: &FieldState, rf: &ReactionFunction, bs: &BranchStructure) -> f64 {
    let sup = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |m, x| m.max(x.abs()));
    sup(&mut initial.u.iter().map(|&u| rf.value(u)))
        .max(sup(&mut initial.u.iter().copied()))
        .max(sup(&mut initial.v.iter().copied()))
        .max(bs.f_plus)
        .max(bs.beta_plus)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    pub m_bound: f64,
    pub max_u: f64,
    pub max_v: f64,
    pub min_u: f64,
    pub min_v: f64,
    /// `‖∇v‖` in `L²((0,T)×Ω)`.
    pub grad_v: f64,
    /// `‖(F(u) − v)/√ε‖` in `L²((0,T)×Ω)`.
    pub scaled_defect: f64,
    /// `‖√ε Δv‖` in `L²((0,T)×Ω)`.
    pub scaled_laplacian: f64,
    /// `‖F(u) − v‖` in `L²((0,T)×Ω)`.
    pub defect: f64,
    /// Some field left `[−1e−8, M + 1e−6]`.
    pub bound_violated: bool,
}

pub const BOUND_TOL: f64 = 1e-6;
pub const NEGATIVE_TOL: f64 = 1e-8;

/// Norms use midpoint quadrature in space and trapezoid weights over the
/// snapshot times.
pub fn apriori_report(
    snapshots: &[FieldState],
    grid: &Grid1D,
    rf: &ReactionFunction,
    bs: &BranchStructure,
    epsilon: f64,
) -> AprioriReport {
    let m = m_bound(&snapshots[0], rf, bs);
    let times: Vec<f64> = snapshots.iter().map(|s| s.t).collect();
    let wt = trapezoid_weights(&times);
    let h = grid.h();
    let (mut max_u, mut max_v) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut min_u, mut min_v) = (f64::INFINITY, f64::INFINITY);
    let (mut grad2, mut defect2, mut lap2) = (0.0, 0.0, 0.0);
    for (s, &w) in snapshots.iter().zip(&wt) {
        for (&u, &v) in s.u.iter().zip(&s.v) {
            max_u = max_u.max(u);
            max_v = max_v.max(v);
            min_u = min_u.min(u);
            min_v = min_v.min(v);
            defect2 += w * h * (rf.value(u) - v).powi(2);
        }
        grad2 += w * h * s.v.windows(2).map(|p| ((p[1] - p[0]) / h).powi(2)).sum::<f64>();
        lap2 += w * h * grid.laplacian(&s.v).iter().map(|x| x * x).sum::<f64>();
    }
    AprioriReport {
        m_bound: m,
        max_u,
        max_v,
        min_u,
        min_v,
        grad_v: grad2.sqrt(),
        scaled_defect: (defect2 / epsilon).sqrt(),
        scaled_laplacian: (epsilon * lap2).sqrt(),
        defect: defect2.sqrt(),
        bound_violated: max_u > m + BOUND_TOL
            || max_v > m + BOUND_TOL
            || min_u < -NEGATIVE_TOL
            || min_v < -NEGATIVE_TOL,
    }
}

/// Least-squares line through `(log ε, log defect)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval of the slope.
    pub slope_ci: (f64, f64),
    pub points: usize,
}

pub fn sweep_fit(eps: &[f64], defect: &[f64]) -> Result<SweepFit> {
    if eps.len() != defect.len() {
        return Err(Error::Fit("ε and defect lists differ in length".into()));
    }
    let n = eps.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {n}")));
    }
    if eps.iter().chain(defect).any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Fit("degenerate: every ε and defect must be positive".into()));
    }
    let xs: Vec<f64> = eps.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = defect.iter().map(|x| x.ln()).collect();
    let nf = n as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / nf, ys.iter().sum::<f64>() / nf);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate: all ε values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| Error::Fit(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(SweepFit {
        slope,
        intercept,
        slope_ci: (slope - t * se, slope + t * se),
        points: n,
    })
}

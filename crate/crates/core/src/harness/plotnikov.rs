use serde::{Deserialize, Serialize};
use std::path::Path;

use super::output::{fmt_f64, write_artifacts, write_csv, write_json};
use super::run::{guard_bands, xi_grid, SCHEMA_VERSION};
use super::{simulate, RunConfig};
use crate::diagnostics::trapezoid_weights;
use crate::kinetics::{cell_samples, plotnikov_residuals};
use crate::model::{compute_branch_structure, plotnikov_maps, BranchInverses};
use crate::solver::{integrate, plotnikov_stepper, PseudoState};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    /// Mean over cells of the per-cell sup over the admitted ξ bin centers.
    pub mean: f64,
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoSummary {
    pub steps: usize,
    pub mass_initial: f64,
    pub mass_final: f64,
    /// `‖w_system(T) − w_pseudo(T)‖_{L²(Ω)}`.
    pub final_gap: f64,
    pub final_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotnikovComparison {
    pub schema_version: u32,
    pub label: String,
    pub epsilon: f64,
    pub min_slope: f64,
    /// `‖v − A(u + v)‖` in `L²((0,T)×Ω)`.
    pub v_minus_a: f64,
    pub v_norm: f64,
    /// `Σ (−1)^{i+1} k̄(R_i) 1_{J_i}` against `q̄`.
    pub l_vs_q: Gap,
    /// `k̄ ∘ I` against `p̄`.
    pub k_vs_p: Gap,
    /// `Σ k̄(R_i) |R_i'|` against `Σ (−1)^{i+1} p̄(S_i) S_i' + q̄`.
    pub lhs_vs_rhs: Gap,
    pub pseudo: PseudoSummary,
}

/// Runs the ε-system for `cfg`, re-expresses it in `w = u + v`, measures the
/// three change-of-variables gaps per cell, and integrates the
/// pseudo-parabolic equation from the same `w₀` for a side-by-side view.
pub fn compare_plotnikov(cfg: &RunConfig, dir: Option<&Path>) -> Result<PlotnikovComparison> {
    let rf = cfg.reaction()?;
    let maps = plotnikov_maps(&rf);
    if !maps.valid() {
        return Err(Error::Validity {
            min_slope: maps.min_slope(),
        });
    }
    let bs = compute_branch_structure(&rf)?;
    let bi = BranchInverses::new(rf.clone())?;
    let outcome = simulate(cfg)?;
    if let Some(msg) = &outcome.report.failure {
        return Err(Error::Integration(msg.clone()));
    }
    let analysis = outcome.analysis.as_ref().expect("complete runs are analysed");
    let snaps = outcome.snapshots();
    let grid = outcome.grid;
    let h = grid.h();

    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let wt = trapezoid_weights(&times);
    let (mut gap2, mut v2) = (0.0, 0.0);
    for (s, &w) in snaps.iter().zip(&wt) {
        for (&u, &v) in s.u.iter().zip(&s.v) {
            let a = maps.potential(u + v)?;
            gap2 += w * h * (v - a).powi(2);
            v2 += w * h * v * v;
        }
    }

    let m = outcome.report.apriori.m_bound;
    let xg = xi_grid(cfg, m)?;
    let guard = guard_bands(cfg, &bs, &xg);
    let xis: Vec<f64> = xg.centers().into_iter().filter(|&x| guard.admits(&bs, x)).collect();
    let layout = &analysis.layout;
    let p = cell_samples(snaps, layout, |s| s.u.clone())?;
    let q = cell_samples(snaps, layout, |s| s.v.clone())?;
    let k = cell_samples(snaps, layout, |s| s.u.iter().zip(&s.v).map(|(a, b)| a + b).collect())?;
    let n_cells = layout.n_cells();
    let mut gaps = [Gap::default(); 3];
    for c in 0..n_cells {
        let r = plotnikov_residuals(&p[c], &q[c], &k[c], &bi, &maps, &xis)?;
        for (g, x) in gaps.iter_mut().zip(r) {
            g.mean += x / n_cells as f64;
            g.sup = g.sup.max(x);
        }
    }

    let solver = cfg.solver_config()?;
    let first = &snaps[0];
    let w0 = PseudoState {
        t: first.t,
        w: first.u.iter().zip(&first.v).map(|(a, b)| a + b).collect(),
    };
    let mut stepper = plotnikov_stepper(grid, &maps, cfg.solver.epsilon)?;
    let pseudo = integrate(w0, &mut stepper, &solver, &mut []).map_err(|f| f.error)?;
    let (w_first, w_last) = (pseudo.first(), pseudo.last());
    let sys_last = outcome.trajectory.last();
    let w_sys: Vec<f64> = sys_last.u.iter().zip(&sys_last.v).map(|(a, b)| a + b).collect();
    let final_gap = (w_sys.iter().zip(&w_last.w).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * h).sqrt();
    let final_norm = (w_sys.iter().map(|a| a * a).sum::<f64>() * h).sqrt();

    let cmp = PlotnikovComparison {
        schema_version: SCHEMA_VERSION,
        label: cfg.run.label.clone(),
        epsilon: cfg.solver.epsilon,
        min_slope: maps.min_slope(),
        v_minus_a: gap2.sqrt(),
        v_norm: v2.sqrt(),
        l_vs_q: gaps[0],
        k_vs_p: gaps[1],
        lhs_vs_rhs: gaps[2],
        pseudo: PseudoSummary {
            steps: pseudo.steps,
            mass_initial: w_first.w.iter().sum::<f64>() * h,
            mass_final: w_last.w.iter().sum::<f64>() * h,
            final_gap,
            final_norm,
        },
    };
    if let Some(d) = dir {
        write_artifacts(&outcome, d)?;
        write_json(&d.join("plotnikov.json"), &cmp)?;
        let xs = grid.centers();
        let mut rows = Vec::with_capacity(xs.len());
        for j in 0..xs.len() {
            rows.push(vec![
                fmt_f64(xs[j]),
                fmt_f64(w_sys[j]),
                fmt_f64(w_last.w[j]),
                fmt_f64(sys_last.v[j]),
                fmt_f64(maps.potential(w_sys[j])?),
            ]);
        }
        write_csv(
            &d.join("plotnikov_w.csv"),
            &["x", "w_system", "w_pseudo", "v_system", "a_of_w_system"],
            rows,
        )?;
    }
    Ok(cmp)
}

use serde::{Deserialize, Serialize};

use super::{CellLayout, EmpiricalKinetic, WeightField};
use crate::solver::FieldState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationMetrics {
    /// Share of `(cell, ξ)` entries with `0.1 < q̄ < 0.9`.
    pub binarization_fraction: f64,
    /// Within-cell variance of `v`, per cell.
    pub v_variance: Vec<f64>,
    /// Within-cell variance of `u`, per cell.
    pub u_variance: Vec<f64>,
    /// `(λ_i(t_{c+1}) − λ_i(t_c)) / Δt_c` for consecutive time cells at a fixed
    /// space cell, indexed `[t_cell · cells_x + x_cell]` for `t_cell < cells_t − 1`.
    pub lambda_rate: Vec<[f64; 3]>,
    pub max_lambda_rate: f64,
}

fn cell_variances(snapshots: &[FieldState], layout: &CellLayout, field: impl Fn(&FieldState) -> &[f64]) -> Vec<f64> {
    let n_cells = layout.n_cells();
    let mut mean = vec![0.0; n_cells];
    for (snap, &ct) in snapshots.iter().zip(&layout.snapshot_cell) {
        for (&x, &cx) in field(snap).iter().zip(&layout.grid_cell) {
            mean[layout.index(ct, cx)] += x;
        }
    }
    for (m, &n) in mean.iter_mut().zip(&layout.samples) {
        *m /= n as f64;
    }
    let mut var = vec![0.0; n_cells];
    for (snap, &ct) in snapshots.iter().zip(&layout.snapshot_cell) {
        for (&x, &cx) in field(snap).iter().zip(&layout.grid_cell) {
            let c = layout.index(ct, cx);
            var[c] += (x - mean[c]).powi(2);
        }
    }
    var.iter().zip(&layout.samples).map(|(v, &n)| v / n as f64).collect()
}

pub fn concentration_metrics(
    ek: &EmpiricalKinetic,
    snapshots: &[FieldState],
    layout: &CellLayout,
    wf: &WeightField,
) -> ConcentrationMetrics {
    let mid = ek.q.iter().filter(|&&q| q > 0.1 && q < 0.9).count();
    let binarization_fraction = mid as f64 / ek.q.len() as f64;
    let dt = layout.dt_cell();
    let mut lambda_rate = Vec::new();
    for ct in 0..layout.cells_t.saturating_sub(1) {
        for cx in 0..layout.cells_x {
            let a = &wf.cells[layout.index(ct, cx)].lambda;
            let b = &wf.cells[layout.index(ct + 1, cx)].lambda;
            lambda_rate.push([0, 1, 2].map(|i| if dt > 0.0 { (b[i] - a[i]) / dt } else { 0.0 }));
        }
    }
    let max_lambda_rate = lambda_rate.iter().flatten().fold(0.0f64, |m, r| m.max(r.abs()));
    ConcentrationMetrics {
        binarization_fraction,
        v_variance: cell_variances(snapshots, layout, |s| &s.v),
        u_variance: cell_variances(snapshots, layout, |s| &s.u),
        lambda_rate,
        max_lambda_rate,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{empirical_kinetic, young_weights, CellPartition, XiGrid};
    use super::*;
    use crate::model::{BranchInverses, ReactionFunction};
    use crate::solver::Grid1D;

    #[test]
    fn binary_constant_fields_have_trivial_metrics() {
        let grid = Grid1D::new(16, 1.0).unwrap();
        let snaps: Vec<FieldState> = (0..9)
            .map(|k| FieldState {
                t: k as f64 / 8.0,
                u: vec![3.0; 16],
                v: vec![4.5; 16],
            })
            .collect();
        let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
        let lay = CellPartition { cells_t: 2, cells_x: 4 }.layout(&times, &grid).unwrap();
        let ek = empirical_kinetic(&snaps, &lay, &XiGrid::new(5.0, 40).unwrap()).unwrap();
        let bi = BranchInverses::new(ReactionFunction::reference_cubic()).unwrap();
        let wf = young_weights(&snaps, &lay, &bi, 5e-4);
        let m = concentration_metrics(&ek, &snaps, &lay, &wf);
        assert_eq!(m.binarization_fraction, 0.0);
        assert!(m.v_variance.iter().all(|&v| v == 0.0));
        assert_eq!(m.lambda_rate.len(), 4);
        assert_eq!(m.max_lambda_rate, 0.0);
    }
}

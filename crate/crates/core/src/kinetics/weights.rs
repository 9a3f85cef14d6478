use serde::{Deserialize, Serialize};

use super::CellLayout;
use crate::model::{Branch, BranchInverses};
use crate::solver::FieldState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellWeights {
    pub t_cell: usize,
    pub x_cell: usize,
    /// Samples assigned to each branch.
    pub counts: [usize; 3],
    pub lambda: [f64; 3],
    pub kappa1: f64,
    pub kappa2: f64,
    pub v_mean: f64,
    /// Mean distance from `u` to its assigned root `S_i(v̄)`.
    pub rho: f64,
    /// `v̄` lies within the fold guard of `f₋` or `f₊`.
    pub low_confidence: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightField {
    pub cells_t: usize,
    pub cells_x: usize,
    pub cells: Vec<CellWeights>,
}

impl WeightField {
    pub fn mean_rho(&self) -> f64 {
        self.cells.iter().map(|c| c.rho).sum::<f64>() / self.cells.len() as f64
    }

    /// Cells whose samples populate at least two branches with at least
    /// `min_share` of the samples each.
    pub fn multi_branch_cells(&self, min_share: f64) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&c| self.cells[c].lambda.iter().filter(|&&l| l >= min_share).count() >= 2)
            .collect()
    }
}

/// Assigns every `u` sample in a cell to the nearest root of `F(·) = v̄`,
/// where `v̄` is the cell mean of `v`. Only `S₁` is available below `f₋` and
/// only `S₃` above `f₊`.
pub fn young_weights(snapshots: &[FieldState], layout: &CellLayout, bi: &BranchInverses, fold_guard: f64) -> WeightField {
    let n_cells = layout.n_cells();
    let mut v_sum = vec![0.0; n_cells];
    for (snap, &ct) in snapshots.iter().zip(&layout.snapshot_cell) {
        for (&v, &cx) in snap.v.iter().zip(&layout.grid_cell) {
            v_sum[layout.index(ct, cx)] += v;
        }
    }
    let v_mean: Vec<f64> = v_sum.iter().zip(&layout.samples).map(|(s, &n)| s / n as f64).collect();
    let bs = *bi.structure();
    let roots: Vec<Vec<(usize, f64)>> = v_mean
        .iter()
        .map(|&vb| {
            if vb <= bs.f_minus {
                vec![(0, bi.inverse(Branch::Lower, vb).u)]
            } else if vb >= bs.f_plus {
                vec![(2, bi.inverse(Branch::Upper, vb).u)]
            } else {
                Branch::ALL.iter().map(|&b| (b.index() - 1, bi.inverse(b, vb).u)).collect()
            }
        })
        .collect();
    let mut counts = vec![[0usize; 3]; n_cells];
    let mut dist = vec![0.0; n_cells];
    for (snap, &ct) in snapshots.iter().zip(&layout.snapshot_cell) {
        for (&u, &cx) in snap.u.iter().zip(&layout.grid_cell) {
            let c = layout.index(ct, cx);
            let (i, d) = roots[c]
                .iter()
                .map(|&(i, r)| (i, (u - r).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one root");
            counts[c][i] += 1;
            dist[c] += d;
        }
    }
    let cells = (0..n_cells)
        .map(|c| {
            let n = layout.samples[c] as f64;
            let lambda = counts[c].map(|k| k as f64 / n);
            let (t_cell, x_cell) = layout.coords(c);
            let vb = v_mean[c];
            CellWeights {
                t_cell,
                x_cell,
                counts: counts[c],
                lambda,
                kappa1: 1.0 - lambda[0],
                kappa2: lambda[2],
                v_mean: vb,
                rho: dist[c] / n,
                low_confidence: (vb - bs.f_minus).abs() < fold_guard || (vb - bs.f_plus).abs() < fold_guard,
            }
        })
        .collect();
    WeightField {
        cells_t: layout.cells_t,
        cells_x: layout.cells_x,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::super::CellPartition;
    use super::*;
    use crate::model::ReactionFunction;
    use crate::solver::Grid1D;

    fn weights_for(us: &[f64], v: f64) -> CellWeights {
        let n = us.len();
        let grid = Grid1D::new(n, 1.0).unwrap();
        let snaps: Vec<FieldState> = (0..2)
            .map(|k| FieldState {
                t: k as f64,
                u: us.to_vec(),
                v: vec![v; n],
            })
            .collect();
        let lay = CellPartition { cells_t: 1, cells_x: 1 }.layout(&[0.0, 1.0], &grid).unwrap();
        let bi = BranchInverses::new(ReactionFunction::reference_cubic()).unwrap();
        young_weights(&snaps, &lay, &bi, 5e-4).cells.remove(0)
    }

    fn roots() -> [f64; 3] {
        let r3 = 3f64.sqrt();
        [(3.0 - r3) / 2.0, 1.5, (3.0 + r3) / 2.0]
    }

    #[test]
    fn single_upper_branch() {
        let w = weights_for(&[roots()[2]; 12], 2.25);
        assert_eq!(w.lambda, [0.0, 0.0, 1.0]);
        assert!(w.rho < 1e-12);
        assert!(!w.low_confidence);
    }

    #[test]
    fn even_split_between_stable_branches() {
        let r = roots();
        let us: Vec<f64> = (0..12).map(|j| if j % 2 == 0 { r[0] } else { r[2] }).collect();
        let w = weights_for(&us, 2.25);
        assert_eq!(w.lambda, [0.5, 0.0, 0.5]);
    }

    #[test]
    fn thirds_on_all_roots() {
        let r = roots();
        let us: Vec<f64> = (0..12).map(|j| r[j % 3]).collect();
        let w = weights_for(&us, 2.25);
        assert_eq!(w.counts, [8, 8, 8]);
        assert!((w.kappa1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((w.kappa2 - 1.0 / 3.0).abs() < 1e-15);
        assert!((w.lambda.iter().sum::<f64>() - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn single_branch_outside_unstable_region() {
        let w = weights_for(&[0.3, 1.5, 2.9, 3.1, 0.3, 1.5, 2.9, 3.1], 1.0);
        assert_eq!(w.lambda, [1.0, 0.0, 0.0]);
        let w = weights_for(&[0.3, 3.1, 3.1, 3.1, 3.1, 3.1, 3.1, 3.1], 3.0);
        assert_eq!(w.counts, [0, 0, 16]);
        assert!(weights_for(&[1.0; 8], 2.0002).low_confidence);
    }
}

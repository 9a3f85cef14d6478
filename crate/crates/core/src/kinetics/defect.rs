use serde::{Deserialize, Serialize};

use super::{CellLayout, XiGrid};
use crate::diagnostics::trapezoid_weights;
use crate::model::ReactionFunction;
use crate::solver::{FieldState, Grid1D};

/// Discrete defect measures on the `[cell][bin]` lattice.
///
/// `n2` spreads `(v − F(u))²/ε` uniformly along the segment between `F(u)`
/// and `v`; `n1` places the centered `|∇v|²` at `ξ = v`. Each sample carries
/// the weight `h · w_t` with `w_t` the trapezoid weight of its snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectHistogram {
    pub xi: XiGrid,
    pub cells_t: usize,
    pub cells_x: usize,
    pub n2: Vec<f64>,
    pub n1: Vec<f64>,
    pub total_n2: f64,
    pub total_n1: f64,
}

impl DefectHistogram {
    pub fn n2_cell(&self, cell: usize) -> &[f64] {
        let m = self.xi.bins();
        &self.n2[cell * m..(cell + 1) * m]
    }
}

fn bin_of(xg: &XiGrid, x: f64) -> usize {
    let k = (x / xg.width()).floor();
    if k <= 0.0 {
        0
    } else {
        (k as usize).min(xg.bins() - 1)
    }
}

/// Adds `mass` spread uniformly over `[a, b]` to `row`, in proportion to the
/// overlap with each bin. Parts outside `[0, ξ_max]` go to the end bins.
fn deposit(row: &mut [f64], xg: &XiGrid, a: f64, b: f64, mass: f64) {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let (k_lo, k_hi) = (bin_of(xg, lo), bin_of(xg, hi));
    if k_lo == k_hi || hi - lo <= 0.0 {
        row[k_lo] += mass;
        return;
    }
    let w = xg.width();
    let len = hi - lo;
    for (k, slot) in row.iter_mut().enumerate().take(k_hi + 1).skip(k_lo) {
        let left = if k == k_lo { lo } else { k as f64 * w };
        let right = if k == k_hi { hi } else { (k + 1) as f64 * w };
        *slot += mass * (right - left) / len;
    }
}

pub fn defect_measure(
    snapshots: &[FieldState],
    layout: &CellLayout,
    grid: &Grid1D,
    xg: &XiGrid,
    rf: &ReactionFunction,
    epsilon: f64,
) -> DefectHistogram {
    let m = xg.bins();
    let n_cells = layout.n_cells();
    let times: Vec<f64> = snapshots.iter().map(|s| s.t).collect();
    let wt = trapezoid_weights(&times);
    let h = grid.h();
    let mut n2 = vec![0.0; n_cells * m];
    let mut n1 = vec![0.0; n_cells * m];
    let (mut total_n2, mut total_n1) = (0.0, 0.0);
    for ((snap, &ct), &w_t) in snapshots.iter().zip(&layout.snapshot_cell).zip(&wt) {
        let n = snap.v.len();
        let weight = h * w_t;
        for j in 0..n {
            let c = layout.index(ct, layout.grid_cell[j]);
            let (u, v) = (snap.u[j], snap.v[j]);
            let fu = rf.value(u);
            let mass = (v - fu).powi(2) / epsilon * weight;
            deposit(&mut n2[c * m..(c + 1) * m], xg, fu, v, mass);
            total_n2 += mass;
            let left = snap.v[j.saturating_sub(1)];
            let right = snap.v[(j + 1).min(n - 1)];
            let grad2 = ((right - left) / (2.0 * h)).powi(2) * weight;
            n1[c * m + bin_of(xg, v)] += grad2;
            total_n1 += grad2;
        }
    }
    DefectHistogram {
        xi: *xg,
        cells_t: layout.cells_t,
        cells_x: layout.cells_x,
        n2,
        n1,
        total_n2,
        total_n1,
    }
}

#[cfg(test)]
mod tests {
    use super::super::CellPartition;
    use super::*;

    #[test]
    fn single_segment_spreads_uniformly() {
        let xg = XiGrid::new(4.0, 40).unwrap();
        let mut row = vec![0.0; 40];
        // v = 2, F(u) = 1, ε = 0.1, unit weight: mass 10 on (1, 2).
        deposit(&mut row, &xg, 1.0, 2.0, (2.0f64 - 1.0).powi(2) / 0.1);
        assert!((row.iter().sum::<f64>() - 10.0).abs() < 1e-12);
        for (k, x) in row.iter().enumerate() {
            let inside = (10..20).contains(&k);
            assert!(if inside { (x - 1.0).abs() < 1e-12 } else { *x == 0.0 }, "bin {k}: {x}");
        }
    }

    #[test]
    fn degenerate_and_out_of_range_segments() {
        let xg = XiGrid::new(4.0, 40).unwrap();
        let mut row = vec![0.0; 40];
        deposit(&mut row, &xg, 2.25, 2.25, 3.0);
        assert_eq!(row[22], 3.0);
        let mut row = vec![0.0; 40];
        deposit(&mut row, &xg, 3.5, 5.5, 2.0);
        assert!((row[39] - 1.6).abs() < 1e-12);
        assert!((row.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_fields_carry_no_reaction_defect() {
        let grid = Grid1D::new(16, 1.0).unwrap();
        let rf = ReactionFunction::reference_cubic();
        let snaps: Vec<FieldState> = (0..3)
            .map(|k| {
                let u: Vec<f64> = (0..16).map(|j| 0.2 * j as f64).collect();
                FieldState {
                    t: k as f64 * 0.5,
                    v: u.iter().map(|&x| rf.value(x)).collect(),
                    u,
                }
            })
            .collect();
        let lay = CellPartition { cells_t: 1, cells_x: 2 }.layout(&[0.0, 0.5, 1.0], &grid).unwrap();
        let d = defect_measure(&snaps, &lay, &grid, &XiGrid::new(8.0, 64).unwrap(), &rf, 1e-3);
        assert_eq!(d.total_n2, 0.0);
        assert!(d.total_n1 > 0.0);
    }
}

use serde::{Deserialize, Serialize};

use super::{CellLayout, KineticProfile, XiGrid};
use crate::solver::FieldState;
use crate::{Error, Result};

/// Cell-averaged kinetic functions sampled at the ξ bin centers, stored
/// row-major as `[cell][bin]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalKinetic {
    pub xi: XiGrid,
    pub cells_t: usize,
    pub cells_x: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub u_mean: Vec<f64>,
    pub v_mean: Vec<f64>,
}

/// Linear interpolation between bin centers, constant up to `0⁺` and up to
/// `ξ_max`, zero outside `(0, ξ_max]`.
#[derive(Clone, Copy, Debug)]
pub struct CellProfile<'a> {
    xi: XiGrid,
    values: &'a [f64],
}

impl<'a> CellProfile<'a> {
    pub fn new(xi: XiGrid, values: &'a [f64]) -> Self {
        assert_eq!(values.len(), xi.bins());
        Self { xi, values }
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }
}

impl KineticProfile for CellProfile<'_> {
    fn at(&self, x: f64) -> f64 {
        if x <= 0.0 || x > self.xi.xi_max() {
            return 0.0;
        }
        let s = x / self.xi.width() - 0.5;
        if s <= 0.0 {
            return self.values[0];
        }
        let k = s.floor() as usize;
        if k + 1 >= self.values.len() {
            return self.values[self.values.len() - 1];
        }
        let frac = s - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }
}

impl EmpiricalKinetic {
    pub fn n_cells(&self) -> usize {
        self.cells_t * self.cells_x
    }

    pub fn p_profile(&self, cell: usize) -> CellProfile<'_> {
        let m = self.xi.bins();
        CellProfile::new(self.xi, &self.p[cell * m..(cell + 1) * m])
    }

    pub fn q_profile(&self, cell: usize) -> CellProfile<'_> {
        let m = self.xi.bins();
        CellProfile::new(self.xi, &self.q[cell * m..(cell + 1) * m])
    }
}

/// Cell averages of `χ_{f(t,x)}(ξ_k)` for any per-snapshot field `f`, plus the
/// cell means of `f`.
pub fn kinetic_of<S>(
    snapshots: &[S],
    layout: &CellLayout,
    xg: &XiGrid,
    field: impl Fn(&S) -> Vec<f64>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if snapshots.len() != layout.snapshot_cell.len() {
        return Err(Error::Partition("layout does not match the trajectory".into()));
    }
    let m = xg.bins();
    let n_cells = layout.n_cells();
    let mut counts = vec![0usize; n_cells * (m + 1)];
    let mut sums = vec![0.0; n_cells];
    for (snap, &ct) in snapshots.iter().zip(&layout.snapshot_cell) {
        let values = field(snap);
        if values.len() != layout.grid_cell.len() {
            return Err(Error::Partition("field length does not match the grid".into()));
        }
        for (&x, &cx) in values.iter().zip(&layout.grid_cell) {
            if x > xg.xi_max() {
                return Err(Error::Invalid(format!("sample {x} exceeds ξ_max = {}", xg.xi_max())));
            }
            let c = layout.index(ct, cx);
            counts[c * (m + 1) + xg.centers_at_or_below(x)] += 1;
            sums[c] += x;
        }
    }
    let mut profile = vec![0.0; n_cells * m];
    let mut means = vec![0.0; n_cells];
    for c in 0..n_cells {
        let n = layout.samples[c] as f64;
        let row = &counts[c * (m + 1)..(c + 1) * (m + 1)];
        let mut above = 0usize;
        for k in (0..m).rev() {
            above += row[k + 1];
            profile[c * m + k] = above as f64 / n;
        }
        means[c] = sums[c] / n;
    }
    Ok((profile, means))
}

/// Exact cell average of `χ_f(ξ)`: the share of a cell's samples `≥ ξ`, for
/// `ξ > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleProfile {
    sorted: Vec<f64>,
}

impl SampleProfile {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        Self { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

impl KineticProfile for SampleProfile {
    fn at(&self, xi: f64) -> f64 {
        if xi <= 0.0 || self.sorted.is_empty() {
            return 0.0;
        }
        let below = self.sorted.partition_point(|&x| x < xi);
        (self.sorted.len() - below) as f64 / self.sorted.len() as f64
    }
}

/// Per-cell [`SampleProfile`]s of a per-snapshot field.
pub fn cell_samples<S>(snapshots: &[S], layout: &CellLayout, field: impl Fn(&S) -> Vec<f64>) -> Result<Vec<SampleProfile>> {
    if snapshots.len() != layout.snapshot_cell.len() {
        return Err(Error::Partition("layout does not match the trajectory".into()));
    }
    let mut cells: Vec<Vec<f64>> = layout.samples.iter().map(|&n| Vec::with_capacity(n)).collect();
    for (snap, &ct) in snapshots.iter().zip(&layout.snapshot_cell) {
        let values = field(snap);
        if values.len() != layout.grid_cell.len() {
            return Err(Error::Partition("field length does not match the grid".into()));
        }
        for (&x, &cx) in values.iter().zip(&layout.grid_cell) {
            cells[layout.index(ct, cx)].push(x);
        }
    }
    Ok(cells.into_iter().map(SampleProfile::new).collect())
}

/// `p̄` from `u` and `q̄` from `v`.
pub fn empirical_kinetic(snapshots: &[FieldState], layout: &CellLayout, xg: &XiGrid) -> Result<EmpiricalKinetic> {
    let (p, u_mean) = kinetic_of(snapshots, layout, xg, |s| s.u.clone())?;
    let (q, v_mean) = kinetic_of(snapshots, layout, xg, |s| s.v.clone())?;
    Ok(EmpiricalKinetic {
        xi: *xg,
        cells_t: layout.cells_t,
        cells_x: layout.cells_x,
        p,
        q,
        u_mean,
        v_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::super::CellPartition;
    use super::*;
    use crate::solver::Grid1D;
    use proptest::prelude::*;

    fn snapshots(u: impl Fn(usize, usize) -> f64, v: impl Fn(usize, usize) -> f64, n: usize, steps: usize) -> Vec<FieldState> {
        (0..steps)
            .map(|k| FieldState {
                t: k as f64,
                u: (0..n).map(|j| u(k, j)).collect(),
                v: (0..n).map(|j| v(k, j)).collect(),
            })
            .collect()
    }

    fn build(snaps: &[FieldState], n: usize) -> EmpiricalKinetic {
        let grid = Grid1D::new(n, 1.0).unwrap();
        let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
        let lay = CellPartition { cells_t: 1, cells_x: 1 }.layout(&times, &grid).unwrap();
        empirical_kinetic(snaps, &lay, &XiGrid::new(4.0, 64).unwrap()).unwrap()
    }

    #[test]
    fn constant_field_gives_indicator() {
        let s = snapshots(|_, _| 1.5, |_, _| 2.25, 16, 2);
        let ek = build(&s, 16);
        for (k, xi) in ek.xi.centers().into_iter().enumerate() {
            assert_eq!(ek.p[k], if xi <= 1.5 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn two_point_mixture_has_half_plateau() {
        let (a, b) = (0.634, 2.366);
        let s = snapshots(|_, j| if j % 2 == 0 { a } else { b }, |_, _| 2.25, 16, 2);
        let ek = build(&s, 16);
        for (k, xi) in ek.xi.centers().into_iter().enumerate() {
            let expect = if xi <= a { 1.0 } else if xi <= b { 0.5 } else { 0.0 };
            assert_eq!(ek.p[k], expect);
        }
    }

    #[test]
    fn sample_above_xi_max_rejected() {
        let s = snapshots(|_, _| 5.0, |_, _| 1.0, 16, 2);
        let grid = Grid1D::new(16, 1.0).unwrap();
        let lay = CellPartition { cells_t: 1, cells_x: 1 }.layout(&[0.0, 1.0], &grid).unwrap();
        assert!(empirical_kinetic(&s, &lay, &XiGrid::new(4.0, 64).unwrap()).is_err());
    }

    #[test]
    fn interpolation_is_clamped_and_zero_outside_support() {
        let xg = XiGrid::new(4.0, 32).unwrap();
        let values: Vec<f64> = (0..32).map(|k| 1.0 - k as f64 / 31.0).collect();
        let prof = CellProfile::new(xg, &values);
        assert_eq!(prof.at(0.0), 0.0);
        assert_eq!(prof.at(0.01), 1.0);
        assert_eq!(prof.at(4.5), 0.0);
        assert!((prof.at(xg.center(3) + 0.25 * xg.width()) - (1.0 - 3.25 / 31.0)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn profiles_are_monotone_bounded_and_reconstruct_means(
            us in proptest::collection::vec(0.0f64..4.0, 32),
            vs in proptest::collection::vec(0.0f64..4.0, 32),
        ) {
            let s = snapshots(|k, j| us[(k * 16 + j) % 32], |k, j| vs[(k * 16 + j) % 32], 16, 2);
            let ek = build(&s, 16);
            let dxi = ek.xi.width();
            for prof in [&ek.p, &ek.q] {
                prop_assert!(prof.iter().all(|x| (0.0..=1.0).contains(x)));
                prop_assert!(prof.windows(2).all(|w| w[1] <= w[0]));
            }
            let int_p: f64 = ek.p.iter().sum::<f64>() * dxi;
            let int_q: f64 = ek.q.iter().sum::<f64>() * dxi;
            prop_assert!((int_p - ek.u_mean[0]).abs() <= 0.5 * dxi + 1e-12);
            prop_assert!((int_q - ek.v_mean[0]).abs() <= 0.5 * dxi + 1e-12);
        }
    }

    #[test]
    fn sample_profile_counts_ties_as_above() {
        let p = SampleProfile::new(vec![3.0, 1.0, 2.0, 2.0]);
        assert_eq!(p.at(0.0), 0.0);
        assert_eq!(p.at(0.5), 1.0);
        assert_eq!(p.at(2.0), 0.75);
        assert_eq!(p.at(2.5), 0.25);
        assert_eq!(p.at(3.5), 0.0);
    }

    proptest! {
        #[test]
        fn sample_profile_agrees_with_histogram_at_centers(seed in 0u64..200) {
            let n = 16;
            let g = Grid1D::new(n, 1.0).unwrap();
            let f = |k: usize, j: usize| 0.1 + 2.5 * (((seed as usize + 7 * k + 13 * j) * 2654435761) % 1000) as f64 / 1000.0;
            let snaps = snapshots(f, f, n, 8);
            let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
            let layout = CellPartition { cells_t: 2, cells_x: 2 }.layout(&times, &g).unwrap();
            let xg = XiGrid::new(3.0, 64).unwrap();
            let ek = empirical_kinetic(&snaps, &layout, &xg).unwrap();
            let sp = cell_samples(&snaps, &layout, |s| s.u.clone()).unwrap();
            for (c, profile) in sp.iter().enumerate() {
                for k in 0..xg.bins() {
                    prop_assert!((profile.at(xg.center(k)) - ek.p[c * xg.bins() + k]).abs() < 1e-15);
                }
            }
        }
    }
}

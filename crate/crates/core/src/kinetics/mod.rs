//! Empirical kinetic functions `p̄ = ⟨χ_u⟩`, `q̄ = ⟨χ_v⟩` over a lattice of
//! space-time cells, oscillation weights, the defect histogram, and the
//! structural identities evaluated as residuals.
//!
//! Kinetic profiles follow the left-continuous indicator convention
//! `χ_a(ξ) = 1` for `0 < ξ ≤ a` and `0` otherwise.

mod defect;
mod empirical;
mod identity;
mod metrics;
mod weights;

pub use defect::{defect_measure, DefectHistogram};
pub use empirical::{cell_samples, empirical_kinetic, kinetic_of, SampleProfile, CellProfile, EmpiricalKinetic};
pub use identity::{
    calc_s_r, closed_form_r_high, closed_form_r_low, identity_residual, kinetic_identity_residual,
    plotnikov_residuals, pushforward, pushforward_gap, pushforward_residual, sample_pairs, GuardBands, IdentityStats,
};
pub use metrics::{concentration_metrics, ConcentrationMetrics};
pub use weights::{young_weights, CellWeights, WeightField};

use serde::{Deserialize, Serialize};

use crate::model::{Branch, BranchInverses};
use crate::solver::Grid1D;
use crate::{Error, Result};

/// Uniform bins on `[0, ξ_max]`; kinetic values are sampled at bin centers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiGrid {
    xi_max: f64,
    bins: usize,
}

impl XiGrid {
    pub const MIN_BINS: usize = 32;

    pub fn new(xi_max: f64, bins: usize) -> Result<Self> {
        if bins < Self::MIN_BINS {
            return Err(Error::Invalid(format!("need at least {} ξ bins, got {bins}", Self::MIN_BINS)));
        }
        if !(xi_max.is_finite() && xi_max > 0.0) {
            return Err(Error::Invalid(format!("ξ_max must be positive, got {xi_max}")));
        }
        Ok(Self { xi_max, bins })
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn width(&self) -> f64 {
        self.xi_max / self.bins as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.width()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins).map(|k| self.center(k)).collect()
    }

    /// Number of bin centers `≤ x`.
    pub fn centers_at_or_below(&self, x: f64) -> usize {
        let c = (x / self.width() + 0.5).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.bins)
        }
    }
}

/// Requested lattice resolution: `cells_t × cells_x` equal cells over the
/// trajectory's time span and the spatial domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPartition {
    pub cells_t: usize,
    pub cells_x: usize,
}

impl Default for CellPartition {
    fn default() -> Self {
        Self { cells_t: 32, cells_x: 16 }
    }
}

/// A [`CellPartition`] resolved against concrete snapshot times and a grid.
/// Cell `c = t_cell · cells_x + x_cell`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellLayout {
    pub cells_t: usize,
    pub cells_x: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Time cell of every snapshot.
    pub snapshot_cell: Vec<usize>,
    /// Space cell of every grid cell.
    pub grid_cell: Vec<usize>,
    /// Samples (snapshot, grid cell) per lattice cell.
    pub samples: Vec<usize>,
}

impl CellPartition {
    pub const MIN_SAMPLES: usize = 16;

    pub fn layout(&self, times: &[f64], grid: &Grid1D) -> Result<CellLayout> {
        if self.cells_t == 0 || self.cells_x == 0 {
            return Err(Error::Partition("cell counts must be positive".into()));
        }
        if self.cells_x > grid.n_cells() {
            return Err(Error::Partition(format!(
                "{} space cells exceed {} grid cells",
                self.cells_x,
                grid.n_cells()
            )));
        }
        let (&t_start, &t_end) = match (times.first(), times.last()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Partition("empty trajectory".into())),
        };
        let span = t_end - t_start;
        let snapshot_cell: Vec<usize> = times
            .iter()
            .map(|&t| {
                if span <= 0.0 {
                    0
                } else {
                    (((t - t_start) / span * self.cells_t as f64).floor() as usize).min(self.cells_t - 1)
                }
            })
            .collect();
        let grid_cell: Vec<usize> = (0..grid.n_cells()).map(|j| j * self.cells_x / grid.n_cells()).collect();
        let mut per_t = vec![0usize; self.cells_t];
        snapshot_cell.iter().for_each(|&c| per_t[c] += 1);
        let mut per_x = vec![0usize; self.cells_x];
        grid_cell.iter().for_each(|&c| per_x[c] += 1);
        let mut samples = Vec::with_capacity(self.cells_t * self.cells_x);
        for (ct, nt) in per_t.iter().enumerate() {
            for (cx, nx) in per_x.iter().enumerate() {
                let n = nt * nx;
                if n < Self::MIN_SAMPLES {
                    return Err(Error::Partition(format!(
                        "cell (t {ct}, x {cx}) holds {n} samples, need at least {}",
                        Self::MIN_SAMPLES
                    )));
                }
                samples.push(n);
            }
        }
        Ok(CellLayout {
            cells_t: self.cells_t,
            cells_x: self.cells_x,
            t_start,
            t_end,
            snapshot_cell,
            grid_cell,
            samples,
        })
    }
}

impl CellLayout {
    pub fn n_cells(&self) -> usize {
        self.cells_t * self.cells_x
    }

    pub fn index(&self, t_cell: usize, x_cell: usize) -> usize {
        t_cell * self.cells_x + x_cell
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell / self.cells_x, cell % self.cells_x)
    }

    pub fn dt_cell(&self) -> f64 {
        (self.t_end - self.t_start) / self.cells_t as f64
    }
}

/// A kinetic profile `ξ ↦ p(ξ)`, non-increasing with values in `[0, 1]`.
pub trait KineticProfile {
    fn at(&self, xi: f64) -> f64;
}

impl<F: Fn(f64) -> f64> KineticProfile for F {
    fn at(&self, xi: f64) -> f64 {
        self(xi)
    }
}

/// Piecewise-constant profile: `levels[i]` on `(edges[i−1], edges[i]]` with
/// `edges[−1] = 0`, and `0` past the last edge or at `ξ ≤ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepProfile {
    edges: Vec<f64>,
    levels: Vec<f64>,
}

impl StepProfile {
    pub fn new(edges: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if edges.len() != levels.len() || edges.is_empty() {
            return Err(Error::Invalid("step profile needs one level per edge".into()));
        }
        if edges.windows(2).any(|w| w[1] < w[0]) || edges[0] < 0.0 {
            return Err(Error::Invalid("step edges must be nonnegative and sorted".into()));
        }
        if levels.iter().any(|l| !(0.0..=1.0).contains(l)) || levels.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Invalid("step levels must be non-increasing in [0, 1]".into()));
        }
        Ok(Self { edges, levels })
    }

    /// `χ_a`.
    pub fn indicator(a: f64) -> Self {
        Self {
            edges: vec![a.max(0.0)],
            levels: vec![1.0],
        }
    }

    /// Limit profile of `u` at a point where `v = v̄`: `1` up to `S₁(v̄)`,
    /// `κ₁` up to `S₂(v̄)`, `κ₂` up to `S₃(v̄)`.
    pub fn three_plateau(bi: &BranchInverses, v_bar: f64, kappa1: f64, kappa2: f64) -> Result<Self> {
        let edges = Branch::ALL.iter().map(|&b| bi.inverse(b, v_bar).u).collect();
        Self::new(edges, vec![1.0, kappa1, kappa2])
    }

    /// Image of the profile under an increasing map of the abscissa.
    pub fn map_edges(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            edges: self.edges.iter().map(|&e| f(e)).collect(),
            levels: self.levels.clone(),
        }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
}

impl KineticProfile for StepProfile {
    fn at(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        self.edges
            .iter()
            .position(|&e| xi <= e)
            .map_or(0.0, |i| self.levels[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_grid_counts_centers() {
        let g = XiGrid::new(4.0, 40).unwrap();
        assert_eq!(g.width(), 0.1);
        assert_eq!(g.centers_at_or_below(0.0), 0);
        assert_eq!(g.centers_at_or_below(0.05), 1);
        assert_eq!(g.centers_at_or_below(0.149), 1);
        assert_eq!(g.centers_at_or_below(9.0), 40);
        assert!(XiGrid::new(4.0, 31).is_err());
    }

    #[test]
    fn layout_assigns_every_sample() {
        let grid = Grid1D::new(64, 1.0).unwrap();
        let times: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
        let lay = CellPartition { cells_t: 8, cells_x: 8 }.layout(&times, &grid).unwrap();
        assert_eq!(lay.samples.iter().sum::<usize>(), 65 * 64);
        assert_eq!(lay.snapshot_cell[64], 7);
        assert_eq!(lay.grid_cell[63], 7);
        let err = CellPartition { cells_t: 64, cells_x: 64 }.layout(&times, &grid);
        assert!(matches!(err, Err(Error::Partition(_))));
    }

    #[test]
    fn step_profile_is_left_continuous() {
        let p = StepProfile::new(vec![1.0, 2.0, 3.0], vec![1.0, 0.6, 0.3]).unwrap();
        assert_eq!(p.at(0.0), 0.0);
        assert_eq!(p.at(1.0), 1.0);
        assert_eq!(p.at(1.5), 0.6);
        assert_eq!(p.at(3.0), 0.3);
        assert_eq!(p.at(3.1), 0.0);
        assert!(StepProfile::new(vec![1.0], vec![1.2]).is_err());
        assert!(StepProfile::new(vec![1.0, 2.0], vec![0.2, 0.5]).is_err());
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{FieldState, Grid1D};
use crate::model::ReactionFunction;
use crate::{Error, Result};

/// Initial `u` profile. Every variant is built from `cos(kπx/L)` modes or
/// flat pieces, so the boundary slope vanishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitProfile {
    Constant { u: f64 },
    /// `base + Σ a_k cos(kπx/L)`.
    CosineSum { base: f64, modes: Vec<(u32, f64)> },
    /// `low` on `[0, x0]`, `high` on `[x1, L]`, half-cosine blend between,
    /// plus an optional seeded perturbation built from high-frequency cosines
    /// (wavenumbers between `n/4` and `n/2`) of sup-norm at most `jitter`.
    PlateauBlend {
        low: f64,
        high: f64,
        x0: f64,
        x1: f64,
        jitter: f64,
        seed: u64,
    },
}

/// Initial `v` profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum VProfile {
    /// `v₀ = F(u₀) + shift`.
    Equilibrium { shift: f64 },
    Constant { v: f64 },
    CosineSum { base: f64, modes: Vec<(u32, f64)> },
}

fn cosine_sum(grid: &Grid1D, base: f64, modes: &[(u32, f64)]) -> Vec<f64> {
    let l = grid.length();
    grid.centers()
        .iter()
        .map(|&x| base + modes.iter().map(|&(k, a)| a * (k as f64 * PI * x / l).cos()).sum::<f64>())
        .collect()
}

fn jitter_field(grid: &Grid1D, amplitude: f64, seed: u64) -> Vec<f64> {
    let n = grid.n_cells();
    let (k_lo, k_hi) = ((n / 4).max(1), (n / 2).max(2));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(u32, f64)> = (k_lo..=k_hi).map(|k| (k as u32, rng.gen_range(-1.0..=1.0))).collect();
    let raw = cosine_sum(grid, 0.0, &modes);
    let peak = raw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return raw;
    }
    raw.into_iter().map(|x| amplitude * x / peak).collect()
}

impl InitProfile {
    pub fn u_values(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        let u = match self {
            InitProfile::Constant { u } => vec![*u; grid.n_cells()],
            InitProfile::CosineSum { base, modes } => cosine_sum(grid, *base, modes),
            InitProfile::PlateauBlend {
                low,
                high,
                x0,
                x1,
                jitter,
                seed,
            } => {
                if !(0.0 <= *x0 && x0 < x1 && *x1 <= grid.length()) {
                    return Err(Error::Invalid(format!(
                        "plateau blend needs 0 <= x0 < x1 <= L, got x0 = {x0}, x1 = {x1}"
                    )));
                }
                if *jitter < 0.0 {
                    return Err(Error::Invalid(format!("jitter must be nonnegative, got {jitter}")));
                }
                let noise = jitter_field(grid, *jitter, *seed);
                grid.centers()
                    .iter()
                    .zip(noise)
                    .map(|(&x, eta)| {
                        let s = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
                        low + (high - low) * 0.5 * (1.0 - (PI * s).cos()) + eta
                    })
                    .collect()
            }
        };
        Ok(u)
    }
}

impl VProfile {
    pub fn v_values(&self, grid: &Grid1D, rf: &ReactionFunction, u: &[f64]) -> Vec<f64> {
        match self {
            VProfile::Equilibrium { shift } => u.iter().map(|&x| rf.value(x) + shift).collect(),
            VProfile::Constant { v } => vec![*v; grid.n_cells()],
            VProfile::CosineSum { base, modes } => cosine_sum(grid, *base, modes),
        }
    }
}

/// Builds the `t = 0` state and validates nonnegativity, finiteness and
/// `u₀ ≤ U_max`.
pub fn init_fields(grid: &Grid1D, rf: &ReactionFunction, u_init: &InitProfile, v_init: &VProfile) -> Result<FieldState> {
    let u = u_init.u_values(grid)?;
    let v = v_init.v_values(grid, rf, &u);
    for (name, field) in [("u0", &u), ("v0", &v)] {
        if let Some((j, x)) = field.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::Invalid(format!("{name} must be finite and nonnegative, cell {j} has {x}")));
        }
    }
    if let Some(&x) = u.iter().find(|&&x| x > rf.u_max()) {
        return Err(Error::Domain {
            value: x,
            lo: 0.0,
            hi: rf.u_max(),
        });
    }
    Ok(FieldState { t: 0.0, u, v })
}

use serde::{Deserialize, Serialize};

use super::output::write_json;
use super::run::SCHEMA_VERSION;
use super::RunConfig;
use crate::model::{
    compute_branch_structure, nondegeneracy_check, plotnikov_maps, BranchInverses, BranchStructure, WronskianSettings,
};
use crate::Result;
use std::path::Path;

/// Share of `f₊ − f₋` cut from each end of the Wronskian interval.
pub const WRONSKIAN_MARGIN: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCheck {
    pub schema_version: u32,
    pub branch_structure: BranchStructure,
    /// `S₁, S₂, S₃` at the midpoint of `(f₋, f₊)`.
    pub midpoint_roots: [f64; 3],
    pub wronskian_interval: [f64; 2],
    pub wronskian_min: f64,
    pub min_slope: f64,
    pub lift_invertible: bool,
}

impl ModelCheck {
    pub fn passed(&self) -> bool {
        self.wronskian_min > 0.0
    }
}

/// Branch structure and nondegeneracy certificate of the configured `F`.
pub fn check_model(cfg: &RunConfig, dir: Option<&Path>) -> Result<ModelCheck> {
    let rf = cfg.reaction()?;
    let bs = compute_branch_structure(&rf)?;
    let bi = BranchInverses::new(rf.clone())?;
    let delta = WRONSKIAN_MARGIN * (bs.f_plus - bs.f_minus);
    let (lo, hi) = (bs.f_minus + delta, bs.f_plus - delta);
    let wronskian_min = nondegeneracy_check(&bi, lo, hi, WronskianSettings::default())?;
    let mid = bi.all(0.5 * (bs.f_minus + bs.f_plus));
    let maps = plotnikov_maps(&rf);
    let check = ModelCheck {
        schema_version: SCHEMA_VERSION,
        branch_structure: bs,
        midpoint_roots: [mid[0].u, mid[1].u, mid[2].u],
        wronskian_interval: [lo, hi],
        wronskian_min,
        min_slope: maps.min_slope(),
        lift_invertible: maps.valid(),
    };
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
        write_json(&d.join("model.json"), &check)?;
    }
    Ok(check)
}

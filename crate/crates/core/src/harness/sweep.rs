use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::output::{fmt_f64, write_artifacts, write_csv, write_json};
use super::run::SCHEMA_VERSION;
use super::{simulate, RunConfig, RunOutcome};
use crate::diagnostics::{sweep_fit, SweepFit};
use crate::{Error, Result};

/// Allowed relative increase between consecutive `ρ` values.
pub const RHO_ALLOWANCE: f64 = 0.2;
/// Defects at or below this level count as roundoff when deciding whether the
/// rate fit is degenerate.
pub const DEFECT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub complete: bool,
    pub failure: Option<String>,
    pub checks_passed: bool,
    pub defect: f64,
    pub scaled_defect: f64,
    pub mass_drift: f64,
    pub identity_mean: f64,
    pub identity_sup: f64,
    pub pushforward_mean: f64,
    pub binarization_fraction: f64,
    pub mean_rho: f64,
    pub oscillating_cells: usize,
    pub concentrated_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trends {
    pub defect_decreasing: bool,
    pub identity_decreasing: bool,
    pub binarization_decreasing: bool,
    /// `ρ_{k+1} ≤ 1.2 ρ_k` along the sweep.
    pub rho_monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub label: String,
    /// Strictly decreasing ε.
    pub entries: Vec<SweepEntry>,
    pub fit: Option<SweepFit>,
    pub fit_note: Option<String>,
    /// Trends over the completed members only.
    pub trends: Trends,
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn entry(eps: f64, outcome: &Result<RunOutcome>) -> SweepEntry {
    let blank = |failure: String| SweepEntry {
        epsilon: eps,
        complete: false,
        failure: Some(failure),
        checks_passed: false,
        defect: 0.0,
        scaled_defect: 0.0,
        mass_drift: 0.0,
        identity_mean: 0.0,
        identity_sup: 0.0,
        pushforward_mean: 0.0,
        binarization_fraction: 0.0,
        mean_rho: 0.0,
        oscillating_cells: 0,
        concentrated_cells: 0,
    };
    let o = match outcome {
        Ok(o) => o,
        Err(e) => return blank(e.to_string()),
    };
    let r = &o.report;
    if !r.complete {
        return blank(r.failure.clone().unwrap_or_default());
    }
    let k = r.kinetics.as_ref().expect("complete runs carry kinetics");
    let w = r.weights.as_ref().expect("complete runs carry weights");
    let c = r.concentration.as_ref().expect("complete runs carry metrics");
    SweepEntry {
        epsilon: eps,
        complete: true,
        failure: None,
        checks_passed: r.passed(),
        defect: r.apriori.defect,
        scaled_defect: r.apriori.scaled_defect,
        mass_drift: r.mass.max_relative_drift,
        identity_mean: k.identity.mean,
        identity_sup: k.identity.sup,
        pushforward_mean: k.pushforward_mean,
        binarization_fraction: c.binarization_fraction,
        mean_rho: w.mean_rho,
        oscillating_cells: w.oscillating_cells,
        concentrated_cells: c.concentrated_cells,
    }
}

/// Sweep members paired with their outcomes, ε strictly decreasing.
pub struct SweepOutcome {
    pub summary: SweepSummary,
    pub runs: Vec<(f64, Result<RunOutcome>)>,
}

/// Runs `cfg` once per ε (in parallel when `parallel`), fits the defect rate
/// over the completed members, and writes `sweep.csv`, `sweep.json` and one
/// run directory per ε under `dir` when given.
pub fn run_sweep(cfg: &RunConfig, eps: &[f64], dir: Option<&Path>, parallel: bool) -> Result<SweepOutcome> {
    if eps.len() < 3 {
        return Err(Error::Invalid(format!("a sweep needs at least 3 ε values, got {}", eps.len())));
    }
    let mut sorted = eps.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if !strictly_decreasing(&sorted) || sorted.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Invalid("ε values must be positive and distinct".into()));
    }
    let one = |(i, &e): (usize, &f64)| -> (f64, Result<RunOutcome>) {
        let mut c = cfg.with_epsilon(e);
        c.run.label = format!("{}-eps{i}", cfg.run.label);
        let out = simulate(&c).and_then(|o| {
            if let Some(d) = dir {
                write_artifacts(&o, &d.join(format!("eps_{i}")))?;
            }
            Ok(o)
        });
        (e, out)
    };
    let runs: Vec<(f64, Result<RunOutcome>)> = if parallel {
        sorted.par_iter().enumerate().map(one).collect()
    } else {
        sorted.iter().enumerate().map(one).collect()
    };
    let entries: Vec<SweepEntry> = runs.iter().map(|(e, o)| entry(*e, o)).collect();
    let done: Vec<&SweepEntry> = entries.iter().filter(|e| e.complete).collect();
    let col = |f: fn(&SweepEntry) -> f64| done.iter().map(|e| f(e)).collect::<Vec<f64>>();
    let (fit, fit_note) = if done.iter().all(|e| e.defect <= DEFECT_FLOOR) && !done.is_empty() {
        (None, Some(format!("degenerate: every defect is at most {DEFECT_FLOOR:e}")))
    } else {
        match sweep_fit(&col(|e| e.epsilon), &col(|e| e.defect)) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let rho = col(|e| e.mean_rho);
    let trends = Trends {
        defect_decreasing: strictly_decreasing(&col(|e| e.defect)),
        identity_decreasing: strictly_decreasing(&col(|e| e.identity_mean)),
        binarization_decreasing: strictly_decreasing(&col(|e| e.binarization_fraction)),
        rho_monotone: rho.windows(2).all(|w| w[1] <= (1.0 + RHO_ALLOWANCE) * w[0]),
    };
    let summary = SweepSummary {
        schema_version: SCHEMA_VERSION,
        label: cfg.run.label.clone(),
        entries,
        fit,
        fit_note,
        trends,
    };
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
        write_json(&d.join("sweep.json"), &summary)?;
        write_csv(
            &d.join("sweep.csv"),
            &[
                "epsilon",
                "complete",
                "defect",
                "scaled_defect",
                "mass_drift",
                "identity_mean",
                "identity_sup",
                "pushforward_mean",
                "binarization_fraction",
                "mean_rho",
                "oscillating_cells",
                "concentrated_cells",
            ],
            summary.entries.iter().map(|e| {
                vec![
                    fmt_f64(e.epsilon),
                    e.complete.to_string(),
                    fmt_f64(e.defect),
                    fmt_f64(e.scaled_defect),
                    fmt_f64(e.mass_drift),
                    fmt_f64(e.identity_mean),
                    fmt_f64(e.identity_sup),
                    fmt_f64(e.pushforward_mean),
                    fmt_f64(e.binarization_fraction),
                    fmt_f64(e.mean_rho),
                    e.oscillating_cells.to_string(),
                    e.concentrated_cells.to_string(),
                ]
            }),
        )?;
    }
    Ok(SweepOutcome { summary, runs })
}

use serde::{Deserialize, Serialize};
use std::time::Instant;

use super::RunConfig;
use crate::diagnostics::{apriori_report, energy_trace, m_bound, total_mass, AprioriReport, BOUND_TOL};
use crate::kinetics::{
    concentration_metrics, defect_measure, empirical_kinetic, kinetic_identity_residual, pushforward_residual,
    sample_pairs, young_weights, CellLayout, CellPartition, ConcentrationMetrics, DefectHistogram, EmpiricalKinetic,
    GuardBands, IdentityStats, WeightField, XiGrid,
};
use crate::model::{compute_branch_structure, BranchInverses, BranchStructure, ReactionFunction};
use crate::solver::{init_fields, integrate, FieldState, Grid1D, SystemStepper, Trajectory};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const MASS_TOL: f64 = 1e-8;
pub const ENERGY_TOL: f64 = 1e-8;
pub const BOOKKEEPING_TOL: f64 = 1e-10;
/// Minimum share of a cell's samples for a branch to count as populated.
pub const BRANCH_SHARE: f64 = 0.1;
/// Required ratio `Var(u) / Var(v)` in oscillating cells.
pub const VARIANCE_RATIO: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= limit,
            value,
            limit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSummary {
    pub steps: usize,
    pub halved_steps: usize,
    pub clamped: usize,
    pub snapshots: usize,
    pub dt: f64,
    pub t_reached: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassSummary {
    pub initial: f64,
    pub last: f64,
    pub max_relative_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    pub initial: f64,
    pub last: f64,
    pub max_increment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticSummary {
    pub xi_max: f64,
    pub xi_bins: usize,
    pub cells_t: usize,
    pub cells_x: usize,
    pub pushforward_mean: f64,
    pub pushforward_sup: f64,
    pub identity: IdentityStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSummary {
    pub total_n2: f64,
    pub total_n1: f64,
    /// `‖(v − F(u))/√ε‖²` with the same quadrature.
    pub discrete_norm2: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub mean_rho: f64,
    pub max_rho: f64,
    pub min_lambda: f64,
    /// `max |λ₁ + λ₂ + λ₃ − 1|`.
    pub max_sum_error: f64,
    /// Branch counts add up to the sample count in every cell.
    pub counts_exact: bool,
    pub low_confidence_cells: usize,
    /// Cells with at least two populated branches.
    pub oscillating_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    pub binarization_fraction: f64,
    pub max_lambda_rate: f64,
    /// Oscillating cells where `Var(v) · 10 ≤ Var(u)`.
    pub concentrated_cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub label: String,
    pub config: RunConfig,
    pub complete: bool,
    pub failure: Option<String>,
    pub branch_structure: BranchStructure,
    pub integration: IntegrationSummary,
    pub mass: MassSummary,
    pub energy: EnergySummary,
    pub apriori: AprioriReport,
    pub kinetics: Option<KineticSummary>,
    pub defect: Option<DefectSummary>,
    pub weights: Option<WeightSummary>,
    pub concentration: Option<ConcentrationSummary>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.complete && self.checks.iter().all(|c| c.passed)
    }
}

/// Kinetic post-processing of a complete trajectory.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub layout: CellLayout,
    pub kinetic: EmpiricalKinetic,
    pub weights: WeightField,
    pub defect: DefectHistogram,
    pub metrics: ConcentrationMetrics,
    pub pushforward: Vec<f64>,
    pub identity: IdentityStats,
}

/// Everything produced by one run, kept in memory.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub grid: Grid1D,
    pub reaction: ReactionFunction,
    pub trajectory: Trajectory<FieldState>,
    pub analysis: Option<Analysis>,
    pub report: RunReport,
    pub seconds: f64,
}

impl RunOutcome {
    pub fn snapshots(&self) -> &[FieldState] {
        &self.trajectory.snapshots
    }
}

pub(crate) struct Setup {
    pub rf: ReactionFunction,
    pub bs: BranchStructure,
    pub bi: BranchInverses,
    pub grid: Grid1D,
    pub initial: FieldState,
    pub m: f64,
}

pub(crate) fn setup(cfg: &RunConfig) -> Result<Setup> {
    let rf = cfg.reaction()?;
    let bs = compute_branch_structure(&rf)?;
    let bi = BranchInverses::new(rf.clone())?;
    let grid = cfg.grid()?;
    let (u_init, v_init) = cfg.init_profiles()?;
    let initial = init_fields(&grid, &rf, &u_init, &v_init)?;
    let m = m_bound(&initial, &rf, &bs);
    if m > rf.u_max() {
        return Err(Error::Invalid(format!(
            "a priori bound M = {m} exceeds the model domain U_max = {}",
            rf.u_max()
        )));
    }
    Ok(Setup {
        rf,
        bs,
        bi,
        grid,
        initial,
        m,
    })
}

pub(crate) fn xi_grid(cfg: &RunConfig, m: f64) -> Result<XiGrid> {
    XiGrid::new(cfg.kinetics.xi_max.unwrap_or(m + BOUND_TOL), cfg.kinetics.xi_bins)
}

pub(crate) fn guard_bands(cfg: &RunConfig, bs: &BranchStructure, xg: &XiGrid) -> GuardBands {
    GuardBands {
        fold: cfg.model.fold_guard * (bs.f_plus - bs.f_minus),
        edge: cfg.kinetics.guard_band,
        xi_max: xg.xi_max(),
    }
}

fn analyse(cfg: &RunConfig, s: &Setup, snaps: &[FieldState]) -> Result<Analysis> {
    let times: Vec<f64> = snaps.iter().map(|x| x.t).collect();
    let layout = CellPartition {
        cells_t: cfg.kinetics.cells_t,
        cells_x: cfg.kinetics.cells_x,
    }
    .layout(&times, &s.grid)?;
    let xg = xi_grid(cfg, s.m)?;
    let kinetic = empirical_kinetic(snaps, &layout, &xg)?;
    let guard = guard_bands(cfg, &s.bs, &xg);
    let weights = young_weights(snaps, &layout, &s.bi, guard.fold);
    let defect = defect_measure(snaps, &layout, &s.grid, &xg, &s.rf, cfg.solver.epsilon);
    let metrics = concentration_metrics(&kinetic, snaps, &layout, &weights);
    let pushforward = pushforward_residual(&kinetic, &s.bi, &guard);
    let pairs = sample_pairs(cfg.run.seed, cfg.kinetics.pairs_per_cell, &guard, &s.bs);
    let identity = kinetic_identity_residual(&kinetic, &s.bi, &pairs);
    Ok(Analysis {
        layout,
        kinetic,
        weights,
        defect,
        metrics,
        pushforward,
        identity,
    })
}

/// Integrates the ε-system for `cfg` and evaluates every diagnostic in
/// memory. An integration failure still yields an outcome, marked
/// incomplete, carrying the partial trajectory.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutcome> {
    let clock = Instant::now();
    let s = setup(cfg)?;
    let solver = cfg.solver_config()?;
    let mut stepper = SystemStepper::new(s.grid, s.rf.clone(), &solver)?;
    let (trajectory, failure) = match integrate(s.initial.clone(), &mut stepper, &solver, &mut []) {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.error.to_string())),
    };
    let snaps = &trajectory.snapshots;
    let analysis = if failure.is_none() { Some(analyse(cfg, &s, snaps)?) } else { None };

    let masses: Vec<f64> = snaps.iter().map(|x| total_mass(x, &s.grid)).collect();
    let m0 = masses[0];
    let drift = masses
        .iter()
        .map(|m| if m0 != 0.0 { (m - m0).abs() / m0.abs() } else { (m - m0).abs() })
        .fold(0.0f64, f64::max);
    let et = energy_trace(snaps, &s.grid, &s.rf);
    let apriori = apriori_report(snaps, &s.grid, &s.rf, &s.bs, cfg.solver.epsilon);

    let mut checks = vec![
        Check::at_most("mass_drift", drift, MASS_TOL),
        Check::at_most(
            "max_bound_excess",
            (apriori.max_u.max(apriori.max_v) - apriori.m_bound).max(0.0),
            BOUND_TOL,
        ),
        Check::at_most("negative_undershoot", (-apriori.min_u.min(apriori.min_v)).max(0.0), 1e-8),
        Check::at_most("energy_increment", et.max_increment, ENERGY_TOL * et.energy[0].abs()),
    ];

    let (mut kinetics, mut defect, mut weights, mut concentration) = (None, None, None, None);
    if let Some(a) = &analysis {
        let xg = a.kinetic.xi;
        kinetics = Some(KineticSummary {
            xi_max: xg.xi_max(),
            xi_bins: xg.bins(),
            cells_t: a.layout.cells_t,
            cells_x: a.layout.cells_x,
            pushforward_mean: a.pushforward.iter().sum::<f64>() / a.pushforward.len() as f64,
            pushforward_sup: a.pushforward.iter().copied().fold(0.0, f64::max),
            identity: a.identity,
        });
        let norm2 = apriori.scaled_defect.powi(2);
        let rel = if norm2 > 0.0 {
            (a.defect.total_n2 - norm2).abs() / norm2
        } else {
            a.defect.total_n2.abs()
        };
        defect = Some(DefectSummary {
            total_n2: a.defect.total_n2,
            total_n1: a.defect.total_n1,
            discrete_norm2: norm2,
            relative_error: rel,
        });
        checks.push(Check::at_most("defect_bookkeeping", rel, BOOKKEEPING_TOL));
        let cells = &a.weights.cells;
        let counts_exact = cells
            .iter()
            .zip(&a.layout.samples)
            .all(|(c, &n)| c.counts.iter().sum::<usize>() == n);
        let max_sum_error = cells
            .iter()
            .map(|c| (c.lambda.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        let min_lambda = cells.iter().flat_map(|c| c.lambda).fold(f64::INFINITY, f64::min);
        let oscillating = a.weights.multi_branch_cells(BRANCH_SHARE);
        weights = Some(WeightSummary {
            mean_rho: a.weights.mean_rho(),
            max_rho: cells.iter().map(|c| c.rho).fold(0.0, f64::max),
            min_lambda,
            max_sum_error,
            counts_exact,
            low_confidence_cells: cells.iter().filter(|c| c.low_confidence).count(),
            oscillating_cells: oscillating.len(),
        });
        checks.push(Check {
            name: "weights_partition_samples".into(),
            passed: counts_exact && min_lambda >= 0.0,
            value: max_sum_error,
            limit: f64::EPSILON,
        });
        let concentrated = oscillating
            .iter()
            .filter(|&&c| a.metrics.v_variance[c] * VARIANCE_RATIO <= a.metrics.u_variance[c])
            .count();
        concentration = Some(ConcentrationSummary {
            binarization_fraction: a.metrics.binarization_fraction,
            max_lambda_rate: a.metrics.max_lambda_rate,
            concentrated_cells: concentrated,
        });
    }

    let last = trajectory.last();
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        label: cfg.run.label.clone(),
        config: cfg.clone(),
        complete: failure.is_none(),
        failure,
        branch_structure: s.bs,
        integration: IntegrationSummary {
            steps: trajectory.steps,
            halved_steps: trajectory.halved_steps,
            clamped: trajectory.clamped,
            snapshots: snaps.len(),
            dt: solver.dt,
            t_reached: last.t,
        },
        mass: MassSummary {
            initial: m0,
            last: *masses.last().expect("initial state present"),
            max_relative_drift: drift,
        },
        energy: EnergySummary {
            initial: et.energy[0],
            last: *et.energy.last().expect("initial state present"),
            max_increment: et.max_increment,
        },
        apriori,
        kinetics,
        defect,
        weights,
        concentration,
        checks,
    };
    Ok(RunOutcome {
        config: cfg.clone(),
        grid: s.grid,
        reaction: s.rf,
        trajectory,
        analysis,
        report,
        seconds: clock.elapsed().as_secs_f64(),
    })
}

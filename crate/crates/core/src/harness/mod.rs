//! Configuration, orchestration and persistence.
//!
//! A run is described by flat `section.key = value` text (see
//! [`parse_config`]). [`simulate`] keeps everything in memory;
//! [`run_single`], [`run_sweep`], [`compare_plotnikov`] and [`check_model`] also write CSV and
//! JSON artifacts. Floats in CSV files use 17 significant digits and JSON
//! reports carry a schema version, so identical inputs give identical files.

mod config;
mod model_check;
mod output;
mod plotnikov;
mod run;
mod sweep;

pub use config::{
    parse_config, InitConfig, InitKind, KineticsConfig, ModelConfig, ModelKind, RunConfig, RunSection,
    SolverSection, SweepSection, VKind,
};
pub use model_check::{check_model, ModelCheck, WRONSKIAN_MARGIN};
pub use output::{fmt_f64, run_single, write_artifacts};
pub use plotnikov::{compare_plotnikov, Gap, PlotnikovComparison, PseudoSummary};
pub use run::{
    simulate, Analysis, Check, ConcentrationSummary, DefectSummary, EnergySummary, IntegrationSummary,
    KineticSummary, MassSummary, RunOutcome, RunReport, WeightSummary, BRANCH_SHARE, SCHEMA_VERSION,
    VARIANCE_RATIO,
};
pub use sweep::{run_sweep, SweepEntry, SweepOutcome, SweepSummary, Trends, DEFECT_FLOOR, RHO_ALLOWANCE};

/// Process exit codes of the command-line front end.
pub mod exit_code {
    pub const PASSED: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const CHECKS_FAILED: i32 = 2;
}

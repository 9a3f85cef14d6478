use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use fastreact::harness::{
    check_model, compare_plotnikov, exit_code, parse_config, run_single, run_sweep, RunConfig,
};

/// Fast-reaction limit laboratory.
#[derive(Parser)]
#[command(name = "fastreact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `section.key = value` config file; defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `run.out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its artifacts.
    Run(Common),
    /// Run the configuration for several ε and fit the defect rate.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ε values, overriding `sweep.eps`.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Compare the ε-system with the pseudo-parabolic equation.
    ComparePlotnikov(Common),
    /// Report the branch structure and the nondegeneracy certificate.
    CheckModel(Common),
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.run.out));
    Ok((cfg, out))
}

fn status(passed: bool) -> i32 {
    if passed {
        exit_code::PASSED
    } else {
        exit_code::CHECKS_FAILED
    }
}

fn written(out: &Path) {
    println!("artifacts: {}", out.display());
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(common) => {
            let (cfg, out) = load(&common)?;
            let report = run_single(&cfg, &out)?;
            for c in &report.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                println!("{mark} {:<28} {:.3e} (limit {:.3e})", c.name, c.value, c.limit);
            }
            println!("defect ‖F(u)−v‖ = {:.6e}", report.apriori.defect);
            written(&out);
            Ok(status(report.passed()))
        }
        Command::Sweep { common, eps } => {
            let (cfg, out) = load(&common)?;
            let eps = eps.unwrap_or_else(|| cfg.sweep.eps.clone());
            let summary = run_sweep(&cfg, &eps, Some(&out), true)?.summary;
            println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "epsilon", "defect", "identity", "binarized", "rho");
            for e in &summary.entries {
                match &e.failure {
                    Some(msg) => println!("{:>10.3e} failed: {msg}", e.epsilon),
                    None => println!(
                        "{:>10.3e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                        e.epsilon, e.defect, e.identity_mean, e.binarization_fraction, e.mean_rho
                    ),
                }
            }
            match (&summary.fit, &summary.fit_note) {
                (Some(f), _) => println!("defect slope {:.4} (95% CI {:.4} to {:.4})", f.slope, f.slope_ci.0, f.slope_ci.1),
                (None, Some(note)) => println!("no fit: {note}"),
                (None, None) => println!("no fit"),
            }
            let t = &summary.trends;
            println!(
                "trends: defect {} identity {} binarization {} rho {}",
                t.defect_decreasing, t.identity_decreasing, t.binarization_decreasing, t.rho_monotone
            );
            written(&out);
            Ok(status(summary.entries.iter().all(|e| e.checks_passed)))
        }
        Command::ComparePlotnikov(common) => {
            let (cfg, out) = load(&common)?;
            let c = compare_plotnikov(&cfg, Some(&out))?;
            println!("‖v − A(w)‖          {:.6e} (‖v‖ = {:.6e})", c.v_minus_a, c.v_norm);
            println!("l vs q              mean {:.4e} sup {:.4e}", c.l_vs_q.mean, c.l_vs_q.sup);
            println!("k∘I vs p            mean {:.4e} sup {:.4e}", c.k_vs_p.mean, c.k_vs_p.sup);
            println!("lhs vs rhs          mean {:.4e} sup {:.4e}", c.lhs_vs_rhs.mean, c.lhs_vs_rhs.sup);
            println!("pseudo-parabolic    ‖w_sys − w_pp‖(T) = {:.6e}", c.pseudo.final_gap);
            written(&out);
            Ok(exit_code::PASSED)
        }
        Command::CheckModel(common) => {
            let (cfg, out) = load(&common)?;
            let m = check_model(&cfg, Some(&out))?;
            let b = &m.branch_structure;
            println!("α₋ = {:.12} α₊ = {:.12}", b.alpha_minus, b.alpha_plus);
            println!("β₋ = {:.12} β₊ = {:.12}", b.beta_minus, b.beta_plus);
            println!("f₋ = {:.12} f₊ = {:.12}", b.f_minus, b.f_plus);
            println!("S(mid) = {:.12?}", m.midpoint_roots);
            println!(
                "Wronskian min on [{:.6}, {:.6}] = {:.6e}",
                m.wronskian_interval[0], m.wronskian_interval[1], m.wronskian_min
            );
            println!("min F' = {:.6} (lift invertible: {})", m.min_slope, m.lift_invertible);
            written(&out);
            Ok(status(m.passed()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code::ERROR as u8)
        }
    }
}

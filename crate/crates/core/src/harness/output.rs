use serde::Serialize;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{simulate, RunConfig, RunOutcome, RunReport};
use crate::{Error, Result};

/// Fixed 17-significant-digit rendering used by every CSV and DAT file.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Snapshot indices of `count` evenly spaced dumps, first and last included.
fn dump_indices(n: usize, count: usize) -> Vec<usize> {
    match count {
        0 => vec![],
        1 => vec![n - 1],
        _ => {
            let mut idx: Vec<usize> = (0..count).map(|k| (k * (n - 1) + (count - 1) / 2) / (count - 1)).collect();
            idx.dedup();
            idx
        }
    }
}

fn nearest_snapshot(times: &[f64], t: f64) -> usize {
    (0..times.len())
        .min_by(|&a, &b| (times[a] - t).abs().total_cmp(&(times[b] - t).abs()))
        .unwrap_or(0)
}

#[derive(Serialize)]
struct Timings<'a> {
    label: &'a str,
    seconds: f64,
}

/// Writes `report.json`, `timings.json`, `diagnostics.csv`, `fields_*.csv`,
/// `plot_*.dat` and, for complete runs, `kinetic_*.csv` and `weights.csv`.
pub fn write_artifacts(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let snaps = outcome.snapshots();
    let grid = &outcome.grid;
    let xs = grid.centers();
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();

    write_json(&dir.join("report.json"), &outcome.report)?;
    write_json(
        &dir.join("timings.json"),
        &Timings {
            label: &outcome.report.label,
            seconds: outcome.seconds,
        },
    )?;

    let rf = &outcome.reaction;
    write_csv(
        &dir.join("diagnostics.csv"),
        &["t", "mass", "energy"],
        snaps.iter().map(|s| {
            vec![
                fmt_f64(s.t),
                fmt_f64(crate::diagnostics::total_mass(s, grid)),
                fmt_f64(crate::diagnostics::energy(s, grid, rf)),
            ]
        }),
    )?;

    let dumps = dump_indices(snaps.len(), outcome.config.run.field_dumps);
    write_csv(
        &dir.join("fields_index.csv"),
        &["file", "t"],
        dumps.iter().map(|&k| vec![format!("fields_{k:06}.csv"), fmt_f64(times[k])]),
    )?;
    for &k in &dumps {
        let s = &snaps[k];
        write_csv(
            &dir.join(format!("fields_{k:06}.csv")),
            &["x", "u", "v"],
            (0..xs.len()).map(|j| vec![fmt_f64(xs[j]), fmt_f64(s.u[j]), fmt_f64(s.v[j])]),
        )?;
    }

    for (n, &t) in outcome.config.run.plot_times.iter().enumerate() {
        let s = &snaps[nearest_snapshot(&times, t)];
        for (name, field) in [("u", &s.u), ("v", &s.v)] {
            let mut w = BufWriter::new(File::create(dir.join(format!("plot_{name}_{n}.dat")))?);
            writeln!(w, "# x {name} at t = {}", fmt_f64(s.t))?;
            for (x, y) in xs.iter().zip(field.iter()) {
                writeln!(w, "{} {}", fmt_f64(*x), fmt_f64(*y))?;
            }
            w.flush()?;
        }
    }

    if let Some(a) = &outcome.analysis {
        let ek = &a.kinetic;
        let centers = ek.xi.centers();
        let m = centers.len();
        write_csv(
            &dir.join("kinetic_pq.csv"),
            &["cell", "xi", "p", "q"],
            (0..ek.n_cells()).flat_map(|c| {
                let centers = &centers;
                (0..m).map(move |k| {
                    vec![
                        c.to_string(),
                        fmt_f64(centers[k]),
                        fmt_f64(ek.p[c * m + k]),
                        fmt_f64(ek.q[c * m + k]),
                    ]
                })
            }),
        )?;
        let d = &a.defect;
        write_csv(
            &dir.join("kinetic_defect.csv"),
            &["cell", "xi", "n1", "n2"],
            (0..ek.n_cells()).flat_map(|c| {
                let centers = &centers;
                (0..m).map(move |k| {
                    vec![
                        c.to_string(),
                        fmt_f64(centers[k]),
                        fmt_f64(d.n1[c * m + k]),
                        fmt_f64(d.n2[c * m + k]),
                    ]
                })
            }),
        )?;
        write_csv(
            &dir.join("weights.csv"),
            &["t_cell", "x_cell", "lambda1", "lambda2", "lambda3", "v_bar", "rho"],
            a.weights.cells.iter().map(|c| {
                vec![
                    c.t_cell.to_string(),
                    c.x_cell.to_string(),
                    fmt_f64(c.lambda[0]),
                    fmt_f64(c.lambda[1]),
                    fmt_f64(c.lambda[2]),
                    fmt_f64(c.v_mean),
                    fmt_f64(c.rho),
                ]
            }),
        )?;
    }
    Ok(())
}

/// [`simulate`] followed by [`write_artifacts`]. An incomplete run writes its
/// partial artifacts and then returns [`Error::Integration`].
pub fn run_single(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let outcome = simulate(cfg)?;
    write_artifacts(&outcome, dir)?;
    match &outcome.report.failure {
        Some(msg) => Err(Error::Integration(msg.clone())),
        None => Ok(outcome.report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dumps_cover_both_ends() {
        assert_eq!(dump_indices(11, 3), vec![0, 5, 10]);
        assert_eq!(dump_indices(5, 9), vec![0, 1, 2, 3, 4]);
        assert_eq!(dump_indices(5, 1), vec![4]);
        assert!(dump_indices(5, 0).is_empty());
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(4.5), "4.5000000000000000e0");
    }
}

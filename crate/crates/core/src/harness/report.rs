//! CSV artifacts of a sweep.

use std::fs::File;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::stats::{correlation_table, tau_scatter, transition_probability, winning_probability};
use super::sweep::RunRecord;
use crate::error::{Error, Result};

pub const RUNS_HEADER: &[&str] = &[
    "dataset",
    "seed",
    "rho_nominal",
    "rho_realized",
    "tau_pre",
    "tau_post",
    "a_clean",
    "a_post",
    "winning_ticket",
    "representatives",
];
pub const WINNING_HEADER: &[&str] = &[
    "dataset",
    "rho",
    "theta",
    "runs",
    "winners",
    "datasets",
    "probability",
];
pub const TRANSITION_HEADER: &[&str] = &["kappa", "conditioned", "transitions", "probability"];
pub const CORRELATION_HEADER: &[&str] = &[
    "dataset", "rho_min", "rho_max", "n", "defined", "r", "p_value",
];
pub const SCATTER_HEADER: &[&str] = &["dataset", "rho", "runs", "tau_pre_mean", "tau_post_mean"];
pub const TIMINGS_HEADER: &[&str] = &["dataset", "rho_nominal", "seed", "wall_time_ms"];

/// Rho range pooled for the correlation summary row.
pub const POOLED_RHO: (f64, f64) = (0.3, 0.7);

/// Plotting stub written next to the CSVs.
pub const PLOT_SCRIPT: &str = r#"# Plots for a wlticket sweep. Requires pandas and matplotlib.
# Run from the report directory: python plot_figures.py
import pandas as pd
import matplotlib.pyplot as plt

win = pd.read_csv("winning_prob.csv")
agg = win[win.dataset == "ALL"].pivot(index="theta", columns="rho", values="probability")
plt.figure()
plt.imshow(agg.values, origin="lower", aspect="auto", vmin=0, vmax=1,
           extent=[agg.columns.min(), agg.columns.max(), agg.index.min(), agg.index.max()])
plt.colorbar(label="P(winning ticket)")
plt.xlabel("pruning ratio rho")
plt.ylabel("tau_pre bucket")
plt.savefig("winning_prob.png", dpi=150)

sc = pd.read_csv("scatter_tau.csv")
plt.figure()
for name, g in sc.groupby("dataset"):
    plt.scatter(g.tau_pre_mean, g.tau_post_mean, label=name)
plt.plot([0, 1], [0, 1], "k--")
plt.xlabel("mean tau_pre")
plt.ylabel("mean tau_post")
plt.legend()
plt.savefig("scatter_tau.png", dpi=150)

runs = pd.read_csv("runs.csv")
plt.figure()
plt.scatter(runs.tau_pre, runs.a_post, c=runs.rho_nominal, s=8)
plt.colorbar(label="rho")
plt.xlabel("tau_pre")
plt.ylabel("test accuracy after training")
plt.savefig("tau_vs_accuracy.png", dpi=150)
"#;

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_runs(records: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    write_csv(path.as_ref(), RUNS_HEADER, records)
}

pub fn read_runs(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut r = csv::Reader::from_reader(file);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != RUNS_HEADER {
        return Err(Error::Parse {
            file: path.to_path_buf(),
            line: 1,
            msg: format!("unexpected header {header:?}"),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[derive(Serialize)]
struct TimingRow<'a> {
    dataset: &'a str,
    rho_nominal: f64,
    seed: u64,
    wall_time_ms: f64,
}

/// Per-cell wall times, kept apart from `runs.csv` so that file stays
/// reproducible byte for byte.
pub fn write_timings(records: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    let rows: Vec<TimingRow> = records
        .iter()
        .map(|r| TimingRow {
            dataset: &r.dataset,
            rho_nominal: r.rho_nominal,
            seed: r.seed,
            wall_time_ms: r.wall_time_ms,
        })
        .collect();
    write_csv(path.as_ref(), TIMINGS_HEADER, &rows)
}

/// Writes `runs.csv`, `winning_prob.csv`, `transition.csv`,
/// `correlation.csv`, `scatter_tau.csv` and `plot_figures.py` into `out_dir`.
/// The rho grid is taken from the records; bucket and kappa grids from
/// `config`. An empty record set yields header-only files.
pub fn emit_reports(
    records: &[RunRecord],
    config: &ExperimentConfig,
    out_dir: impl AsRef<Path>,
) -> Result<()> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut rhos: Vec<f64> = records.iter().map(|r| r.rho_nominal).collect();
    rhos.sort_by(f64::total_cmp);
    rhos.dedup();

    write_runs(records, dir.join("runs.csv"))?;
    let winning = if records.is_empty() {
        Vec::new()
    } else {
        winning_probability(records, &config.theta_grid, config.bucket_epsilon, &rhos)?
    };
    write_csv(&dir.join("winning_prob.csv"), WINNING_HEADER, &winning)?;
    let transitions = if records.is_empty() {
        Vec::new()
    } else {
        transition_probability(records, &config.kappa_grid)
    };
    write_csv(&dir.join("transition.csv"), TRANSITION_HEADER, &transitions)?;
    let correlations = if records.is_empty() {
        Vec::new()
    } else {
        correlation_table(records, &rhos, POOLED_RHO)
    };
    write_csv(
        &dir.join("correlation.csv"),
        CORRELATION_HEADER,
        &correlations,
    )?;
    write_csv(
        &dir.join("scatter_tau.csv"),
        SCATTER_HEADER,
        &tau_scatter(records, &rhos),
    )?;
    std::fs::write(dir.join("plot_figures.py"), PLOT_SCRIPT)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: u64, rho: f64) -> RunRecord {
        RunRecord {
            dataset: "d".into(),
            seed,
            rho_nominal: rho,
            rho_realized: rho + 0.01,
            tau_pre: 0.1 * seed as f64,
            tau_post: 0.05 * seed as f64,
            a_clean: 0.9,
            a_post: 0.8,
            winning_ticket: false,
            representatives: 12,
            wall_time_ms: 3.5,
        }
    }

    #[test]
    fn empty_records_give_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        emit_reports(&[], &ExperimentConfig::default(), dir.path()).unwrap();
        for (file, header) in [
            ("runs.csv", RUNS_HEADER),
            ("winning_prob.csv", WINNING_HEADER),
            ("transition.csv", TRANSITION_HEADER),
            ("correlation.csv", CORRELATION_HEADER),
            ("scatter_tau.csv", SCATTER_HEADER),
        ] {
            let text = std::fs::read_to_string(dir.path().join(file)).unwrap();
            assert_eq!(text, format!("{}\n", header.join(",")), "{file}");
        }
        assert!(dir.path().join("plot_figures.py").exists());
    }

    #[test]
    fn runs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rs: Vec<RunRecord> = (0..5).map(|s| record(s, 0.3)).collect();
        let p = dir.path().join("runs.csv");
        write_runs(&rs, &p).unwrap();
        let back = read_runs(&p).unwrap();
        let strip: Vec<RunRecord> = rs
            .iter()
            .map(|r| RunRecord {
                wall_time_ms: 0.0,
                ..r.clone()
            })
            .collect();
        assert_eq!(back, strip);
        let first = std::fs::read(&p).unwrap();
        write_runs(&back, &p).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), first);
        assert!(matches!(
            read_runs(dir.path().join("missing.csv")),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn golden_schema() {
        let dir = tempfile::tempdir().unwrap();
        let rs = vec![record(1, 0.5), record(2, 0.5), record(3, 0.5)];
        emit_reports(&rs, &ExperimentConfig::default(), dir.path()).unwrap();
        let runs = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        assert_eq!(
            runs.lines().nth(1).unwrap(),
            "d,1,0.5,0.51,0.1,0.05,0.9,0.8,false,12"
        );
        let corr = std::fs::read_to_string(dir.path().join("correlation.csv")).unwrap();
        // a_post is constant, so r is undefined
        assert!(
            corr.lines()
                .nth(1)
                .unwrap()
                .starts_with("d,0.5,0.5,3,false,NaN,NaN"),
            "{corr}"
        );
        write_timings(&rs, dir.path().join("timings.csv")).unwrap();
        let t = std::fs::read_to_string(dir.path().join("timings.csv")).unwrap();
        assert_eq!(t.lines().nth(1).unwrap(), "d,0.5,1,3.5");
    }

    #[test]
    fn unwritable_directory_errors() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        std::fs::write(&file, "x").unwrap();
        assert!(emit_reports(&[], &ExperimentConfig::default(), file.join("sub")).is_err());
    }
}

//! Artifact writers: series.csv, snapshots.csv, summary.txt and plots/*.svg.
//!
//! Numbers use Rust's shortest round-trip formatting, so identical runs give
//! byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crd_core::{RunResult, SeriesRecord, Snapshot};

use crate::svg::{heat_map, line_plot, LineStyle, SvgError};

pub const SERIES_HEADER: [&str; 5] = ["t", "V", "v", "max_abs_u", "boundary_slope"];

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Plot { path: PathBuf, source: SvgError },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv { path: path.to_path_buf(), source }
}

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_series<W: Write>(out: W, series: &[SeriesRecord<f64>]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for r in series {
        w.write_record([num(r.t), num(r.lyapunov), num(r.control), num(r.max_abs_u), num(r.boundary_slope)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshots<W: Write>(out: W, snapshots: &[Snapshot<f64>], nodes: &[f64]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "u"])?;
    for s in snapshots {
        for (x, u) in nodes.iter().zip(&s.values) {
            w.write_record([num(s.t), num(*x), num(*u)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes every artifact of one run into `dir`, creating it if needed.
pub fn write_run(dir: &Path, result: &RunResult<f64>, nodes: &[f64], summary: &str) -> Result<(), OutputError> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots).map_err(io_err(&plots))?;

    let path = dir.join("series.csv");
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    write_series(file, &result.series).map_err(csv_err(&path))?;

    let path = dir.join("snapshots.csv");
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    write_snapshots(std::io::BufWriter::new(file), &result.snapshots, nodes).map_err(csv_err(&path))?;

    let path = dir.join("summary.txt");
    fs::write(&path, summary).map_err(io_err(&path))?;

    let v: Vec<(f64, f64)> = result.series.iter().map(|r| (r.t, r.lyapunov)).collect();
    let c: Vec<(f64, f64)> = result.series.iter().map(|r| (r.t, r.control)).collect();
    let times: Vec<f64> = result.snapshots.iter().map(|s| s.t).collect();
    let frames: Vec<Vec<f64>> = result.snapshots.iter().map(|s| s.values.clone()).collect();
    let plots_out = [
        ("lyapunov.svg", line_plot(&v, &LineStyle { title: "V(t)", x_label: "t", y_label: "V", log_y: true })),
        ("control.svg", line_plot(&c, &LineStyle { title: "v(t)", x_label: "t", y_label: "v", log_y: false })),
        ("state.svg", heat_map(&times, nodes, &frames, "u(t, x)")),
    ];
    for (name, svg) in plots_out {
        let path = plots.join(name);
        let svg = svg.map_err(|source| OutputError::Plot { path: path.clone(), source })?;
        fs::write(&path, svg).map_err(io_err(&path))?;
    }
    Ok(())
}

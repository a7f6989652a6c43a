//! Frequency sweeps over agents and seeds, and their CSV artifacts.
//!
//! A sweep is described by a [`RunConfig`] read from TOML. Each
//! (agent, frequency, seed) cell trains independently with a seed derived
//! from its coordinates, so the merged `runs.csv` does not depend on how
//! many workers ran it or in what order they finished.

mod config;
pub mod records;
mod runner;

pub use config::{RunConfig, SweepSpec, AGENT_IDS};
pub use records::{
    final_performance, mean_ci95, plot_series, read_plot_series, read_runs, read_summary, summarize,
    welch_p_value, write_plot_series, write_runs, write_summary, PlotPoint, RunRecord, SummaryRow,
};
pub use runner::{cell_seed, cells, run_cell, run_sweep, Agent, Cell, SweepOutput};

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Writes `<agent>.dat` under `dir` for every series in `summary`, plus an
/// empty series for each of `extra_agents` that has no rows.
pub fn emit_plotdata(summary: &[SummaryRow], extra_agents: &[String], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut series = plot_series(summary);
    for a in extra_agents {
        if !series.iter().any(|(s, _)| s == a) {
            series.push((a.clone(), Vec::new()));
        }
    }
    let mut paths = Vec::with_capacity(series.len());
    for (agent, points) in &series {
        let path = dir.join(format!("{agent}.dat"));
        let mut w = BufWriter::new(File::create(&path)?);
        write_plot_series(&mut w, agent, points)?;
        std::io::Write::flush(&mut w)?;
        paths.push(path);
    }
    Ok(paths)
}

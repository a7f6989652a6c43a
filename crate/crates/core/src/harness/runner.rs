use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use crate::agent::{train, TrainReport};
use crate::baselines::{arep_train, sac_train};
use crate::envs::{make_env, ControlClock};
use crate::error::{Error, Result};

use super::config::RunConfig;
use super::records::{summarize, write_runs, write_summary, RunRecord, SummaryRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Agent {
    Ctco,
    Sac,
    Arep,
}

impl Agent {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "ctco" => Ok(Agent::Ctco),
            "sac" => Ok(Agent::Sac),
            "arep" => Ok(Agent::Arep),
            other => Err(Error::Config(format!(
                "unknown agent id {other:?}; expected one of {:?}",
                super::AGENT_IDS
            ))),
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Agent::Ctco => "ctco",
            Agent::Sac => "sac",
            Agent::Arep => "arep",
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG seed of one cell, a pure function of its coordinates.
pub fn cell_seed(master_seed: u64, agent: &str, frequency_hz: f64, seed: u64) -> u64 {
    let mut h = splitmix64(master_seed);
    for b in agent.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    h = splitmix64(h ^ frequency_hz.to_bits());
    splitmix64(h ^ seed)
}

/// One (agent, frequency, seed) run of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub agent: Agent,
    pub frequency_hz: f64,
    pub seed: u64,
}

impl Cell {
    fn file_name(&self) -> String {
        format!("{}_{}hz_seed{}.csv", self.agent.id(), self.frequency_hz, self.seed)
    }
}

/// All cells of a sweep in merge order: agent id, frequency, seed.
pub fn cells(cfg: &RunConfig) -> Result<Vec<Cell>> {
    let mut freqs = cfg.sweep.frequencies_hz.clone();
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();
    let mut agents = cfg.sweep.agents.clone();
    agents.sort();
    agents.dedup();
    let mut out = Vec::with_capacity(cfg.sweep.n_cells());
    for a in &agents {
        let agent = Agent::from_id(a)?;
        for &f in &freqs {
            for seed in 0..cfg.sweep.seeds as u64 {
                out.push(Cell {
                    agent,
                    frequency_hz: f,
                    seed,
                });
            }
        }
    }
    Ok(out)
}

pub fn run_cell(cfg: &RunConfig, cell: &Cell) -> Result<Vec<RunRecord>> {
    let env = make_env::<f64>(&cfg.sweep.env, &cfg.env)?;
    let clock = ControlClock::new(cell.frequency_hz)?;
    let seed = cell_seed(cfg.sweep.master_seed, cell.agent.id(), cell.frequency_hz, cell.seed);
    let budget = cfg.sweep.budget_task_seconds;
    let report: TrainReport = match cell.agent {
        Agent::Ctco => train(&cfg.ctco, &env, &clock, seed, budget)?,
        Agent::Sac => sac_train(&cfg.sac, &env, &clock, seed, budget)?,
        Agent::Arep => arep_train(&cfg.arep, &env, &clock, seed, budget)?,
    };
    Ok(report
        .episodes
        .into_iter()
        .map(|e| RunRecord {
            agent: cell.agent.id().to_string(),
            env: cfg.sweep.env.clone(),
            frequency_hz: cell.frequency_hz,
            seed: cell.seed,
            episode: e.episode,
            task_time: e.task_time,
            discounted_return: e.discounted_return,
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub runs_path: PathBuf,
    pub summary_path: PathBuf,
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    std::io::Write::flush(&mut w)?;
    Ok(())
}

/// Runs every cell on a pool of `cfg.sweep.workers` threads.
///
/// Workers only compute; this thread writes each finished cell to
/// `out/cells/` as it arrives, then the merged `runs.csv` and `summary.csv`.
pub fn run_sweep(cfg: &RunConfig, out: &Path) -> Result<SweepOutput> {
    cfg.validate()?;
    let cells = cells(cfg)?;
    let cell_dir = out.join("cells");
    fs::create_dir_all(&cell_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.sweep.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let (tx, rx) = mpsc::channel();
    let mut results: Vec<Option<Vec<RunRecord>>> = vec![None; cells.len()];
    let mut first_err = None;
    pool.in_place_scope(|scope| {
        for (i, cell) in cells.iter().enumerate() {
            let tx = tx.clone();
            scope.spawn(move |_| {
                // the receiver outlives the scope, so send cannot fail
                let _ = tx.send((i, run_cell(cfg, cell)));
            });
        }
        drop(tx);
        for (i, res) in rx.iter() {
            match res.and_then(|rows| {
                write_file(&cell_dir.join(cells[i].file_name()), |w| write_runs(w, &rows))?;
                Ok(rows)
            }) {
                Ok(rows) => results[i] = Some(rows),
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
    });
    if let Some(e) = first_err {
        return Err(e);
    }

    let records: Vec<RunRecord> = results.into_iter().flatten().flatten().collect();
    let summary = summarize(&records);
    let runs_path = out.join("runs.csv");
    let summary_path = out.join("summary.csv");
    write_file(&runs_path, |w| write_runs(w, &records))?;
    write_file(&summary_path, |w| write_summary(w, &summary))?;
    Ok(SweepOutput {
        runs_path,
        summary_path,
        records,
        summary,
    })
}

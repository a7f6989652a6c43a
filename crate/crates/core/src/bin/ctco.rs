use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ctco::agent::check_actor_gradient;
use ctco::diffnet::gradcheck::check_random_net;
use ctco::harness::{self, RunConfig};

#[derive(Parser)]
#[command(name = "ctco", version, about = "Continuous-option agents across control frequencies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (agent, frequency, seed) cell of a sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `sweep.output` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        master_seed: Option<u64>,
    },
    /// Recompute summary.csv from a runs.csv.
    Summarize {
        runs: PathBuf,
        #[arg(long, default_value = "summary.csv")]
        out: PathBuf,
    },
    /// Write one plot series file per agent from a summary.csv.
    Plotdata {
        summary: PathBuf,
        #[arg(long, default_value = "plotdata")]
        out: PathBuf,
        /// Agents that get a file even without summary rows.
        #[arg(long, value_delimiter = ',')]
        agents: Vec<String>,
    },
    /// Check analytic network and actor gradients against finite differences.
    Gradcheck {
        #[arg(long, default_value_t = 100)]
        nets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep {
            config,
            out,
            workers,
            master_seed,
        } => {
            let mut cfg = RunConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            if let Some(w) = workers {
                cfg.sweep.workers = w;
            }
            if let Some(s) = master_seed {
                cfg.sweep.master_seed = s;
            }
            let out = out
                .or_else(|| cfg.sweep.output.clone())
                .unwrap_or_else(|| PathBuf::from("sweep-out"));
            eprintln!(
                "{} cells on {} worker(s) -> {}",
                cfg.sweep.n_cells(),
                cfg.sweep.workers,
                out.display()
            );
            let res = harness::run_sweep(&cfg, &out)?;
            for r in &res.summary {
                println!(
                    "{:<6} {:>8} Hz  J = {:.4} ± {:.4}  (n = {})",
                    r.agent, r.frequency_hz, r.mean_j, r.ci_half_width, r.n_seeds
                );
            }
            Ok(true)
        }
        Command::Summarize { runs, out } => {
            let records = harness::read_runs(File::open(&runs).with_context(|| format!("opening {}", runs.display()))?)
                .with_context(|| format!("reading {}", runs.display()))?;
            let summary = harness::summarize(&records);
            harness::write_summary(BufWriter::new(File::create(&out)?), &summary)?;
            Ok(true)
        }
        Command::Plotdata { summary, out, agents } => {
            let rows = harness::read_summary(File::open(&summary).with_context(|| format!("opening {}", summary.display()))?)
                .with_context(|| format!("reading {}", summary.display()))?;
            for p in harness::emit_plotdata(&rows, &agents, &out)? {
                println!("{}", p.display());
            }
            Ok(true)
        }
        Command::Gradcheck { nets, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = (0.0f64, 0.0f64);
            for _ in 0..nets {
                let c = check_random_net(&mut rng, 1e-5);
                worst = (worst.0.max(c.param_error), worst.1.max(c.input_error));
            }
            let net_ok = worst.0 < 1e-4 && worst.1 < 1e-4;
            println!(
                "diffnet: {nets} nets, max param error {:.2e}, max input error {:.2e}: {}",
                worst.0,
                worst.1,
                if net_ok { "ok" } else { "FAILED" }
            );
            let actor = check_actor_gradient(&mut rng, 4, 1e-5)?;
            let actor_ok = actor < 1e-3;
            println!(
                "actor: max relative error {actor:.2e}: {}",
                if actor_ok { "ok" } else { "FAILED" }
            );
            Ok(net_ok && actor_ok)
        }
    }
}

//! Versioned CSV files for per-episode records and per-cell summaries.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub const RUNS_SCHEMA: &str = "# ctco-runs v1";
pub const SUMMARY_SCHEMA: &str = "# ctco-summary v1";

/// One finished episode of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub agent: String,
    pub env: String,
    pub frequency_hz: f64,
    pub seed: u64,
    pub episode: usize,
    pub task_time: f64,
    pub discounted_return: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub agent: String,
    pub env: String,
    pub frequency_hz: f64,
    pub n_seeds: usize,
    pub mean_j: f64,
    pub ci_half_width: f64,
}

fn write_csv<W: Write, S: Serialize>(mut out: W, schema: &str, rows: &[S]) -> Result<()> {
    writeln!(out, "{schema}")?;
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize + 1).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn read_csv<R: Read, D: for<'de> Deserialize<'de>>(input: R, schema: &str, header: &[&str]) -> Result<Vec<D>> {
    let mut input = BufReader::new(input);
    let mut first = String::new();
    input.read_line(&mut first)?;
    let first = first.trim_end();
    if first != schema {
        return Err(Error::SchemaVersion {
            expected: schema.to_string(),
            found: first.to_string(),
        });
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = r.headers().map_err(csv_error)?.clone();
    let found: Vec<String> = headers.iter().map(String::from).collect();
    if found != header {
        return Err(Error::Parse {
            line: 2,
            message: format!("expected columns {header:?}, found {found:?}"),
        });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        // +1 for the schema line above the csv stream
        let line = rec.position().map(|p| p.line() as usize + 1).unwrap_or(0);
        let row = rec.deserialize(Some(&headers)).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

const RUN_COLUMNS: [&str; 7] = [
    "agent",
    "env",
    "frequency_hz",
    "seed",
    "episode",
    "task_time",
    "discounted_return",
];
const SUMMARY_COLUMNS: [&str; 6] = ["agent", "env", "frequency_hz", "n_seeds", "mean_j", "ci_half_width"];

pub fn write_runs<W: Write>(out: W, rows: &[RunRecord]) -> Result<()> {
    write_csv(out, RUNS_SCHEMA, rows)
}

pub fn read_runs<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    read_csv(input, RUNS_SCHEMA, &RUN_COLUMNS)
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    write_csv(out, SUMMARY_SCHEMA, rows)
}

pub fn read_summary<R: Read>(input: R) -> Result<Vec<SummaryRow>> {
    read_csv(input, SUMMARY_SCHEMA, &SUMMARY_COLUMNS)
}

/// Mean of the last 10% of a run's episodes (at least one).
pub fn final_performance(returns: &[f64]) -> Option<f64> {
    if returns.is_empty() {
        return None;
    }
    let n = returns.len().div_ceil(10);
    let tail = &returns[returns.len() - n..];
    Some(tail.iter().sum::<f64>() / n as f64)
}

/// Sample mean and 95% t-interval half-width. One sample gives width 0.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    (mean, t * (var / n as f64).sqrt())
}

/// Two-sided Welch t-test for a difference in means. Returns the p-value.
pub fn welch_p_value(a: &[f64], b: &[f64]) -> f64 {
    let stats = |xs: &[f64]| {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let ((na, ma, va), (nb, mb, vb)) = (stats(a), stats(b));
    let (sa, sb) = (va / na, vb / nb);
    if sa + sb == 0.0 {
        return if ma == mb { 1.0 } else { 0.0 };
    }
    let t = (ma - mb) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    2.0 * dist.cdf(-t.abs())
}

fn freq_key(f: f64) -> u64 {
    // positive floats order like their bit patterns
    f.to_bits()
}

/// Per (agent, env, frequency): mean over seeds of each run's final
/// performance. Rows are ordered by agent, env, then frequency.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut runs: BTreeMap<(&str, &str, u64), BTreeMap<u64, Vec<(usize, f64)>>> = BTreeMap::new();
    for r in records {
        runs.entry((&r.agent, &r.env, freq_key(r.frequency_hz)))
            .or_default()
            .entry(r.seed)
            .or_default()
            .push((r.episode, r.discounted_return));
    }
    let mut rows = Vec::new();
    for ((agent, env, f), seeds) in runs {
        let finals: Vec<f64> = seeds
            .into_values()
            .filter_map(|mut eps| {
                eps.sort_by_key(|e| e.0);
                final_performance(&eps.iter().map(|e| e.1).collect::<Vec<_>>())
            })
            .collect();
        let (mean_j, ci_half_width) = mean_ci95(&finals);
        rows.push(SummaryRow {
            agent: agent.to_string(),
            env: env.to_string(),
            frequency_hz: f64::from_bits(f),
            n_seeds: finals.len(),
            mean_j,
            ci_half_width,
        });
    }
    rows
}

/// One point of a plotted series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotPoint {
    pub frequency_hz: f64,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Splits a summary into per-agent series, in order of first appearance.
pub fn plot_series(summary: &[SummaryRow]) -> Vec<(String, Vec<PlotPoint>)> {
    let mut out: Vec<(String, Vec<PlotPoint>)> = Vec::new();
    for r in summary {
        let p = PlotPoint {
            frequency_hz: r.frequency_hz,
            mean: r.mean_j,
            ci_low: r.mean_j - r.ci_half_width,
            ci_high: r.mean_j + r.ci_half_width,
        };
        match out.iter_mut().find(|(a, _)| *a == r.agent) {
            Some((_, pts)) => pts.push(p),
            None => out.push((r.agent.clone(), vec![p])),
        }
    }
    out
}

/// Whitespace-delimited series: a `# agent=<id>` header, then
/// `frequency mean ci_low ci_high` rows.
pub fn write_plot_series<W: Write>(mut out: W, agent: &str, points: &[PlotPoint]) -> Result<()> {
    writeln!(out, "# agent={agent}")?;
    for p in points {
        writeln!(out, "{} {} {} {}", p.frequency_hz, p.mean, p.ci_low, p.ci_high)?;
    }
    Ok(())
}

pub fn read_plot_series<R: Read>(input: R) -> Result<(String, Vec<PlotPoint>)> {
    let mut agent = None;
    let mut points = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        if let Some(rest) = line.strip_prefix("# agent=") {
            agent = Some(rest.to_string());
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let nums = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| parse_err(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if nums.len() != 4 {
            return Err(parse_err(format!("expected 4 columns, found {}", nums.len())));
        }
        points.push(PlotPoint {
            frequency_hz: nums[0],
            mean: nums[1],
            ci_low: nums[2],
            ci_high: nums[3],
        });
    }
    let agent = agent.ok_or(Error::Parse {
        line: 1,
        message: "missing `# agent=` header".into(),
    })?;
    Ok((agent, points))
}

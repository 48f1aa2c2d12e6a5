//! Experiment plumbing behind the command line: training runs and their
//! artifacts, cross-play matrices and inspection reports.

mod eval;
mod inspect;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{cmd_eval, EvalMatrix};
pub use inspect::{cmd_inspect, probe_firings, InspectReport, ProbeFirings};

use crate::dsl::{parse_program, DslError, Program};
use crate::sim::{GridLayout, LayoutError};
use crate::synth::{train, GaConfig, Mode, TrainError, TrainingRun};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Program { path: PathBuf, source: DslError },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("missing artifact {0}")]
    Missing(PathBuf),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn read(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(HarnessError::Missing(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(io_err(path))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Reads a TOML file with any subset of the [`GaConfig`] fields.
pub fn load_config(path: &Path) -> Result<GaConfig> {
    let text = read(path)?;
    let cfg: GaConfig = toml::from_str(&text).map_err(|e| HarnessError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.validate().map_err(|message| HarnessError::Config {
        path: path.to_path_buf(),
        message,
    })?;
    Ok(cfg)
}

pub fn load_program(path: &Path) -> Result<Program> {
    let text = read(path)?;
    parse_program(&text).map_err(|source| HarnessError::Program {
        path: path.to_path_buf(),
        source,
    })
}

/// `summary.toml` of a training directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub layout: String,
    pub mode: Mode,
    pub seed: u64,
    pub final_reward: f64,
    pub best_id: usize,
    pub best_train_reward: f64,
    pub best_complexity: usize,
    pub archive_size: usize,
    pub front_size: usize,
    pub refreshes: Vec<usize>,
    pub history: Vec<f64>,
}

#[derive(Serialize)]
struct ArchiveLine<'a> {
    id: usize,
    iteration: usize,
    train_reward: f64,
    complexity: usize,
    eval_reward: Option<f64>,
    program: &'a str,
}

pub const ARTIFACTS: [&str; 11] = [
    "config.toml",
    "summary.toml",
    "layout.txt",
    "rules.txt",
    "preconditions.txt",
    "graph.dot",
    "buffer.ndjson",
    "archive.jsonl",
    "pareto.csv",
    "best.ktp",
    "report.txt",
];

/// Runs the full pipeline and writes every artifact into `out`.
pub fn cmd_train(
    layout: &GridLayout,
    mode: Mode,
    cfg: &GaConfig,
    out: &Path,
) -> Result<(TrainingRun, TrainSummary)> {
    let run = train(Arc::new(layout.clone()), mode, cfg)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let s = &run.search;
    let best = &s.archive[run.best];
    let summary = TrainSummary {
        layout: layout.name.clone(),
        mode,
        seed: cfg.seed,
        final_reward: run.final_reward,
        best_id: best.id,
        best_train_reward: best.train_reward,
        best_complexity: best.complexity,
        archive_size: s.archive.len(),
        front_size: run.front.len(),
        refreshes: s.refreshes.clone(),
        history: s.history.clone(),
    };

    let toml_err = |e: toml::ser::Error| HarnessError::Invalid(e.to_string());
    write(
        &out.join("config.toml"),
        &toml::to_string(cfg).map_err(toml_err)?,
    )?;
    write(
        &out.join("summary.toml"),
        &toml::to_string(&summary).map_err(toml_err)?,
    )?;
    write(&out.join("layout.txt"), &layout.to_ascii())?;
    write(&out.join("rules.txt"), &s.rules.to_text())?;
    write(&out.join("preconditions.txt"), &s.table.to_text())?;
    write(&out.join("graph.dot"), &s.graph.to_dot())?;
    write(&out.join("best.ktp"), &best.program.to_string())?;

    let path = out.join("buffer.ndjson");
    let f = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(f);
    s.buffer
        .write_ndjson(&mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;

    let mut archive = String::new();
    for c in &s.archive {
        let text = c.text();
        let line = ArchiveLine {
            id: c.id,
            iteration: c.iteration,
            train_reward: c.train_reward,
            complexity: c.complexity,
            eval_reward: c.eval_reward,
            program: &text,
        };
        archive.push_str(&serde_json::to_string(&line).expect("plain data"));
        archive.push('\n');
    }
    write(&out.join("archive.jsonl"), &archive)?;

    let mut pareto = String::from("id,train_reward,complexity,eval_reward\n");
    for &i in &run.front {
        let c = &s.archive[i];
        let eval = c.eval_reward.map(|r| r.to_string()).unwrap_or_default();
        pareto.push_str(&format!(
            "{},{},{},{}\n",
            c.id, c.train_reward, c.complexity, eval
        ));
    }
    write(&out.join("pareto.csv"), &pareto)?;
    write(
        &out.join("report.txt"),
        &train_report(&summary, &best.program),
    )?;
    Ok((run, summary))
}

pub fn train_report(summary: &TrainSummary, best: &Program) -> String {
    format!(
        "layout {}\nmode {}\nseed {}\nprograms evaluated {}\npareto front {}\nrefreshes {:?}\nbest train reward {:.2} (complexity {})\nfinal reward {:.2}\n\n{}",
        summary.layout,
        summary.mode,
        summary.seed,
        summary.archive_size,
        summary.front_size,
        summary.refreshes,
        summary.best_train_reward,
        summary.best_complexity,
        summary.final_reward,
        best
    )
}

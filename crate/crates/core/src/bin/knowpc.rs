use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use knowpc::harness::{
    self, cmd_eval, cmd_inspect, cmd_train, load_config, load_program, HarnessError,
};
use knowpc::server::{serve, PlayServer, ServeConfig};
use knowpc::synth::{GaConfig, Mode};
use knowpc::GridLayout;

#[derive(Parser)]
#[command(
    name = "knowpc",
    version,
    about = "Synthesize and evaluate programmatic cooking policies"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Learn a program on one layout and write the experiment artifacts.
    Train {
        /// Bundled layout name or path to a .layout file.
        #[arg(long)]
        layout: String,
        #[arg(long, default_value = "knowpc")]
        mode: Mode,
        /// Overrides the seed from --config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// TOML file with any GA settings to override.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Cross-play matrix of programs on one or more layouts.
    Eval {
        #[arg(long, num_args = 1.., required = true)]
        programs: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        layouts: Vec<String>,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for `<layout>.csv` and `<layout>.normalized.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a training directory.
    Inspect { dir: PathBuf },
    /// Play one chef in the browser or any WebSocket client.
    Serve {
        #[arg(long)]
        layout: String,
        #[arg(long)]
        program: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = 150)]
        tick_ms: u64,
        /// Chef the human controls (1 or 2).
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        human: u8,
        #[arg(long)]
        replay_dir: Option<PathBuf>,
    },
}

fn program_names(paths: &[PathBuf]) -> Vec<String> {
    let stems: Vec<String> = paths
        .iter()
        .map(|p| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
        .collect();
    let unique = stems
        .iter()
        .enumerate()
        .all(|(i, s)| !s.is_empty() && !stems[..i].contains(s));
    if unique {
        stems
    } else {
        paths.iter().map(|p| p.display().to_string()).collect()
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.cmd {
        Cmd::Train {
            layout,
            mode,
            seed,
            out,
            config,
        } => {
            let mut cfg = match config {
                Some(p) => load_config(&p)?,
                None => GaConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let layout = GridLayout::resolve(&layout)?;
            let (run, summary) = cmd_train(&layout, mode, &cfg, &out)?;
            print!("{}", harness::train_report(&summary, run.best_program()));
            println!("\nartifacts in {}", out.display());
        }
        Cmd::Eval {
            programs,
            layouts,
            episodes,
            seed,
            out,
        } => {
            let names = program_names(&programs);
            let progs = programs
                .iter()
                .zip(names)
                .map(|(p, n)| load_program(p).map(|prog| (n, prog)))
                .collect::<Result<Vec<_>, _>>()?;
            let layouts = layouts
                .iter()
                .map(|l| GridLayout::resolve(l))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(dir) = &out {
                std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
                    path: dir.clone(),
                    source,
                })?;
            }
            for m in cmd_eval(&progs, &layouts, episodes, seed) {
                println!("# {}\n{}", m.layout, m.to_csv());
                if let Some(dir) = &out {
                    for (file, text) in [
                        (format!("{}.csv", m.layout), m.to_csv()),
                        (
                            format!("{}.normalized.csv", m.layout),
                            m.normalized().to_csv(),
                        ),
                    ] {
                        let path = dir.join(file);
                        std::fs::write(&path, text)
                            .map_err(|source| HarnessError::Io { path, source })?;
                    }
                }
            }
        }
        Cmd::Inspect { dir } => print!("{}", cmd_inspect(&dir)?.render()),
        Cmd::Serve {
            layout,
            program,
            port,
            tick_ms,
            human,
            replay_dir,
        } => {
            let layout = GridLayout::resolve(&layout)?;
            let program = load_program(&program)?;
            let cfg = ServeConfig {
                tick_ms,
                human_chef: usize::from(human - 1),
                replay_dir,
                ..ServeConfig::default()
            };
            let app = PlayServer::new(layout, program, cfg);
            let rt =
                tokio::runtime::Runtime::new().map_err(|e| HarnessError::Invalid(e.to_string()))?;
            rt.block_on(serve(app, SocketAddr::from(([127, 0, 0, 1], port))))
                .map_err(|e| HarnessError::Invalid(format!("port {port}: {e}")))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use super::{load_config, load_program, read, HarnessError, Result, TrainSummary};
use crate::dsl::Program;
use crate::reasoner::PreconditionTable;
use crate::rollout::{mix_seed, run_episode_with, Decision, ProgramPolicy};
use crate::sim::GridLayout;

const PROBE_STREAM: u64 = 0x9A0B_E000;

/// How often each module fired for chef 1 in one greedy self-play episode.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProbeFirings {
    pub per_module: Vec<u64>,
    /// Fired modules whose target was unreachable (counted in `per_module`
    /// too).
    pub unreachable: u64,
    pub fallback: u64,
    pub steps: u64,
    pub reward: u32,
}

pub fn probe_firings(
    layout: &Arc<GridLayout>,
    program: &Program,
    seed: u64,
    horizon: u32,
) -> ProbeFirings {
    let mut f = ProbeFirings {
        per_module: vec![0; program.len()],
        ..ProbeFirings::default()
    };
    let policy = ProgramPolicy::greedy(program);
    let out = run_episode_with(
        layout,
        [&policy, &policy],
        seed,
        horizon,
        None,
        |chef, d| {
            if chef != 0 {
                return;
            }
            f.steps += 1;
            match d {
                Decision::Module {
                    index, reachable, ..
                } => {
                    f.per_module[index] += 1;
                    if !reachable {
                        f.unreachable += 1;
                    }
                }
                Decision::Fallback => f.fallback += 1,
                Decision::Explore => unreachable!("greedy policy never explores"),
            }
        },
    );
    f.reward = out.reward;
    f
}

#[derive(Debug, Clone, PartialEq)]
pub struct InspectReport {
    pub summary: TrainSummary,
    pub table: PreconditionTable,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    /// `(id, train_reward, complexity)` rows of `pareto.csv`.
    pub front: Vec<(usize, f64, usize)>,
    pub best: Program,
    pub probe: ProbeFirings,
}

fn dot_counts(dot: &str) -> Result<(usize, usize)> {
    let bad = |l: &str| HarnessError::Invalid(format!("graph.dot: unexpected line {l:?}"));
    let mut lines = dot.lines().map(str::trim);
    if lines.next() != Some("digraph transitions {") {
        return Err(HarnessError::Invalid(
            "graph.dot: missing digraph header".into(),
        ));
    }
    let mut nodes = HashSet::new();
    let mut edges = 0;
    for l in lines {
        if l == "}" || l.starts_with("rankdir") || l.is_empty() {
            continue;
        }
        let body = l.strip_suffix(';').ok_or_else(|| bad(l))?;
        if let Some((a, b)) = body.split_once(" -> ") {
            if !nodes.contains(a) || !nodes.contains(b) {
                return Err(bad(l));
            }
            edges += 1;
        } else {
            let (id, _) = body.split_once(" [").ok_or_else(|| bad(l))?;
            nodes.insert(id.to_string());
        }
    }
    Ok((nodes.len(), edges))
}

fn pareto_rows(csv: &str) -> Result<Vec<(usize, f64, usize)>> {
    let bad = |l: &str| HarnessError::Invalid(format!("pareto.csv: bad row {l:?}"));
    csv.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 4 {
                return Err(bad(l));
            }
            Ok((
                f[0].parse().map_err(|_| bad(l))?,
                f[1].parse().map_err(|_| bad(l))?,
                f[2].parse().map_err(|_| bad(l))?,
            ))
        })
        .collect()
}

/// Loads a training directory and replays the best program once.
pub fn cmd_inspect(dir: &Path) -> Result<InspectReport> {
    let summary: TrainSummary = toml::from_str(&read(&dir.join("summary.toml"))?)
        .map_err(|e| HarnessError::Invalid(format!("summary.toml: {e}")))?;
    let cfg = load_config(&dir.join("config.toml"))?;
    let layout = Arc::new(GridLayout::parse(
        &summary.layout,
        &read(&dir.join("layout.txt"))?,
    )?);
    let table = PreconditionTable::from_text(&read(&dir.join("preconditions.txt"))?)
        .map_err(|e| HarnessError::Invalid(format!("preconditions.txt: {e}")))?;
    let (graph_nodes, graph_edges) = dot_counts(&read(&dir.join("graph.dot"))?)?;
    let front = pareto_rows(&read(&dir.join("pareto.csv"))?)?;
    let best = load_program(&dir.join("best.ktp"))?;
    let probe = probe_firings(
        &layout,
        &best,
        mix_seed(cfg.seed ^ PROBE_STREAM, 0),
        cfg.horizon,
    );
    Ok(InspectReport {
        summary,
        table,
        graph_nodes,
        graph_edges,
        front,
        best,
        probe,
    })
}

impl InspectReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "layout {}  mode {}  seed {}",
            self.summary.layout, self.summary.mode, self.summary.seed
        );
        let _ = writeln!(s, "final reward {:.2}\n", self.summary.final_reward);
        s.push_str("preconditions\n");
        if self.table.is_empty() {
            s.push_str("  (none)\n");
        }
        for line in self.table.to_text().lines() {
            let _ = writeln!(s, "  {line}");
        }
        let _ = writeln!(
            s,
            "\ntransition graph: {} nodes, {} edges\n",
            self.graph_nodes, self.graph_edges
        );
        s.push_str("pareto front\n  id,train_reward,complexity\n");
        for (id, r, c) in &self.front {
            let _ = writeln!(s, "  {id},{r},{c}");
        }
        let _ = writeln!(
            s,
            "\nbest program (probe reward {}, chef 1 firings)",
            self.probe.reward
        );
        for (i, m) in self.best.modules.iter().enumerate() {
            let _ = writeln!(s, "  [{:>4}] {}", self.probe.per_module[i], m);
        }
        let _ = writeln!(s, "  [{:>4}] RandomAct", self.probe.fallback);
        let _ = writeln!(s, "  unreachable targets {}", self.probe.unreachable);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;

    #[test]
    fn firings_account_for_every_step() {
        let layout = Arc::new(GridLayout::bundled("cramped_room").unwrap());
        let p = parse_program(include_str!("../../../../fixtures/listing1.ktp")).unwrap();
        let f = probe_firings(&layout, &p, 5, 400);
        assert_eq!(f.steps, 400);
        assert_eq!(f.per_module.iter().sum::<u64>(), 400 - f.fallback);
        assert!(f.reward > 0);
    }

    #[test]
    fn dot_parse_back() {
        assert_eq!(dot_counts("digraph transitions {\n  n0 [label=\"a\"];\n  n1 [label=\"b\", shape=box];\n  n0 -> n1;\n}\n").unwrap(), (2, 1));
        assert!(dot_counts("digraph transitions {\n  n0 -> n1;\n}\n").is_err());
    }
}

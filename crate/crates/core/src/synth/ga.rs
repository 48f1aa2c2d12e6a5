use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{
    cross_evaluate, crossover, pareto_front, random_program, Candidate, CrossEval, GaConfig, Mode,
};
use crate::dsl::Program;
use crate::extractor::{MiningConfig, RuleSets, TransitionBuffer};
use crate::reasoner::{reason, PreconditionTable, TransitionGraph};
use crate::rollout::{mix_seed, run_episode, self_play, ProgramPolicy, RandomPolicy};
use crate::sim::GridLayout;

const BOOTSTRAP_STREAM: u64 = 0xB007_57A9;
const EVAL_STREAM: u64 = 0xE7A1_0000;
const FINAL_STREAM: u64 = 0xF1A1_0000;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("mode {0} needs preconditions but no rules were mined")]
    EmptyTable(Mode),
}

/// State of one genetic search: the growing transition buffer, current
/// rules and preconditions, and the archive of every evaluated program.
pub struct GaSearch {
    pub layout: Arc<GridLayout>,
    pub mode: Mode,
    pub cfg: GaConfig,
    pub buffer: TransitionBuffer,
    pub rules: RuleSets,
    pub graph: TransitionGraph,
    pub table: PreconditionTable,
    /// Every distinct evaluated program, in discovery order.
    pub archive: Vec<Candidate>,
    /// Best train reward after generation 0 and after each iteration.
    pub history: Vec<f64>,
    /// Iterations at which a refresh changed the precondition table.
    pub refreshes: Vec<usize>,
    /// Each table with the iteration from which it applied.
    pub tables: Vec<(usize, PreconditionTable)>,
    seen: HashMap<String, usize>,
    elites: Vec<usize>,
    rng: ChaCha8Rng,
    evals: u64,
}

impl GaSearch {
    /// Runs the random bootstrap episodes and the first extraction.
    pub fn new(layout: Arc<GridLayout>, mode: Mode, cfg: GaConfig) -> Self {
        let mut buffer = TransitionBuffer::new();
        for e in 0..cfg.bootstrap_episodes as u64 {
            let seed = mix_seed(cfg.seed ^ BOOTSTRAP_STREAM, e);
            run_episode(
                &layout,
                [&RandomPolicy, &RandomPolicy],
                seed,
                cfg.horizon,
                Some(&mut buffer),
            );
        }
        let mut s = Self::with_table(layout, mode, cfg, PreconditionTable::default());
        s.buffer = buffer;
        s.remine();
        s
    }

    /// A search over a fixed table with an empty buffer and no bootstrap.
    pub fn with_table(
        layout: Arc<GridLayout>,
        mode: Mode,
        cfg: GaConfig,
        table: PreconditionTable,
    ) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        GaSearch {
            layout,
            mode,
            cfg,
            buffer: TransitionBuffer::new(),
            rules: RuleSets::default(),
            graph: TransitionGraph::default(),
            table,
            archive: Vec::new(),
            history: Vec::new(),
            refreshes: Vec::new(),
            tables: Vec::new(),
            seen: HashMap::new(),
            elites: Vec::new(),
            rng,
            evals: 0,
        }
    }

    fn mining(&self) -> MiningConfig {
        MiningConfig {
            delta: self.cfg.delta,
            min_support: self.cfg.min_support,
        }
    }

    /// Re-mines the buffer; returns whether the table changed.
    fn remine(&mut self) -> bool {
        self.rules = RuleSets::mine(&self.buffer, self.mining());
        let (graph, table) = reason(&self.rules, self.mode.reasoner());
        self.graph = graph;
        let changed = table != self.table;
        self.table = table;
        changed
    }

    /// Archive index of `program`, evaluating it on first sight.
    pub fn evaluate(&mut self, program: Program, iteration: usize) -> usize {
        let text = program.to_string();
        if let Some(&i) = self.seen.get(&text) {
            return i;
        }
        let policy = ProgramPolicy {
            program: &program,
            epsilon: self.cfg.epsilon,
        };
        let seed = mix_seed(self.cfg.seed ^ EVAL_STREAM, self.evals);
        self.evals += 1;
        let reward = self_play(
            &self.layout,
            &policy,
            self.cfg.episodes_per_eval,
            seed,
            self.cfg.horizon,
            Some(&mut self.buffer),
        );
        let id = self.archive.len();
        self.archive.push(Candidate {
            complexity: program.complexity(),
            program,
            train_reward: reward,
            eval_reward: None,
            id,
            iteration,
        });
        self.seen.insert(text, id);
        id
    }

    /// Archive indices ordered best first: higher train reward, then lower
    /// complexity, then earlier discovery.
    pub fn ranked(&self, mut idx: Vec<usize>) -> Vec<usize> {
        idx.sort_by(|&a, &b| {
            let (x, y) = (&self.archive[a], &self.archive[b]);
            y.train_reward
                .total_cmp(&x.train_reward)
                .then(x.complexity.cmp(&y.complexity))
                .then(x.id.cmp(&y.id))
        });
        idx.dedup();
        idx
    }

    fn select(&mut self, mut pool: Vec<usize>) {
        pool.sort_unstable();
        pool.dedup();
        let mut ranked = self.ranked(pool);
        ranked.truncate(self.cfg.population);
        self.elites = ranked;
        self.history.push(self.archive[self.elites[0]].train_reward);
    }

    fn random_batch(&mut self, n: usize, iteration: usize) -> Vec<usize> {
        (0..n)
            .map(|_| {
                let p = random_program(&self.table, &self.cfg, &mut self.rng);
                self.evaluate(p, iteration)
            })
            .collect()
    }

    pub fn initialize(&mut self) {
        self.tables = vec![(0, self.table.clone())];
        let pool = self.random_batch(self.cfg.init_population, 0);
        self.select(pool);
    }

    pub fn iterate(&mut self, iteration: usize) {
        let mut pool = self.elites.clone();
        let r = self.cfg.refresh_every;
        if self.mode != Mode::Pc && r > 0 && (iteration - 1) % r == 0 && self.remine() {
            self.refreshes.push(iteration);
            self.tables.push((iteration, self.table.clone()));
            pool.extend(self.random_batch(self.cfg.init_population, iteration));
        }
        let parents = self.parents();
        for _ in 0..self.cfg.population {
            let a = *parents
                .choose(&mut self.rng)
                .expect("parents are never empty");
            let b = *parents
                .choose(&mut self.rng)
                .expect("parents are never empty");
            let child = crossover(
                &self.archive[a].program,
                &self.archive[b].program,
                self.cfg.max_modules,
                &mut self.rng,
            );
            pool.push(self.evaluate(child, iteration));
        }
        self.select(pool);
    }

    /// Elites that satisfy the current table; elites kept from before a
    /// refresh may not. Falls back to the best admitted archive members.
    fn parents(&self) -> Vec<usize> {
        let admitted = |i: &usize| {
            self.archive[*i]
                .program
                .modules
                .iter()
                .all(|m| self.table.admits(m))
        };
        let mut parents: Vec<usize> = self.elites.iter().copied().filter(admitted).collect();
        if parents.is_empty() {
            parents = self.ranked((0..self.archive.len()).filter(admitted).collect());
            parents.truncate(self.cfg.population);
        }
        parents
    }

    pub fn run(&mut self) {
        self.initialize();
        for it in 1..=self.cfg.iterations {
            self.iterate(it);
        }
    }

    pub fn elites(&self) -> &[usize] {
        &self.elites
    }
}

/// Everything a training run produces.
pub struct TrainingRun {
    pub search: GaSearch,
    pub front: Vec<usize>,
    pub cross: CrossEval,
    pub best: usize,
    /// Greedy self-play reward of the selected program.
    pub final_reward: f64,
}

impl TrainingRun {
    pub fn best_program(&self) -> &Program {
        &self.search.archive[self.best].program
    }
}

/// Bootstrap, extraction, reasoning, genetic search, Pareto front,
/// cross-evaluation and a final greedy self-play evaluation.
pub fn train(
    layout: Arc<GridLayout>,
    mode: Mode,
    cfg: &GaConfig,
) -> Result<TrainingRun, TrainError> {
    cfg.validate().map_err(TrainError::Config)?;
    let mut search = GaSearch::new(layout.clone(), mode, cfg.clone());
    if mode != Mode::Pc && search.table.is_empty() {
        return Err(TrainError::EmptyTable(mode));
    }
    search.run();
    let front = pareto_front(&search.archive);
    let mut pool = search.ranked((0..search.archive.len()).collect());
    pool.truncate(cfg.cross_eval_pool);
    pool.extend(&front);
    pool.sort_unstable();
    pool.dedup();
    let cross = cross_evaluate(&layout, &search.archive, &pool, &front, cfg);
    for &(i, s) in &cross.scores {
        search.archive[i].eval_reward = Some(s);
    }
    let best = cross.best;
    let policy = ProgramPolicy::greedy(&search.archive[best].program);
    let final_reward = self_play(
        &layout,
        &policy,
        cfg.final_episodes,
        mix_seed(cfg.seed ^ FINAL_STREAM, 0),
        cfg.horizon,
        None,
    );
    Ok(TrainingRun {
        search,
        front,
        cross,
        best,
        final_reward,
    })
}

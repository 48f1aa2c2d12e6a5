//! Genetic program search constrained by inferred preconditions.

mod ga;
mod pareto;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use ga::{train, GaSearch, TrainError, TrainingRun};
pub use pareto::{cross_evaluate, pareto_front, CrossEval};

use crate::dsl::{ActionPrimitive, Condition, ConditionBase, ItModule, Program};
use crate::extractor::{DEFAULT_DELTA, MIN_SUPPORT};
use crate::reasoner::{PreconditionTable, ReasonerMode};
use crate::sim::DEFAULT_HORIZON;

/// Largest conjunction drawn when no preconditions guide the search.
pub const MAX_RANDOM_CONDITIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[serde(rename = "knowpc")]
    KnowPc,
    #[serde(rename = "knowpc-m")]
    KnowPcM,
    #[serde(rename = "pc")]
    Pc,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::KnowPc, Mode::KnowPcM, Mode::Pc];

    pub fn name(self) -> &'static str {
        match self {
            Mode::KnowPc => "knowpc",
            Mode::KnowPcM => "knowpc-m",
            Mode::Pc => "pc",
        }
    }

    pub fn reasoner(self) -> ReasonerMode {
        match self {
            Mode::KnowPc => ReasonerMode::Full,
            Mode::KnowPcM => ReasonerMode::SingleStep,
            Mode::Pc => ReasonerMode::Disabled,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub iterations: usize,
    pub init_population: usize,
    pub population: usize,
    pub episodes_per_eval: usize,
    pub final_episodes: usize,
    pub epsilon: f64,
    pub max_modules: usize,
    pub max_extra_conditions: usize,
    /// Re-mine rules and re-run the reasoner every this many iterations
    /// (0 disables).
    pub refresh_every: usize,
    pub bootstrap_episodes: usize,
    /// Candidates with the best train rewards that enter cross-evaluation
    /// besides the Pareto front.
    pub cross_eval_pool: usize,
    /// Episodes per role assignment and partner in cross-evaluation.
    pub cross_eval_episodes: usize,
    pub horizon: u32,
    pub delta: f64,
    pub min_support: u64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            iterations: 50,
            init_population: 200,
            population: 10,
            episodes_per_eval: 3,
            final_episodes: 10,
            epsilon: 0.3,
            max_modules: 8,
            max_extra_conditions: 2,
            refresh_every: 10,
            bootstrap_episodes: 50,
            cross_eval_pool: 50,
            cross_eval_episodes: 2,
            horizon: DEFAULT_HORIZON,
            delta: DEFAULT_DELTA,
            min_support: MIN_SUPPORT,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.iterations == 0 || self.init_population == 0 || self.population == 0 {
            return Err("iterations and population sizes must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(format!("epsilon {} outside [0, 1]", self.epsilon));
        }
        if self.max_modules == 0 || self.episodes_per_eval == 0 || self.final_episodes == 0 {
            return Err("max_modules and episode counts must be at least 1".into());
        }
        if self.horizon == 0 {
            return Err("horizon must be at least 1".into());
        }
        Ok(())
    }
}

/// An evaluated program.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub program: Program,
    pub train_reward: f64,
    pub complexity: usize,
    pub eval_reward: Option<f64>,
    /// Position in discovery order.
    pub id: usize,
    pub iteration: usize,
}

impl Candidate {
    pub fn text(&self) -> String {
        self.program.to_string()
    }
}

fn try_extend<R: Rng + ?Sized>(conds: &mut Vec<Condition>, rng: &mut R) -> bool {
    let free: Vec<ConditionBase> = ConditionBase::ALL
        .into_iter()
        .filter(|b| conds.iter().all(|c| c.base != *b))
        .collect();
    let Some(&base) = free.choose(rng) else {
        return false;
    };
    let c = Condition {
        base,
        negated: rng.gen_bool(0.5),
    };
    if conds.iter().any(|o| o.conflicts_with(c)) {
        return false;
    }
    conds.push(c);
    true
}

fn random_module<R: Rng + ?Sized>(
    table: &PreconditionTable,
    cfg: &GaConfig,
    rng: &mut R,
) -> ItModule {
    if table.is_empty() {
        let action = *ActionPrimitive::ALL.choose(rng).expect("non-empty");
        let n = rng.gen_range(1..=MAX_RANDOM_CONDITIONS);
        let mut conds = Vec::new();
        while conds.len() < n {
            try_extend(&mut conds, rng);
        }
        return ItModule::new(conds, action).expect("built conflict-free");
    }
    let actions: Vec<ActionPrimitive> = table.actions().collect();
    let action = *actions.choose(rng).expect("non-empty table");
    let mut conds: Vec<Condition> = table.get(action).expect("listed").iter().copied().collect();
    let extras = rng.gen_range(0..=cfg.max_extra_conditions);
    for _ in 0..extras {
        try_extend(&mut conds, rng);
    }
    while conds.is_empty() {
        try_extend(&mut conds, rng);
    }
    ItModule::new(conds, action).expect("built conflict-free")
}

/// A random program of 1 to `max_modules` modules. With a non-empty table
/// every module's conjunction starts from its action's preconditions; with
/// an empty table conjunctions and actions are uniform.
pub fn random_program<R: Rng + ?Sized>(
    table: &PreconditionTable,
    cfg: &GaConfig,
    rng: &mut R,
) -> Program {
    let k = rng.gen_range(1..=cfg.max_modules);
    Program::new((0..k).map(|_| random_module(table, cfg, rng)).collect())
}

/// `p1[..i] ++ p2[j..]` for cut points `1 <= i <= len(p1)` and
/// `0 <= j <= len(p2)`, clipped to `max_modules`.
pub fn crossover_at(p1: &Program, p2: &Program, i: usize, j: usize, max_modules: usize) -> Program {
    let mut modules: Vec<ItModule> = p1.modules[..i].to_vec();
    modules.extend_from_slice(&p2.modules[j..]);
    modules.truncate(max_modules);
    Program::new(modules)
}

pub fn crossover<R: Rng + ?Sized>(
    p1: &Program,
    p2: &Program,
    max_modules: usize,
    rng: &mut R,
) -> Program {
    assert!(!p1.is_empty(), "crossover needs a non-empty first parent");
    let i = rng.gen_range(1..=p1.len());
    let j = rng.gen_range(0..=p2.len());
    crossover_at(p1, p2, i, j, max_modules)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::dsl::PointClass;
    use crate::sim::Item;

    fn serving_only() -> PreconditionTable {
        let mut t = PreconditionTable::default();
        t.insert(
            ActionPrimitive(PointClass::Serving),
            BTreeSet::from([Condition::hold(Item::Soup)]),
        );
        t
    }

    #[test]
    fn single_entry_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = GaConfig::default();
        for _ in 0..50 {
            let p = random_program(&serving_only(), &cfg, &mut rng);
            assert!((1..=8).contains(&p.len()));
            for m in &p.modules {
                assert_eq!(m.action, ActionPrimitive(PointClass::Serving));
                assert!(m.conditions.contains(&Condition::hold(Item::Soup)));
                assert!(m.conditions.len() <= 3);
                assert!(ItModule::new(m.conditions.clone(), m.action).is_ok());
            }
        }
    }

    #[test]
    fn unguided_programs_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let p = random_program(
                &PreconditionTable::default(),
                &GaConfig::default(),
                &mut rng,
            );
            for m in &p.modules {
                assert!((1..=MAX_RANDOM_CONDITIONS).contains(&m.conditions.len()));
                assert!(ItModule::new(m.conditions.clone(), m.action).is_ok());
            }
        }
    }

    #[test]
    fn crossover_cut_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = GaConfig {
            max_modules: 8,
            ..GaConfig::default()
        };
        let p1 = Program::new(
            (0..5)
                .map(|_| random_module(&serving_only(), &cfg, &mut rng))
                .collect(),
        );
        let p2 = Program::new(
            (0..6)
                .map(|_| random_module(&PreconditionTable::default(), &cfg, &mut rng))
                .collect(),
        );
        let whole = crossover_at(&p1, &p2, 5, 0, 8);
        assert_eq!(whole.modules[..5], p1.modules[..]);
        assert_eq!(whole.modules[5..], p2.modules[..3]);
        assert_eq!(crossover_at(&p1, &p2, 2, 6, 8).modules, p1.modules[..2]);
        for i in 1..=5 {
            for j in 0..=6 {
                let c = crossover_at(&p1, &p2, i, j, 8);
                assert_eq!(c.len(), (i + 6 - j).min(8));
                assert!(c
                    .modules
                    .iter()
                    .all(|m| p1.modules.contains(m) || p2.modules.contains(m)));
            }
        }
    }

    #[test]
    fn self_crossover_keeps_modules() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = random_program(&serving_only(), &GaConfig::default(), &mut rng);
        for _ in 0..20 {
            let c = crossover(&p, &p, 8, &mut rng);
            assert!(!c.is_empty());
            assert!(c.modules.iter().all(|m| p.modules.contains(m)));
        }
    }

    #[test]
    fn mode_names() {
        for m in Mode::ALL {
            assert_eq!(m.name().parse::<Mode>(), Ok(m));
        }
        assert!("ppo".parse::<Mode>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        assert!(GaConfig {
            epsilon: 1.5,
            ..GaConfig::default()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            population: 0,
            ..GaConfig::default()
        }
        .validate()
        .is_err());
    }
}

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use knowpc::dsl::{select_action, Percept, Selection};
use knowpc::extractor::RuleSets;
use knowpc::nav;
use knowpc::reasoner::PreconditionTable;
use knowpc::rollout::{mix_seed, run_episode, RandomPolicy};
use knowpc::synth::{Candidate, GaConfig};
use knowpc::{ActionPrimitive, EnvAction, GridLayout, Program, WorldState};

pub const GROUND_TRUTH: &str = include_str!("../../../../fixtures/cramped_room_ground_truth.rules");
pub const LISTING1: &str = include_str!("../../../../fixtures/listing1.ktp");

pub fn ground_truth() -> RuleSets {
    RuleSets::from_text(GROUND_TRUTH).unwrap()
}

/// Ground-truth player rules plus the pot clock at both position markers.
pub fn ground_truth_with_ticks() -> RuleSets {
    let mut text = GROUND_TRUTH.to_string();
    for m in ["face", "away"] {
        for k in 1..20 {
            text.push_str(&format!(
                "spontaneous {{pot.3.{k}@{m}->pot.3.{}@{m}}}\n",
                k + 1
            ));
        }
    }
    RuleSets::from_text(&text).unwrap()
}

pub fn layout(name: &str) -> Arc<GridLayout> {
    Arc::new(GridLayout::bundled(name).unwrap())
}

/// The golden Cramped Room table.
pub const GOLDEN_TABLE: &str = "\
GoIntServing: HoldSoup
GoIntOnionDisp: HoldEmpty, ExEmptyCounter, ExIdlePot
GoIntDishDisp: HoldEmpty, ExEmptyCounter, ExReadyPot
GoIntOnionCounter: HoldEmpty, ExEmptyCounter, ExIdlePot
GoIntDishCounter: HoldEmpty, ExEmptyCounter, ExReadyPot
GoIntSoupCounter: HoldEmpty, ExServing, ExEmptyCounter
GoIntEmptyCounter: not HoldEmpty
GoIntIdlePot: HoldOnion
GoIntReadyPot: HoldDish, ExServing, ExEmptyCounter
";

pub fn golden_table() -> PreconditionTable {
    PreconditionTable::from_text(GOLDEN_TABLE).unwrap()
}

/// Table as `action -> {condition text}`.
pub fn table_map(t: &PreconditionTable) -> BTreeMap<String, BTreeSet<String>> {
    t.iter()
        .map(|(a, c)| (a.to_string(), c.iter().map(ToString::to_string).collect()))
        .collect()
}

// ---------------------------------------------------------------------------
// Algorithm 1 written directly over rule text, sharing nothing with the
// library's graph or reasoner.

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct OracleNode {
    name: String,
    /// Non-zero for `player.empty`, which never merges.
    fresh: usize,
}

struct OracleRule {
    pre: Vec<OracleNode>,
    res: Vec<OracleNode>,
    spontaneous: bool,
}

fn strip_marker(s: &str) -> &str {
    s.split('@').next().unwrap()
}

fn cap(s: &str) -> String {
    let mut c = s.chars();
    let f = c.next().unwrap();
    f.to_uppercase().chain(c).collect()
}

/// Condition name of an element, if it has one.
fn oracle_condition(info: &str) -> Option<String> {
    let bare = strip_marker(info);
    let parts: Vec<&str> = bare.split('.').collect();
    match parts[0] {
        "player" => Some(format!("Hold{}", cap(parts[1]))),
        "onionDisp" => Some("ExOnionDisp".into()),
        "dishDisp" => Some("ExDishDisp".into()),
        "serving" => Some("ExServing".into()),
        "counter" => Some(format!("Ex{}Counter", cap(parts[1]))),
        "pot" => {
            let onions: u8 = parts[1].parse().unwrap();
            let cook: u8 = parts[2].parse().unwrap();
            if onions < 3 {
                Some("ExIdlePot".into())
            } else if cook == 20 {
                Some("ExReadyPot".into())
            } else {
                None
            }
        }
        other => panic!("unknown element {other}"),
    }
}

fn oracle_action(info: &str) -> Option<String> {
    if info.starts_with("player") {
        return None;
    }
    oracle_condition(info).map(|c| format!("GoInt{}", &c[2..]))
}

fn is_hold(c: &str) -> bool {
    c.starts_with("Hold")
}

/// Brute-force Algorithm 1 over the rules' text form. `full` enables the
/// multi-step part.
pub fn oracle_table(rules: &RuleSets, full: bool) -> BTreeMap<String, BTreeSet<String>> {
    let mut fresh = 0;
    let mut node = |s: String| {
        if s == "player.empty" {
            fresh += 1;
            OracleNode { name: s, fresh }
        } else {
            OracleNode { name: s, fresh: 0 }
        }
    };
    let mut all = Vec::new();
    for (sig, spontaneous) in rules
        .player
        .iter()
        .map(|r| (&r.signature, false))
        .chain(rules.spontaneous.iter().map(|s| (s, true)))
    {
        let mut pre = Vec::new();
        let mut res = Vec::new();
        for text in sig.to_strings() {
            let (b, a) = text.split_once("->").unwrap();
            pre.push(node(b.to_string()));
            if strip_marker(b).split('.').skip(1).collect::<Vec<_>>()
                != strip_marker(a).split('.').skip(1).collect::<Vec<_>>()
            {
                res.push(node(a.to_string()));
            }
        }
        all.push(OracleRule {
            pre,
            res,
            spontaneous,
        });
    }
    let cc = |n: &OracleNode| -> BTreeSet<OracleNode> {
        all.iter()
            .filter(|r| r.pre.contains(n))
            .flat_map(|r| r.pre.iter().filter(|p| *p != n).cloned())
            .collect()
    };
    let expanded = |n: &OracleNode| -> BTreeSet<OracleNode> {
        let mut out: BTreeSet<OracleNode> = all
            .iter()
            .filter(|r| r.pre.contains(n))
            .flat_map(|r| r.res.iter().cloned())
            .collect();
        let mut queue: VecDeque<OracleNode> = out.iter().cloned().collect();
        while let Some(x) = queue.pop_front() {
            for r in all.iter().filter(|r| r.spontaneous && r.pre.contains(&x)) {
                for q in &r.res {
                    if out.insert(q.clone()) {
                        queue.push_back(q.clone());
                    }
                }
            }
        }
        out
    };
    let mut points: BTreeSet<OracleNode> = BTreeSet::new();
    for r in all.iter().filter(|r| !r.spontaneous) {
        points.extend(
            r.pre
                .iter()
                .filter(|p| oracle_action(&p.name).is_some())
                .cloned(),
        );
    }
    let mut table: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for x in &points {
        let action = oracle_action(&x.name).unwrap();
        let base: Vec<String> = cc(x)
            .iter()
            .filter_map(|k| oracle_condition(&k.name))
            .collect();
        let entry = table.entry(action).or_default();
        entry.extend(base.iter().cloned());
        if full {
            for j in expanded(x) {
                for k in cc(&j) {
                    let Some(b) = oracle_condition(&k.name) else {
                        continue;
                    };
                    let clash = is_hold(&b) && base.iter().any(|c| is_hold(c) && *c != b);
                    if !clash {
                        entry.insert(b);
                    }
                }
            }
        }
    }
    for conds in table.values_mut() {
        let holds: Vec<String> = conds.iter().filter(|c| is_hold(c)).cloned().collect();
        if holds.len() >= 2 {
            for h in &holds {
                conds.remove(h);
            }
            for h in ["HoldEmpty", "HoldOnion", "HoldDish", "HoldSoup"] {
                if !holds.iter().any(|x| x == h) {
                    conds.insert(format!("not {h}"));
                }
            }
        }
    }
    table
}

// ---------------------------------------------------------------------------
// Property checks shared by the proptest suites and the acceptance run.

/// Every module of every program admits the table.
pub fn check_compliance(table: &PreconditionTable, programs: &[Program]) -> Result<(), String> {
    for p in programs {
        for m in &p.modules {
            if !table.admits(m) {
                return Err(format!("module {m} breaks its preconditions"));
            }
        }
    }
    Ok(())
}

/// Dominance by definition, O(n^2).
pub fn pareto_oracle(c: &[Candidate]) -> Vec<usize> {
    (0..c.len())
        .filter(|&i| {
            !c.iter().any(|o| {
                o.train_reward >= c[i].train_reward
                    && o.complexity <= c[i].complexity
                    && (o.train_reward > c[i].train_reward || o.complexity < c[i].complexity)
            })
        })
        .collect()
}

pub fn candidates(points: &[(u8, u8)]) -> Vec<Candidate> {
    points
        .iter()
        .enumerate()
        .map(|(i, &(r, c))| Candidate {
            program: Program::default(),
            train_reward: r as f64 * 20.0 / 3.0,
            complexity: c as usize,
            eval_reward: None,
            id: i,
            iteration: 0,
        })
        .collect()
}

/// A state reached by `steps` random joint actions on `layout`.
pub fn random_state(layout: &Arc<GridLayout>, seed: u64, steps: u32) -> WorldState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = WorldState::reset(layout.clone());
    for _ in 0..steps {
        let a = *EnvAction::ALL.choose(&mut rng).unwrap();
        let b = *EnvAction::ALL.choose(&mut rng).unwrap();
        s.step_mut(a, b).unwrap();
    }
    s
}

/// Reordering the modules after the first firing one never changes the
/// choice.
pub fn check_permutation_invariance(
    p: &Program,
    state: &WorldState,
    chef: usize,
    perm_seed: u64,
) -> Result<(), String> {
    let percept = Percept::observe(state, chef);
    let pick = |prog: &Program| select_action(prog, &percept, &mut ChaCha8Rng::seed_from_u64(9));
    let before = pick(p);
    let first = match before {
        Selection::Primitive { module, .. } => module + 1,
        Selection::Random(_) => 0,
    };
    let mut shuffled = p.clone();
    shuffled.modules[first..].shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
    let after = pick(&shuffled);
    if before != after {
        return Err(format!("{before:?} became {after:?} for\n{p}"));
    }
    Ok(())
}

/// A walled micro-kitchen: chef 1 roams a random interior region, chef 2
/// is sealed in a one-tile pocket on the right.
pub fn micro_layout(seed: u64) -> GridLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let w = rng.gen_range(6..=10);
        let h = rng.gen_range(4..=7);
        let mut g = vec![vec!['X'; w]; h];
        for row in g.iter_mut().take(h - 1).skip(1) {
            for cell in row.iter_mut().take(w - 3).skip(1) {
                if rng.gen_bool(0.75) {
                    *cell = ' ';
                }
            }
        }
        g[1][w - 2] = '2';
        let floor: Vec<(usize, usize)> = (1..h - 1)
            .flat_map(|y| (1..w - 3).map(move |x| (x, y)))
            .filter(|&(x, y)| g[y][x] == ' ')
            .collect();
        let Some(&(sx, sy)) = floor.choose(&mut rng) else {
            continue;
        };
        // keep only the spawn's region
        let mut seen = vec![vec![false; w]; h];
        let mut queue = VecDeque::from([(sx, sy)]);
        seen[sy][sx] = true;
        while let Some((x, y)) = queue.pop_front() {
            for (nx, ny) in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                if nx < w - 3 && g[ny][nx] == ' ' && !seen[ny][nx] {
                    seen[ny][nx] = true;
                    queue.push_back((nx, ny));
                }
            }
        }
        for &(x, y) in &floor {
            if !seen[y][x] {
                g[y][x] = 'X';
            }
        }
        g[sy][sx] = '1';
        let mut walls: Vec<(usize, usize)> = (0..h)
            .flat_map(|y| (0..w - 2).map(move |x| (x, y)))
            .filter(|&(x, y)| {
                g[y][x] == 'X'
                    && [
                        (x + 1, y),
                        (x.wrapping_sub(1), y),
                        (x, y + 1),
                        (x, y.wrapping_sub(1)),
                    ]
                    .iter()
                    .any(|&(nx, ny)| nx < w && ny < h && seen[ny][nx])
            })
            .collect();
        if walls.len() < 4 {
            continue;
        }
        walls.shuffle(&mut rng);
        for (&(x, y), ch) in walls.iter().zip(['O', 'P', 'S', 'D']) {
            g[y][x] = ch;
        }
        let text: String = g
            .iter()
            .map(|r| r.iter().collect::<String>() + "\n")
            .collect();
        return GridLayout::parse(&format!("micro{seed}"), &text)
            .expect("generator builds valid kitchens");
    }
}

/// With the teammate frozen out of the way, following the controller to
/// `target` shortens the BFS distance every move and interacts within
/// distance + 4 steps.
pub fn check_nav_progress(layout: &Arc<GridLayout>, target: ActionPrimitive) -> Result<(), String> {
    let mut state = WorldState::reset(layout.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let Some(goal) = nav::nearest_goal(&state, 0, target.target()) else {
        return Err(format!("{target} unreachable in\n{layout}"));
    };
    let dist_to_goal =
        |s: &WorldState| nav::distances(layout, goal.stand)[layout.index(s.chefs[0].pos)];
    let d0 = dist_to_goal(&state);
    for step in 0..=(d0 as usize + 4) {
        let a = nav::next_env_action(&state, 0, target, &mut rng).map_err(|e| e.to_string())?;
        if a == EnvAction::Interact {
            let facing = state.chefs[0].facing(layout);
            return if facing == Some(goal.point) {
                Ok(())
            } else {
                Err(format!("interact at step {step} while facing {facing:?}"))
            };
        }
        let before = dist_to_goal(&state);
        state
            .step_mut(a, EnvAction::Noop)
            .map_err(|e| e.to_string())?;
        let after = dist_to_goal(&state);
        if before > 0 && after >= before {
            return Err(format!(
                "step {step}: distance {before} -> {after} with {a}"
            ));
        }
        if before == 0 && after != 0 {
            return Err(format!("step {step}: left the standing tile"));
        }
    }
    Err(format!(
        "no interact within {} steps towards {target} in\n{layout}",
        d0 + 4
    ))
}

/// Plays `episodes` random episodes of 400 steps into a fresh buffer.
pub fn random_buffer(
    layout: &Arc<GridLayout>,
    episodes: u64,
    seed: u64,
) -> knowpc::extractor::TransitionBuffer {
    let mut b = knowpc::extractor::TransitionBuffer::new();
    for e in 0..episodes {
        run_episode(
            layout,
            [&RandomPolicy, &RandomPolicy],
            mix_seed(seed, e),
            400,
            Some(&mut b),
        );
    }
    b
}

pub fn small_config(seed: u64) -> GaConfig {
    GaConfig {
        iterations: 6,
        init_population: 30,
        population: 6,
        episodes_per_eval: 1,
        final_episodes: 3,
        bootstrap_episodes: 20,
        refresh_every: 3,
        cross_eval_pool: 8,
        cross_eval_episodes: 1,
        seed,
        ..GaConfig::default()
    }
}

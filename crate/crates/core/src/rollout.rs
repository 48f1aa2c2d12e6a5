//! Policies and episode rollouts.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::{select_action, ActionPrimitive, Percept, Program, Selection};
use crate::extractor::TransitionBuffer;
use crate::nav;
use crate::sim::{observe_elements, EnvAction, GridLayout, WorldState};

pub type EpisodeRng = ChaCha8Rng;

pub fn episode_rng(seed: u64) -> EpisodeRng {
    EpisodeRng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a base seed and an index.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base
        ^ index
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn random_env_action<R: Rng + ?Sized>(rng: &mut R) -> EnvAction {
    EnvAction::ALL[rng.gen_range(0..EnvAction::ALL.len())]
}

/// Why a policy produced its action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// ε-greedy exploration.
    Explore,
    /// Module `index` fired. `reachable` is false when its target could not
    /// be reached and a random action was taken instead.
    Module {
        index: usize,
        primitive: ActionPrimitive,
        reachable: bool,
    },
    /// No module fired.
    Fallback,
}

pub trait Policy: Sync {
    fn decide(
        &self,
        state: &WorldState,
        chef: usize,
        rng: &mut EpisodeRng,
    ) -> (EnvAction, Decision);

    fn act(&self, state: &WorldState, chef: usize, rng: &mut EpisodeRng) -> EnvAction {
        self.decide(state, chef, rng).0
    }
}

/// A program run through the BFS controller, optionally ε-greedy.
#[derive(Debug, Clone)]
pub struct ProgramPolicy<'a> {
    pub program: &'a Program,
    pub epsilon: f64,
}

impl<'a> ProgramPolicy<'a> {
    pub fn greedy(program: &'a Program) -> Self {
        ProgramPolicy {
            program,
            epsilon: 0.0,
        }
    }
}

impl Policy for ProgramPolicy<'_> {
    fn decide(
        &self,
        state: &WorldState,
        chef: usize,
        rng: &mut EpisodeRng,
    ) -> (EnvAction, Decision) {
        if self.epsilon > 0.0 && rng.gen_bool(self.epsilon.min(1.0)) {
            return (random_env_action(rng), Decision::Explore);
        }
        let percept = Percept::observe(state, chef);
        match select_action(self.program, &percept, rng) {
            Selection::Random(a) => (a, Decision::Fallback),
            Selection::Primitive { action, module } => {
                match nav::next_env_action(state, chef, action, rng) {
                    Ok(a) => (
                        a,
                        Decision::Module {
                            index: module,
                            primitive: action,
                            reachable: true,
                        },
                    ),
                    Err(_) => (
                        random_env_action(rng),
                        Decision::Module {
                            index: module,
                            primitive: action,
                            reachable: false,
                        },
                    ),
                }
            }
        }
    }
}

/// Uniformly random actions.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn decide(&self, _: &WorldState, _: usize, rng: &mut EpisodeRng) -> (EnvAction, Decision) {
        (random_env_action(rng), Decision::Explore)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EpisodeOutcome {
    pub reward: u32,
    pub deliveries: u32,
}

/// Plays one episode. When `buffer` is given every timestep is recorded
/// from both perspectives. `on_decision` sees each chef's decision.
pub fn run_episode_with(
    layout: &Arc<GridLayout>,
    policies: [&dyn Policy; 2],
    seed: u64,
    horizon: u32,
    mut buffer: Option<&mut TransitionBuffer>,
    mut on_decision: impl FnMut(usize, Decision),
) -> EpisodeOutcome {
    let mut rng = EpisodeRng::seed_from_u64(seed);
    let mut state = WorldState::with_horizon(layout.clone(), horizon);
    let mut out = EpisodeOutcome::default();
    let mut views = buffer
        .as_ref()
        .map(|_| [observe_elements(&state, 0), observe_elements(&state, 1)]);
    while !state.is_terminal() {
        let (a0, d0) = policies[0].decide(&state, 0, &mut rng);
        let (a1, d1) = policies[1].decide(&state, 1, &mut rng);
        on_decision(0, d0);
        on_decision(1, d1);
        let r = state.step_mut(a0, a1).expect("loop stops at the horizon");
        out.reward += r;
        out.deliveries += r / crate::sim::SOUP_REWARD;
        if let (Some(buf), Some(prev)) = (buffer.as_deref_mut(), views.as_mut()) {
            let next = [observe_elements(&state, 0), observe_elements(&state, 1)];
            buf.record_step([&prev[0], &prev[1]], [&next[0], &next[1]], [a0, a1])
                .expect("views of one layout always line up");
            *prev = next;
        }
    }
    out
}

pub fn run_episode(
    layout: &Arc<GridLayout>,
    policies: [&dyn Policy; 2],
    seed: u64,
    horizon: u32,
    buffer: Option<&mut TransitionBuffer>,
) -> EpisodeOutcome {
    run_episode_with(layout, policies, seed, horizon, buffer, |_, _| {})
}

/// Mean reward of `episodes` self-play episodes (both chefs run `policy`).
pub fn self_play(
    layout: &Arc<GridLayout>,
    policy: &dyn Policy,
    episodes: usize,
    seed: u64,
    horizon: u32,
    mut buffer: Option<&mut TransitionBuffer>,
) -> f64 {
    let total: u64 = (0..episodes)
        .map(|e| {
            run_episode(
                layout,
                [policy, policy],
                mix_seed(seed, e as u64),
                horizon,
                buffer.as_deref_mut(),
            )
            .reward as u64
        })
        .sum();
    total as f64 / episodes.max(1) as f64
}

/// Mean reward of `a` partnered with `b`, averaged over both role
/// assignments; each assignment plays `episodes` episodes.
pub fn cross_play(
    layout: &Arc<GridLayout>,
    a: &dyn Policy,
    b: &dyn Policy,
    episodes: usize,
    seed: u64,
    horizon: u32,
) -> f64 {
    let mut total = 0u64;
    for e in 0..episodes as u64 {
        total += run_episode(layout, [a, b], mix_seed(seed, 2 * e), horizon, None).reward as u64;
        total +=
            run_episode(layout, [b, a], mix_seed(seed, 2 * e + 1), horizon, None).reward as u64;
    }
    total as f64 / (2 * episodes.max(1)) as f64
}

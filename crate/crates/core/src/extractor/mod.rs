//! Transition-rule mining from trajectories.
//!
//! Each timestep is diffed from both chefs' perspectives into a
//! [`StepRecord`]. Signatures whose action distribution is nearly
//! deterministic (entropy at most `delta`) are player-caused rules; after
//! removing what the player and (re-expressed from its own perspective) the
//! teammate explain, the frequent leftovers are spontaneous rules.

mod buffer;
mod signature;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use buffer::{StepRecord, TransitionBuffer};
pub use signature::{
    diff_changes, diff_step, ChangeRecord, ElementInfo, ExtractError, TransitionSignature,
};

use crate::sim::EnvAction;

pub const DEFAULT_DELTA: f64 = 0.1;
pub const MIN_SUPPORT: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiningConfig {
    /// Entropy threshold in nats.
    pub delta: f64,
    pub min_support: u64,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            delta: DEFAULT_DELTA,
            min_support: MIN_SUPPORT,
        }
    }
}

/// Counts of each environment action, indexed by [`EnvAction::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ActionHistogram(pub [u64; 6]);

impl ActionHistogram {
    pub fn add(&mut self, a: EnvAction, n: u64) {
        self.0[a.index()] += n;
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Most frequent action; ties go to the lower action index.
    pub fn mode(&self) -> Option<EnvAction> {
        if self.total() == 0 {
            return None;
        }
        let (i, _) = self.0.iter().enumerate().fold(
            (0, 0),
            |best, (i, &c)| if c > best.1 { (i, c) } else { best },
        );
        EnvAction::from_index(i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionStats {
    pub signature: TransitionSignature,
    pub actions: ActionHistogram,
}

/// Shannon entropy (nats) of the empirical action distribution.
pub fn entropy(h: &ActionHistogram) -> Result<f64, ExtractError> {
    let total = h.total();
    if total == 0 {
        return Err(ExtractError::EmptyHistogram);
    }
    let n = total as f64;
    Ok(h.0
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * (1.0 / p).ln()
        })
        .sum())
}

/// A player-caused rule with its modal action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerRule {
    pub signature: TransitionSignature,
    pub action: EnvAction,
}

/// A low-entropy signature with the number of times it was observed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RuleCandidate {
    pub rule: PlayerRule,
    pub support: u64,
}

/// Candidate player-caused rules: signatures seen at least `min_support`
/// times whose action entropy is at most `delta`. Sorted by signature.
pub fn extract_player_caused(stats: &[TransitionStats], cfg: MiningConfig) -> Vec<RuleCandidate> {
    let mut out: Vec<RuleCandidate> = stats
        .iter()
        .filter(|s| !s.signature.is_empty() && s.actions.total() >= cfg.min_support)
        .filter(|s| entropy(&s.actions).is_ok_and(|h| h <= cfg.delta))
        .map(|s| RuleCandidate {
            rule: PlayerRule {
                signature: s.signature.clone(),
                action: s.actions.mode().expect("non-empty"),
            },
            support: s.actions.total(),
        })
        .collect();
    out.sort();
    out
}

/// Drops duplicates and resolves every nested pair of candidates by
/// support: the superset goes when the contained rule is at least as
/// frequent (it is the rule plus co-occurring noise), otherwise the subset
/// goes (a coincidence such as an item taken from and put back on one
/// counter within a tick). The result is subset-minimal.
pub fn prune_redundant(mut candidates: Vec<RuleCandidate>) -> Vec<PlayerRule> {
    candidates.sort();
    candidates.dedup_by(|a, b| a.rule.signature == b.rule.signature);
    let keep: Vec<bool> = candidates
        .iter()
        .map(|c| {
            !candidates.iter().any(|o| {
                let (cs, os) = (&c.rule.signature, &o.rule.signature);
                (os.is_strict_subset(cs) && o.support >= c.support)
                    || (cs.is_strict_subset(os) && o.support > c.support)
            })
        })
        .collect();
    candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c.rule))
        .collect()
}

/// How one step's changes (from the player's perspective) are explained.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Attribution {
    pub player_rule: Option<PlayerRule>,
    /// Matched rule from the teammate's own perspective.
    pub teammate_rule: Option<PlayerRule>,
    pub player_caused: Vec<ChangeRecord>,
    /// Changes in the player's view explained by the teammate's rule.
    pub teammate_caused: Vec<ChangeRecord>,
    pub spontaneous: Vec<ChangeRecord>,
}

fn best_match<'a>(
    sig: &TransitionSignature,
    action: EnvAction,
    rules: &'a [PlayerRule],
) -> Option<&'a PlayerRule> {
    rules
        .iter()
        .filter(|r| r.action == action && r.signature.is_subset(sig))
        .fold(None, |best: Option<&PlayerRule>, r| match best {
            Some(b) if b.signature.len() >= r.signature.len() => Some(b),
            _ => Some(r),
        })
}

/// Splits a step into player-caused, teammate-caused and spontaneous
/// changes. The teammate's changes are matched against the same rules from
/// the teammate's perspective (both chefs follow identical dynamics) and
/// then removed from the player's view by element kind and state transition.
/// Stateless points whose state did not change are not part of any residue.
pub fn attribute_step(step: &StepRecord, rules: &[PlayerRule]) -> Attribution {
    let mut rest: Vec<ChangeRecord> = step.signature.changes().to_vec();
    let mut out = Attribution::default();

    if let Some(rule) = best_match(&step.signature, step.action, rules) {
        rest.retain(|c| !rule.signature.changes().contains(c));
        out.player_caused = rule.signature.changes().to_vec();
        out.player_rule = Some(rule.clone());
    }
    if let Some(rule) = best_match(&step.teammate_signature, step.teammate_action, rules) {
        for tc in rule.signature.changes() {
            if tc.before.point_type().is_none() || !tc.state_changed() {
                continue;
            }
            if let Some(i) = rest.iter().position(|c| c.same_transition(tc)) {
                out.teammate_caused.push(rest.remove(i));
            }
        }
        out.teammate_rule = Some(rule.clone());
    }
    out.spontaneous = rest
        .into_iter()
        .filter(ChangeRecord::state_changed)
        .collect();
    out
}

/// Spontaneous rules: residues of [`attribute_step`] aggregated over the
/// buffer, kept when seen at least `min_support` times and not already a
/// player-caused signature.
pub fn extract_spontaneous(
    buffer: &TransitionBuffer,
    rules: &[PlayerRule],
    cfg: MiningConfig,
) -> Vec<TransitionSignature> {
    let mut counts: BTreeMap<TransitionSignature, u64> = BTreeMap::new();
    for (step, n) in buffer.iter() {
        let residue = attribute_step(step, rules).spontaneous;
        if !residue.is_empty() {
            *counts.entry(TransitionSignature::new(residue)).or_default() += n;
        }
    }
    counts
        .into_iter()
        .filter(|(s, n)| *n >= cfg.min_support && !rules.iter().any(|r| &r.signature == s))
        .map(|(s, _)| s)
        .collect()
}

/// Mined rules: `player` (D_p) with modal actions and action-free
/// `spontaneous` (D_s).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleSets {
    pub player: Vec<PlayerRule>,
    pub spontaneous: Vec<TransitionSignature>,
}

impl RuleSets {
    pub fn mine(buffer: &TransitionBuffer, cfg: MiningConfig) -> Self {
        let candidates = extract_player_caused(&buffer.player_stats(), cfg);
        let player = prune_redundant(candidates);
        let spontaneous = extract_spontaneous(buffer, &player, cfg);
        RuleSets {
            player,
            spontaneous,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.player.is_empty() && self.spontaneous.is_empty()
    }

    /// Human-readable rule file: `player <action> <signature>` and
    /// `spontaneous <signature>` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.player {
            let _ = writeln!(out, "player {} {}", r.action, r.signature);
        }
        for s in &self.spontaneous {
            let _ = writeln!(out, "spontaneous {s}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ExtractError> {
        let mut rules = RuleSets::default();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let bad = || ExtractError::Malformed(line.to_string());
            if let Some(rest) = line.strip_prefix("player ") {
                let (action, sig) = rest.split_once(' ').ok_or_else(bad)?;
                rules.player.push(PlayerRule {
                    action: action.parse().map_err(|_| bad())?,
                    signature: sig.parse()?,
                });
            } else if let Some(sig) = line.strip_prefix("spontaneous ") {
                rules.spontaneous.push(sig.parse()?);
            } else {
                return Err(bad());
            }
        }
        Ok(rules)
    }
}

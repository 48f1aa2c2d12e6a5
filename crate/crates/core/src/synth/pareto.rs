use std::cmp::Ordering;
use std::sync::Arc;

use super::{Candidate, GaConfig};
use crate::rollout::{cross_play, mix_seed, ProgramPolicy};
use crate::sim::GridLayout;

/// Indices of the candidates not dominated under (maximize `train_reward`,
/// minimize `complexity`). Equal points are all kept. Ascending index order.
pub fn pareto_front(cands: &[Candidate]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&cands[a], &cands[b]);
        y.train_reward
            .total_cmp(&x.train_reward)
            .then(x.complexity.cmp(&y.complexity))
    });
    let mut front = Vec::new();
    let mut best_c = usize::MAX;
    let mut k = 0;
    while k < order.len() {
        let r = cands[order[k]].train_reward;
        let group_min = cands[order[k]].complexity;
        let mut end = k;
        while end < order.len() && cands[order[end]].train_reward.total_cmp(&r) == Ordering::Equal {
            end += 1;
        }
        if group_min < best_c {
            front.extend(
                order[k..end]
                    .iter()
                    .copied()
                    .filter(|&i| cands[i].complexity == group_min),
            );
            best_c = group_min;
        }
        k = end;
    }
    front.sort_unstable();
    front
}

/// Outcome of [`cross_evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub struct CrossEval {
    /// Archive index of the winner.
    pub best: usize,
    /// Evaluated archive indices with their summed rewards.
    pub scores: Vec<(usize, f64)>,
}

/// Pairs every pool member with every front member at ε = 0, averaging
/// over role assignment; a candidate's score is the sum over partners.
/// Ties go to lower complexity, then to earlier discovery.
pub fn cross_evaluate(
    layout: &Arc<GridLayout>,
    cands: &[Candidate],
    pool: &[usize],
    front: &[usize],
    cfg: &GaConfig,
) -> CrossEval {
    assert!(
        !front.is_empty(),
        "cross-evaluation needs a non-empty front"
    );
    let mut scores = Vec::with_capacity(pool.len());
    for &i in pool {
        let me = ProgramPolicy::greedy(&cands[i].program);
        let total: f64 = front
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let partner = ProgramPolicy::greedy(&cands[j].program);
                let seed = mix_seed(cfg.seed ^ 0xC055_E7A1, k as u64);
                cross_play(
                    layout,
                    &me,
                    &partner,
                    cfg.cross_eval_episodes,
                    seed,
                    cfg.horizon,
                )
            })
            .sum();
        scores.push((i, total));
    }
    let best = scores
        .iter()
        .copied()
        .min_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then(cands[a.0].complexity.cmp(&cands[b.0].complexity))
                .then(cands[a.0].id.cmp(&cands[b.0].id))
        })
        .expect("pool is non-empty")
        .0;
    CrossEval { best, scores }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Program;

    fn c(r: f64, complexity: usize) -> Candidate {
        Candidate {
            program: Program::default(),
            train_reward: r,
            complexity,
            eval_reward: None,
            id: 0,
            iteration: 0,
        }
    }

    #[test]
    fn domination_examples() {
        assert_eq!(pareto_front(&[c(100.0, 5), c(100.0, 7)]), vec![0]);
        assert_eq!(pareto_front(&[c(100.0, 5), c(80.0, 3)]), vec![0, 1]);
        assert_eq!(pareto_front(&[c(1.0, 1)]), vec![0]);
        assert_eq!(pareto_front(&[c(1.0, 1), c(1.0, 1), c(0.0, 1)]), vec![0, 1]);
        assert!(pareto_front(&[]).is_empty());
    }

    #[test]
    fn singleton_cross_eval() {
        let layout = Arc::new(GridLayout::bundled("cramped_room").unwrap());
        let cands = vec![c(0.0, 0)];
        let cfg = GaConfig {
            horizon: 20,
            ..GaConfig::default()
        };
        let out = cross_evaluate(&layout, &cands, &[0], &[0], &cfg);
        assert_eq!(out.best, 0);
    }
}

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{
    ActionHistogram, ChangeRecord, ElementInfo, ExtractError, TransitionSignature, TransitionStats,
};
use crate::extractor::diff_changes;
use crate::sim::EnvAction;

/// One timestep seen from one chef: its own signature and action, plus the
/// teammate's signature and action from the teammate's perspective.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepRecord {
    pub signature: TransitionSignature,
    pub action: EnvAction,
    pub teammate_signature: TransitionSignature,
    pub teammate_action: EnvAction,
}

#[derive(Serialize, Deserialize)]
struct Line {
    signature: Vec<String>,
    action: EnvAction,
    teammate_signature: Vec<String>,
    teammate_action: EnvAction,
    count: u64,
}

/// Growing multiset of step records. Identical records are stored once with
/// a count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionBuffer {
    records: HashMap<StepRecord, u64>,
    steps: u64,
}

fn changes_to_sig(c: Vec<ChangeRecord>) -> TransitionSignature {
    TransitionSignature::new(c)
}

impl TransitionBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: StepRecord, count: u64) {
        *self.records.entry(record).or_default() += count;
        self.steps += count;
    }

    /// Records one joint timestep from both chefs' perspectives. `before`
    /// and `after` hold each chef's element list at `t` and `t + 1`.
    pub fn record_step(
        &mut self,
        before: [&[ElementInfo]; 2],
        after: [&[ElementInfo]; 2],
        actions: [EnvAction; 2],
    ) -> Result<(), ExtractError> {
        let s0 = changes_to_sig(diff_changes(before[0], after[0])?);
        let s1 = changes_to_sig(diff_changes(before[1], after[1])?);
        self.push(
            StepRecord {
                signature: s0.clone(),
                action: actions[0],
                teammate_signature: s1.clone(),
                teammate_action: actions[1],
            },
            1,
        );
        self.push(
            StepRecord {
                signature: s1,
                action: actions[1],
                teammate_signature: s0,
                teammate_action: actions[0],
            },
            1,
        );
        Ok(())
    }

    pub fn merge(&mut self, other: &TransitionBuffer) {
        for (r, &n) in &other.records {
            self.push(r.clone(), n);
        }
    }

    /// Total number of perspective records (two per joint timestep).
    pub fn len(&self) -> u64 {
        self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps == 0
    }

    pub fn distinct(&self) -> usize {
        self.records.len()
    }

    /// Records in canonical order with their counts.
    pub fn iter(&self) -> impl Iterator<Item = (&StepRecord, u64)> {
        let mut v: Vec<_> = self.records.iter().map(|(r, &n)| (r, n)).collect();
        v.sort_unstable_by(|a, b| a.0.cmp(b.0));
        v.into_iter()
    }

    /// Action histogram per player signature, sorted by signature.
    pub fn player_stats(&self) -> Vec<TransitionStats> {
        let mut by_sig: BTreeMap<&TransitionSignature, ActionHistogram> = BTreeMap::new();
        for (r, &n) in &self.records {
            by_sig.entry(&r.signature).or_default().add(r.action, n);
        }
        by_sig
            .into_iter()
            .map(|(s, h)| TransitionStats {
                signature: s.clone(),
                actions: h,
            })
            .collect()
    }

    /// Newline-delimited JSON, one distinct record per line.
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (r, count) in self.iter() {
            let line = Line {
                signature: r.signature.to_strings(),
                action: r.action,
                teammate_signature: r.teammate_signature.to_strings(),
                teammate_action: r.teammate_action,
                count,
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_ndjson<R: BufRead>(r: R) -> Result<Self, ExtractError> {
        let mut buf = TransitionBuffer::new();
        for line in r.lines() {
            let line = line.map_err(|e| ExtractError::Malformed(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let l: Line =
                serde_json::from_str(&line).map_err(|e| ExtractError::Malformed(e.to_string()))?;
            buf.push(
                StepRecord {
                    signature: TransitionSignature::from_strings(&l.signature)?,
                    action: l.action,
                    teammate_signature: TransitionSignature::from_strings(&l.teammate_signature)?,
                    teammate_action: l.teammate_action,
                },
                l.count,
            );
        }
        Ok(buf)
    }
}

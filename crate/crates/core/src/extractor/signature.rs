use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::sim::{ElementView, EnvAction};

/// Symbolic record of one element; the canonical string form doubles as a
/// node name in the transition graph.
pub type ElementInfo = ElementView;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("element identity mismatch at index {index}: {before} vs {after}")]
    IdentityMismatch {
        index: usize,
        before: String,
        after: String,
    },
    #[error("frames have {before} and {after} elements")]
    LengthMismatch { before: usize, after: usize },
    #[error("entropy of an empty histogram")]
    EmptyHistogram,
    #[error("malformed record: {0}")]
    Malformed(String),
}

/// One element's change `(I, I')` across a timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChangeRecord {
    pub before: ElementInfo,
    pub after: ElementInfo,
}

impl ChangeRecord {
    pub fn state_changed(&self) -> bool {
        self.before.state != self.after.state
    }

    /// Same element kind and state transition, position markers ignored.
    pub fn same_transition(&self, other: &ChangeRecord) -> bool {
        self.before.kind == other.before.kind
            && self.before.state == other.before.state
            && self.after.state == other.after.state
    }
}

impl fmt::Display for ChangeRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.before, self.after)
    }
}

impl FromStr for ChangeRecord {
    type Err = ExtractError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExtractError::Malformed(s.to_string());
        let (b, a) = s.trim().split_once("->").ok_or_else(bad)?;
        Ok(ChangeRecord {
            before: b.parse().map_err(|_| bad())?,
            after: a.parse().map_err(|_| bad())?,
        })
    }
}

/// A set of element changes observed in one timestep. Stored sorted and
/// duplicate-free, so equal sets compare and hash equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TransitionSignature(Vec<ChangeRecord>);

impl TransitionSignature {
    pub fn new(mut changes: Vec<ChangeRecord>) -> Self {
        changes.sort_unstable();
        changes.dedup();
        TransitionSignature(changes)
    }

    pub fn changes(&self) -> &[ChangeRecord] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &TransitionSignature) -> bool {
        // both sorted
        let mut it = other.0.iter();
        self.0.iter().all(|c| it.by_ref().any(|o| o == c))
    }

    pub fn is_strict_subset(&self, other: &TransitionSignature) -> bool {
        self.len() < other.len() && self.is_subset(other)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(ToString::to_string).collect()
    }

    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> Result<Self, ExtractError> {
        let changes = items
            .iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(changes))
    }
}

impl fmt::Display for TransitionSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for TransitionSignature {
    type Err = ExtractError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| ExtractError::Malformed(s.to_string()))?;
        if inner.trim().is_empty() {
            return Ok(Self::default());
        }
        let parts: Vec<&str> = inner.split(',').collect();
        Self::from_strings(&parts)
    }
}

/// Changes between two consecutive element lists of the same chef.
///
/// Every element whose state changed is recorded; stateless points
/// (dispensers, serving) are recorded whenever the chef faces or stands on
/// them. Both sides of a record carry the position marker of the earlier
/// frame, i.e. where the element was relative to the chef when it acted.
pub fn diff_changes(
    before: &[ElementInfo],
    after: &[ElementInfo],
) -> Result<Vec<ChangeRecord>, ExtractError> {
    if before.len() != after.len() {
        return Err(ExtractError::LengthMismatch {
            before: before.len(),
            after: after.len(),
        });
    }
    let mut out = Vec::new();
    for (index, (b, a)) in before.iter().zip(after).enumerate() {
        if b.kind != a.kind {
            return Err(ExtractError::IdentityMismatch {
                index,
                before: b.to_string(),
                after: a.to_string(),
            });
        }
        let rec = ChangeRecord {
            before: *b,
            after: a.with_pos(b.pos),
        };
        let faced = matches!(
            b.pos,
            Some(crate::sim::RelPos::Face | crate::sim::RelPos::On)
        );
        if rec.state_changed() || (b.is_stateless_point() && faced) {
            out.push(rec);
        }
    }
    Ok(out)
}

pub fn diff_step(
    before: &[ElementInfo],
    after: &[ElementInfo],
    action: EnvAction,
) -> Result<(TransitionSignature, EnvAction), ExtractError> {
    Ok((
        TransitionSignature::new(diff_changes(before, after)?),
        action,
    ))
}

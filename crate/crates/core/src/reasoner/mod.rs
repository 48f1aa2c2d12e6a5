//! Precondition inference over the mined transition graph.

mod graph;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

pub use graph::{GraphRule, Node, NodeId, ReasonError, TransitionGraph};

use crate::dsl::{ActionPrimitive, Condition, ConditionBase, ItModule, PointClass};
use crate::extractor::{ElementInfo, RuleSets};
use crate::sim::{ElementKind, ElementState, Item, PointType, COOK_TICKS};

/// Which parts of Algorithm 1 run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReasonerMode {
    Full,
    /// No multi-step reasoning.
    SingleStep,
    /// No reasoner at all; the table is empty.
    Disabled,
}

/// Hard-coded lookups from element infos to DSL primitives. Position
/// markers play no part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveMapping {
    pub mutex: Vec<Vec<ConditionBase>>,
}

impl Default for PrimitiveMapping {
    fn default() -> Self {
        PrimitiveMapping {
            mutex: vec![Item::ALL.iter().map(|&i| ConditionBase::Hold(i)).collect()],
        }
    }
}

fn point_class(info: &ElementInfo) -> Option<PointClass> {
    match (info.kind, info.state) {
        (ElementKind::Point(PointType::OnionDispenser), _) => Some(PointClass::OnionDisp),
        (ElementKind::Point(PointType::DishDispenser), _) => Some(PointClass::DishDisp),
        (ElementKind::Point(PointType::Serving), _) => Some(PointClass::Serving),
        (ElementKind::Point(PointType::Counter), ElementState::Counter(i)) => {
            Some(PointClass::counter_holding(i))
        }
        (ElementKind::Point(PointType::Pot), ElementState::Pot { onions, cook_time }) => {
            if onions < 3 {
                Some(PointClass::IdlePot)
            } else if cook_time >= COOK_TICKS {
                Some(PointClass::ReadyPot)
            } else {
                None
            }
        }
        _ => None,
    }
}

impl PrimitiveMapping {
    /// M_c
    pub fn condition(&self, info: &ElementInfo) -> Option<ConditionBase> {
        match (info.kind, info.state) {
            (ElementKind::Player, ElementState::Held(i)) => Some(ConditionBase::Hold(i)),
            _ => point_class(info).map(ConditionBase::Exists),
        }
    }

    /// M_a
    pub fn action(&self, info: &ElementInfo) -> Option<ActionPrimitive> {
        point_class(info).map(ActionPrimitive)
    }

    pub fn mutually_exclusive(&self, a: ConditionBase, b: ConditionBase) -> bool {
        a != b && self.mutex.iter().any(|g| g.contains(&a) && g.contains(&b))
    }
}

/// Required conjuncts per action primitive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreconditionTable(BTreeMap<ActionPrimitive, BTreeSet<Condition>>);

impl PreconditionTable {
    pub fn get(&self, a: ActionPrimitive) -> Option<&BTreeSet<Condition>> {
        self.0.get(&a)
    }

    pub fn insert(&mut self, a: ActionPrimitive, conds: BTreeSet<Condition>) {
        self.0.insert(a, conds);
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionPrimitive> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ActionPrimitive, &BTreeSet<Condition>)> {
        self.0.iter().map(|(a, c)| (*a, c))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether the module's conjunction contains its action's entry. Actions
    /// without an entry are unconstrained.
    pub fn admits(&self, m: &ItModule) -> bool {
        self.get(m.action)
            .map_or(true, |req| req.iter().all(|c| m.conditions.contains(c)))
    }

    /// One `GoIntX: A, not B` line per entry.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (a, conds) in &self.0 {
            let list: Vec<String> = conds.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "{a}: {}", list.join(", "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ReasonError> {
        let mut t = PreconditionTable::default();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let bad = || ReasonError::Malformed(line.to_string());
            let (a, rest) = line.split_once(':').ok_or_else(bad)?;
            let action = ActionPrimitive::from_name(a.trim()).ok_or_else(bad)?;
            let mut conds = BTreeSet::new();
            for c in rest.split(',').map(str::trim).filter(|c| !c.is_empty()) {
                let (neg, name) = match c.strip_prefix("not ") {
                    Some(n) => (true, n.trim()),
                    None => (false, c),
                };
                let base = ConditionBase::from_name(name).ok_or_else(bad)?;
                conds.insert(Condition { base, negated: neg });
            }
            t.0.insert(action, conds);
        }
        Ok(t)
    }
}

/// Replaces two or more positive members of a mutex group by the negations
/// of the members that are absent: holding an onion or a dish becomes "not
/// holding anything else".
fn compress_mutex(conds: &mut BTreeSet<Condition>, mapping: &PrimitiveMapping) {
    for group in &mapping.mutex {
        let present: Vec<ConditionBase> = group
            .iter()
            .copied()
            .filter(|b| conds.contains(&Condition::pos(*b)))
            .collect();
        if present.len() < 2 {
            continue;
        }
        for b in &present {
            conds.remove(&Condition::pos(*b));
        }
        for &b in group {
            if !present.contains(&b) {
                conds.insert(Condition::neg(b));
            }
        }
    }
}

/// Algorithm 1.
pub fn infer_preconditions(
    g: &TransitionGraph,
    mapping: &PrimitiveMapping,
    mode: ReasonerMode,
) -> PreconditionTable {
    let mut raw: BTreeMap<ActionPrimitive, BTreeSet<Condition>> = BTreeMap::new();
    if mode == ReasonerMode::Disabled {
        return PreconditionTable::default();
    }
    let mc = |id: NodeId| g.info(id).and_then(|i| mapping.condition(i));
    for (id, node) in g.nodes().iter().enumerate() {
        let Node::Info(info) = node else { continue };
        let Some(action) = mapping.action(info) else {
            continue;
        };
        let in_rules = g.rules_with_prerequisite(id).expect("own node");
        if !in_rules.iter().any(|&r| !g.rules()[r].is_spontaneous()) {
            continue;
        }
        let cc = g.conjunctive_conditions(id).expect("own node");
        let cc_conds: Vec<ConditionBase> = cc.iter().filter_map(|&k| mc(k)).collect();
        let entry = raw.entry(action).or_default();
        entry.extend(cc_conds.iter().map(|&b| Condition::pos(b)));
        if mode == ReasonerMode::Full {
            for j in g.expanded_results(id).expect("own node") {
                for k in g.conjunctive_conditions(j).expect("own node") {
                    let Some(b) = mc(k) else { continue };
                    if !cc_conds.iter().any(|&c| mapping.mutually_exclusive(c, b)) {
                        entry.insert(Condition::pos(b));
                    }
                }
            }
        }
    }
    let mut table = PreconditionTable::default();
    for (a, mut conds) in raw {
        compress_mutex(&mut conds, mapping);
        table.insert(a, conds);
    }
    table
}

/// Mine-to-table convenience: graph construction plus inference.
pub fn reason(rules: &RuleSets, mode: ReasonerMode) -> (TransitionGraph, PreconditionTable) {
    let g = TransitionGraph::build(rules);
    let t = infer_preconditions(&g, &PrimitiveMapping::default(), mode);
    (g, t)
}

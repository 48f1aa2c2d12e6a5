//! Policy language: a program is an ordered list of `if <conjunction>:
//! <action primitive>` modules with an implicit random-action fallback.

mod interp;
mod parse;

use std::fmt;

use thiserror::Error;

use crate::sim::{Item, TileKind, WorldState};

pub use interp::{eval_condition, select_action, Percept, Selection};
pub use parse::{parse_program, render_program};

/// Interaction-point classes an `Ex*` condition or `GoInt*` primitive can
/// refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointClass {
    Serving,
    OnionDisp,
    DishDisp,
    OnionCounter,
    DishCounter,
    SoupCounter,
    EmptyCounter,
    IdlePot,
    ReadyPot,
}

impl PointClass {
    pub const ALL: [PointClass; 9] = [
        PointClass::Serving,
        PointClass::OnionDisp,
        PointClass::DishDisp,
        PointClass::OnionCounter,
        PointClass::DishCounter,
        PointClass::SoupCounter,
        PointClass::EmptyCounter,
        PointClass::IdlePot,
        PointClass::ReadyPot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PointClass::Serving => "Serving",
            PointClass::OnionDisp => "OnionDisp",
            PointClass::DishDisp => "DishDisp",
            PointClass::OnionCounter => "OnionCounter",
            PointClass::DishCounter => "DishCounter",
            PointClass::SoupCounter => "SoupCounter",
            PointClass::EmptyCounter => "EmptyCounter",
            PointClass::IdlePot => "IdlePot",
            PointClass::ReadyPot => "ReadyPot",
        }
    }

    pub fn bit(self) -> u16 {
        1 << (self as u16)
    }

    pub fn counter_holding(item: Item) -> PointClass {
        match item {
            Item::Empty => PointClass::EmptyCounter,
            Item::Onion => PointClass::OnionCounter,
            Item::Dish => PointClass::DishCounter,
            Item::Soup => PointClass::SoupCounter,
        }
    }

    /// Class of interaction point `idx` (row-major) in `state`, if any. A pot
    /// that is cooking but not ready has no class.
    pub fn of_point(state: &WorldState, idx: usize) -> Option<PointClass> {
        let p = &state.layout.points()[idx];
        match p.kind {
            TileKind::Floor => None,
            TileKind::Serving => Some(PointClass::Serving),
            TileKind::OnionDispenser => Some(PointClass::OnionDisp),
            TileKind::DishDispenser => Some(PointClass::DishDisp),
            TileKind::Counter => Some(PointClass::counter_holding(state.counters[p.slot])),
            TileKind::Pot => {
                let pot = state.pots[p.slot];
                if pot.is_idle() {
                    Some(PointClass::IdlePot)
                } else if pot.is_ready() {
                    Some(PointClass::ReadyPot)
                } else {
                    None
                }
            }
        }
    }
}

/// One of the 13 condition names, before optional negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionBase {
    Hold(Item),
    Exists(PointClass),
}

impl ConditionBase {
    pub const ALL: [ConditionBase; 13] = [
        ConditionBase::Hold(Item::Empty),
        ConditionBase::Hold(Item::Onion),
        ConditionBase::Hold(Item::Dish),
        ConditionBase::Hold(Item::Soup),
        ConditionBase::Exists(PointClass::Serving),
        ConditionBase::Exists(PointClass::OnionDisp),
        ConditionBase::Exists(PointClass::DishDisp),
        ConditionBase::Exists(PointClass::OnionCounter),
        ConditionBase::Exists(PointClass::DishCounter),
        ConditionBase::Exists(PointClass::SoupCounter),
        ConditionBase::Exists(PointClass::EmptyCounter),
        ConditionBase::Exists(PointClass::IdlePot),
        ConditionBase::Exists(PointClass::ReadyPot),
    ];

    pub fn name(self) -> String {
        match self {
            ConditionBase::Hold(i) => {
                let n = i.name();
                format!("Hold{}{}", n[..1].to_ascii_uppercase(), &n[1..])
            }
            ConditionBase::Exists(c) => format!("Ex{}", c.name()),
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }

    pub fn is_hold(self) -> bool {
        matches!(self, ConditionBase::Hold(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Condition {
    pub base: ConditionBase,
    pub negated: bool,
}

impl Condition {
    pub fn pos(base: ConditionBase) -> Self {
        Condition {
            base,
            negated: false,
        }
    }

    pub fn neg(base: ConditionBase) -> Self {
        Condition {
            base,
            negated: true,
        }
    }

    pub fn hold(item: Item) -> Self {
        Self::pos(ConditionBase::Hold(item))
    }

    pub fn exists(class: PointClass) -> Self {
        Self::pos(ConditionBase::Exists(class))
    }

    pub fn negate(self) -> Self {
        Condition {
            negated: !self.negated,
            ..self
        }
    }

    /// Whether both can never hold at once: a condition and its negation, or
    /// two different positive hold states.
    pub fn conflicts_with(self, other: Condition) -> bool {
        if self.base == other.base {
            return self.negated != other.negated;
        }
        !self.negated && !other.negated && self.base.is_hold() && other.base.is_hold()
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        f.write_str(&self.base.name())
    }
}

/// `GoInt<Class>`: walk to the nearest reachable instance and interact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionPrimitive(pub PointClass);

impl ActionPrimitive {
    pub const ALL: [ActionPrimitive; 9] = [
        ActionPrimitive(PointClass::Serving),
        ActionPrimitive(PointClass::OnionDisp),
        ActionPrimitive(PointClass::DishDisp),
        ActionPrimitive(PointClass::OnionCounter),
        ActionPrimitive(PointClass::DishCounter),
        ActionPrimitive(PointClass::SoupCounter),
        ActionPrimitive(PointClass::EmptyCounter),
        ActionPrimitive(PointClass::IdlePot),
        ActionPrimitive(PointClass::ReadyPot),
    ];

    pub fn target(self) -> PointClass {
        self.0
    }

    pub fn name(self) -> String {
        format!("GoInt{}", self.0.name())
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for ActionPrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("line {line}: unknown primitive {name:?}")]
    UnknownPrimitive { line: usize, name: String },
    #[error("line {line}: empty conjunction")]
    EmptyConjunction { line: usize },
    #[error("line {line}: nested if is not allowed")]
    NestedIf { line: usize },
    #[error("line {line}: contradictory conjunction ({a} and {b})")]
    Contradiction { line: usize, a: String, b: String },
    #[error("line {line}: duplicate condition {name}")]
    DuplicateCondition { line: usize, name: String },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// `if <conditions...>: <action>`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ItModule {
    pub conditions: Vec<Condition>,
    pub action: ActionPrimitive,
}

impl ItModule {
    /// Checks the module invariants: non-empty conjunction, no repeated base
    /// name, no condition together with its negation. Redundant but
    /// consistent conjuncts (`HoldDish and not HoldEmpty`) are accepted.
    pub fn new(conditions: Vec<Condition>, action: ActionPrimitive) -> Result<Self, DslError> {
        validate_conjunction(&conditions, 0)?;
        Ok(ItModule { conditions, action })
    }
}

/// One line: `if A and not B: GoIntX`.
impl fmt::Display for ItModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let conds: Vec<String> = self.conditions.iter().map(ToString::to_string).collect();
        write!(f, "if {}: {}", conds.join(" and "), self.action)
    }
}

pub(crate) fn validate_conjunction(conds: &[Condition], line: usize) -> Result<(), DslError> {
    if conds.is_empty() {
        return Err(DslError::EmptyConjunction { line });
    }
    for (i, a) in conds.iter().enumerate() {
        for b in &conds[..i] {
            if a.base == b.base && a.negated == b.negated {
                return Err(DslError::DuplicateCondition {
                    line,
                    name: a.to_string(),
                });
            }
            if a.conflicts_with(*b) {
                return Err(DslError::Contradiction {
                    line,
                    a: b.to_string(),
                    b: a.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// A complete policy. When no module fires the policy takes a uniformly
/// random environment action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Program {
    pub modules: Vec<ItModule>,
}

impl Program {
    pub fn new(modules: Vec<ItModule>) -> Self {
        Program { modules }
    }

    /// Total number of condition occurrences.
    pub fn complexity(&self) -> usize {
        self.modules.iter().map(|m| m.conditions.len()).sum()
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_program(self))
    }
}

use rand::Rng;

use super::{ActionPrimitive, Condition, ConditionBase, PointClass, Program};
use crate::nav;
use crate::sim::{ElementKind, ElementState, ElementView, EnvAction, Item, PointType, WorldState};

/// Everything a condition can depend on: the chef's hold state and which
/// point classes currently exist within the chef's reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Percept {
    pub held: Item,
    pub reachable: u16,
}

impl Percept {
    pub fn observe(state: &WorldState, chef: usize) -> Self {
        Percept {
            held: state.chefs[chef].held,
            reachable: nav::reachable_classes(state, chef),
        }
    }

    /// Builds a percept from an element list (see
    /// [`crate::sim::observe_elements`]) and a reachability oracle over
    /// interaction-point indices.
    pub fn from_views(views: &[ElementView], reach: impl Fn(usize) -> bool) -> Self {
        let mut held = Item::Empty;
        let mut reachable = 0;
        for (i, v) in views.iter().enumerate() {
            let class = match (v.kind, v.state) {
                (ElementKind::Player, ElementState::Held(h)) => {
                    held = h;
                    continue;
                }
                (ElementKind::Point(PointType::Serving), _) => Some(PointClass::Serving),
                (ElementKind::Point(PointType::OnionDispenser), _) => Some(PointClass::OnionDisp),
                (ElementKind::Point(PointType::DishDispenser), _) => Some(PointClass::DishDisp),
                (ElementKind::Point(PointType::Counter), ElementState::Counter(item)) => {
                    Some(PointClass::counter_holding(item))
                }
                (ElementKind::Point(PointType::Pot), ElementState::Pot { onions, cook_time }) => {
                    if onions < 3 {
                        Some(PointClass::IdlePot)
                    } else if cook_time == crate::sim::COOK_TICKS {
                        Some(PointClass::ReadyPot)
                    } else {
                        None
                    }
                }
                _ => None,
            };
            if let Some(c) = class {
                if reach(i - 1) {
                    reachable |= c.bit();
                }
            }
        }
        Percept { held, reachable }
    }

    pub fn exists(&self, class: PointClass) -> bool {
        self.reachable & class.bit() != 0
    }
}

pub fn eval_condition(c: Condition, p: &Percept) -> bool {
    let raw = match c.base {
        ConditionBase::Hold(item) => p.held == item,
        ConditionBase::Exists(class) => p.exists(class),
    };
    raw != c.negated
}

/// Outcome of one policy decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Primitive {
        action: ActionPrimitive,
        module: usize,
    },
    Random(EnvAction),
}

/// First module (in list order) whose whole conjunction holds wins;
/// otherwise a uniformly random environment action.
pub fn select_action<R: Rng + ?Sized>(p: &Program, percept: &Percept, rng: &mut R) -> Selection {
    for (i, m) in p.modules.iter().enumerate() {
        if m.conditions.iter().all(|&c| eval_condition(c, percept)) {
            return Selection::Primitive {
                action: m.action,
                module: i,
            };
        }
    }
    Selection::Random(EnvAction::ALL[rng.gen_range(0..EnvAction::ALL.len())])
}

//! Symbolic per-chef view of the kitchen: the chef itself plus every
//! interaction point with its state and relative position.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::{ChefState, Item, PotState, TileKind, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointType {
    OnionDispenser,
    DishDispenser,
    Counter,
    Pot,
    Serving,
}

impl PointType {
    pub fn of(kind: TileKind) -> Option<PointType> {
        match kind {
            TileKind::Floor => None,
            TileKind::Counter => Some(PointType::Counter),
            TileKind::OnionDispenser => Some(PointType::OnionDispenser),
            TileKind::DishDispenser => Some(PointType::DishDispenser),
            TileKind::Pot => Some(PointType::Pot),
            TileKind::Serving => Some(PointType::Serving),
        }
    }

    pub fn is_stateless(self) -> bool {
        matches!(
            self,
            PointType::OnionDispenser | PointType::DishDispenser | PointType::Serving
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            PointType::OnionDispenser => "onionDisp",
            PointType::DishDispenser => "dishDisp",
            PointType::Counter => "counter",
            PointType::Pot => "pot",
            PointType::Serving => "serving",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Player,
    Point(PointType),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementState {
    /// Player hold state.
    Held(Item),
    Pot {
        onions: u8,
        cook_time: u8,
    },
    Counter(Item),
    /// Stateless points (dispensers, serving).
    Unit,
}

/// Position of an interaction point relative to the observing chef.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelPos {
    On,
    Face,
    Away,
}

impl RelPos {
    pub fn name(self) -> &'static str {
        match self {
            RelPos::On => "on",
            RelPos::Face => "face",
            RelPos::Away => "away",
        }
    }
}

/// One element's symbolic record: kind, state and (for interaction points)
/// position relative to the observer. Renders canonically as
/// `player.onion`, `dishDisp@face`, `pot.2.0@face`, `counter.empty@away`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementView {
    pub kind: ElementKind,
    pub state: ElementState,
    pub pos: Option<RelPos>,
}

impl ElementView {
    pub fn player(held: Item) -> Self {
        ElementView {
            kind: ElementKind::Player,
            state: ElementState::Held(held),
            pos: None,
        }
    }

    pub fn point(ty: PointType, state: ElementState, pos: RelPos) -> Self {
        ElementView {
            kind: ElementKind::Point(ty),
            state,
            pos: Some(pos),
        }
    }

    pub fn point_type(&self) -> Option<PointType> {
        match self.kind {
            ElementKind::Point(t) => Some(t),
            ElementKind::Player => None,
        }
    }

    pub fn is_stateless_point(&self) -> bool {
        self.point_type().is_some_and(PointType::is_stateless)
    }

    pub fn with_pos(self, pos: Option<RelPos>) -> Self {
        ElementView { pos, ..self }
    }
}

impl fmt::Display for ElementView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ElementKind::Player => f.write_str("player")?,
            ElementKind::Point(t) => f.write_str(t.name())?,
        }
        match self.state {
            ElementState::Held(i) | ElementState::Counter(i) => write!(f, ".{}", i.name())?,
            ElementState::Pot { onions, cook_time } => write!(f, ".{onions}.{cook_time}")?,
            ElementState::Unit => {}
        }
        if let Some(p) = self.pos {
            write!(f, "@{}", p.name())?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed element info {0:?}")]
pub struct ParseElementError(pub String);

impl FromStr for ElementView {
    type Err = ParseElementError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseElementError(s.to_string());
        let (body, pos) = match s.split_once('@') {
            Some((b, p)) => {
                let pos = match p {
                    "on" => RelPos::On,
                    "face" => RelPos::Face,
                    "away" => RelPos::Away,
                    _ => return Err(err()),
                };
                (b, Some(pos))
            }
            None => (s, None),
        };
        let mut parts = body.split('.');
        let head = parts.next().ok_or_else(err)?;
        let rest: Vec<&str> = parts.collect();
        let item = |v: &[&str]| match v {
            [name] => Item::from_name(name).ok_or_else(err),
            _ => Err(err()),
        };
        let view = match head {
            "player" => {
                if pos.is_some() {
                    return Err(err());
                }
                return Ok(ElementView::player(item(&rest)?));
            }
            "counter" => (PointType::Counter, ElementState::Counter(item(&rest)?)),
            "pot" => match rest.as_slice() {
                [o, c] => {
                    let onions = o.parse().map_err(|_| err())?;
                    let cook_time = c.parse().map_err(|_| err())?;
                    (PointType::Pot, ElementState::Pot { onions, cook_time })
                }
                _ => return Err(err()),
            },
            "onionDisp" | "dishDisp" | "serving" if rest.is_empty() => {
                let t = match head {
                    "onionDisp" => PointType::OnionDispenser,
                    "dishDisp" => PointType::DishDispenser,
                    _ => PointType::Serving,
                };
                (t, ElementState::Unit)
            }
            _ => return Err(err()),
        };
        let pos = pos.ok_or_else(err)?;
        Ok(ElementView::point(view.0, view.1, pos))
    }
}

fn rel_pos(chef: &ChefState, state: &WorldState, at: super::Coord) -> RelPos {
    if chef.pos == at {
        RelPos::On
    } else if chef.facing(&state.layout) == Some(at) {
        RelPos::Face
    } else {
        RelPos::Away
    }
}

/// Element list from one chef's perspective: index 0 is the chef itself,
/// index `i + 1` is interaction point `i` in row-major order. Indices are
/// stable across timesteps of the same layout.
pub fn observe_elements(state: &WorldState, chef: usize) -> Vec<ElementView> {
    let me = &state.chefs[chef];
    let mut out = Vec::with_capacity(state.layout.points().len() + 1);
    out.push(ElementView::player(me.held));
    for p in state.layout.points() {
        let ty = PointType::of(p.kind).expect("interaction point is never floor");
        let s = match ty {
            PointType::Pot => {
                let PotState { onions, cook_time } = state.pots[p.slot];
                ElementState::Pot { onions, cook_time }
            }
            PointType::Counter => ElementState::Counter(state.counters[p.slot]),
            _ => ElementState::Unit,
        };
        out.push(ElementView::point(ty, s, rel_pos(me, state, p.pos)));
    }
    out
}

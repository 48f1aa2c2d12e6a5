//! Deterministic two-chef onion-soup kitchen.
//!
//! One [`WorldState::step`] applies movement, then interactions (chef 0
//! first), then pot cooking, then advances the clock. The only reward is
//! +20 per delivered soup, shared by both chefs.

mod layout;
mod observe;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use layout::{GridLayout, InteractionPoint, LayoutError, Spawn, TileKind, BUNDLED};
pub use observe::{observe_elements, ElementKind, ElementState, ElementView, PointType, RelPos};

pub const COOK_TICKS: u8 = 20;
pub const SOUP_REWARD: u32 = 20;
pub const DEFAULT_HORIZON: u32 = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: usize,
    pub y: usize,
}

impl Coord {
    pub const fn new(x: usize, y: usize) -> Self {
        Coord { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    /// Fixed tie-break order used throughout path planning.
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
    ];

    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }

    pub fn action(self) -> EnvAction {
        match self {
            Direction::Up => EnvAction::Up,
            Direction::Down => EnvAction::Down,
            Direction::Left => EnvAction::Left,
            Direction::Right => EnvAction::Right,
        }
    }
}

/// Low-level action shared by both chefs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum EnvAction {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
    Noop = 4,
    Interact = 5,
}

impl EnvAction {
    pub const ALL: [EnvAction; 6] = [
        EnvAction::Up,
        EnvAction::Down,
        EnvAction::Left,
        EnvAction::Right,
        EnvAction::Noop,
        EnvAction::Interact,
    ];

    pub fn direction(self) -> Option<Direction> {
        match self {
            EnvAction::Up => Some(Direction::Up),
            EnvAction::Down => Some(Direction::Down),
            EnvAction::Left => Some(Direction::Left),
            EnvAction::Right => Some(Direction::Right),
            EnvAction::Noop | EnvAction::Interact => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvAction::Up => "up",
            EnvAction::Down => "down",
            EnvAction::Left => "left",
            EnvAction::Right => "right",
            EnvAction::Noop => "noop",
            EnvAction::Interact => "interact",
        }
    }
}

impl fmt::Display for EnvAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown action {0:?}")]
pub struct ParseActionError(pub String);

impl FromStr for EnvAction {
    type Err = ParseActionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EnvAction::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ParseActionError(s.to_string()))
    }
}

/// What a chef holds, or what lies on a counter.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Item {
    #[default]
    Empty,
    Onion,
    Dish,
    Soup,
}

impl Item {
    pub const ALL: [Item; 4] = [Item::Empty, Item::Onion, Item::Dish, Item::Soup];

    pub fn name(self) -> &'static str {
        match self {
            Item::Empty => "empty",
            Item::Onion => "onion",
            Item::Dish => "dish",
            Item::Soup => "soup",
        }
    }

    pub fn from_name(s: &str) -> Option<Item> {
        Item::ALL.into_iter().find(|i| i.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChefState {
    pub pos: Coord,
    pub orientation: Direction,
    pub held: Item,
}

impl ChefState {
    pub fn facing(&self, layout: &GridLayout) -> Option<Coord> {
        layout.neighbor(self.pos, self.orientation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PotState {
    pub onions: u8,
    pub cook_time: u8,
}

impl PotState {
    pub fn is_ready(self) -> bool {
        self.onions == 3 && self.cook_time == COOK_TICKS
    }

    /// Still accepting onions.
    pub fn is_idle(self) -> bool {
        self.onions < 3
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("episode terminated at t = {0}")]
    Terminated(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    pub layout: Arc<GridLayout>,
    pub chefs: [ChefState; 2],
    pub pots: Vec<PotState>,
    pub counters: Vec<Item>,
    pub t: u32,
    pub horizon: u32,
}

/// Serializable copy of everything in a [`WorldState`] except the layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub layout: String,
    pub t: u32,
    pub horizon: u32,
    pub chefs: [ChefState; 2],
    pub pots: Vec<PotState>,
    pub counters: Vec<Item>,
}

impl WorldState {
    /// Chefs at their spawns, pots and counters empty, `t = 0`.
    pub fn reset(layout: Arc<GridLayout>) -> Self {
        Self::with_horizon(layout, DEFAULT_HORIZON)
    }

    pub fn with_horizon(layout: Arc<GridLayout>, horizon: u32) -> Self {
        let chefs = layout.spawns.map(|s| ChefState {
            pos: s.pos,
            orientation: s.orientation,
            held: Item::Empty,
        });
        WorldState {
            pots: vec![PotState::default(); layout.n_pots()],
            counters: vec![Item::Empty; layout.n_counters()],
            chefs,
            t: 0,
            horizon,
            layout,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.t >= self.horizon
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            layout: self.layout.name.clone(),
            t: self.t,
            horizon: self.horizon,
            chefs: self.chefs,
            pots: self.pots.clone(),
            counters: self.counters.clone(),
        }
    }

    pub fn pot_at(&self, c: Coord) -> Option<PotState> {
        match self.layout.point_at(c) {
            Some(p) if p.kind == TileKind::Pot => Some(self.pots[p.slot]),
            _ => None,
        }
    }

    pub fn counter_at(&self, c: Coord) -> Option<Item> {
        match self.layout.point_at(c) {
            Some(p) if p.kind == TileKind::Counter => Some(self.counters[p.slot]),
            _ => None,
        }
    }

    /// Soups currently in the world: held, on counters, or ready in pots.
    pub fn soup_count(&self) -> usize {
        self.chefs.iter().filter(|c| c.held == Item::Soup).count()
            + self.counters.iter().filter(|&&c| c == Item::Soup).count()
            + self.pots.iter().filter(|p| p.is_ready()).count()
    }

    /// Advances one tick in place and returns the shared reward.
    pub fn step_mut(&mut self, a1: EnvAction, a2: EnvAction) -> Result<u32, StepError> {
        if self.is_terminal() {
            return Err(StepError::Terminated(self.t));
        }
        self.resolve_movement([a1, a2]);
        let mut reward = 0;
        for (i, a) in [a1, a2].into_iter().enumerate() {
            if a == EnvAction::Interact {
                reward += self.interact(i);
            }
        }
        for pot in &mut self.pots {
            if pot.onions == 3 && pot.cook_time < COOK_TICKS {
                pot.cook_time += 1;
            }
        }
        self.t += 1;
        Ok(reward)
    }

    pub fn step(&self, a1: EnvAction, a2: EnvAction) -> Result<(WorldState, u32), StepError> {
        let mut next = self.clone();
        let r = next.step_mut(a1, a2)?;
        Ok((next, r))
    }

    fn resolve_movement(&mut self, actions: [EnvAction; 2]) {
        let pos = [self.chefs[0].pos, self.chefs[1].pos];
        let mut dest = pos;
        for i in 0..2 {
            if let Some(d) = actions[i].direction() {
                self.chefs[i].orientation = d;
                if let Some(n) = self.layout.neighbor(pos[i], d) {
                    if self.layout.is_floor(n) {
                        dest[i] = n;
                    }
                }
            }
        }
        let same_target = dest[0] == dest[1];
        let swap = dest[0] == pos[1] && dest[1] == pos[0];
        if same_target || swap {
            return;
        }
        // A chef may only enter the other's tile if that chef actually leaves.
        loop {
            let mut changed = false;
            for i in 0..2 {
                if dest[i] != pos[i] && dest[i] == dest[1 - i] {
                    dest[i] = pos[i];
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.chefs[0].pos = dest[0];
        self.chefs[1].pos = dest[1];
    }

    fn interact(&mut self, chef: usize) -> u32 {
        let Some(target) = self.chefs[chef].facing(&self.layout) else {
            return 0;
        };
        let Some(point) = self.layout.point_at(target).copied() else {
            return 0;
        };
        let held = self.chefs[chef].held;
        let mut reward = 0;
        let new_held = match (point.kind, held) {
            (TileKind::OnionDispenser, Item::Empty) => Item::Onion,
            (TileKind::DishDispenser, Item::Empty) => Item::Dish,
            (TileKind::Pot, Item::Onion) if self.pots[point.slot].onions < 3 => {
                self.pots[point.slot].onions += 1;
                Item::Empty
            }
            (TileKind::Pot, Item::Dish) if self.pots[point.slot].is_ready() => {
                self.pots[point.slot] = PotState::default();
                Item::Soup
            }
            (TileKind::Serving, Item::Soup) => {
                reward = SOUP_REWARD;
                Item::Empty
            }
            (TileKind::Counter, h) => {
                let on_counter = self.counters[point.slot];
                match (h, on_counter) {
                    (Item::Empty, Item::Empty) => Item::Empty,
                    (Item::Empty, c) => {
                        self.counters[point.slot] = Item::Empty;
                        c
                    }
                    (h, Item::Empty) => {
                        self.counters[point.slot] = h;
                        Item::Empty
                    }
                    (h, _) => h,
                }
            }
            (_, h) => h,
        };
        self.chefs[chef].held = new_held;
        reward
    }

    /// Same state with the chef indices exchanged.
    pub fn swapped(&self) -> WorldState {
        let mut s = self.clone();
        s.chefs.swap(0, 1);
        s
    }
}

//! Kitchen layouts: ASCII parsing, validation and the bundled set.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Coord, Direction};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LayoutError {
    #[error("empty layout")]
    Empty,
    #[error("non-rectangular grid: row {row} has width {found}, expected {expected}")]
    NotRectangular {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("unknown character {ch:?} at ({x},{y})")]
    UnknownChar { ch: char, x: usize, y: usize },
    #[error("spawn count: expected exactly one '1' and one '2', found {ones} and {twos}")]
    SpawnCount { ones: usize, twos: usize },
    #[error("no pot")]
    NoPot,
    #[error("no onion dispenser")]
    NoOnionDispenser,
    #[error("no serving station")]
    NoServing,
    #[error("floor tile ({x},{y}) lies on the grid boundary")]
    OpenBoundary { x: usize, y: usize },
    #[error("floor region containing ({x},{y}) has no spawn")]
    OrphanFloor { x: usize, y: usize },
    #[error("unknown bundled layout {0:?}")]
    UnknownBundled(String),
    #[error("reading layout file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileKind {
    Floor,
    Counter,
    OnionDispenser,
    DishDispenser,
    Pot,
    Serving,
}

impl TileKind {
    pub fn is_floor(self) -> bool {
        self == TileKind::Floor
    }

    fn to_char(self) -> char {
        match self {
            TileKind::Floor => ' ',
            TileKind::Counter => 'X',
            TileKind::OnionDispenser => 'O',
            TileKind::DishDispenser => 'D',
            TileKind::Pot => 'P',
            TileKind::Serving => 'S',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spawn {
    pub pos: Coord,
    pub orientation: Direction,
}

/// A non-floor tile chefs can act on, in row-major order. `slot` indexes the
/// per-kind state vectors of [`super::WorldState`] (pots, counters).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteractionPoint {
    pub pos: Coord,
    pub kind: TileKind,
    pub slot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridLayout {
    pub name: String,
    pub width: usize,
    pub height: usize,
    tiles: Vec<TileKind>,
    pub spawns: [Spawn; 2],
    points: Vec<InteractionPoint>,
    point_at: Vec<Option<usize>>,
    n_pots: usize,
    n_counters: usize,
}

pub const BUNDLED: [(&str, &str); 10] = [
    (
        "cramped_room",
        include_str!("../../../../layouts/cramped_room.layout"),
    ),
    (
        "asymmetric_advantages",
        include_str!("../../../../layouts/asymmetric_advantages.layout"),
    ),
    (
        "coordination_ring",
        include_str!("../../../../layouts/coordination_ring.layout"),
    ),
    (
        "forced_coordination",
        include_str!("../../../../layouts/forced_coordination.layout"),
    ),
    (
        "counter_circuit",
        include_str!("../../../../layouts/counter_circuit.layout"),
    ),
    (
        "cramped_room_v2",
        include_str!("../../../../layouts/cramped_room_v2.layout"),
    ),
    (
        "asymmetric_advantages_v2",
        include_str!("../../../../layouts/asymmetric_advantages_v2.layout"),
    ),
    (
        "coordination_ring_v2",
        include_str!("../../../../layouts/coordination_ring_v2.layout"),
    ),
    (
        "forced_coordination_v2",
        include_str!("../../../../layouts/forced_coordination_v2.layout"),
    ),
    (
        "counter_circuit_v2",
        include_str!("../../../../layouts/counter_circuit_v2.layout"),
    ),
];

impl GridLayout {
    /// Parses and validates an ASCII layout. Trailing blank lines are
    /// ignored; every other line is one grid row.
    pub fn parse(name: &str, text: &str) -> Result<Self, LayoutError> {
        let rows: Vec<&str> = text
            .trim_end_matches(['\n', '\r'])
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .collect();
        if rows.is_empty() || rows.iter().all(|r| r.is_empty()) {
            return Err(LayoutError::Empty);
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut tiles = Vec::with_capacity(width * height);
        let mut spawn1 = Vec::new();
        let mut spawn2 = Vec::new();
        for (y, row) in rows.iter().enumerate() {
            let found = row.chars().count();
            if found != width {
                return Err(LayoutError::NotRectangular {
                    row: y,
                    found,
                    expected: width,
                });
            }
            for (x, ch) in row.chars().enumerate() {
                let kind = match ch {
                    'X' => TileKind::Counter,
                    'O' => TileKind::OnionDispenser,
                    'D' => TileKind::DishDispenser,
                    'P' => TileKind::Pot,
                    'S' => TileKind::Serving,
                    ' ' => TileKind::Floor,
                    '1' => {
                        spawn1.push(Coord::new(x, y));
                        TileKind::Floor
                    }
                    '2' => {
                        spawn2.push(Coord::new(x, y));
                        TileKind::Floor
                    }
                    _ => return Err(LayoutError::UnknownChar { ch, x, y }),
                };
                tiles.push(kind);
            }
        }
        if spawn1.len() != 1 || spawn2.len() != 1 {
            return Err(LayoutError::SpawnCount {
                ones: spawn1.len(),
                twos: spawn2.len(),
            });
        }
        let count = |k: TileKind| tiles.iter().filter(|&&t| t == k).count();
        if count(TileKind::Pot) == 0 {
            return Err(LayoutError::NoPot);
        }
        if count(TileKind::OnionDispenser) == 0 {
            return Err(LayoutError::NoOnionDispenser);
        }
        if count(TileKind::Serving) == 0 {
            return Err(LayoutError::NoServing);
        }

        let mut points = Vec::new();
        let mut point_at = vec![None; tiles.len()];
        let (mut n_pots, mut n_counters) = (0, 0);
        for (i, &kind) in tiles.iter().enumerate() {
            if kind.is_floor() {
                continue;
            }
            let slot = match kind {
                TileKind::Pot => {
                    n_pots += 1;
                    n_pots - 1
                }
                TileKind::Counter => {
                    n_counters += 1;
                    n_counters - 1
                }
                _ => 0,
            };
            point_at[i] = Some(points.len());
            points.push(InteractionPoint {
                pos: Coord::new(i % width, i / width),
                kind,
                slot,
            });
        }

        let layout = GridLayout {
            name: name.to_string(),
            width,
            height,
            tiles,
            spawns: [
                Spawn {
                    pos: spawn1[0],
                    orientation: Direction::Up,
                },
                Spawn {
                    pos: spawn2[0],
                    orientation: Direction::Up,
                },
            ],
            points,
            point_at,
            n_pots,
            n_counters,
        };
        layout.validate_floor()?;
        Ok(layout)
    }

    // Floor may not touch the boundary, and every 4-connected floor region
    // must hold a spawn. Split kitchens (one region per chef) are allowed.
    fn validate_floor(&self) -> Result<(), LayoutError> {
        for y in 0..self.height {
            for x in 0..self.width {
                let on_edge = x == 0 || y == 0 || x + 1 == self.width || y + 1 == self.height;
                if on_edge && self.tile(Coord::new(x, y)).is_floor() {
                    return Err(LayoutError::OpenBoundary { x, y });
                }
            }
        }
        let mut seen = vec![false; self.tiles.len()];
        let mut queue = VecDeque::new();
        for spawn in &self.spawns {
            let i = self.index(spawn.pos);
            if !seen[i] {
                seen[i] = true;
                queue.push_back(spawn.pos);
            }
        }
        while let Some(c) = queue.pop_front() {
            for d in Direction::ALL {
                if let Some(n) = self.neighbor(c, d) {
                    let i = self.index(n);
                    if !seen[i] && self.tiles[i].is_floor() {
                        seen[i] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        for (i, &t) in self.tiles.iter().enumerate() {
            if t.is_floor() && !seen[i] {
                return Err(LayoutError::OrphanFloor {
                    x: i % self.width,
                    y: i / self.width,
                });
            }
        }
        Ok(())
    }

    pub fn bundled(name: &str) -> Result<Self, LayoutError> {
        BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, text)| Self::parse(n, text))
            .unwrap_or_else(|| Err(LayoutError::UnknownBundled(name.to_string())))
    }

    /// Resolves a bundled layout name, or else reads a `.layout` file whose
    /// stem becomes the layout name.
    pub fn resolve(name_or_path: &str) -> Result<Self, LayoutError> {
        if BUNDLED.iter().any(|(n, _)| *n == name_or_path) {
            return Self::bundled(name_or_path);
        }
        let path = Path::new(name_or_path);
        let text = std::fs::read_to_string(path)
            .map_err(|e| LayoutError::Io(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("custom");
        Self::parse(name, &text)
    }

    #[inline]
    pub fn index(&self, c: Coord) -> usize {
        c.y * self.width + c.x
    }

    #[inline]
    pub fn tile(&self, c: Coord) -> TileKind {
        self.tiles[self.index(c)]
    }

    pub fn n_tiles(&self) -> usize {
        self.tiles.len()
    }

    pub fn neighbor(&self, c: Coord, d: Direction) -> Option<Coord> {
        let (dx, dy) = d.delta();
        let x = c.x as isize + dx;
        let y = c.y as isize + dy;
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            None
        } else {
            Some(Coord::new(x as usize, y as usize))
        }
    }

    pub fn is_floor(&self, c: Coord) -> bool {
        self.tile(c).is_floor()
    }

    /// All interaction points in row-major order.
    pub fn points(&self) -> &[InteractionPoint] {
        &self.points
    }

    pub fn point_at(&self, c: Coord) -> Option<&InteractionPoint> {
        self.point_at[self.index(c)].map(|i| &self.points[i])
    }

    pub fn point_index_at(&self, c: Coord) -> Option<usize> {
        self.point_at[self.index(c)]
    }

    pub fn n_pots(&self) -> usize {
        self.n_pots
    }

    pub fn n_counters(&self) -> usize {
        self.n_counters
    }

    pub fn count(&self, kind: TileKind) -> usize {
        self.tiles.iter().filter(|&&t| t == kind).count()
    }

    /// Renders back to the ASCII format, spawns included.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let c = Coord::new(x, y);
                let ch = if c == self.spawns[0].pos {
                    '1'
                } else if c == self.spawns[1].pos {
                    '2'
                } else {
                    self.tile(c).to_char()
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for GridLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ascii())
    }
}

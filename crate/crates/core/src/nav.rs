//! BFS low-level control: reachability of point classes and one-step
//! lowering of `GoInt*` primitives to environment actions.
//!
//! Planning treats the other chef as transparent; execution does not. If the
//! planned step is contested (the teammate stands on the next tile or faces
//! it) a random non-interact action is taken instead so the two chefs can
//! untangle in corridors.

use std::collections::VecDeque;

use rand::Rng;
use thiserror::Error;

use crate::dsl::{ActionPrimitive, PointClass};
use crate::sim::{Coord, Direction, EnvAction, GridLayout, WorldState};

const UNREACHED: u16 = u16::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NavError {
    #[error("no reachable instance of {0:?}")]
    Unreachable(PointClass),
}

/// BFS distances over floor tiles from `from`, indexed by tile.
pub fn distances(layout: &GridLayout, from: Coord) -> Vec<u16> {
    let mut dist = vec![UNREACHED; layout.n_tiles()];
    dist[layout.index(from)] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(c) = queue.pop_front() {
        let d = dist[layout.index(c)];
        for dir in Direction::ALL {
            if let Some(n) = layout.neighbor(c, dir) {
                let i = layout.index(n);
                if dist[i] == UNREACHED && layout.is_floor(n) {
                    dist[i] = d + 1;
                    queue.push_back(n);
                }
            }
        }
    }
    dist
}

/// Floor tiles from which `point` can be faced, with the facing direction,
/// in fixed direction order.
fn standing_tiles(
    layout: &GridLayout,
    point: Coord,
) -> impl Iterator<Item = (Coord, Direction)> + '_ {
    Direction::ALL.into_iter().filter_map(move |d| {
        let n = layout.neighbor(point, d)?;
        layout.is_floor(n).then(|| (n, opposite(d)))
    })
}

fn opposite(d: Direction) -> Direction {
    match d {
        Direction::Up => Direction::Down,
        Direction::Down => Direction::Up,
        Direction::Left => Direction::Right,
        Direction::Right => Direction::Left,
    }
}

fn point_reachable_with(layout: &GridLayout, dist: &[u16], point: Coord) -> bool {
    standing_tiles(layout, point).any(|(s, _)| dist[layout.index(s)] != UNREACHED)
}

/// Whether interaction point `idx` (row-major) can be reached and faced.
pub fn point_reachable(state: &WorldState, chef: usize, idx: usize) -> bool {
    let layout = &state.layout;
    let dist = distances(layout, state.chefs[chef].pos);
    point_reachable_with(layout, &dist, layout.points()[idx].pos)
}

/// Bitset (see [`PointClass::bit`]) of classes with at least one reachable
/// instance.
pub fn reachable_classes(state: &WorldState, chef: usize) -> u16 {
    let layout = &state.layout;
    let dist = distances(layout, state.chefs[chef].pos);
    let mut bits = 0;
    for (i, p) in layout.points().iter().enumerate() {
        if let Some(class) = PointClass::of_point(state, i) {
            if bits & class.bit() == 0 && point_reachable_with(layout, &dist, p.pos) {
                bits |= class.bit();
            }
        }
    }
    bits
}

pub fn reachable(state: &WorldState, chef: usize, class: PointClass) -> bool {
    reachable_classes(state, chef) & class.bit() != 0
}

/// Where the chef should stand and which way it should face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Goal {
    pub point: Coord,
    pub stand: Coord,
    pub face: Direction,
    pub distance: u16,
}

/// Nearest instance of `class` by BFS distance to a facing tile. Ties go to
/// the first point in row-major order, then to the first facing tile in
/// up/down/left/right order.
pub fn nearest_goal(state: &WorldState, chef: usize, class: PointClass) -> Option<Goal> {
    let layout = &state.layout;
    let dist = distances(layout, state.chefs[chef].pos);
    let mut best: Option<Goal> = None;
    for (i, p) in layout.points().iter().enumerate() {
        if PointClass::of_point(state, i) != Some(class) {
            continue;
        }
        for (stand, face) in standing_tiles(layout, p.pos) {
            let d = dist[layout.index(stand)];
            if d != UNREACHED && best.map_or(true, |b| d < b.distance) {
                best = Some(Goal {
                    point: p.pos,
                    stand,
                    face,
                    distance: d,
                });
            }
        }
    }
    best
}

/// The action the low-level controller takes this tick for `primitive`.
pub fn next_env_action<R: Rng + ?Sized>(
    state: &WorldState,
    chef: usize,
    primitive: ActionPrimitive,
    rng: &mut R,
) -> Result<EnvAction, NavError> {
    let class = primitive.target();
    let me = &state.chefs[chef];
    let layout = &state.layout;
    if let Some(f) = me.facing(layout) {
        if let Some(idx) = layout.point_index_at(f) {
            if PointClass::of_point(state, idx) == Some(class) {
                return Ok(EnvAction::Interact);
            }
        }
    }
    let goal = nearest_goal(state, chef, class).ok_or(NavError::Unreachable(class))?;
    if goal.stand == me.pos {
        return Ok(goal.face.action());
    }
    let to_goal = distances(layout, goal.stand);
    let here = to_goal[layout.index(me.pos)];
    let dir = Direction::ALL
        .into_iter()
        .find(|&d| {
            layout
                .neighbor(me.pos, d)
                .is_some_and(|n| layout.is_floor(n) && to_goal[layout.index(n)] == here - 1)
        })
        .expect("a reachable goal has a descending neighbour");
    let next = layout.neighbor(me.pos, dir).expect("checked above");
    let mate = &state.chefs[1 - chef];
    // a moving chef faces the tile it is about to enter
    if next == mate.pos || mate.facing(layout) == Some(next) {
        const SIDESTEP: [EnvAction; 5] = [
            EnvAction::Up,
            EnvAction::Down,
            EnvAction::Left,
            EnvAction::Right,
            EnvAction::Noop,
        ];
        return Ok(SIDESTEP[rng.gen_range(0..SIDESTEP.len())]);
    }
    Ok(dir.action())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::sim::{ChefState, Item, PotState};

    fn world(ascii: &str) -> WorldState {
        WorldState::reset(Arc::new(GridLayout::parse("t", ascii).unwrap()))
    }

    fn put(s: &mut WorldState, chef: usize, x: usize, y: usize, d: Direction) {
        s.chefs[chef] = ChefState {
            pos: Coord::new(x, y),
            orientation: d,
            held: Item::Empty,
        };
    }

    #[test]
    fn serving_unreachable_from_left_of_forced_coordination() {
        let s = WorldState::reset(Arc::new(
            GridLayout::bundled("forced_coordination").unwrap(),
        ));
        // chef index 1 spawns on the left side
        assert!(!reachable(&s, 1, PointClass::Serving));
        assert!(reachable(&s, 0, PointClass::Serving));
        assert!(reachable(&s, 1, PointClass::OnionDisp));
        assert!(!reachable(&s, 0, PointClass::OnionDisp));
    }

    #[test]
    fn adjacent_target_is_reachable() {
        let mut s = world("XXPXX\nO  2X\nX1  X\nXDXSX\n");
        put(&mut s, 0, 1, 1, Direction::Right);
        assert!(reachable(&s, 0, PointClass::OnionDisp));
    }

    #[test]
    fn absent_class_is_unreachable() {
        let mut s = world("XXPXX\nO  2X\nX1  X\nXDXSX\n");
        s.pots[0] = PotState {
            onions: 3,
            cook_time: 4,
        };
        assert!(!reachable(&s, 0, PointClass::IdlePot));
        assert!(!reachable(&s, 0, PointClass::ReadyPot));
    }

    #[test]
    fn facing_target_interacts() {
        let mut s = WorldState::reset(Arc::new(GridLayout::bundled("cramped_room").unwrap()));
        s.pots[0] = PotState {
            onions: 3,
            cook_time: 20,
        };
        put(&mut s, 0, 2, 1, Direction::Up);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = next_env_action(&s, 0, ActionPrimitive(PointClass::ReadyPot), &mut rng).unwrap();
        assert_eq!(a, EnvAction::Interact);
    }

    #[test]
    fn corridor_walks_towards_dispenser() {
        let mut s = world("XPXSXXX\nX1    O\nX2XXXXX\nXXXXXXX\n");
        put(&mut s, 0, 2, 1, Direction::Up);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = next_env_action(&s, 0, ActionPrimitive(PointClass::OnionDisp), &mut rng).unwrap();
        assert_eq!(a, EnvAction::Right);
    }

    #[test]
    fn equidistant_pots_pick_row_major_first() {
        // two pots on the top wall, chef centred beneath them
        let mut s = world("XPXPX\nX   X\nX1 2X\nXOXSX\n");
        put(&mut s, 0, 2, 1, Direction::Down);
        put(&mut s, 1, 3, 2, Direction::Down);
        let g = nearest_goal(&s, 0, PointClass::IdlePot).unwrap();
        assert_eq!(g.point, Coord::new(1, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            assert_eq!(
                next_env_action(&s, 0, ActionPrimitive(PointClass::IdlePot), &mut rng),
                Ok(EnvAction::Left)
            );
        }
    }

    #[test]
    fn unreachable_target_is_an_error() {
        let s = WorldState::reset(Arc::new(
            GridLayout::bundled("forced_coordination").unwrap(),
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            next_env_action(&s, 1, ActionPrimitive(PointClass::Serving), &mut rng),
            Err(NavError::Unreachable(PointClass::Serving))
        );
    }

    #[test]
    fn contested_tile_sidesteps() {
        // both chefs want the free tile between them
        let mut s = world("XPXSXXX\nX1 2  O\nXXXXXXX\n");
        put(&mut s, 0, 2, 1, Direction::Right);
        put(&mut s, 1, 4, 1, Direction::Left);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let seen: std::collections::HashSet<_> = (0..50)
            .map(|_| {
                next_env_action(&s, 0, ActionPrimitive(PointClass::OnionDisp), &mut rng).unwrap()
            })
            .collect();
        assert!(seen.len() > 1);
        put(&mut s, 1, 4, 1, Direction::Up);
        assert_eq!(
            next_env_action(&s, 0, ActionPrimitive(PointClass::OnionDisp), &mut rng),
            Ok(EnvAction::Right)
        );
    }

    #[test]
    fn blocked_by_teammate_sidesteps() {
        let mut s = world("XPXSXXX\nX1 2  O\nXXXXXXX\n");
        put(&mut s, 0, 2, 1, Direction::Up);
        put(&mut s, 1, 3, 1, Direction::Up);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..100 {
            let a =
                next_env_action(&s, 0, ActionPrimitive(PointClass::OnionDisp), &mut rng).unwrap();
            assert_ne!(a, EnvAction::Interact);
            seen.insert(a);
        }
        assert!(seen.len() > 1);
    }
}

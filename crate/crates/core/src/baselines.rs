//! Scripted policies that drive the environment without learning.
//!
//! Every policy reads only one agent's [`Observation`] plus its own private
//! state, so it runs under any paradigm. Given the same seed and the same
//! observation stream a policy emits the same commands.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::Observation;
use crate::geometry::{wrap_angle, Vec2};
use crate::kinematics::{ActionCommand, ActionVariant};
use crate::mapping::{logit, probability};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    RandomWalk,
    Stationary,
    FrontierGreedy,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::RandomWalk, PolicyKind::Stationary, PolicyKind::FrontierGreedy];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::RandomWalk => "random_walk",
            PolicyKind::Stationary => "stationary",
            PolicyKind::FrontierGreedy => "frontier_greedy",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Geometry a policy needs to interpret observations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyParams {
    pub variant: ActionVariant,
    /// Lattice cell size in meters.
    pub cell_size: f64,
    /// Distance covered in one step at full speed (`v_max · dt`).
    pub step_length: f64,
    /// LiDAR field of view, used to recover ray directions.
    pub field_of_view: f64,
    /// Steps a random-walk command is held before resampling.
    pub hold_steps: u32,
    /// Log-odds magnitude above which a cell counts as known.
    pub epsilon: f64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            variant: ActionVariant::Planar2d,
            cell_size: 0.04,
            step_length: 0.08,
            field_of_view: TAU,
            hold_steps: 1,
            epsilon: 0.3,
        }
    }
}

/// Obstacle inflation radius for frontier planning, in cells.
const INFLATE_CELLS: i32 = 3;
/// How far along the planned path the steering target sits, in cells.
const LOOKAHEAD_CELLS: usize = 4;
/// Steps spent on a random escape heading after a detected contact.
const ESCAPE_STEPS: u32 = 6;
/// Fraction of the expected displacement below which motion counts as blocked.
const BLOCKED_FRACTION: f64 = 0.3;

#[derive(Clone, Debug)]
struct Heading {
    dir: Vec2,
    steps_left: u32,
}

#[derive(Clone, Debug)]
pub struct Policy {
    kind: PolicyKind,
    params: PolicyParams,
    rng: ChaCha8Rng,
    held: Option<(ActionCommand, u32)>,
    last_position: Option<Vec2>,
    last_moving: bool,
    escape: Option<Heading>,
    explore: Option<Vec2>,
}

/// Classification of one ego-map cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CellClass {
    Free,
    Occupied,
    Unknown,
}

impl Policy {
    pub fn new(kind: PolicyKind, params: PolicyParams, seed: u64) -> Self {
        Self {
            kind,
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            held: None,
            last_position: None,
            last_moving: false,
            escape: None,
            explore: None,
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Clears per-episode state and reseeds.
    pub fn reset(&mut self, seed: u64) {
        *self = Self::new(self.kind, self.params, seed);
    }

    pub fn act(&mut self, obs: &Observation) -> ActionCommand {
        match self.kind {
            PolicyKind::Stationary => ActionCommand::zero(self.params.variant),
            PolicyKind::RandomWalk => self.random_walk(),
            PolicyKind::FrontierGreedy => self.frontier_greedy(obs),
        }
    }

    fn random_walk(&mut self) -> ActionCommand {
        if let Some((cmd, left)) = self.held.as_mut() {
            if *left > 0 {
                *left -= 1;
                return *cmd;
            }
        }
        let dim = self.params.variant.dim();
        let values: Vec<f64> = (0..dim).map(|_| self.rng.gen_range(-1.0..=1.0)).collect();
        let cmd = ActionCommand::from_slice(self.params.variant, &values).expect("arity matches");
        self.held = Some((cmd, self.params.hold_steps.saturating_sub(1)));
        cmd
    }

    fn frontier_greedy(&mut self, obs: &Observation) -> ActionCommand {
        let position = Vec2::new(obs.pose[0], obs.pose[1]);
        let heading = obs.pose[2];
        let blocked = match self.last_position {
            Some(prev) if self.last_moving => {
                position.distance(prev) < BLOCKED_FRACTION * self.params.step_length
            }
            _ => false,
        };
        self.last_position = Some(position);

        if blocked {
            self.explore = None;
            let dir = self.open_direction(obs, 0.5);
            self.escape = Some(Heading { dir, steps_left: ESCAPE_STEPS });
        }
        if let Some(esc) = self.escape.as_mut() {
            if esc.steps_left > 0 {
                esc.steps_left -= 1;
                let dir = esc.dir;
                return self.emit(dir, heading);
            }
            self.escape = None;
        }

        let dir = match plan_to_frontier(obs, &self.params) {
            Some(dir) => {
                self.explore = None;
                dir
            }
            None => match self.explore {
                Some(dir) => dir,
                None => {
                    let dir = self.open_direction(obs, 1.0);
                    self.explore = Some(dir);
                    dir
                }
            },
        };
        self.emit(dir, heading)
    }

    /// A seeded random ray direction among those whose range is at least
    /// `min_range` meters (any ray if none qualifies).
    fn open_direction(&mut self, obs: &Observation, min_range: f64) -> Vec2 {
        let n = obs.lidar.len();
        if n == 0 {
            return Vec2::from_angle(self.rng.gen_range(0.0..TAU));
        }
        let open: Vec<usize> = (0..n).filter(|&k| obs.lidar[k] >= min_range).collect();
        let k = if open.is_empty() { self.rng.gen_range(0..n) } else { open[self.rng.gen_range(0..open.len())] };
        let angle = obs.pose[2] + self.params.field_of_view * (k as f64 / n as f64 - 0.5);
        Vec2::from_angle(angle)
    }

    /// Converts a unit world-frame direction into a command of the
    /// configured variant.
    fn emit(&mut self, dir: Vec2, heading: f64) -> ActionCommand {
        self.last_moving = dir.norm_sq() > 0.0;
        let v = self.params.variant;
        let values: Vec<f64> = match v {
            ActionVariant::Planar2d | ActionVariant::Waypoint => vec![dir.x, dir.y],
            ActionVariant::Full3d => {
                let body = dir.rotated(-heading);
                vec![body.x, body.y, 0.0]
            }
            ActionVariant::ForwardRot => {
                let error = wrap_angle(libm::atan2(dir.y, dir.x) - heading);
                let forward = if error.abs() < 0.3 { 1.0 } else { 0.0 };
                vec![forward, error.clamp(-1.0, 1.0)]
            }
        };
        ActionCommand::from_slice(v, &values).expect("arity matches")
    }
}

fn classify(p: f64, free_below: f64, occupied_above: f64) -> CellClass {
    if p < free_below {
        CellClass::Free
    } else if p > occupied_above {
        CellClass::Occupied
    } else {
        CellClass::Unknown
    }
}

/// Breadth-first search from the agent's cell to the nearest reachable
/// frontier cell in the egocentric window. Returns the unit world-frame
/// direction toward a look-ahead point on that path, or `None` when the
/// window holds no reachable frontier.
fn plan_to_frontier(obs: &Observation, params: &PolicyParams) -> Option<Vec2> {
    let map = &obs.ego_map;
    let size = map.size;
    if size == 0 {
        return None;
    }
    let free_below = probability(-params.epsilon);
    let occupied_above = probability(params.epsilon);
    debug_assert!((logit(free_below) + params.epsilon).abs() < 1e-9);
    let (ci, cj) = map.center();
    let center = cj * size + ci;
    let mut class: Vec<CellClass> =
        map.values.iter().map(|&p| classify(p, free_below, occupied_above)).collect();
    // The agent's own cell is never written by its own scans, but it is
    // free by construction.
    class[center] = CellClass::Free;

    let clearance = obstacle_clearance(&class, size);
    let required = clearance[center].min(INFLATE_CELLS + 1);
    let passable = |idx: usize| class[idx] == CellClass::Free && clearance[idx] >= required;

    let is_frontier = |i: usize, j: usize| {
        let idx = j * size + i;
        if idx == center || !passable(idx) {
            return false;
        }
        let neighbors = [(1i32, 0i32), (-1, 0), (0, 1), (0, -1)];
        neighbors.iter().any(|&(di, dj)| {
            let (ni, nj) = (i as i32 + di, j as i32 + dj);
            ni >= 0
                && nj >= 0
                && (ni as usize) < size
                && (nj as usize) < size
                && class[nj as usize * size + ni as usize] == CellClass::Unknown
        })
    };

    let mut parent = vec![usize::MAX; size * size];
    parent[center] = center;
    let mut queue = VecDeque::from([center]);
    let mut target = None;
    while let Some(idx) = queue.pop_front() {
        let (i, j) = (idx % size, idx / size);
        if is_frontier(i, j) {
            target = Some(idx);
            break;
        }
        for dj in -1i32..=1 {
            for di in -1i32..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (i as i32 + di, j as i32 + dj);
                if ni < 0 || nj < 0 || ni as usize >= size || nj as usize >= size {
                    continue;
                }
                let nidx = nj as usize * size + ni as usize;
                if parent[nidx] != usize::MAX || !passable(nidx) {
                    continue;
                }
                // No corner cutting between two blocked cells.
                if di != 0 && dj != 0 {
                    let a = j * size + ni as usize;
                    let b = nj as usize * size + i;
                    if !passable(a) && !passable(b) {
                        continue;
                    }
                }
                parent[nidx] = idx;
                queue.push_back(nidx);
            }
        }
    }

    let target = target?;
    let mut path = vec![target];
    while *path.last().expect("nonempty") != center {
        let p = parent[*path.last().expect("nonempty")];
        path.push(p);
    }
    path.reverse();
    let aim = path[LOOKAHEAD_CELLS.min(path.len() - 1)];

    let cs = params.cell_size;
    let position = Vec2::new(obs.pose[0], obs.pose[1]);
    let own_x = libm::floor(position.x / cs);
    let own_y = libm::floor(position.y / cs);
    let (ai, aj) = (aim % size, aim / size);
    let aim_world = Vec2::new(
        (own_x + ai as f64 - ci as f64 + 0.5) * cs,
        (own_y + aj as f64 - cj as f64 + 0.5) * cs,
    );
    let delta = aim_world - position;
    let n = delta.norm();
    if n == 0.0 {
        return None;
    }
    Some(delta * (1.0 / n))
}

/// Chebyshev distance in cells from each cell to the nearest occupied
/// cell, saturating at `INFLATE_CELLS + 1`.
fn obstacle_clearance(class: &[CellClass], size: usize) -> Vec<i32> {
    let cap = INFLATE_CELLS + 1;
    let mut out = vec![cap; size * size];
    for j in 0..size {
        for i in 0..size {
            if class[j * size + i] != CellClass::Occupied {
                continue;
            }
            let (i, j) = (i as i32, j as i32);
            for dj in -INFLATE_CELLS..=INFLATE_CELLS {
                for di in -INFLATE_CELLS..=INFLATE_CELLS {
                    let (ni, nj) = (i + di, j + dj);
                    if ni < 0 || nj < 0 || ni as usize >= size || nj as usize >= size {
                        continue;
                    }
                    let d = di.abs().max(dj.abs());
                    let slot = &mut out[nj as usize * size + ni as usize];
                    *slot = (*slot).min(d);
                }
            }
        }
    }
    out
}

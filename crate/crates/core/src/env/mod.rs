//! The episode loop: reset/step, joint observations, the shared reward,
//! termination, paradigm shaping and the curriculum.

mod curriculum;
mod observation;
pub mod paradigm;
mod reward;

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use curriculum::{curriculum_update, CurriculumConfig, CurriculumMode, CurriculumState};
pub use observation::{Observation, ObservationLayout, ObservationSet, ObservationVariant};
pub use paradigm::{Paradigm, ParadigmObservation};
pub use reward::{a_max, compute_reward};

use crate::geometry::Vec2;
use crate::kinematics::{integrate_all, scale_action, ActionCommand, ActionError, ActionVariant, AgentState, KinematicLimits};
use crate::mapping::{fold_cell, MapParams, OccupancyGrid};
use crate::network::{
    build_graph, decode_lidar_payload, encode_lidar_payload, CommConfig, CommConfigError, MessageKind, Network,
    NetworkMetrics,
};
use crate::sensing::{scan, LidarConfig, LidarConfigError, LidarScan};
use crate::world::{build_level, GridWorld, LevelSpec, WorldError};

/// Which level an episode runs on when no curriculum is configured.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelChoice {
    /// One of the built-in levels with its default spec.
    Id(u8),
    Spec(LevelSpec),
    /// A pre-built world, e.g. loaded from a level file.
    World(Arc<GridWorld>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvConfig {
    pub n_agents: usize,
    pub level: LevelChoice,
    pub paradigm: Paradigm,
    pub episode_steps: u64,
    /// Velocity limits, body radius and the step length `dt`.
    pub limits: KinematicLimits,
    pub action_variant: ActionVariant,
    pub observation: ObservationSet,
    /// Side of the egocentric window in cells.
    pub ego_window: usize,
    pub w_area: f64,
    pub w_collision: f64,
    pub r_collision: f64,
    /// Divide the area term by `n_agents · A_max` instead of `A_max`.
    pub normalize_by_team: bool,
    pub kill_on_collision: bool,
    pub comm: CommConfig,
    pub lidar: LidarConfig,
    pub map: MapParams,
    pub curriculum: Option<CurriculumConfig>,
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            n_agents: 1,
            level: LevelChoice::Id(0),
            paradigm: Paradigm::Dtde,
            episode_steps: 1000,
            limits: KinematicLimits::default(),
            action_variant: ActionVariant::Planar2d,
            observation: ObservationSet::default(),
            ego_window: 64,
            w_area: 1.0,
            w_collision: 0.0,
            r_collision: -1.0,
            normalize_by_team: false,
            kill_on_collision: false,
            comm: CommConfig::default(),
            lidar: LidarConfig::default(),
            map: MapParams::default(),
            curriculum: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnvError {
    AgentCount(usize),
    EpisodeSteps,
    EgoWindow,
    Curriculum,
    Limits(ActionError),
    Lidar(LidarConfigError),
    Comm(CommConfigError),
    World(WorldError),
    TooManyAgents { agents: usize, spawns: usize },
    ActionArity { expected: usize, actual: usize },
    ActionVariant { expected: ActionVariant, actual: ActionVariant },
    Action(ActionError),
    NotReset,
    EpisodeOver,
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::AgentCount(n) => write!(f, "n_agents must be 1..=4, got {n}"),
            EnvError::EpisodeSteps => write!(f, "episode_steps must be at least 1"),
            EnvError::EgoWindow => write!(f, "ego_window must be at least 1"),
            EnvError::Curriculum => write!(f, "curriculum needs 0 < pass_area <= 1, pass_x_times >= 1 and levels"),
            EnvError::Limits(e) => write!(f, "{e}"),
            EnvError::Lidar(e) => write!(f, "{e}"),
            EnvError::Comm(e) => write!(f, "{e}"),
            EnvError::World(e) => write!(f, "{e}"),
            EnvError::TooManyAgents { agents, spawns } => {
                write!(f, "{agents} agents but the level has only {spawns} spawn points")
            }
            EnvError::ActionArity { expected, actual } => {
                write!(f, "expected {expected} actions, got {actual}")
            }
            EnvError::ActionVariant { expected, actual } => {
                write!(f, "expected {} actions, got {}", expected.name(), actual.name())
            }
            EnvError::Action(e) => write!(f, "{e}"),
            EnvError::NotReset => write!(f, "step called before reset"),
            EnvError::EpisodeOver => write!(f, "episode is over; call reset"),
        }
    }
}

impl core::error::Error for EnvError {}

impl From<WorldError> for EnvError {
    fn from(e: WorldError) -> Self {
        EnvError::World(e)
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(1..=4).contains(&self.n_agents) {
            return Err(EnvError::AgentCount(self.n_agents));
        }
        if self.episode_steps < 1 {
            return Err(EnvError::EpisodeSteps);
        }
        if self.ego_window < 1 {
            return Err(EnvError::EgoWindow);
        }
        self.limits.validate().map_err(EnvError::Limits)?;
        self.lidar.validate().map_err(EnvError::Lidar)?;
        self.comm.validate().map_err(EnvError::Comm)?;
        if let Some(c) = &self.curriculum {
            if !c.is_valid() || c.level_order.iter().any(|&l| l > crate::world::MAX_LEVEL) {
                return Err(EnvError::Curriculum);
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> ObservationLayout {
        ObservationLayout::new(&self.observation, self.ego_window, self.lidar.ray_count, self.n_agents)
    }
}

/// Per-step metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    /// Steps taken so far in the episode (1 after the first step).
    pub step: u64,
    pub level_id: u8,
    /// Team known explorable cells over the level's explorable area.
    pub coverage: f64,
    /// Team known cells (any cell, walls included) used by the reward.
    pub team_known: usize,
    /// Cells that became known in some agent's belief from its own scan this step.
    pub cells_discovered_self: usize,
    /// Cells that became known from delivered messages this step.
    pub cells_from_collaboration: usize,
    /// Episode totals so far.
    pub bytes_lidar: u64,
    pub bytes_map: u64,
    pub events_dropped: u64,
    /// Agents that touched a wall or another agent this step.
    pub collisions: usize,
    pub collided: Vec<bool>,
    /// False once the team known count has ever decreased this episode.
    pub known_monotone: bool,
    pub curriculum: Option<CurriculumState>,
    pub curriculum_advanced: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observations: Vec<Observation>,
    /// Shared by every agent.
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

/// Team-level known-cell bookkeeping over the fold of all beliefs.
#[derive(Clone, Debug, Default)]
struct TeamBelief {
    known: Vec<bool>,
    known_total: usize,
    known_explorable: usize,
}

impl TeamBelief {
    fn rebuild(&mut self, grids: &[OccupancyGrid], world: &GridWorld, epsilon: f64) {
        let cells = world.width() * world.height();
        self.known = vec![false; cells];
        self.known_total = 0;
        self.known_explorable = 0;
        let all: Vec<usize> = (0..cells).collect();
        self.refresh(grids, world, epsilon, &all);
    }

    fn refresh(&mut self, grids: &[OccupancyGrid], world: &GridWorld, epsilon: f64, indices: &[usize]) {
        let explorable = world.explorable_mask();
        for &i in indices {
            let now = fold_cell(grids, i).abs() > epsilon;
            if now != self.known[i] {
                self.known[i] = now;
                let sign_add = |count: &mut usize| {
                    if now {
                        *count += 1
                    } else {
                        *count -= 1
                    }
                };
                sign_add(&mut self.known_total);
                if explorable[i] {
                    sign_add(&mut self.known_explorable);
                }
            }
        }
    }
}

/// One episode runner. Holds no state shared with other instances.
#[derive(Clone, Debug)]
pub struct Env {
    config: EnvConfig,
    levels: BTreeMap<u8, Arc<GridWorld>>,
    world: Option<Arc<GridWorld>>,
    agents: Vec<AgentState>,
    beliefs: Vec<OccupancyGrid>,
    scans: Vec<LidarScan>,
    network: Network,
    team: TeamBelief,
    step_index: u64,
    done: bool,
    known_monotone: bool,
    curriculum: CurriculumState,
    last_collided: Vec<bool>,
}

impl Env {
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        config.validate()?;
        let network = Network::new(config.comm, config.n_agents, config.limits.dt);
        Ok(Self {
            levels: BTreeMap::new(),
            world: None,
            agents: Vec::new(),
            beliefs: Vec::new(),
            scans: Vec::new(),
            network,
            team: TeamBelief::default(),
            step_index: 0,
            done: false,
            known_monotone: true,
            curriculum: CurriculumState::default(),
            last_collided: vec![false; config.n_agents],
            config,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn world(&self) -> Option<&Arc<GridWorld>> {
        self.world.as_ref()
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn beliefs(&self) -> &[OccupancyGrid] {
        &self.beliefs
    }

    pub fn scans(&self) -> &[LidarScan] {
        &self.scans
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn network_metrics(&self) -> NetworkMetrics {
        self.network.metrics()
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn team_known(&self) -> usize {
        self.team.known_total
    }

    pub fn coverage(&self) -> f64 {
        match &self.world {
            Some(w) if w.explorable_area() > 0 => self.team.known_explorable as f64 / w.explorable_area() as f64,
            _ => 0.0,
        }
    }

    pub fn curriculum_state(&self) -> CurriculumState {
        self.curriculum
    }

    pub fn set_curriculum_state(&mut self, state: CurriculumState) {
        self.curriculum = state;
    }

    pub fn a_max(&self) -> f64 {
        a_max(&self.config.lidar, &self.config.limits)
    }

    pub fn layout(&self) -> ObservationLayout {
        self.config.layout()
    }

    fn level_world(&mut self, id: u8) -> Result<Arc<GridWorld>, EnvError> {
        if let Some(w) = self.levels.get(&id) {
            return Ok(w.clone());
        }
        let w = Arc::new(build_level(&LevelSpec::default_for(id)?)?);
        self.levels.insert(id, w.clone());
        Ok(w)
    }

    fn choose_world(&mut self, rng: &mut ChaCha8Rng) -> Result<Arc<GridWorld>, EnvError> {
        if let Some(c) = self.config.curriculum.clone() {
            let id = match c.mode {
                CurriculumMode::Sequential => c.level_order[self.curriculum.level_index.min(c.level_order.len() - 1)],
                CurriculumMode::Parallel => c.level_order[rng.gen_range(0..c.level_order.len())],
            };
            return self.level_world(id);
        }
        match self.config.level.clone() {
            LevelChoice::Id(id) => self.level_world(id),
            LevelChoice::Spec(spec) => {
                let key = u8::MAX;
                if let (Some(w), Some(cached)) = (self.levels.get(&key), self.world.as_ref()) {
                    if Arc::ptr_eq(w, cached) {
                        return Ok(w.clone());
                    }
                }
                let w = Arc::new(build_level(&spec)?);
                self.levels.insert(key, w.clone());
                Ok(w)
            }
            LevelChoice::World(w) => Ok(w),
        }
    }

    /// Starts a new episode. The same `(config, episode_seed)` always gives
    /// the same initial observations.
    pub fn reset(&mut self, episode_seed: u64) -> Result<Vec<Observation>, EnvError> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.config.seed, episode_seed));
        let world = self.choose_world(&mut rng)?;
        let n = self.config.n_agents;
        if world.spawn_points().len() < n {
            return Err(EnvError::TooManyAgents { agents: n, spawns: world.spawn_points().len() });
        }
        self.agents = world.spawn_points()[..n]
            .iter()
            .map(|&p| {
                // Uniform in (−π, π].
                let heading = PI - rng.gen_range(0.0..2.0 * PI);
                AgentState::at_rest(p, heading)
            })
            .collect();
        self.beliefs = (0..n).map(|_| OccupancyGrid::for_world(&world, self.config.map)).collect();
        self.network = Network::new(self.config.comm, n, self.config.limits.dt);
        self.step_index = 0;
        self.done = false;
        self.known_monotone = true;
        self.last_collided = vec![false; n];
        self.world = Some(world.clone());

        self.scans = self.scan_all(&world);
        for (grid, s) in self.beliefs.iter_mut().zip(&self.scans) {
            grid.update_from_scan(s);
        }
        self.team.rebuild(&self.beliefs, &world, self.config.map.epsilon);
        Ok(self.observations())
    }

    fn scan_all(&self, world: &GridWorld) -> Vec<LidarScan> {
        let positions: Vec<Vec2> = self.agents.iter().map(|a| a.position).collect();
        let mut others = Vec::with_capacity(positions.len());
        self.agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                others.clear();
                others.extend(positions.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &p)| p));
                scan(world, &others, self.config.limits.body_radius, a, &self.config.lidar)
            })
            .collect()
    }

    /// Current per-agent observations.
    pub fn observations(&self) -> Vec<Observation> {
        let n = self.agents.len();
        (0..n)
            .map(|i| {
                let a = &self.agents[i];
                Observation {
                    ego_map: self.beliefs[i].extract_egocentric(a.position, self.config.ego_window),
                    lidar: self.scans[i].ranges.clone(),
                    pose: [a.position.x, a.position.y, a.heading],
                    velocities: [a.linear_velocity.x, a.linear_velocity.y, a.angular_velocity],
                    distances: (0..n)
                        .filter(|&j| j != i)
                        .map(|j| a.position.distance(self.agents[j].position))
                        .collect(),
                }
            })
            .collect()
    }

    /// Paradigm-shaped view of the current observations.
    pub fn paradigm_observation(&self) -> ParadigmObservation {
        paradigm::wrap_observations(self.config.paradigm, &self.observations(), &self.config.observation, self.coverage())
    }

    /// Steps with paradigm-shaped raw actions.
    pub fn step_raw(&mut self, actions: &[Vec<f64>]) -> Result<StepResult, EnvError> {
        let cmds = paradigm::unwrap_actions(self.config.paradigm, self.config.action_variant, self.config.n_agents, actions)?;
        self.step(&cmds)
    }

    /// Advances one step. Phases: integrate all agents from the same
    /// snapshot, scan, run the message layer, apply own scans then
    /// delivered messages to beliefs, compute the shared reward, then
    /// evaluate termination.
    pub fn step(&mut self, actions: &[ActionCommand]) -> Result<StepResult, EnvError> {
        let world = self.world.clone().ok_or(EnvError::NotReset)?;
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let n = self.agents.len();
        if actions.len() != n {
            return Err(EnvError::ActionArity { expected: n, actual: actions.len() });
        }
        for a in actions {
            if a.variant() != self.config.action_variant {
                return Err(EnvError::ActionVariant { expected: self.config.action_variant, actual: a.variant() });
            }
        }
        let t = self.step_index;
        let known_before = self.team.known_total;

        // (1) kinematics
        let limits = self.config.limits;
        let targets: Vec<_> = actions.iter().map(|a| scale_action(a, &limits)).collect();
        let moved = integrate_all(&self.agents, &targets, &limits, &world);
        let collided: Vec<bool> = moved.iter().map(|m| m.1).collect();
        self.agents = moved.into_iter().map(|m| m.0).collect();

        // (2) sensing
        self.scans = self.scan_all(&world);

        // (3) message layer
        let positions: Vec<Vec2> = self.agents.iter().map(|a| a.position).collect();
        let graph = build_graph(t, &positions, &self.config.comm);
        let delivered = if graph.edge_count() > 0 || !self.network.in_flight().is_empty() {
            let lidar: Vec<Arc<[u8]>> = if graph.edge_count() > 0 {
                self.scans.iter().enumerate().map(|(i, s)| Arc::from(encode_lidar_payload(i, t, s))).collect()
            } else {
                vec![Arc::from(Vec::new()); n]
            };
            let beliefs = &self.beliefs;
            self.network.tick(&graph, &lidar, |i| Arc::from(beliefs[i].encode_snapshot()))
        } else {
            self.network.tick(&graph, &[], |_| Arc::from(Vec::new()))
        };

        // (4) beliefs
        let mut dirty: Vec<usize> = Vec::new();
        let mut from_self = 0;
        let mut from_collab = 0;
        for i in 0..n {
            let d = self.beliefs[i].update_from_scan(&self.scans[i]);
            from_self += d.discovered_count;
            dirty.extend(d.changes.iter().map(|c| c.0));
            for e in delivered.iter().filter(|e| e.receiver == i) {
                let d = match e.kind {
                    MessageKind::LidarShare => match decode_lidar_payload(&e.payload, &self.config.lidar) {
                        Ok((_, _, s)) => self.beliefs[i].update_from_scan(&s),
                        Err(_) => continue,
                    },
                    MessageKind::MapShare => {
                        let Ok(peer) = OccupancyGrid::decode_snapshot(&e.payload, &self.beliefs[i]) else {
                            continue;
                        };
                        match self.beliefs[i].fuse_from(&peer) {
                            Ok(d) => d,
                            Err(_) => continue,
                        }
                    }
                };
                from_collab += d.discovered_count;
                dirty.extend(d.changes.iter().map(|c| c.0));
            }
        }
        dirty.sort_unstable();
        dirty.dedup();
        self.team.refresh(&self.beliefs, &world, self.config.map.epsilon, &dirty);
        let known_after = self.team.known_total;
        if known_after < known_before {
            self.known_monotone = false;
        }

        // (5) reward
        let collisions = collided.iter().filter(|&&c| c).count();
        let cell_area = world.cell_size() * world.cell_size();
        let reward = compute_reward(known_before, known_after, collisions, cell_area, &self.config);

        // (6) termination
        self.step_index += 1;
        let terminated = self.config.kill_on_collision && collisions > 0;
        let truncated = self.step_index >= self.config.episode_steps;
        self.done = terminated || truncated;

        let coverage = self.coverage();
        let mut advanced = false;
        if self.done {
            if let Some(c) = &self.config.curriculum {
                let (next, adv) = curriculum_update(c, self.curriculum, coverage);
                self.curriculum = next;
                advanced = adv;
            }
        }
        self.last_collided = collided.clone();

        let m = self.network.metrics();
        Ok(StepResult {
            observations: self.observations(),
            reward,
            terminated,
            truncated,
            info: StepInfo {
                step: self.step_index,
                level_id: world.level_id(),
                coverage,
                team_known: known_after,
                cells_discovered_self: from_self,
                cells_from_collaboration: from_collab,
                bytes_lidar: m.bytes_lidar,
                bytes_map: m.bytes_map,
                events_dropped: m.dropped,
                collisions,
                collided,
                known_monotone: self.known_monotone,
                curriculum: self.config.curriculum.as_ref().map(|_| self.curriculum),
                curriculum_advanced: advanced,
            },
        })
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn last_collided(&self) -> &[bool] {
        &self.last_collided
    }
}

/// Per-episode generator seed from the run seed and the episode seed.
pub fn mix_seed(run_seed: u64, episode_seed: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = run_seed ^ episode_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(cfg: EnvConfig) -> Env {
        Env::new(cfg).unwrap()
    }

    fn zeros(n: usize, v: ActionVariant) -> Vec<ActionCommand> {
        vec![ActionCommand::zero(v); n]
    }

    #[test]
    fn reset_scans_and_covers_something() {
        let mut e = env(EnvConfig::default());
        let obs = e.reset(1).unwrap();
        assert_eq!(obs.len(), 1);
        assert!(e.coverage() > 0.0);
        let spawn = e.world().unwrap().spawn_points()[0];
        assert_eq!(e.agents()[0].position, spawn);
        assert_eq!(e.agents()[0].linear_velocity, Vec2::ZERO);
    }

    #[test]
    fn reset_is_deterministic() {
        let mut a = env(EnvConfig { n_agents: 2, ..Default::default() });
        let mut b = env(EnvConfig { n_agents: 2, ..Default::default() });
        assert_eq!(a.reset(9).unwrap(), b.reset(9).unwrap());
        assert_ne!(a.reset(10).unwrap()[0].pose, b.reset(9).unwrap()[0].pose);
    }

    #[test]
    fn stationary_rescan_gives_zero_reward() {
        let mut e = env(EnvConfig::default());
        e.reset(3).unwrap();
        let r = e.step(&zeros(1, ActionVariant::Planar2d)).unwrap();
        assert_eq!(r.reward, 0.0);
        assert_eq!(r.info.collisions, 0);
    }

    #[test]
    fn too_many_agents_for_spawns() {
        let mut occ = vec![false; 400];
        occ[0] = true;
        let w = GridWorld::new(20, 20, 0.1, occ, vec![Vec2::new(1.0, 1.0)], 0).unwrap();
        let mut e = env(EnvConfig { n_agents: 2, level: LevelChoice::World(Arc::new(w)), ..Default::default() });
        assert_eq!(e.reset(0).unwrap_err(), EnvError::TooManyAgents { agents: 2, spawns: 1 });
    }

    #[test]
    fn arity_and_variant_errors() {
        let mut e = env(EnvConfig { n_agents: 2, ..Default::default() });
        assert_eq!(e.step(&zeros(2, ActionVariant::Planar2d)).unwrap_err(), EnvError::NotReset);
        e.reset(0).unwrap();
        assert!(matches!(e.step(&zeros(1, ActionVariant::Planar2d)), Err(EnvError::ActionArity { .. })));
        assert!(matches!(e.step(&zeros(2, ActionVariant::Full3d)), Err(EnvError::ActionVariant { .. })));
    }

    #[test]
    fn truncates_at_episode_steps() {
        let mut e = env(EnvConfig { episode_steps: 3, ..Default::default() });
        e.reset(0).unwrap();
        let a = zeros(1, ActionVariant::Planar2d);
        assert!(!e.step(&a).unwrap().truncated);
        assert!(!e.step(&a).unwrap().truncated);
        let last = e.step(&a).unwrap();
        assert!(last.truncated && !last.terminated);
        assert_eq!(e.step(&a).unwrap_err(), EnvError::EpisodeOver);
    }

    #[test]
    fn kill_on_collision_terminates() {
        let mut e = env(EnvConfig { kill_on_collision: true, ..Default::default() });
        e.reset(0).unwrap();
        let push = vec![ActionCommand::Planar2d { vx: 1.0, vy: 0.0 }];
        let mut ended = None;
        for k in 0..200 {
            let r = e.step(&push).unwrap();
            if r.terminated {
                ended = Some((k, r.info.collisions));
                break;
            }
        }
        let (_, collisions) = ended.expect("agent must reach the wall within 200 steps");
        assert_eq!(collisions, 1);
    }

    #[test]
    fn first_contact_exchanges_two_map_payloads() {
        // Spawns far apart in an 8 m room; drive agent 0 toward agent 1.
        let spec = LevelSpec {
            spawn_points: vec![Vec2::new(1.0, 4.0), Vec2::new(6.5, 4.0)],
            ..LevelSpec::default_for(0).unwrap()
        };
        let cfg = EnvConfig { n_agents: 2, level: LevelChoice::Spec(spec), ..Default::default() };
        let mut e = env(cfg);
        e.reset(0).unwrap();
        let map_bytes = (16 + 2 * 200 * 200) as u64;
        let mut prev = 0;
        for _ in 0..30 {
            let r = e
                .step(&[ActionCommand::Planar2d { vx: 1.0, vy: 0.0 }, ActionCommand::Planar2d { vx: 0.0, vy: 0.0 }])
                .unwrap();
            if r.info.bytes_map > prev {
                assert_eq!(r.info.bytes_map - prev, 2 * map_bytes);
                let d = e.agents()[0].position.distance(e.agents()[1].position);
                assert!(d <= 4.0 && d > 4.0 - 0.09);
                return;
            }
            prev = r.info.bytes_map;
        }
        panic!("agents never connected");
    }

    #[test]
    fn shared_reward_and_paradigm_shapes() {
        for p in [Paradigm::Ctce, Paradigm::Ctde, Paradigm::Dtde] {
            let cfg = EnvConfig { n_agents: 3, paradigm: p, ..Default::default() };
            let mut e = env(cfg.clone());
            e.reset(4).unwrap();
            let d = cfg.layout().len();
            let po = e.paradigm_observation();
            match p {
                Paradigm::Ctce => {
                    assert_eq!(po.actors.len(), 1);
                    assert_eq!(po.actors[0].len(), 3 * d);
                    assert!(po.critic.is_none());
                    assert!(e.step_raw(&[vec![0.0; 6]]).is_ok());
                }
                Paradigm::Ctde => {
                    assert_eq!(po.actors.len(), 3);
                    assert_eq!(po.critic.as_ref().unwrap().len(), paradigm::critic_len(3));
                    assert!(e.step_raw(&[vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]]).is_ok());
                }
                Paradigm::Dtde => {
                    assert!(po.critic.is_none());
                    assert!(e.step_raw(&[vec![0.0; 6]]).is_err());
                }
            }
        }
    }

    #[test]
    fn ctde_actor_inputs_equal_dtde() {
        let mk = |p| {
            let mut e = env(EnvConfig { n_agents: 2, paradigm: p, ..Default::default() });
            e.reset(5).unwrap();
            e.step_raw(&[vec![0.5, 0.2], vec![-0.3, 0.9]]).unwrap();
            e.paradigm_observation()
        };
        assert_eq!(mk(Paradigm::Ctde).actors, mk(Paradigm::Dtde).actors);
    }

    #[test]
    fn sequential_curriculum_uses_level_order() {
        let cur = CurriculumConfig {
            mode: CurriculumMode::Sequential,
            pass_area: 0.01,
            pass_x_times: 1,
            level_order: vec![2, 0, 1],
        };
        let mut e = env(EnvConfig { curriculum: Some(cur), episode_steps: 2, ..Default::default() });
        e.reset(0).unwrap();
        assert_eq!(e.world().unwrap().level_id(), 2);
        let a = zeros(1, ActionVariant::Planar2d);
        e.step(&a).unwrap();
        let r = e.step(&a).unwrap();
        assert!(r.info.curriculum_advanced);
        e.reset(1).unwrap();
        assert_eq!(e.world().unwrap().level_id(), 0);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(Env::new(EnvConfig { n_agents: 0, ..Default::default() }).is_err());
        assert!(Env::new(EnvConfig { n_agents: 5, ..Default::default() }).is_err());
        assert!(Env::new(EnvConfig { episode_steps: 0, ..Default::default() }).is_err());
        let lidar = LidarConfig { field_of_view: 0.0, ..Default::default() };
        assert!(matches!(Env::new(EnvConfig { lidar, ..Default::default() }), Err(EnvError::Lidar(_))));
    }
}

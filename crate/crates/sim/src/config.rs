//! Run configuration loaded from TOML.
//!
//! Top-level keys mirror the environment's field names; the structured
//! parts (`[comm]`, `[lidar]`, `[map]`, `[curriculum]`) are tables. Every
//! key is optional and unknown keys are rejected with their line number.
//!
//! ```toml
//! seed = 7
//! n_agents = 2
//! level_id = 3
//! paradigm = "ctde"
//! W_area = 1.0
//! W_collision = 3.0
//! policy = "random_walk"
//! episodes = 10
//!
//! [comm]
//! mode = "multi_hop"
//! bandwidth = inf
//! ```

use std::fmt;
use std::marker::PhantomData;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use imagine_core::baselines::PolicyKind;
use imagine_core::env::{LevelChoice, ObservationSet};
use imagine_core::{
    ActionVariant, CommConfig, CommMode, CurriculumConfig, CurriculumMode, EnvConfig, KinematicLimits, LidarConfig,
    MapParams, ObservationVariant, Paradigm,
};
use serde::Deserialize;
use thiserror::Error;

use crate::level_file::{load_level, LevelFileError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error("{path}: key `{key}`: {message}")]
    Invalid { path: String, key: &'static str, message: String },
    #[error("{path}: level_file: {source}")]
    Level { path: String, source: LevelFileError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Who chooses actions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyChoice {
    Baseline(PolicyKind),
    /// Actions come from a client over the environment server.
    External,
}

impl PolicyChoice {
    pub fn from_name(name: &str) -> Option<Self> {
        if name == "external" {
            Some(PolicyChoice::External)
        } else {
            PolicyKind::from_name(name).map(PolicyChoice::Baseline)
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyChoice::Baseline(k) => k.name(),
            PolicyChoice::External => "external",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub policy: PolicyChoice,
    pub episodes: u64,
    pub log_dir: PathBuf,
    pub listen_port: Option<u16>,
    /// Flush the metrics file after this many records.
    pub metrics_flush_every: u64,
    pub dump_trajectories: bool,
    /// Steps a random-walk command is held.
    pub hold_steps: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvConfig::default(),
            policy: PolicyChoice::Baseline(PolicyKind::RandomWalk),
            episodes: 1,
            log_dir: PathBuf::from("runs"),
            listen_port: None,
            metrics_flush_every: 1000,
            dump_trajectories: false,
            hold_steps: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.env.validate().map_err(|e| e.to_string())?;
        if self.policy == PolicyChoice::External && self.listen_port.is_none() {
            return Err("policy \"external\" requires listen_port".into());
        }
        if self.metrics_flush_every == 0 {
            return Err("metrics_flush_every must be at least 1".into());
        }
        if self.hold_steps == 0 {
            return Err("hold_steps must be at least 1".into());
        }
        Ok(())
    }
}

trait Named: Sized {
    const WHAT: &'static str;
    fn lookup(name: &str) -> Option<Self>;
}

macro_rules! named {
    ($t:ty, $what:literal) => {
        impl Named for $t {
            const WHAT: &'static str = $what;
            fn lookup(name: &str) -> Option<Self> {
                <$t>::from_name(name)
            }
        }
    };
}

named!(Paradigm, "paradigm");
named!(ActionVariant, "action variant");
named!(ObservationVariant, "observation variant");
named!(CommMode, "comm mode");
named!(CurriculumMode, "curriculum mode");
named!(PolicyChoice, "policy");

/// A string field that must name one of a fixed set of values.
#[derive(Debug)]
struct ByName<T>(T);

impl<'de, T: Named> Deserialize<'de> for ByName<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<T: Named> serde::de::Visitor<'_> for V<T> {
            type Value = ByName<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a {} name", T::WHAT)
            }
            fn visit_str<E: serde::de::Error>(self, s: &str) -> Result<Self::Value, E> {
                T::lookup(s).map(ByName).ok_or_else(|| E::custom(format!("unknown {} `{s}`", T::WHAT)))
            }
        }
        d.deserialize_str(V(PhantomData))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommFile {
    mode: Option<ByName<CommMode>>,
    range: Option<f64>,
    bandwidth: Option<f64>,
    max_hops: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LidarFile {
    ray_count: Option<usize>,
    field_of_view: Option<f64>,
    max_range: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    l_occ: Option<f64>,
    l_free: Option<f64>,
    l_min: Option<f64>,
    l_max: Option<f64>,
    epsilon: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurriculumFile {
    mode: Option<ByName<CurriculumMode>>,
    pass_area: Option<f64>,
    pass_x_times: Option<u32>,
    level_order: Option<Vec<u8>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    n_agents: Option<usize>,
    level_id: Option<u8>,
    level_file: Option<PathBuf>,
    paradigm: Option<ByName<Paradigm>>,
    episode_steps: Option<u64>,
    dt: Option<f64>,
    v_max: Option<f64>,
    omega_max: Option<f64>,
    body_radius: Option<f64>,
    norm_clamp: Option<bool>,
    action_variant: Option<ByName<ActionVariant>>,
    observation_variant: Option<Vec<ByName<ObservationVariant>>>,
    ego_window: Option<usize>,
    #[serde(alias = "W_area")]
    w_area: Option<f64>,
    #[serde(alias = "W_collision")]
    w_collision: Option<f64>,
    #[serde(alias = "R_collision")]
    r_collision: Option<f64>,
    normalize_by_team: Option<bool>,
    kill_on_collision: Option<bool>,
    comm: Option<CommFile>,
    lidar: Option<LidarFile>,
    map: Option<MapFile>,
    curriculum: Option<CurriculumFile>,

    policy: Option<ByName<PolicyChoice>>,
    episodes: Option<u64>,
    log_dir: Option<PathBuf>,
    listen_port: Option<u16>,
    metrics_flush_every: Option<u64>,
    dump_trajectories: Option<bool>,
    hold_steps: Option<u32>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Parses config text. `base_dir` resolves a relative `level_file`;
/// `origin` names the source in diagnostics.
pub fn parse_config(text: &str, base_dir: &Path, origin: &str) -> Result<RunConfig, ConfigError> {
    let file: FileConfig =
        toml::from_str(text).map_err(|source| ConfigError::Parse { path: origin.to_string(), source })?;
    let invalid = |key: &'static str, message: String| ConfigError::Invalid { path: origin.to_string(), key, message };

    let mut run = RunConfig::default();
    let env = &mut run.env;
    set(&mut env.seed, file.seed);
    set(&mut env.n_agents, file.n_agents);
    if file.level_id.is_some() && file.level_file.is_some() {
        return Err(invalid("level_file", "set either level_id or level_file, not both".into()));
    }
    if let Some(id) = file.level_id {
        if id > imagine_core::world::MAX_LEVEL {
            return Err(invalid("level_id", format!("{id} is outside 0..=6")));
        }
        env.level = LevelChoice::Id(id);
    }
    if let Some(p) = &file.level_file {
        let path = if p.is_absolute() { p.clone() } else { base_dir.join(p) };
        let world =
            load_level(&path).map_err(|source| ConfigError::Level { path: path.display().to_string(), source })?;
        env.level = LevelChoice::World(Arc::new(world));
    }
    set(&mut env.paradigm, file.paradigm.map(|v| v.0));
    set(&mut env.episode_steps, file.episode_steps);
    let limits: &mut KinematicLimits = &mut env.limits;
    set(&mut limits.dt, file.dt);
    set(&mut limits.v_max, file.v_max);
    set(&mut limits.omega_max, file.omega_max);
    set(&mut limits.body_radius, file.body_radius);
    set(&mut limits.norm_clamp, file.norm_clamp);
    set(&mut env.action_variant, file.action_variant.map(|v| v.0));
    if let Some(vs) = file.observation_variant {
        if vs.is_empty() {
            return Err(invalid("observation_variant", "must name at least one block".into()));
        }
        env.observation = ObservationSet::new(vs.into_iter().map(|v| v.0));
    }
    set(&mut env.ego_window, file.ego_window);
    set(&mut env.w_area, file.w_area);
    set(&mut env.w_collision, file.w_collision);
    set(&mut env.r_collision, file.r_collision);
    set(&mut env.normalize_by_team, file.normalize_by_team);
    set(&mut env.kill_on_collision, file.kill_on_collision);
    if let Some(c) = file.comm {
        let comm: &mut CommConfig = &mut env.comm;
        set(&mut comm.mode, c.mode.map(|v| v.0));
        set(&mut comm.range, c.range);
        set(&mut comm.bandwidth, c.bandwidth);
        if c.max_hops.is_some() {
            comm.max_hops = c.max_hops;
        }
    }
    if let Some(l) = file.lidar {
        let lidar: &mut LidarConfig = &mut env.lidar;
        set(&mut lidar.ray_count, l.ray_count);
        set(&mut lidar.field_of_view, l.field_of_view);
        set(&mut lidar.max_range, l.max_range);
    }
    if let Some(m) = file.map {
        let map: &mut MapParams = &mut env.map;
        set(&mut map.l_occ, m.l_occ);
        set(&mut map.l_free, m.l_free);
        set(&mut map.l_min, m.l_min);
        set(&mut map.l_max, m.l_max);
        set(&mut map.epsilon, m.epsilon);
    }
    if let Some(c) = file.curriculum {
        let mut cur = CurriculumConfig::default();
        set(&mut cur.mode, c.mode.map(|v| v.0));
        set(&mut cur.pass_area, c.pass_area);
        set(&mut cur.pass_x_times, c.pass_x_times);
        set(&mut cur.level_order, c.level_order);
        env.curriculum = Some(cur);
    }

    set(&mut run.policy, file.policy.map(|v| v.0));
    set(&mut run.episodes, file.episodes);
    set(&mut run.log_dir, file.log_dir);
    run.listen_port = file.listen_port;
    set(&mut run.metrics_flush_every, file.metrics_flush_every);
    set(&mut run.dump_trajectories, file.dump_trajectories);
    set(&mut run.hold_steps, file.hold_steps);
    Ok(run)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: origin.clone(), source })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base, &origin)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config(text, Path::new("."), "test.toml")
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn reads_every_section() {
        let cfg = parse(
            r#"
seed = 9
n_agents = 3
level_id = 4
paradigm = "ctce"
episode_steps = 200
dt = 0.05
action_variant = "full3d"
observation_variant = ["lidar", "inter_agent_distances"]
W_area = 2.0
W_collision = 3.0
kill_on_collision = true
policy = "frontier_greedy"
episodes = 5
hold_steps = 4

[comm]
mode = "multi_hop"
bandwidth = inf
max_hops = 2

[lidar]
ray_count = 72

[curriculum]
mode = "sequential"
pass_area = 0.9
pass_x_times = 1
level_order = [0, 1, 2]
"#,
        )
        .unwrap();
        let e = &cfg.env;
        assert_eq!(e.seed, 9);
        assert_eq!(e.n_agents, 3);
        assert_eq!(e.level, LevelChoice::Id(4));
        assert_eq!(e.paradigm, Paradigm::Ctce);
        assert_eq!(e.limits.dt, 0.05);
        assert_eq!(e.action_variant, ActionVariant::Full3d);
        assert!(e.observation.contains(ObservationVariant::InterAgentDistances));
        assert!(!e.observation.contains(ObservationVariant::EgoMap));
        assert_eq!((e.w_area, e.w_collision), (2.0, 3.0));
        assert!(e.kill_on_collision);
        assert_eq!(e.comm.mode, CommMode::MultiHop);
        assert!(e.comm.bandwidth.is_infinite());
        assert_eq!(e.comm.max_hops, Some(2));
        assert_eq!(e.lidar.ray_count, 72);
        assert_eq!(e.curriculum.as_ref().unwrap().level_order, vec![0, 1, 2]);
        assert_eq!(cfg.policy, PolicyChoice::Baseline(PolicyKind::FrontierGreedy));
        assert_eq!((cfg.episodes, cfg.hold_steps), (5, 4));
    }

    #[test]
    fn unknown_key_reports_line_and_key() {
        let err = parse("seed = 1\nn_agent = 2\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(err.contains("n_agent"), "{err}");
    }

    #[test]
    fn bad_enum_value_reports_line() {
        let err = parse("\n\nparadigm = \"central\"\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("unknown paradigm `central`"), "{err}");
    }

    #[test]
    fn wrong_type_is_rejected() {
        let err = parse("[comm]\nrange = \"far\"\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn level_conflicts_and_bounds() {
        assert!(matches!(parse("level_id = 7"), Err(ConfigError::Invalid { key: "level_id", .. })));
        let both = parse("level_id = 1\nlevel_file = \"x.txt\"").unwrap_err();
        assert!(matches!(both, ConfigError::Invalid { key: "level_file", .. }));
    }

    #[test]
    fn external_needs_port() {
        let cfg = parse("policy = \"external\"").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = parse("policy = \"external\"\nlisten_port = 9000").unwrap();
        assert!(cfg.validate().is_ok());
    }
}

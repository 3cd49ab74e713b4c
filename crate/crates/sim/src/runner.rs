//! Runs episodes with a scripted policy and records metrics.

use std::path::Path;

use anyhow::{anyhow, Result};
use imagine_core::baselines::{PolicyKind, PolicyParams};
use imagine_core::env::mix_seed;
use imagine_core::{Env, Policy, StepResult};

use crate::config::RunConfig;
use crate::metrics::{MetricsRecord, MetricsWriter};
use crate::trajectory::TrajectoryDump;

/// Running totals for one episode, turned into metrics records.
#[derive(Clone, Debug, Default)]
pub struct EpisodeTally {
    pub episode: u64,
    pub steps: u64,
    pub reward_sum: f64,
    pub cells_self: u64,
    pub cells_collab: u64,
    pub collisions: u64,
    pub coverage: f64,
    pub bytes_lidar: u64,
    pub bytes_map: u64,
    pub level_id: u8,
    pub curriculum_counter: u32,
    pub known_monotone: bool,
}

impl EpisodeTally {
    pub fn start(episode: u64, env: &Env) -> Self {
        Self {
            episode,
            coverage: env.coverage(),
            level_id: env.world().map_or(0, |w| w.level_id()),
            curriculum_counter: env.curriculum_state().pass_counter,
            known_monotone: true,
            ..Self::default()
        }
    }

    pub fn add(&mut self, r: &StepResult) {
        self.steps = r.info.step;
        self.reward_sum += r.reward;
        self.cells_self += r.info.cells_discovered_self as u64;
        self.cells_collab += r.info.cells_from_collaboration as u64;
        self.collisions += r.info.collisions as u64;
        self.coverage = r.info.coverage;
        self.bytes_lidar = r.info.bytes_lidar;
        self.bytes_map = r.info.bytes_map;
        self.known_monotone = r.info.known_monotone;
        if let Some(c) = r.info.curriculum {
            self.curriculum_counter = c.pass_counter;
        }
    }

    fn record(&self, step: i64, known_monotone: Option<bool>) -> MetricsRecord {
        MetricsRecord {
            episode: self.episode,
            step,
            coverage: self.coverage,
            reward_sum: self.reward_sum,
            cells_self: self.cells_self,
            cells_collab: self.cells_collab,
            bytes_lidar: self.bytes_lidar,
            bytes_map: self.bytes_map,
            collisions: self.collisions,
            level_id: self.level_id,
            curriculum_counter: self.curriculum_counter,
            known_monotone,
        }
    }

    pub fn step_record(&self) -> MetricsRecord {
        self.record(self.steps as i64, None)
    }

    pub fn summary(&self) -> MetricsRecord {
        self.record(-1, Some(self.known_monotone))
    }
}

/// Seed handed to `Env::reset`. Every episode of a run starts from the same
/// reset seed, so differences between episodes come from the policy.
pub fn reset_seed(run: &RunConfig) -> u64 {
    run.env.seed
}

/// Seed for agent `agent`'s policy in episode `episode`.
pub fn policy_seed(run: &RunConfig, episode: u64, agent: usize) -> u64 {
    mix_seed(mix_seed(run.env.seed, episode), agent as u64 + 1)
}

pub fn policy_params(run: &RunConfig, env: &Env) -> PolicyParams {
    let cfg = env.config();
    PolicyParams {
        variant: cfg.action_variant,
        cell_size: env.world().map_or(0.04, |w| w.cell_size()),
        step_length: cfg.limits.v_max * cfg.limits.dt,
        field_of_view: cfg.lidar.field_of_view,
        hold_steps: run.hold_steps,
        epsilon: cfg.map.epsilon,
    }
}

/// Runs `run.episodes` episodes with a scripted policy. Writes one record
/// per step and one summary per episode to `metrics` (if given) and dumps
/// trajectories under `trajectory_dir` (if given). Returns the summaries.
pub fn run_baseline(
    run: &RunConfig,
    kind: PolicyKind,
    mut metrics: Option<&mut MetricsWriter>,
    trajectory_dir: Option<&Path>,
) -> Result<Vec<MetricsRecord>> {
    let mut env = Env::new(run.env.clone()).map_err(|e| anyhow!("{e}"))?;
    let mut summaries = Vec::with_capacity(run.episodes as usize);
    for episode in 0..run.episodes {
        let seed = reset_seed(run);
        let curriculum_at_reset = env.curriculum_state();
        let mut obs = env.reset(seed).map_err(|e| anyhow!("episode {episode}: {e}"))?;
        let params = policy_params(run, &env);
        let mut policies: Vec<Policy> = (0..run.env.n_agents)
            .map(|i| Policy::new(kind, params, policy_seed(run, episode, i)))
            .collect();
        let mut tally = EpisodeTally::start(episode, &env);
        let mut dump = trajectory_dir.map(|_| TrajectoryDump::new(episode, seed, tally.level_id, curriculum_at_reset));
        loop {
            let actions: Vec<_> = policies.iter_mut().zip(&obs).map(|(p, o)| p.act(o)).collect();
            let r = env.step(&actions).map_err(|e| anyhow!("episode {episode}: {e}"))?;
            tally.add(&r);
            if let Some(d) = dump.as_mut() {
                d.record(&actions, r.info.coverage);
            }
            if let Some(m) = metrics.as_deref_mut() {
                m.write(&tally.step_record())?;
            }
            let done = r.terminated || r.truncated;
            obs = r.observations;
            if done {
                break;
            }
        }
        let summary = tally.summary();
        if let Some(m) = metrics.as_deref_mut() {
            m.write(&summary)?;
        }
        if let (Some(d), Some(dir)) = (dump, trajectory_dir) {
            d.save(dir)?;
        }
        summaries.push(summary);
    }
    if let Some(m) = metrics {
        m.flush()?;
    }
    Ok(summaries)
}

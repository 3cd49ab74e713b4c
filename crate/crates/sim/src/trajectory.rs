//! Per-episode trajectory dumps and their replay.
//!
//! A dump stores everything needed to reproduce an episode through the
//! environment: the reset seed, the curriculum position at reset and every
//! joint action. Replaying it must give back the recorded coverage sequence
//! exactly.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use imagine_core::{ActionCommand, CurriculumState, Env, EnvConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDump {
    pub episode: u64,
    pub reset_seed: u64,
    pub level_id: u8,
    pub curriculum_level_index: usize,
    pub curriculum_counter: u32,
    /// `actions[t][i]` is agent `i`'s command components at step `t`.
    pub actions: Vec<Vec<Vec<f64>>>,
    /// Team coverage after each step.
    pub coverage: Vec<f64>,
}

impl TrajectoryDump {
    pub fn new(episode: u64, reset_seed: u64, level_id: u8, curriculum: CurriculumState) -> Self {
        Self {
            episode,
            reset_seed,
            level_id,
            curriculum_level_index: curriculum.level_index,
            curriculum_counter: curriculum.pass_counter,
            actions: Vec::new(),
            coverage: Vec::new(),
        }
    }

    pub fn record(&mut self, actions: &[ActionCommand], coverage: f64) {
        self.actions.push(actions.iter().map(|a| a.components()).collect());
        self.coverage.push(coverage);
    }

    pub fn file_name(episode: u64) -> String {
        format!("episode_{episode:06}.json")
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(Self::file_name(self.episode));
        std::fs::write(&path, serde_json::to_vec(self)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Re-runs a dumped episode and returns the coverage after each step.
pub fn replay(config: &EnvConfig, dump: &TrajectoryDump) -> Result<Vec<f64>> {
    let mut env = Env::new(config.clone()).map_err(|e| anyhow::anyhow!("{e}"))?;
    env.set_curriculum_state(CurriculumState {
        level_index: dump.curriculum_level_index,
        pass_counter: dump.curriculum_counter,
    });
    env.reset(dump.reset_seed).map_err(|e| anyhow::anyhow!("{e}"))?;
    let level = env.world().expect("reset builds a world").level_id();
    if level != dump.level_id {
        bail!("dump was recorded on level {} but the config selects level {level}", dump.level_id);
    }
    let variant = config.action_variant;
    let mut out = Vec::with_capacity(dump.actions.len());
    for (t, joint) in dump.actions.iter().enumerate() {
        let cmds = joint
            .iter()
            .map(|a| ActionCommand::from_slice(variant, a))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| anyhow::anyhow!("step {t}: {e}"))?;
        let r = env.step(&cmds).map_err(|e| anyhow::anyhow!("step {t}: {e}"))?;
        out.push(r.info.coverage);
    }
    Ok(out)
}

//! Training/execution paradigm shaping of observations and actions.
//!
//! `ctce` exposes one concatenated observation and takes one concatenated
//! action; `dtde` exposes per-agent local I/O only; `ctde` exposes the same
//! per-agent actor inputs as `dtde` plus a training-time-only critic
//! channel carrying every agent's pose and velocities and team coverage.

use alloc::vec::Vec;

use super::observation::{Observation, ObservationSet};
use super::EnvError;
use crate::kinematics::{ActionCommand, ActionVariant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Paradigm {
    Ctce,
    Ctde,
    Dtde,
}

impl Paradigm {
    pub fn name(self) -> &'static str {
        match self {
            Paradigm::Ctce => "ctce",
            Paradigm::Ctde => "ctde",
            Paradigm::Dtde => "dtde",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Paradigm::Ctce, Paradigm::Ctde, Paradigm::Dtde].into_iter().find(|p| p.name() == name)
    }
}

/// Paradigm-shaped observations.
#[derive(Clone, Debug, PartialEq)]
pub struct ParadigmObservation {
    /// One entry per actor: a single joint vector for `ctce`, one per agent otherwise.
    pub actors: Vec<Vec<f64>>,
    /// Centralized critic input, present only for `ctde`.
    pub critic: Option<Vec<f64>>,
}

/// Length of the critic channel for `n` agents.
pub fn critic_len(n: usize) -> usize {
    6 * n + 1
}

pub fn wrap_observations(
    paradigm: Paradigm,
    observations: &[Observation],
    set: &ObservationSet,
    coverage: f64,
) -> ParadigmObservation {
    match paradigm {
        Paradigm::Ctce => {
            let mut joint = Vec::new();
            for o in observations {
                o.flatten_into(set, &mut joint);
            }
            ParadigmObservation { actors: alloc::vec![joint], critic: None }
        }
        Paradigm::Dtde | Paradigm::Ctde => {
            let actors = observations.iter().map(|o| o.flatten(set)).collect();
            let critic = (paradigm == Paradigm::Ctde).then(|| {
                let mut c = Vec::with_capacity(critic_len(observations.len()));
                for o in observations {
                    c.extend_from_slice(&o.pose);
                    c.extend_from_slice(&o.velocities);
                }
                c.push(coverage);
                c
            });
            ParadigmObservation { actors, critic }
        }
    }
}

/// Splits paradigm-shaped raw actions into per-agent commands.
pub fn unwrap_actions(
    paradigm: Paradigm,
    variant: ActionVariant,
    n_agents: usize,
    actions: &[Vec<f64>],
) -> Result<Vec<ActionCommand>, EnvError> {
    let dim = variant.dim();
    match paradigm {
        Paradigm::Ctce => {
            if actions.len() != 1 {
                return Err(EnvError::ActionArity { expected: 1, actual: actions.len() });
            }
            let joint = &actions[0];
            if joint.len() != n_agents * dim {
                return Err(EnvError::ActionArity { expected: n_agents * dim, actual: joint.len() });
            }
            joint
                .chunks_exact(dim)
                .map(|c| ActionCommand::from_slice(variant, c).map_err(EnvError::Action))
                .collect()
        }
        Paradigm::Ctde | Paradigm::Dtde => {
            if actions.len() != n_agents {
                return Err(EnvError::ActionArity { expected: n_agents, actual: actions.len() });
            }
            actions
                .iter()
                .map(|a| ActionCommand::from_slice(variant, a).map_err(EnvError::Action))
                .collect()
        }
    }
}

/// Dimensions `(observation, action)` each actor sees.
pub fn actor_dims(paradigm: Paradigm, obs_len: usize, variant: ActionVariant, n_agents: usize) -> (usize, usize) {
    match paradigm {
        Paradigm::Ctce => (obs_len * n_agents, variant.dim() * n_agents),
        _ => (obs_len, variant.dim()),
    }
}

//! Shared team reward: newly mapped area normalized by the most area a
//! single agent can sweep in one step.

use super::EnvConfig;
use crate::kinematics::KinematicLimits;
use crate::sensing::LidarConfig;

/// `2 · r · v_max · dt`: sensor diameter times the distance covered in one step.
pub fn a_max(lidar: &LidarConfig, limits: &KinematicLimits) -> f64 {
    2.0 * lidar.max_range * limits.v_max * limits.dt
}

/// Step reward from team-level known-cell counts before and after the step.
///
/// `W_area · ΔArea + W_collision · R_collision · collisions` where
/// `ΔArea = (after − before) · cell_area / A_max` (optionally divided by the
/// team size when `normalize_by_team` is set).
pub fn compute_reward(
    known_before: usize,
    known_after: usize,
    collisions: usize,
    cell_area: f64,
    config: &EnvConfig,
) -> f64 {
    let mut norm = a_max(&config.lidar, &config.limits);
    if config.normalize_by_team {
        norm *= config.n_agents as f64;
    }
    let gained = known_after as f64 - known_before as f64;
    let delta_area = gained * cell_area / norm;
    config.w_area * delta_area + config.w_collision * config.r_collision * collisions as f64
}

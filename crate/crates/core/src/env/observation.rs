//! Per-agent observations and their flat numeric layout.

use alloc::vec::Vec;

use crate::mapping::EgocentricMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObservationVariant {
    EgoMap,
    Lidar,
    PoseVelocity,
    InterAgentDistances,
}

impl ObservationVariant {
    pub const ALL: [ObservationVariant; 4] = [
        ObservationVariant::EgoMap,
        ObservationVariant::Lidar,
        ObservationVariant::PoseVelocity,
        ObservationVariant::InterAgentDistances,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObservationVariant::EgoMap => "ego_map",
            ObservationVariant::Lidar => "lidar",
            ObservationVariant::PoseVelocity => "pose_velocity",
            ObservationVariant::InterAgentDistances => "inter_agent_distances",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }
}

/// Which blocks go into the flat observation vector. Blocks always appear
/// in the order of [`ObservationVariant::ALL`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationSet {
    variants: Vec<ObservationVariant>,
}

impl ObservationSet {
    pub fn new(variants: impl IntoIterator<Item = ObservationVariant>) -> Self {
        let mut variants: Vec<_> = variants.into_iter().collect();
        variants.sort();
        variants.dedup();
        Self { variants }
    }

    pub fn contains(&self, v: ObservationVariant) -> bool {
        self.variants.contains(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = ObservationVariant> + '_ {
        self.variants.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }
}

impl Default for ObservationSet {
    fn default() -> Self {
        Self::new([ObservationVariant::EgoMap, ObservationVariant::Lidar, ObservationVariant::PoseVelocity])
    }
}

/// What one agent perceives after a step. Every block is computed; the
/// configured [`ObservationSet`] decides which ones are flattened.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub ego_map: EgocentricMap,
    /// LiDAR ranges in meters.
    pub lidar: Vec<f64>,
    /// `(p_x, p_y, θ)`.
    pub pose: [f64; 3],
    /// `(v_x, v_y, ω)`, world-frame linear velocity.
    pub velocities: [f64; 3],
    /// Meters to each other agent in index order.
    pub distances: Vec<f64>,
}

impl Observation {
    pub fn flatten_into(&self, set: &ObservationSet, out: &mut Vec<f64>) {
        for v in set.iter() {
            match v {
                ObservationVariant::EgoMap => out.extend_from_slice(&self.ego_map.values),
                ObservationVariant::Lidar => out.extend_from_slice(&self.lidar),
                ObservationVariant::PoseVelocity => {
                    out.extend_from_slice(&self.pose);
                    out.extend_from_slice(&self.velocities);
                }
                ObservationVariant::InterAgentDistances => out.extend_from_slice(&self.distances),
            }
        }
    }

    pub fn flatten(&self, set: &ObservationSet) -> Vec<f64> {
        let mut out = Vec::new();
        self.flatten_into(set, &mut out);
        out
    }
}

/// Names and lengths of the blocks in a flat observation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationLayout {
    pub blocks: Vec<(&'static str, usize)>,
}

impl ObservationLayout {
    pub fn new(set: &ObservationSet, ego_window: usize, ray_count: usize, n_agents: usize) -> Self {
        let blocks = set
            .iter()
            .map(|v| {
                let len = match v {
                    ObservationVariant::EgoMap => ego_window * ego_window,
                    ObservationVariant::Lidar => ray_count,
                    ObservationVariant::PoseVelocity => 6,
                    ObservationVariant::InterAgentDistances => n_agents.saturating_sub(1),
                };
                (v.name(), len)
            })
            .collect();
        Self { blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

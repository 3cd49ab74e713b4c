//! Level progression gated on repeated coverage.

use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurriculumMode {
    /// Levels one after another, advancing on the pass rule.
    Sequential,
    /// A uniformly sampled level per episode.
    Parallel,
}

impl CurriculumMode {
    pub fn name(self) -> &'static str {
        match self {
            CurriculumMode::Sequential => "sequential",
            CurriculumMode::Parallel => "parallel",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sequential" => Some(CurriculumMode::Sequential),
            "parallel" => Some(CurriculumMode::Parallel),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurriculumConfig {
    pub mode: CurriculumMode,
    /// Coverage fraction that counts as a pass, in (0, 1].
    pub pass_area: f64,
    /// Passes needed before advancing; they need not be consecutive.
    pub pass_x_times: u32,
    pub level_order: Vec<u8>,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        Self {
            mode: CurriculumMode::Sequential,
            pass_area: 0.8,
            pass_x_times: 20,
            level_order: (0..=crate::world::MAX_LEVEL).collect(),
        }
    }
}

impl CurriculumConfig {
    pub fn is_valid(&self) -> bool {
        self.pass_area > 0.0 && self.pass_area <= 1.0 && self.pass_x_times >= 1 && !self.level_order.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CurriculumState {
    /// Index into `level_order`.
    pub level_index: usize,
    pub pass_counter: u32,
}

/// Records one finished episode. A coverage at or above `pass_area`
/// increments the counter; reaching `pass_x_times` moves to the next level
/// and clears the counter. On the last level the counter saturates.
pub fn curriculum_update(
    config: &CurriculumConfig,
    state: CurriculumState,
    coverage: f64,
) -> (CurriculumState, bool) {
    if config.mode != CurriculumMode::Sequential || coverage < config.pass_area {
        return (state, false);
    }
    let counter = state.pass_counter + 1;
    if counter < config.pass_x_times {
        return (CurriculumState { pass_counter: counter, ..state }, false);
    }
    if state.level_index + 1 < config.level_order.len() {
        (CurriculumState { level_index: state.level_index + 1, pass_counter: 0 }, true)
    } else {
        (CurriculumState { pass_counter: config.pass_x_times, ..state }, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg(pass_area: f64, times: u32) -> CurriculumConfig {
        CurriculumConfig {
            mode: CurriculumMode::Sequential,
            pass_area,
            pass_x_times: times,
            level_order: vec![0, 1, 2, 3, 4, 5, 6],
        }
    }

    #[test]
    fn single_pass_advances_immediately() {
        let (s, adv) = curriculum_update(&cfg(0.8, 1), CurriculumState::default(), 0.81);
        assert!(adv);
        assert_eq!(s, CurriculumState { level_index: 1, pass_counter: 0 });
    }

    #[test]
    fn near_miss_keeps_counter() {
        let c = cfg(0.8, 20);
        let s = CurriculumState { level_index: 2, pass_counter: 19 };
        let (s2, adv) = curriculum_update(&c, s, 0.79);
        assert!(!adv);
        assert_eq!(s2, s);
        let (s3, adv) = curriculum_update(&c, s2, 0.8);
        assert!(adv);
        assert_eq!(s3, CurriculumState { level_index: 3, pass_counter: 0 });
    }

    #[test]
    fn last_level_saturates() {
        let c = cfg(0.5, 2);
        let s = CurriculumState { level_index: 6, pass_counter: 1 };
        let (s, adv) = curriculum_update(&c, s, 0.9);
        assert!(!adv);
        assert_eq!(s.level_index, 6);
        assert_eq!(s.pass_counter, 2);
    }

    #[test]
    fn parallel_mode_never_advances() {
        let c = CurriculumConfig { mode: CurriculumMode::Parallel, ..cfg(0.1, 1) };
        let (s, adv) = curriculum_update(&c, CurriculumState::default(), 1.0);
        assert!(!adv);
        assert_eq!(s, CurriculumState::default());
    }
}

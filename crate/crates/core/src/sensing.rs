//! Simulated 2D LiDAR: exact grid traversal plus analytic hits on other
//! agents' body discs. Observations are noiseless.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use crate::geometry::{ray_circle_entry, Vec2};
use crate::kinematics::AgentState;
use crate::world::{Cell, GridWorld};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LidarConfig {
    pub ray_count: usize,
    /// Radians, in (0, 2π].
    pub field_of_view: f64,
    /// Meters.
    pub max_range: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self { ray_count: 36, field_of_view: TAU, max_range: 5.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LidarConfigError {
    NoRays,
    FieldOfView(f64),
    MaxRange(f64),
}

impl fmt::Display for LidarConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LidarConfigError::NoRays => write!(f, "lidar needs at least one ray"),
            LidarConfigError::FieldOfView(v) => write!(f, "field of view {v} outside (0, 2pi]"),
            LidarConfigError::MaxRange(v) => write!(f, "max range {v} must be positive"),
        }
    }
}

impl core::error::Error for LidarConfigError {}

impl LidarConfig {
    pub fn validate(&self) -> Result<(), LidarConfigError> {
        if self.ray_count == 0 {
            return Err(LidarConfigError::NoRays);
        }
        if !(self.field_of_view > 0.0 && self.field_of_view <= TAU) {
            return Err(LidarConfigError::FieldOfView(self.field_of_view));
        }
        if !(self.max_range.is_finite() && self.max_range > 0.0) {
            return Err(LidarConfigError::MaxRange(self.max_range));
        }
        Ok(())
    }

    /// Absolute angle of ray `k` for a sensor facing `heading`.
    pub fn ray_angle(&self, heading: f64, k: usize) -> f64 {
        heading + self.field_of_view * (k as f64 / self.ray_count as f64 - 0.5)
    }
}

/// One sweep of the sensor.
#[derive(Clone, Debug, PartialEq)]
pub struct LidarScan {
    pub origin: Vec2,
    pub origin_heading: f64,
    pub field_of_view: f64,
    pub max_range: f64,
    pub ranges: Vec<f64>,
    pub hit_flags: Vec<bool>,
}

impl LidarScan {
    pub fn ray_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn angle(&self, k: usize) -> f64 {
        self.origin_heading + self.field_of_view * (k as f64 / self.ranges.len() as f64 - 0.5)
    }
}

/// Result of a single ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub range: f64,
    pub hit: bool,
}

/// Walks the lattice cells crossed by a ray in order, calling `visit(cell,
/// t_entry)` for each (the origin cell gets `t_entry = 0`). Stops when
/// `visit` returns `true` or the entry parameter exceeds `max_t`.
pub fn traverse_cells(
    cell_size: f64,
    origin: Vec2,
    dir: Vec2,
    max_t: f64,
    mut visit: impl FnMut(Cell, f64) -> bool,
) {
    let mut cell = Cell::new(
        libm::floor(origin.x / cell_size) as i32,
        libm::floor(origin.y / cell_size) as i32,
    );
    if visit(cell, 0.0) {
        return;
    }
    let step_x: i32 = if dir.x > 0.0 { 1 } else if dir.x < 0.0 { -1 } else { 0 };
    let step_y: i32 = if dir.y > 0.0 { 1 } else if dir.y < 0.0 { -1 } else { 0 };
    // Parameter at which the ray crosses the next vertical/horizontal line;
    // recomputed from the cell index each time to avoid drift.
    let next_x = |c: i32| {
        if step_x == 0 {
            f64::INFINITY
        } else {
            let edge = if step_x > 0 { c + 1 } else { c } as f64 * cell_size;
            (edge - origin.x) / dir.x
        }
    };
    let next_y = |c: i32| {
        if step_y == 0 {
            f64::INFINITY
        } else {
            let edge = if step_y > 0 { c + 1 } else { c } as f64 * cell_size;
            (edge - origin.y) / dir.y
        }
    };
    loop {
        let tx = next_x(cell.x);
        let ty = next_y(cell.y);
        let t = if tx <= ty {
            cell.x += step_x;
            tx
        } else {
            cell.y += step_y;
            ty
        };
        if t > max_t || visit(cell, t.max(0.0)) {
            return;
        }
    }
}

/// Casts one ray against the static grid and the given body discs.
pub fn cast_ray(
    world: &GridWorld,
    bodies: &[Vec2],
    body_radius: f64,
    origin: Vec2,
    angle: f64,
    max_range: f64,
) -> RayHit {
    let dir = Vec2::from_angle(angle);
    let mut best = max_range;
    let mut hit = false;
    traverse_cells(world.cell_size(), origin, dir, max_range, |cell, t| {
        if world.is_occupied(cell) {
            best = t;
            hit = true;
            true
        } else {
            false
        }
    });
    for &center in bodies {
        if let Some(t) = ray_circle_entry(origin, dir, center, body_radius) {
            if t < best || (!hit && t <= max_range) {
                best = t.min(best);
                hit = true;
            }
        }
    }
    RayHit { range: best, hit }
}

/// Full scan from `state`; `others` are the other agents' centers.
pub fn scan(
    world: &GridWorld,
    others: &[Vec2],
    body_radius: f64,
    state: &AgentState,
    config: &LidarConfig,
) -> LidarScan {
    let mut ranges = Vec::with_capacity(config.ray_count);
    let mut hit_flags = Vec::with_capacity(config.ray_count);
    for k in 0..config.ray_count {
        let r = cast_ray(
            world,
            others,
            body_radius,
            state.position,
            config.ray_angle(state.heading, k),
            config.max_range,
        );
        ranges.push(r.range);
        hit_flags.push(r.hit);
    }
    LidarScan {
        origin: state.position,
        origin_heading: state.heading,
        field_of_view: config.field_of_view,
        max_range: config.max_range,
        ranges,
        hit_flags,
    }
}

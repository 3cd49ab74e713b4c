//! UAV internal state, normalized action variants and first-order
//! integration with swept-disc collision handling.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{ray_circle_entry, wrap_angle, Rect, Vec2};
use crate::world::{Cell, GridWorld};

/// Pull-back applied at contact so that bodies end strictly outside obstacles.
const CONTACT_SLOP: f64 = 1e-9;
/// Heading error under which the waypoint controller starts moving forward.
const WAYPOINT_ALIGN: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicLimits {
    /// Maximum linear speed, m/s.
    pub v_max: f64,
    /// Maximum angular speed, rad/s.
    pub omega_max: f64,
    pub body_radius: f64,
    /// Seconds per step.
    pub dt: f64,
    /// Clamp the linear command by its norm instead of per axis.
    pub norm_clamp: bool,
}

impl Default for KinematicLimits {
    fn default() -> Self {
        Self { v_max: 0.8, omega_max: 3.0, body_radius: 0.08, dt: 0.1, norm_clamp: false }
    }
}

impl KinematicLimits {
    pub fn validate(&self) -> Result<(), ActionError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.v_max) && ok(self.omega_max) && ok(self.body_radius) && ok(self.dt) {
            Ok(())
        } else {
            Err(ActionError::InvalidLimits)
        }
    }
}

/// Pose and velocities of one agent.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct AgentState {
    pub position: Vec2,
    /// Radians in (−π, π].
    pub heading: f64,
    /// World-frame linear velocity.
    pub linear_velocity: Vec2,
    pub angular_velocity: f64,
}

impl AgentState {
    pub fn at_rest(position: Vec2, heading: f64) -> Self {
        Self { position, heading: wrap_angle(heading), ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionVariant {
    /// Body-frame `(v_x, v_y, ω)`.
    Full3d,
    /// World-frame `(v_x, v_y)`, heading frozen.
    Planar2d,
    /// Body-frame forward speed and turn rate.
    ForwardRot,
    /// Direction to head toward; a controller turns then advances.
    Waypoint,
}

impl ActionVariant {
    pub const ALL: [ActionVariant; 4] =
        [ActionVariant::Full3d, ActionVariant::Planar2d, ActionVariant::ForwardRot, ActionVariant::Waypoint];

    pub fn dim(self) -> usize {
        match self {
            ActionVariant::Full3d => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionVariant::Full3d => "full3d",
            ActionVariant::Planar2d => "planar2d",
            ActionVariant::ForwardRot => "forward_rot",
            ActionVariant::Waypoint => "waypoint",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ActionError {
    Arity { variant: ActionVariant, expected: usize, actual: usize },
    InvalidLimits,
}

impl fmt::Display for ActionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionError::Arity { variant, expected, actual } => {
                write!(f, "{} action needs {expected} components, got {actual}", variant.name())
            }
            ActionError::InvalidLimits => write!(f, "kinematic limits must be finite and positive"),
        }
    }
}

impl core::error::Error for ActionError {}

/// A normalized command; every component lies in [−1, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActionCommand {
    Full3d { vx: f64, vy: f64, omega: f64 },
    Planar2d { vx: f64, vy: f64 },
    ForwardRot { v: f64, omega: f64 },
    Waypoint { dx: f64, dy: f64 },
}

fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-1.0, 1.0)
    }
}

impl ActionCommand {
    /// Parses raw components, clamping each into [−1, 1] (NaN becomes 0).
    pub fn from_slice(variant: ActionVariant, values: &[f64]) -> Result<Self, ActionError> {
        if values.len() != variant.dim() {
            return Err(ActionError::Arity { variant, expected: variant.dim(), actual: values.len() });
        }
        let c = |i: usize| clamp_unit(values[i]);
        Ok(match variant {
            ActionVariant::Full3d => ActionCommand::Full3d { vx: c(0), vy: c(1), omega: c(2) },
            ActionVariant::Planar2d => ActionCommand::Planar2d { vx: c(0), vy: c(1) },
            ActionVariant::ForwardRot => ActionCommand::ForwardRot { v: c(0), omega: c(1) },
            ActionVariant::Waypoint => ActionCommand::Waypoint { dx: c(0), dy: c(1) },
        })
    }

    pub fn zero(variant: ActionVariant) -> Self {
        Self::from_slice(variant, &[0.0; 3][..variant.dim()]).expect("arity matches")
    }

    pub fn variant(&self) -> ActionVariant {
        match self {
            ActionCommand::Full3d { .. } => ActionVariant::Full3d,
            ActionCommand::Planar2d { .. } => ActionVariant::Planar2d,
            ActionCommand::ForwardRot { .. } => ActionVariant::ForwardRot,
            ActionCommand::Waypoint { .. } => ActionVariant::Waypoint,
        }
    }

    pub fn components(&self) -> Vec<f64> {
        match *self {
            ActionCommand::Full3d { vx, vy, omega } => alloc::vec![vx, vy, omega],
            ActionCommand::Planar2d { vx, vy } => alloc::vec![vx, vy],
            ActionCommand::ForwardRot { v, omega } => alloc::vec![v, omega],
            ActionCommand::Waypoint { dx, dy } => alloc::vec![dx, dy],
        }
    }
}

/// Physical velocity target produced by [`scale_action`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VelocityTarget {
    /// Body-frame linear velocity (m/s) and turn rate (rad/s).
    Body { vx: f64, vy: f64, omega: f64 },
    /// World-frame linear velocity; no rotation.
    World { vx: f64, vy: f64 },
    /// Unit direction the waypoint controller steers toward (zero = hover).
    Heading { dir: Vec2 },
}

impl VelocityTarget {
    /// World-frame linear velocity and turn rate at the given heading.
    pub fn resolve(&self, heading: f64, limits: &KinematicLimits) -> (Vec2, f64) {
        match *self {
            VelocityTarget::Body { vx, vy, omega } => (Vec2::new(vx, vy).rotated(heading), omega),
            VelocityTarget::World { vx, vy } => (Vec2::new(vx, vy), 0.0),
            VelocityTarget::Heading { dir } => {
                if dir.norm_sq() == 0.0 {
                    return (Vec2::ZERO, 0.0);
                }
                let error = wrap_angle(libm::atan2(dir.y, dir.x) - heading);
                let omega = (error / limits.dt).clamp(-limits.omega_max, limits.omega_max);
                let forward = if error.abs() < WAYPOINT_ALIGN { limits.v_max } else { 0.0 };
                (Vec2::from_angle(heading) * forward, omega)
            }
        }
    }
}

/// Scales a normalized command to physical velocities.
pub fn scale_action(cmd: &ActionCommand, limits: &KinematicLimits) -> VelocityTarget {
    let linear = |x: f64, y: f64| {
        let (mut x, mut y) = (x * limits.v_max, y * limits.v_max);
        if limits.norm_clamp {
            let n = libm::sqrt(x * x + y * y);
            if n > limits.v_max {
                x *= limits.v_max / n;
                y *= limits.v_max / n;
            }
        }
        (x, y)
    };
    match *cmd {
        ActionCommand::Full3d { vx, vy, omega } => {
            let (vx, vy) = linear(vx, vy);
            VelocityTarget::Body { vx, vy, omega: omega * limits.omega_max }
        }
        ActionCommand::Planar2d { vx, vy } => {
            let (vx, vy) = linear(vx, vy);
            VelocityTarget::World { vx, vy }
        }
        ActionCommand::ForwardRot { v, omega } => {
            VelocityTarget::Body { vx: v * limits.v_max, vy: 0.0, omega: omega * limits.omega_max }
        }
        ActionCommand::Waypoint { dx, dy } => {
            let n = libm::sqrt(dx * dx + dy * dy);
            let dir = if n > 0.0 { Vec2::new(dx / n, dy / n) } else { Vec2::ZERO };
            VelocityTarget::Heading { dir }
        }
    }
}

/// Entry parameter of the ray `origin + t·dir` into `rect` inflated by
/// `radius` (a rounded rectangle). Touching while moving inward gives 0.
fn ray_rounded_rect_entry(origin: Vec2, dir: Vec2, rect: &Rect, radius: f64) -> Option<f64> {
    let qx = origin.x.clamp(rect.min.x, rect.max.x);
    let qy = origin.y.clamp(rect.min.y, rect.max.y);
    let normal = origin - Vec2::new(qx, qy);
    if normal.norm_sq() <= radius * radius {
        return if normal.norm_sq() == 0.0 || dir.dot(normal) < 0.0 { Some(0.0) } else { None };
    }

    let mut best: Option<f64> = None;
    let mut take = |t: f64| {
        if t >= 0.0 && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    };
    if dir.x > 0.0 {
        let t = (rect.min.x - radius - origin.x) / dir.x;
        let y = origin.y + t * dir.y;
        if y >= rect.min.y && y <= rect.max.y {
            take(t);
        }
    } else if dir.x < 0.0 {
        let t = (rect.max.x + radius - origin.x) / dir.x;
        let y = origin.y + t * dir.y;
        if y >= rect.min.y && y <= rect.max.y {
            take(t);
        }
    }
    if dir.y > 0.0 {
        let t = (rect.min.y - radius - origin.y) / dir.y;
        let x = origin.x + t * dir.x;
        if x >= rect.min.x && x <= rect.max.x {
            take(t);
        }
    } else if dir.y < 0.0 {
        let t = (rect.max.y + radius - origin.y) / dir.y;
        let x = origin.x + t * dir.x;
        if x >= rect.min.x && x <= rect.max.x {
            take(t);
        }
    }
    for corner in [
        rect.min,
        rect.max,
        Vec2::new(rect.min.x, rect.max.y),
        Vec2::new(rect.max.x, rect.min.y),
    ] {
        if let Some(t) = ray_circle_entry(origin, dir, corner, radius) {
            take(t);
        }
    }
    best
}

/// Fraction in [0, 1] of `disp` the disc can travel before touching an
/// occupied cell, and whether contact happened.
fn wall_fraction(world: &GridWorld, from: Vec2, disp: Vec2, radius: f64) -> (f64, bool) {
    if disp.norm_sq() == 0.0 {
        return (0.0, false);
    }
    let to = from + disp;
    let pad = Vec2::new(radius, radius);
    let lo = world.cell_of(Vec2::new(from.x.min(to.x), from.y.min(to.y)) - pad);
    let hi = world.cell_of(Vec2::new(from.x.max(to.x), from.y.max(to.y)) + pad);
    let mut hit = f64::INFINITY;
    for y in lo.y..=hi.y {
        for x in lo.x..=hi.x {
            let cell = Cell::new(x, y);
            if !world.is_occupied(cell) {
                continue;
            }
            if let Some(t) = ray_rounded_rect_entry(from, disp, &world.cell_rect(cell), radius) {
                hit = hit.min(t);
            }
        }
    }
    if hit <= 1.0 {
        (backoff(hit, disp), true)
    } else {
        (1.0, false)
    }
}

fn backoff(t: f64, disp: Vec2) -> f64 {
    (t - CONTACT_SLOP / disp.norm()).max(0.0)
}

/// Advances one agent by one step against the static world and stationary
/// bodies at `other_agents`. Returns the new state and whether it touched
/// anything.
pub fn integrate(
    state: &AgentState,
    target: &VelocityTarget,
    limits: &KinematicLimits,
    world: &GridWorld,
    other_agents: &[Vec2],
) -> (AgentState, bool) {
    let (velocity, omega) = target.resolve(state.heading, limits);
    let disp = velocity * limits.dt;
    let (mut frac, mut collided) = wall_fraction(world, state.position, disp, limits.body_radius);
    if disp.norm_sq() > 0.0 {
        for &other in other_agents {
            if let Some(t) = ray_circle_entry(state.position, disp, other, 2.0 * limits.body_radius) {
                if t <= frac {
                    frac = backoff(t, disp);
                    collided = true;
                }
            }
        }
    }
    let next = AgentState {
        position: state.position + disp * frac,
        heading: wrap_angle(state.heading + omega * limits.dt),
        linear_velocity: velocity,
        angular_velocity: omega,
    };
    (next, collided)
}

/// Advances all agents simultaneously from the same pre-step snapshot.
///
/// Each body is first stopped against walls; then every pair moving along
/// its (possibly shortened) path is checked for contact and both are cut
/// back to the common contact instant until no pair interpenetrates.
pub fn integrate_all(
    states: &[AgentState],
    targets: &[VelocityTarget],
    limits: &KinematicLimits,
    world: &GridWorld,
) -> Vec<(AgentState, bool)> {
    let n = states.len();
    let mut resolved: Vec<(Vec2, f64)> = Vec::with_capacity(n);
    let mut disps = Vec::with_capacity(n);
    let mut fracs = Vec::with_capacity(n);
    let mut collided = alloc::vec![false; n];
    for (i, (s, t)) in states.iter().zip(targets).enumerate() {
        let (v, w) = t.resolve(s.heading, limits);
        let disp = v * limits.dt;
        let (frac, hit) = wall_fraction(world, s.position, disp, limits.body_radius);
        resolved.push((v, w));
        disps.push(disp);
        fracs.push(frac);
        collided[i] = hit;
    }

    let contact = 2.0 * limits.body_radius;
    for _round in 0..(4 * n + 4) {
        let mut changed = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let rel_start = states[i].position - states[j].position;
                let rel_disp = disps[i] * fracs[i] - disps[j] * fracs[j];
                if rel_disp.norm_sq() == 0.0 {
                    continue;
                }
                if let Some(u) = ray_circle_entry(rel_start, rel_disp, Vec2::ZERO, contact) {
                    if u <= 1.0 {
                        let u = backoff(u, rel_disp);
                        collided[i] = true;
                        collided[j] = true;
                        if u < 1.0 {
                            fracs[i] *= u;
                            fracs[j] *= u;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    (0..n)
        .map(|i| {
            let (v, w) = resolved[i];
            let s = &states[i];
            let next = AgentState {
                position: s.position + disps[i] * fracs[i],
                heading: wrap_angle(s.heading + w * limits.dt),
                linear_velocity: v,
                angular_velocity: w,
            };
            (next, collided[i])
        })
        .collect()
}

//! Level geometry: the static occupancy lattice, spawn points and the
//! procedural construction of the seven training levels.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Rect, Vec2};

/// Meters per cell side unless a level says otherwise.
pub const DEFAULT_CELL_SIZE: f64 = 0.04;
/// Body radius of the simulated UAV, used for spawn clearance checks.
pub const DEFAULT_BODY_RADIUS: f64 = 0.08;
/// Highest valid level index.
pub const MAX_LEVEL: u8 = 6;

const WALL_THICKNESS: f64 = 0.12;
const OBSTACLE_MARGIN: f64 = 0.5;
const SPAWN_MARGIN: f64 = 0.3;
const SPAWN_SEPARATION: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub enum WorldError {
    InvalidLevel(u8),
    InvalidDimensions { width: usize, height: usize },
    InvalidCellSize,
    NoSpawnPoints,
    /// Spawn point lies in an occupied cell, outside the grid, or too close to a wall.
    SpawnBlocked(usize),
    /// Spawn point is not in the main free component.
    SpawnDisconnected(usize),
    /// Procedural spawn placement gave up.
    SpawnPlacementFailed,
    CellCountMismatch { expected: usize, actual: usize },
}

impl fmt::Display for WorldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorldError::InvalidLevel(id) => write!(f, "level id {id} is outside 0..={MAX_LEVEL}"),
            WorldError::InvalidDimensions { width, height } => {
                write!(f, "grid {width}x{height} is too small (need at least 3x3)")
            }
            WorldError::InvalidCellSize => write!(f, "cell size must be finite and positive"),
            WorldError::NoSpawnPoints => write!(f, "level has no spawn points"),
            WorldError::SpawnBlocked(i) => write!(f, "spawn point {i} is not in free space"),
            WorldError::SpawnDisconnected(i) => {
                write!(f, "spawn point {i} is disconnected from the main free component")
            }
            WorldError::SpawnPlacementFailed => write!(f, "could not place spawn points"),
            WorldError::CellCountMismatch { expected, actual } => {
                write!(f, "expected {expected} cells, got {actual}")
            }
        }
    }
}

impl core::error::Error for WorldError {}

/// Integer lattice coordinate. May lie outside the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

/// Static 2D occupancy geometry of a level plus its spawn points.
///
/// Immutable after construction. Cell `(x, y)` covers
/// `[x·cs, (x+1)·cs) × [y·cs, (y+1)·cs)` in world meters.
#[derive(Clone, Debug, PartialEq)]
pub struct GridWorld {
    width: usize,
    height: usize,
    cell_size: f64,
    occupied: Vec<bool>,
    spawn_points: Vec<Vec2>,
    level_id: u8,
    reachable: Vec<bool>,
    explorable: usize,
}

impl GridWorld {
    /// Builds a world from raw cells (row-major, `y` major). Border cells are
    /// forced to occupied. Spawn points must be free, at least one body
    /// radius from any occupied cell, and all in the largest free component.
    pub fn new(
        width: usize,
        height: usize,
        cell_size: f64,
        mut occupied: Vec<bool>,
        spawn_points: Vec<Vec2>,
        level_id: u8,
    ) -> Result<Self, WorldError> {
        if width < 3 || height < 3 {
            return Err(WorldError::InvalidDimensions { width, height });
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(WorldError::InvalidCellSize);
        }
        if level_id > MAX_LEVEL {
            return Err(WorldError::InvalidLevel(level_id));
        }
        if occupied.len() != width * height {
            return Err(WorldError::CellCountMismatch {
                expected: width * height,
                actual: occupied.len(),
            });
        }
        if spawn_points.is_empty() {
            return Err(WorldError::NoSpawnPoints);
        }
        for x in 0..width {
            occupied[x] = true;
            occupied[(height - 1) * width + x] = true;
        }
        for y in 0..height {
            occupied[y * width] = true;
            occupied[y * width + width - 1] = true;
        }

        let mut world = GridWorld {
            width,
            height,
            cell_size,
            occupied,
            spawn_points,
            level_id,
            reachable: Vec::new(),
            explorable: 0,
        };

        for (i, &p) in world.spawn_points.iter().enumerate() {
            if !world.disc_is_free(p, DEFAULT_BODY_RADIUS) {
                return Err(WorldError::SpawnBlocked(i));
            }
        }

        let (labels, sizes) = world.label_components();
        let main = sizes
            .iter()
            .enumerate()
            .max_by_key(|&(i, &s)| (s, core::cmp::Reverse(i)))
            .map(|(i, _)| i as u32 + 1)
            .unwrap_or(0);
        for (i, &p) in world.spawn_points.iter().enumerate() {
            let idx = world.index(world.cell_of(p)).ok_or(WorldError::SpawnBlocked(i))?;
            if labels[idx] != main {
                return Err(WorldError::SpawnDisconnected(i));
            }
        }
        world.reachable = labels.iter().map(|&l| l == main).collect();
        world.explorable = sizes[main as usize - 1];
        Ok(world)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn level_id(&self) -> u8 {
        self.level_id
    }

    pub fn spawn_points(&self) -> &[Vec2] {
        &self.spawn_points
    }

    /// World extent in meters.
    pub fn extent(&self) -> Vec2 {
        Vec2::new(self.width as f64 * self.cell_size, self.height as f64 * self.cell_size)
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.x >= 0 && cell.y >= 0 && (cell.x as usize) < self.width && (cell.y as usize) < self.height
    }

    /// Row-major index of an in-bounds cell.
    pub fn index(&self, cell: Cell) -> Option<usize> {
        self.in_bounds(cell).then(|| cell.y as usize * self.width + cell.x as usize)
    }

    pub fn cell_of(&self, p: Vec2) -> Cell {
        Cell::new(
            libm::floor(p.x / self.cell_size) as i32,
            libm::floor(p.y / self.cell_size) as i32,
        )
    }

    pub fn cell_rect(&self, cell: Cell) -> Rect {
        let cs = self.cell_size;
        Rect::new(
            cell.x as f64 * cs,
            cell.y as f64 * cs,
            (cell.x + 1) as f64 * cs,
            (cell.y + 1) as f64 * cs,
        )
    }

    pub fn cell_center(&self, cell: Cell) -> Vec2 {
        let cs = self.cell_size;
        Vec2::new((cell.x as f64 + 0.5) * cs, (cell.y as f64 + 0.5) * cs)
    }

    /// Occupancy lookup. Cells outside the grid count as occupied.
    pub fn is_occupied(&self, cell: Cell) -> bool {
        match self.index(cell) {
            Some(i) => self.occupied[i],
            None => true,
        }
    }

    /// Whether the cell is free and reachable from the first spawn point.
    pub fn is_explorable(&self, cell: Cell) -> bool {
        self.index(cell).is_some_and(|i| self.reachable[i])
    }

    pub fn explorable_mask(&self) -> &[bool] {
        &self.reachable
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    /// Number of free cells 4-connected to `spawn_points[0]`.
    pub fn explorable_area(&self) -> usize {
        self.explorable
    }

    /// True when a disc of `radius` centered at `p` overlaps no occupied cell.
    pub fn disc_is_free(&self, p: Vec2, radius: f64) -> bool {
        let lo = self.cell_of(p - Vec2::new(radius, radius));
        let hi = self.cell_of(p + Vec2::new(radius, radius));
        let r2 = radius * radius;
        for y in lo.y..=hi.y {
            for x in lo.x..=hi.x {
                let c = Cell::new(x, y);
                if self.is_occupied(c) && self.cell_rect(c).distance_sq(p) < r2 {
                    return false;
                }
            }
        }
        !self.is_occupied(self.cell_of(p))
    }

    /// Labels 4-connected free components (label 0 = occupied). Returns the
    /// label per cell and the size of each component, indexed by label − 1.
    fn label_components(&self) -> (Vec<u32>, Vec<usize>) {
        label_free_components(self.width, self.height, &self.occupied)
    }
}

fn label_free_components(width: usize, height: usize, occupied: &[bool]) -> (Vec<u32>, Vec<usize>) {
    let mut labels = vec![0u32; width * height];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..occupied.len() {
        if occupied[start] || labels[start] != 0 {
            continue;
        }
        let label = sizes.len() as u32 + 1;
        let mut size = 0usize;
        labels[start] = label;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = (i % width, i / width);
            let mut visit = |j: usize| {
                if !occupied[j] && labels[j] == 0 {
                    labels[j] = label;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < width {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - width);
            }
            if y + 1 < height {
                visit(i + width);
            }
        }
        sizes.push(size);
    }
    (labels, sizes)
}

/// A wall rectangle with door openings carved out of it.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub wall: Rect,
    pub doors: Vec<Rect>,
}

/// Parameters from which a level is generated.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSpec {
    pub level_id: u8,
    pub width_m: f64,
    pub height_m: f64,
    pub cell_size: f64,
    /// Solid walls; snapped to the lattice when rasterized.
    pub wall_segments: Vec<Rect>,
    /// Number of box obstacles scattered with the seeded generator.
    pub obstacle_count: usize,
    pub room_partitions: Vec<Partition>,
    pub seed: u64,
    /// Explicit spawn points. When empty, `spawn_count` points are generated.
    pub spawn_points: Vec<Vec2>,
    pub spawn_count: usize,
}

impl LevelSpec {
    /// Default layout for `level_id`: footprint grows from 8 m to 20 m per
    /// side, walls appear at level 1, obstacles at 3, more rooms at 4,
    /// denser obstacles at 5 and a multi-room house layout at 6.
    pub fn default_for(level_id: u8) -> Result<Self, WorldError> {
        if level_id > MAX_LEVEL {
            return Err(WorldError::InvalidLevel(level_id));
        }
        let size = 8.0 + 2.0 * level_id as f64;
        let t = WALL_THICKNESS / 2.0;
        let vwall = |x: f64, y0: f64, y1: f64| Rect::new(x - t, y0, x + t, y1);
        let hwall = |y: f64, x0: f64, x1: f64| Rect::new(x0, y - t, x1, y + t);
        let door_x = |x0: f64, x1: f64, y: f64| Rect::new(x0, y - 1.0, x1, y + 1.0);
        let door_y = |y0: f64, y1: f64, x: f64| Rect::new(x - 1.0, y0, x + 1.0, y1);

        let mut wall_segments = Vec::new();
        let mut room_partitions = Vec::new();
        let obstacle_count;
        match level_id {
            0 => obstacle_count = 0,
            1 => {
                wall_segments.push(vwall(size / 2.0, 0.0, 0.65 * size));
                obstacle_count = 0;
            }
            2 | 3 => {
                let y = size / 2.0;
                room_partitions.push(Partition {
                    wall: hwall(y, 0.0, size),
                    doors: vec![door_x(0.15 * size, 0.3 * size, y), door_x(0.7 * size, 0.85 * size, y)],
                });
                obstacle_count = if level_id == 3 { 6 } else { 0 };
            }
            4 | 5 => {
                let m = size / 2.0;
                room_partitions.push(Partition {
                    wall: hwall(m, 0.0, size),
                    doors: vec![door_x(0.2 * size, 0.3 * size, m), door_x(0.7 * size, 0.8 * size, m)],
                });
                room_partitions.push(Partition {
                    wall: vwall(m, 0.0, size),
                    doors: vec![door_y(0.2 * size, 0.3 * size, m), door_y(0.7 * size, 0.8 * size, m)],
                });
                obstacle_count = if level_id == 4 { 8 } else { 20 };
            }
            _ => {
                // House: a central hallway with three rooms on each side.
                let (lo, hi) = (0.425 * size, 0.575 * size);
                room_partitions.push(Partition {
                    wall: hwall(lo, 0.0, size),
                    doors: vec![
                        door_x(0.12 * size, 0.2 * size, lo),
                        door_x(0.42 * size, 0.5 * size, lo),
                        door_x(0.75 * size, 0.83 * size, lo),
                    ],
                });
                room_partitions.push(Partition {
                    wall: hwall(hi, 0.0, size),
                    doors: vec![
                        door_x(0.15 * size, 0.23 * size, hi),
                        door_x(0.5 * size, 0.58 * size, hi),
                        door_x(0.8 * size, 0.88 * size, hi),
                    ],
                });
                for (x, y0, y1) in [
                    (0.3 * size, 0.0, lo),
                    (0.6 * size, 0.0, lo),
                    (0.35 * size, hi, size),
                    (0.65 * size, hi, size),
                ] {
                    room_partitions.push(Partition { wall: vwall(x, y0, y1), doors: Vec::new() });
                }
                obstacle_count = 24;
            }
        }
        Ok(LevelSpec {
            level_id,
            width_m: size,
            height_m: size,
            cell_size: DEFAULT_CELL_SIZE,
            wall_segments,
            obstacle_count,
            room_partitions,
            seed: 0x5eed_0000 + level_id as u64,
            spawn_points: Vec::new(),
            spawn_count: 4,
        })
    }

    /// Number of wall structures (plain walls plus partitions).
    pub fn room_count(&self) -> usize {
        self.wall_segments.len() + self.room_partitions.len()
    }
}

struct Raster {
    width: usize,
    height: usize,
    cell_size: f64,
    occupied: Vec<bool>,
}

impl Raster {
    /// Cell range covered by `r`, snapped to the lattice and clipped.
    fn span(&self, r: &Rect) -> (usize, usize, usize, usize) {
        let snap = |v: f64, n: usize| (libm::round(v / self.cell_size).max(0.0) as usize).min(n);
        (
            snap(r.min.x, self.width),
            snap(r.max.x, self.width),
            snap(r.min.y, self.height),
            snap(r.max.y, self.height),
        )
    }

    fn fill(&mut self, r: &Rect, value: bool) {
        let (x0, x1, y0, y1) = self.span(r);
        for y in y0..y1 {
            for x in x0..x1 {
                self.occupied[y * self.width + x] = value;
            }
        }
    }

    fn any_occupied(&self, r: &Rect) -> bool {
        let (x0, x1, y0, y1) = self.span(r);
        (y0..y1).any(|y| (x0..x1).any(|x| self.occupied[y * self.width + x]))
    }
}

/// Builds a level from its spec. Identical specs produce identical worlds.
pub fn build_level(spec: &LevelSpec) -> Result<GridWorld, WorldError> {
    if spec.level_id > MAX_LEVEL {
        return Err(WorldError::InvalidLevel(spec.level_id));
    }
    if !(spec.cell_size.is_finite() && spec.cell_size > 0.0) {
        return Err(WorldError::InvalidCellSize);
    }
    let width = libm::round(spec.width_m / spec.cell_size) as usize;
    let height = libm::round(spec.height_m / spec.cell_size) as usize;
    if width < 3 || height < 3 {
        return Err(WorldError::InvalidDimensions { width, height });
    }
    let mut raster = Raster { width, height, cell_size: spec.cell_size, occupied: vec![false; width * height] };
    for x in 0..width {
        raster.occupied[x] = true;
        raster.occupied[(height - 1) * width + x] = true;
    }
    for y in 0..height {
        raster.occupied[y * width] = true;
        raster.occupied[y * width + width - 1] = true;
    }
    for wall in &spec.wall_segments {
        raster.fill(wall, true);
    }
    for part in &spec.room_partitions {
        raster.fill(&part.wall, true);
    }
    for part in &spec.room_partitions {
        for door in &part.doors {
            // Only carve the part of the door that overlaps its own wall.
            let w = &part.wall;
            let cut = Rect::new(
                door.min.x.max(w.min.x),
                door.min.y.max(w.min.y),
                door.max.x.min(w.max.x),
                door.max.y.min(w.max.y),
            );
            if cut.min.x < cut.max.x && cut.min.y < cut.max.y {
                raster.fill(&cut, false);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    place_obstacles(&mut raster, spec, &mut rng);

    let spawns = if spec.spawn_points.is_empty() {
        generate_spawns(&raster, spec, &mut rng)?
    } else {
        spec.spawn_points.clone()
    };
    GridWorld::new(width, height, spec.cell_size, raster.occupied, spawns, spec.level_id)
}

/// Scatters box obstacles, each surrounded by a free margin so that no
/// obstacle can split a free region or block a door.
fn place_obstacles(raster: &mut Raster, spec: &LevelSpec, rng: &mut ChaCha8Rng) {
    let (w, h) = (spec.width_m, spec.height_m);
    let grow = |r: &Rect, m: f64| Rect::new(r.min.x - m, r.min.y - m, r.max.x + m, r.max.y + m);
    let mut keep_clear: Vec<Rect> = spec
        .room_partitions
        .iter()
        .flat_map(|p| p.doors.iter())
        .map(|d| grow(d, OBSTACLE_MARGIN))
        .collect();
    keep_clear.extend(
        spec.spawn_points
            .iter()
            .map(|p| grow(&Rect::new(p.x, p.y, p.x, p.y), SPAWN_MARGIN + OBSTACLE_MARGIN)),
    );
    let mut placed = 0;
    let mut attempts = 0;
    while placed < spec.obstacle_count && attempts < 1000 * spec.obstacle_count.max(1) {
        attempts += 1;
        let sx = rng.gen_range(0.25..0.6);
        let sy = rng.gen_range(0.25..0.6);
        let x0 = rng.gen_range(0.0..(w - sx));
        let y0 = rng.gen_range(0.0..(h - sy));
        let body = Rect::new(x0, y0, x0 + sx, y0 + sy);
        let halo = Rect::new(
            x0 - OBSTACLE_MARGIN,
            y0 - OBSTACLE_MARGIN,
            x0 + sx + OBSTACLE_MARGIN,
            y0 + sy + OBSTACLE_MARGIN,
        );
        if halo.min.x < 0.0 || halo.min.y < 0.0 || halo.max.x > w || halo.max.y > h {
            continue;
        }
        if raster.any_occupied(&halo) {
            continue;
        }
        if keep_clear.iter().any(|k| rects_overlap(k, &body)) {
            continue;
        }
        raster.fill(&body, true);
        placed += 1;
    }
}

fn rects_overlap(a: &Rect, b: &Rect) -> bool {
    a.min.x < b.max.x && b.min.x < a.max.x && a.min.y < b.max.y && b.min.y < a.max.y
}

fn generate_spawns(raster: &Raster, spec: &LevelSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Vec2>, WorldError> {
    let (labels, sizes) = label_free_components(raster.width, raster.height, &raster.occupied);
    let main = sizes
        .iter()
        .enumerate()
        .max_by_key(|&(i, &s)| (s, core::cmp::Reverse(i)))
        .map(|(i, _)| i as u32 + 1)
        .ok_or(WorldError::SpawnPlacementFailed)?;
    let cs = spec.cell_size;
    let clear = |p: Vec2| {
        let lo_x = libm::floor((p.x - SPAWN_MARGIN) / cs).max(0.0) as usize;
        let lo_y = libm::floor((p.y - SPAWN_MARGIN) / cs).max(0.0) as usize;
        let hi_x = (libm::floor((p.x + SPAWN_MARGIN) / cs) as usize).min(raster.width - 1);
        let hi_y = (libm::floor((p.y + SPAWN_MARGIN) / cs) as usize).min(raster.height - 1);
        let r2 = SPAWN_MARGIN * SPAWN_MARGIN;
        for y in lo_y..=hi_y {
            for x in lo_x..=hi_x {
                if raster.occupied[y * raster.width + x] {
                    let cell = Rect::new(x as f64 * cs, y as f64 * cs, (x + 1) as f64 * cs, (y + 1) as f64 * cs);
                    if cell.distance_sq(p) < r2 {
                        return false;
                    }
                }
            }
        }
        let (cx, cy) = (libm::floor(p.x / cs) as usize, libm::floor(p.y / cs) as usize);
        labels[cy * raster.width + cx] == main
    };
    let mut spawns: Vec<Vec2> = Vec::with_capacity(spec.spawn_count);
    let mut attempts = 0;
    while spawns.len() < spec.spawn_count.max(1) {
        attempts += 1;
        if attempts > 100_000 {
            return Err(WorldError::SpawnPlacementFailed);
        }
        // Snap to cell centers so spawn coordinates are exact multiples.
        let cx = rng.gen_range(1..raster.width - 1);
        let cy = rng.gen_range(1..raster.height - 1);
        let p = Vec2::new((cx as f64 + 0.5) * cs, (cy as f64 + 0.5) * cs);
        if !clear(p) {
            continue;
        }
        if spawns.iter().any(|q| q.distance(p) < SPAWN_SEPARATION) {
            continue;
        }
        spawns.push(p);
    }
    Ok(spawns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_room(n: usize, cs: f64) -> GridWorld {
        let c = (n as f64 / 2.0) * cs;
        GridWorld::new(n, n, cs, vec![false; n * n], vec![Vec2::new(c + 0.5 * cs, c + 0.5 * cs)], 0).unwrap()
    }

    #[test]
    fn ten_by_ten_border_only() {
        let w = open_room(10, 1.0);
        assert_eq!(w.explorable_area(), 64);
        assert!(w.is_occupied(Cell::new(0, 4)));
        assert!(w.is_occupied(Cell::new(9, 9)));
        assert!(!w.is_occupied(Cell::new(5, 5)));
        assert!(w.is_occupied(Cell::new(-1, 0)));
        assert!(w.is_occupied(Cell::new(3, 10)));
    }

    #[test]
    fn fully_walled_except_spawn() {
        let mut occ = vec![true; 25];
        occ[12] = false;
        let w = GridWorld::new(5, 5, 1.0, occ, vec![Vec2::new(2.5, 2.5)], 0).unwrap();
        assert_eq!(w.explorable_area(), 1);
    }

    #[test]
    fn spawn_in_wall_rejected() {
        let occ = vec![false; 100];
        let err = GridWorld::new(10, 10, 1.0, occ, vec![Vec2::new(0.5, 0.5)], 0).unwrap_err();
        assert_eq!(err, WorldError::SpawnBlocked(0));
    }

    #[test]
    fn disconnected_spawn_rejected() {
        // A wall down the middle splits the room into two halves of unequal size.
        let mut occ = vec![false; 100];
        for y in 0..10 {
            occ[y * 10 + 3] = true;
        }
        let spawns = vec![Vec2::new(6.5, 5.5), Vec2::new(1.5, 5.5)];
        let err = GridWorld::new(10, 10, 1.0, occ, spawns, 0).unwrap_err();
        assert_eq!(err, WorldError::SpawnDisconnected(1));
    }

    #[test]
    fn spec_walls_disconnecting_spawn_rejected() {
        let mut spec = LevelSpec::default_for(0).unwrap();
        spec.wall_segments.push(Rect::new(2.0, 0.0, 2.2, 8.0));
        spec.spawn_points = vec![Vec2::new(5.0, 4.0), Vec2::new(1.0, 4.0)];
        assert_eq!(build_level(&spec).unwrap_err(), WorldError::SpawnDisconnected(1));
    }

    #[test]
    fn level_zero_is_empty_room() {
        let w = build_level(&LevelSpec::default_for(0).unwrap()).unwrap();
        assert_eq!(w.width(), 200);
        let interior = (w.width() - 2) * (w.height() - 2);
        assert_eq!(w.explorable_area(), interior);
        let center = w.cell_of(Vec2::new(4.0, 4.0));
        assert!(!w.is_occupied(center));
    }

    #[test]
    fn build_is_deterministic() {
        for id in 0..=MAX_LEVEL {
            let spec = LevelSpec::default_for(id).unwrap();
            assert_eq!(build_level(&spec).unwrap(), build_level(&spec).unwrap());
        }
    }

    #[test]
    fn invalid_level_rejected() {
        assert_eq!(LevelSpec::default_for(7).unwrap_err(), WorldError::InvalidLevel(7));
    }

    #[test]
    fn disc_clearance() {
        let w = open_room(10, 1.0);
        assert!(w.disc_is_free(Vec2::new(5.0, 5.0), 0.5));
        assert!(!w.disc_is_free(Vec2::new(1.3, 5.0), 0.5));
    }
}

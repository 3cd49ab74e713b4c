//! Per-agent belief: a log-odds occupancy grid over the world lattice.
//!
//! Scans are inserted along Bresenham lines, peer maps are fused by
//! summing log-odds (the Bayesian product under conditional independence),
//! and the policy sees a fixed-size egocentric window of probabilities.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::Vec2;
use crate::sensing::LidarScan;
use crate::world::{Cell, GridWorld};

/// Scale of the 16-bit fixed-point log-odds used on the wire.
pub const SNAPSHOT_SCALE: f64 = 1024.0;
/// Size of the snapshot header: width, height, cell size, ε.
pub const SNAPSHOT_HEADER_BYTES: usize = 16;

/// Inverse sensor model and classification thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapParams {
    pub l_occ: f64,
    pub l_free: f64,
    pub l_min: f64,
    pub l_max: f64,
    /// A cell is known once `|log_odds| > epsilon`.
    pub epsilon: f64,
}

impl Default for MapParams {
    fn default() -> Self {
        Self { l_occ: 0.85, l_free: -0.4, l_min: -10.0, l_max: 10.0, epsilon: 0.3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapError {
    LatticeMismatch,
    SnapshotTruncated { expected: usize, actual: usize },
    SnapshotHeader,
}

impl fmt::Display for MapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapError::LatticeMismatch => write!(f, "occupancy grids have different lattices"),
            MapError::SnapshotTruncated { expected, actual } => {
                write!(f, "map snapshot has {actual} bytes, expected {expected}")
            }
            MapError::SnapshotHeader => write!(f, "map snapshot header is invalid"),
        }
    }
}

impl core::error::Error for MapError {}

/// Occupancy probability for a log-odds value.
pub fn probability(log_odds: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-log_odds))
}

/// Log-odds for a probability in (0, 1).
pub fn logit(p: f64) -> f64 {
    libm::log(p / (1.0 - p))
}

/// Cells changed by one update, in ascending index order with their final
/// values, plus how many moved from unknown to known.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellDelta {
    pub changes: Vec<(usize, f64)>,
    pub discovered_count: usize,
}

impl CellDelta {
    fn from_touches(grid: &OccupancyGrid, mut touches: Vec<(usize, f64)>) -> Self {
        // Stable sort keeps the first touch (the pre-update value) first.
        touches.sort_by_key(|&(i, _)| i);
        touches.dedup_by_key(|&mut (i, _)| i);
        let eps = grid.params.epsilon;
        let mut discovered_count = 0;
        let mut changes = Vec::with_capacity(touches.len());
        for (i, before) in touches {
            let after = grid.log_odds[i];
            if after != before {
                if before.abs() <= eps && after.abs() > eps {
                    discovered_count += 1;
                }
                changes.push((i, after));
            }
        }
        CellDelta { changes, discovered_count }
    }
}

/// Log-odds belief over a `width × height` lattice; 0 means unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    cell_size: f64,
    params: MapParams,
    log_odds: Vec<f64>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, cell_size: f64, params: MapParams) -> Self {
        Self { width, height, cell_size, params, log_odds: vec![0.0; width * height] }
    }

    pub fn for_world(world: &GridWorld, params: MapParams) -> Self {
        Self::new(world.width(), world.height(), world.cell_size(), params)
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

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn log_odds(&self) -> &[f64] {
        &self.log_odds
    }

    pub fn same_lattice(&self, other: &OccupancyGrid) -> bool {
        self.width == other.width && self.height == other.height && self.cell_size == other.cell_size
    }

    fn index(&self, cell: Cell) -> Option<usize> {
        (cell.x >= 0 && cell.y >= 0 && (cell.x as usize) < self.width && (cell.y as usize) < self.height)
            .then(|| cell.y as usize * self.width + cell.x as usize)
    }

    pub fn get(&self, cell: Cell) -> Option<f64> {
        self.index(cell).map(|i| self.log_odds[i])
    }

    /// Sets a cell's log-odds (clamped). Out-of-lattice cells are ignored.
    pub fn set(&mut self, cell: Cell, value: f64) {
        if let Some(i) = self.index(cell) {
            self.log_odds[i] = value.clamp(self.params.l_min, self.params.l_max);
        }
    }

    pub fn probability_at(&self, cell: Cell) -> Option<f64> {
        self.get(cell).map(probability)
    }

    pub fn cell_of(&self, p: Vec2) -> Cell {
        Cell::new(
            libm::floor(p.x / self.cell_size) as i32,
            libm::floor(p.y / self.cell_size) as i32,
        )
    }

    pub fn is_known(&self, index: usize) -> bool {
        self.log_odds[index].abs() > self.params.epsilon
    }

    /// Number of cells with `|log_odds| > epsilon`.
    pub fn known_cells(&self, epsilon: f64) -> usize {
        self.log_odds.iter().filter(|l| l.abs() > epsilon).count()
    }

    fn add(&mut self, i: usize, delta: f64, touches: &mut Vec<(usize, f64)>) {
        let before = self.log_odds[i];
        touches.push((i, before));
        self.log_odds[i] = (before + delta).clamp(self.params.l_min, self.params.l_max);
    }

    /// Inserts a scan. For each ray, the cells strictly between the origin
    /// cell and the endpoint cell get `l_free`; the endpoint gets `l_occ` on
    /// a hit and `l_free` on a miss.
    pub fn update_from_scan(&mut self, scan: &LidarScan) -> CellDelta {
        let mut touches = Vec::new();
        let start = self.cell_of(scan.origin);
        // Hit points sit exactly on the face of the struck cell; nudge them
        // inside so the endpoint lands in the occupied cell.
        let nudge = self.cell_size * 1e-3;
        for k in 0..scan.ray_count() {
            let dir = Vec2::from_angle(scan.angle(k));
            let hit = scan.hit_flags[k];
            let reach = if hit { scan.ranges[k] + nudge } else { scan.ranges[k] };
            let end = self.cell_of(scan.origin + dir * reach);
            let (l_free, l_occ) = (self.params.l_free, self.params.l_occ);
            for cell in bresenham(start, end) {
                if cell == start && cell != end {
                    continue;
                }
                let Some(i) = self.index(cell) else { continue };
                let delta = if cell == end && hit { l_occ } else { l_free };
                self.add(i, delta, &mut touches);
            }
        }
        CellDelta::from_touches(self, touches)
    }

    /// Adds `other`'s evidence into `self` cellwise with clamping.
    pub fn fuse_from(&mut self, other: &OccupancyGrid) -> Result<CellDelta, MapError> {
        if !self.same_lattice(other) {
            return Err(MapError::LatticeMismatch);
        }
        let mut touches = Vec::new();
        for (i, &l) in other.log_odds.iter().enumerate() {
            if l != 0.0 {
                self.add(i, l, &mut touches);
            }
        }
        Ok(CellDelta::from_touches(self, touches))
    }

    /// Fixed-size probability window centered on the cell containing
    /// `position`. For even `size` the center is at index `size / 2`.
    pub fn extract_egocentric(&self, position: Vec2, size: usize) -> EgocentricMap {
        let center = self.cell_of(position);
        let half = (size / 2) as i32;
        let mut values = Vec::with_capacity(size * size);
        for j in 0..size as i32 {
            for i in 0..size as i32 {
                let cell = Cell::new(center.x - half + i, center.y - half + j);
                values.push(self.get(cell).map_or(0.5, probability));
            }
        }
        EgocentricMap { size, values }
    }

    /// Wire form: `width: u32, height: u32, cell_size: f32, epsilon: f32`
    /// then one `i16` per cell (`round(log_odds · 1024)`), row-major, all
    /// little-endian.
    pub fn encode_snapshot(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(snapshot_len(self.width, self.height));
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        out.extend_from_slice(&(self.cell_size as f32).to_le_bytes());
        out.extend_from_slice(&(self.params.epsilon as f32).to_le_bytes());
        for &l in &self.log_odds {
            let q = libm::round(l * SNAPSHOT_SCALE).clamp(i16::MIN as f64, i16::MAX as f64) as i16;
            out.extend_from_slice(&q.to_le_bytes());
        }
        out
    }

    /// Decodes a snapshot. The cell size is taken from `base` when it agrees
    /// with the header at `f32` precision, so decoded grids fuse with local
    /// ones.
    pub fn decode_snapshot(bytes: &[u8], base: &OccupancyGrid) -> Result<OccupancyGrid, MapError> {
        if bytes.len() < SNAPSHOT_HEADER_BYTES {
            return Err(MapError::SnapshotHeader);
        }
        let word = |o: usize| [bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]];
        let width = u32::from_le_bytes(word(0)) as usize;
        let height = u32::from_le_bytes(word(4)) as usize;
        let cell_size = f32::from_le_bytes(word(8));
        let epsilon = f32::from_le_bytes(word(12)) as f64;
        let expected = snapshot_len(width, height);
        if bytes.len() != expected {
            return Err(MapError::SnapshotTruncated { expected, actual: bytes.len() });
        }
        if width != base.width || height != base.height || cell_size != base.cell_size as f32 {
            return Err(MapError::LatticeMismatch);
        }
        let params = MapParams { epsilon, ..base.params };
        let log_odds = bytes[SNAPSHOT_HEADER_BYTES..]
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / SNAPSHOT_SCALE)
            .collect();
        Ok(OccupancyGrid { width, height, cell_size: base.cell_size, params, log_odds })
    }
}

/// Byte length of an encoded snapshot.
pub fn snapshot_len(width: usize, height: usize) -> usize {
    SNAPSHOT_HEADER_BYTES + 2 * width * height
}

/// Cellwise `clamp(a + b)`. Lattices must match.
pub fn fuse_maps(a: &OccupancyGrid, b: &OccupancyGrid) -> Result<OccupancyGrid, MapError> {
    let mut out = a.clone();
    out.fuse_from(b)?;
    Ok(out)
}

/// Fold of one cell across several grids in order, clamping after each sum.
pub fn fold_cell(grids: &[OccupancyGrid], index: usize) -> f64 {
    grids.iter().fold(0.0, |acc, g| (acc + g.log_odds[index]).clamp(g.params.l_min, g.params.l_max))
}

/// Cells on the Bresenham line from `a` to `b`, both endpoints included.
pub fn bresenham(a: Cell, b: Cell) -> Bresenham {
    let dx = (b.x - a.x).abs();
    let dy = -(b.y - a.y).abs();
    Bresenham {
        current: a,
        end: b,
        dx,
        dy,
        sx: if a.x < b.x { 1 } else { -1 },
        sy: if a.y < b.y { 1 } else { -1 },
        err: dx + dy,
        done: false,
    }
}

/// Iterator produced by [`bresenham`].
#[derive(Clone, Debug)]
pub struct Bresenham {
    current: Cell,
    end: Cell,
    dx: i32,
    dy: i32,
    sx: i32,
    sy: i32,
    err: i32,
    done: bool,
}

impl Iterator for Bresenham {
    type Item = Cell;

    fn next(&mut self) -> Option<Cell> {
        if self.done {
            return None;
        }
        let out = self.current;
        if out == self.end {
            self.done = true;
            return Some(out);
        }
        let e2 = 2 * self.err;
        if e2 >= self.dy {
            self.err += self.dy;
            self.current.x += self.sx;
        }
        if e2 <= self.dx {
            self.err += self.dx;
            self.current.y += self.sy;
        }
        Some(out)
    }
}

/// Square window of occupancy probabilities, row-major with rows along +y.
/// Cells outside the lattice or never observed read 0.5.
#[derive(Clone, Debug, PartialEq)]
pub struct EgocentricMap {
    pub size: usize,
    pub values: Vec<f64>,
}

impl EgocentricMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.size + i]
    }

    /// Window index of the agent's own cell.
    pub fn center(&self) -> (usize, usize) {
        (self.size / 2, self.size / 2)
    }
}

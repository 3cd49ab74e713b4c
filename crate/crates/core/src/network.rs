//! Range-gated communication: the per-step link graph and a message layer
//! with size/bandwidth delivery delays, LiDAR sharing on every link, full
//! map sharing on (re)connection, and optional flooding.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::Vec2;
use crate::sensing::{LidarConfig, LidarScan};

/// Size of the LiDAR payload header: sender, ray count, step.
pub const LIDAR_HEADER_BYTES: usize = 8;
/// Pose block of a LiDAR payload: x, y, heading as `f32`.
pub const LIDAR_POSE_BYTES: usize = 12;
/// Per-ray cost: `f32` range plus a hit flag byte.
pub const LIDAR_RAY_BYTES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CommMode {
    Off,
    OneHop,
    MultiHop,
}

impl CommMode {
    pub fn name(self) -> &'static str {
        match self {
            CommMode::Off => "off",
            CommMode::OneHop => "one_hop",
            CommMode::MultiHop => "multi_hop",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [CommMode::Off, CommMode::OneHop, CommMode::MultiHop].into_iter().find(|m| m.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommConfig {
    pub mode: CommMode,
    /// Link range in meters (inclusive).
    pub range: f64,
    /// Bytes per second per link direction; `f64::INFINITY` means every
    /// message arrives on the next step.
    pub bandwidth: f64,
    /// Flooding limit for multi-hop; `None` means the agent count.
    pub max_hops: Option<usize>,
}

impl Default for CommConfig {
    fn default() -> Self {
        Self { mode: CommMode::OneHop, range: 4.0, bandwidth: 250_000.0, max_hops: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CommConfigError {
    Range(f64),
    Bandwidth(f64),
}

impl fmt::Display for CommConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommConfigError::Range(r) => write!(f, "communication range {r} must be positive"),
            CommConfigError::Bandwidth(b) => write!(f, "bandwidth {b} must be positive"),
        }
    }
}

impl core::error::Error for CommConfigError {}

impl CommConfig {
    pub fn validate(&self) -> Result<(), CommConfigError> {
        if !(self.range > 0.0) {
            return Err(CommConfigError::Range(self.range));
        }
        if !(self.bandwidth > 0.0) {
            return Err(CommConfigError::Bandwidth(self.bandwidth));
        }
        Ok(())
    }

    /// Steps from sending to delivery; never less than one.
    pub fn delay_steps(&self, payload_bytes: usize, dt: f64) -> u64 {
        if self.bandwidth.is_infinite() {
            return 1;
        }
        let steps = libm::ceil(payload_bytes as f64 / (self.bandwidth * dt));
        (steps as u64).max(1)
    }
}

/// Who can talk to whom at one step. Symmetric and irreflexive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommGraph {
    pub step: u64,
    n: usize,
    adjacency: Vec<bool>,
}

impl CommGraph {
    pub fn empty(step: u64, n: usize) -> Self {
        Self { step, n, adjacency: vec![false; n * n] }
    }

    pub fn agent_count(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adjacency[i * self.n + j]
    }

    /// Undirected edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).filter(move |&j| self.has_edge(i, j)).map(move |j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.has_edge(i, j))
    }

    /// Bitmask over the `n(n−1)/2` possible edges in lexicographic order.
    pub fn topology_key(&self) -> u64 {
        let mut key = 0u64;
        let mut bit = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    key |= 1 << bit;
                }
                bit += 1;
            }
        }
        key
    }
}

/// Links every pair within range (boundary inclusive). `Off` yields no edges.
pub fn build_graph(step: u64, positions: &[Vec2], config: &CommConfig) -> CommGraph {
    let n = positions.len();
    let mut g = CommGraph::empty(step, n);
    if config.mode == CommMode::Off {
        return g;
    }
    let r2 = config.range * config.range;
    for i in 0..n {
        for j in (i + 1)..n {
            if (positions[i] - positions[j]).norm_sq() <= r2 {
                g.adjacency[i * n + j] = true;
                g.adjacency[j * n + i] = true;
            }
        }
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    LidarShare,
    MapShare,
}

/// A message in flight or delivered.
#[derive(Clone, Debug, PartialEq)]
pub struct CommEvent {
    pub kind: MessageKind,
    /// Agent whose data this is.
    pub origin: usize,
    /// Agent transmitting this hop.
    pub sender: usize,
    pub receiver: usize,
    pub payload: Arc<[u8]>,
    pub payload_bytes: usize,
    /// Step the origin produced the data.
    pub created_step: u64,
    /// Step this hop was transmitted (equals `created_step` on the first hop).
    pub sent_step: u64,
    pub deliver_step: u64,
    pub hop_count: usize,
    /// Agents that already carried the data, origin first.
    pub carriers: Vec<usize>,
}

impl CommEvent {
    fn order_key(&self) -> (u64, usize, usize, MessageKind, usize, u64) {
        (self.deliver_step, self.sender, self.receiver, self.kind, self.origin, self.created_step)
    }
}

/// Per-episode counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NetworkMetrics {
    pub bytes_lidar: u64,
    pub bytes_map: u64,
    pub enqueued_lidar: u64,
    pub enqueued_map: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub duplicates: u64,
}

/// The message layer for one episode.
#[derive(Clone, Debug)]
pub struct Network {
    config: CommConfig,
    dt: f64,
    n: usize,
    in_flight: Vec<CommEvent>,
    previous: CommGraph,
    seen: Vec<BTreeSet<(usize, MessageKind, u64)>>,
    metrics: NetworkMetrics,
}

impl Network {
    pub fn new(config: CommConfig, n: usize, dt: f64) -> Self {
        Self {
            config,
            dt,
            n,
            in_flight: Vec::new(),
            previous: CommGraph::empty(0, n),
            seen: vec![BTreeSet::new(); n],
            metrics: NetworkMetrics::default(),
        }
    }

    pub fn config(&self) -> &CommConfig {
        &self.config
    }

    pub fn metrics(&self) -> NetworkMetrics {
        self.metrics
    }

    pub fn in_flight(&self) -> &[CommEvent] {
        &self.in_flight
    }

    pub fn previous_graph(&self) -> &CommGraph {
        &self.previous
    }

    fn max_hops(&self) -> usize {
        match self.config.mode {
            CommMode::MultiHop => self.config.max_hops.unwrap_or(self.n),
            _ => 1,
        }
    }

    fn enqueue(&mut self, mut event: CommEvent) {
        event.deliver_step = event.sent_step + self.config.delay_steps(event.payload_bytes, self.dt);
        match event.kind {
            MessageKind::LidarShare => {
                self.metrics.bytes_lidar += event.payload_bytes as u64;
                self.metrics.enqueued_lidar += 1;
            }
            MessageKind::MapShare => {
                self.metrics.bytes_map += event.payload_bytes as u64;
                self.metrics.enqueued_map += 1;
            }
        }
        self.in_flight.push(event);
    }

    /// Advances the message layer by one step and returns the events
    /// delivered now, ordered by (deliver step, sender, receiver, kind).
    ///
    /// In-flight events whose link is gone are dropped; due events are
    /// delivered (and flooded onward in multi-hop mode); then every link
    /// queues a LiDAR share each way and every newly formed link queues a
    /// full map share each way. `map_payload(i)` is only called for agents
    /// that gained a link.
    pub fn tick(
        &mut self,
        graph: &CommGraph,
        lidar_payloads: &[Arc<[u8]>],
        mut map_payload: impl FnMut(usize) -> Arc<[u8]>,
    ) -> Vec<CommEvent> {
        let t = graph.step;

        let before = self.in_flight.len();
        self.in_flight.retain(|e| graph.has_edge(e.sender, e.receiver));
        self.metrics.dropped += (before - self.in_flight.len()) as u64;

        let (mut due, pending): (Vec<_>, Vec<_>) = self.in_flight.drain(..).partition(|e| e.deliver_step <= t);
        self.in_flight = pending;
        due.sort_by_key(CommEvent::order_key);

        let max_hops = self.max_hops();
        let mut delivered = Vec::with_capacity(due.len());
        for event in due {
            let key = (event.origin, event.kind, event.created_step);
            if !self.seen[event.receiver].insert(key) {
                self.metrics.duplicates += 1;
                continue;
            }
            self.metrics.delivered += 1;
            if self.config.mode == CommMode::MultiHop && event.hop_count < max_hops {
                let mut carriers = event.carriers.clone();
                carriers.push(event.receiver);
                let next: Vec<usize> = graph.neighbors(event.receiver).filter(|j| !carriers.contains(j)).collect();
                for j in next {
                    self.enqueue(CommEvent {
                        sender: event.receiver,
                        receiver: j,
                        sent_step: t,
                        hop_count: event.hop_count + 1,
                        carriers: carriers.clone(),
                        ..event.clone()
                    });
                }
            }
            delivered.push(event);
        }

        let edges: Vec<(usize, usize)> = graph.edges().collect();
        for &(i, j) in &edges {
            for (from, to) in [(i, j), (j, i)] {
                let payload = lidar_payloads[from].clone();
                self.enqueue(CommEvent {
                    kind: MessageKind::LidarShare,
                    origin: from,
                    sender: from,
                    receiver: to,
                    payload_bytes: payload.len(),
                    payload,
                    created_step: t,
                    sent_step: t,
                    deliver_step: t,
                    hop_count: 1,
                    carriers: vec![from],
                });
            }
        }
        let mut snapshots: Vec<Option<Arc<[u8]>>> = vec![None; self.n];
        for &(i, j) in &edges {
            if self.previous.has_edge(i, j) {
                continue;
            }
            for (from, to) in [(i, j), (j, i)] {
                let payload = snapshots[from].get_or_insert_with(|| map_payload(from)).clone();
                self.enqueue(CommEvent {
                    kind: MessageKind::MapShare,
                    origin: from,
                    sender: from,
                    receiver: to,
                    payload_bytes: payload.len(),
                    payload,
                    created_step: t,
                    sent_step: t,
                    deliver_step: t,
                    hop_count: 1,
                    carriers: vec![from],
                });
            }
        }

        self.previous = graph.clone();
        delivered
    }
}

/// Byte length of a LiDAR share for `ray_count` rays.
pub fn lidar_payload_len(ray_count: usize) -> usize {
    LIDAR_HEADER_BYTES + LIDAR_POSE_BYTES + LIDAR_RAY_BYTES * ray_count
}

/// Wire form of a scan: `sender: u16, ray_count: u16, step: u32`, pose as
/// three `f32` (x, y, heading), then per ray an `f32` range and a `u8` hit
/// flag. Little-endian.
pub fn encode_lidar_payload(sender: usize, step: u64, scan: &LidarScan) -> Vec<u8> {
    let mut out = Vec::with_capacity(lidar_payload_len(scan.ray_count()));
    out.extend_from_slice(&(sender as u16).to_le_bytes());
    out.extend_from_slice(&(scan.ray_count() as u16).to_le_bytes());
    out.extend_from_slice(&(step as u32).to_le_bytes());
    out.extend_from_slice(&(scan.origin.x as f32).to_le_bytes());
    out.extend_from_slice(&(scan.origin.y as f32).to_le_bytes());
    out.extend_from_slice(&(scan.origin_heading as f32).to_le_bytes());
    for (&r, &h) in scan.ranges.iter().zip(&scan.hit_flags) {
        out.extend_from_slice(&(r as f32).to_le_bytes());
        out.push(h as u8);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct LidarPayloadError;

impl fmt::Display for LidarPayloadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed lidar payload")
    }
}

impl core::error::Error for LidarPayloadError {}

/// Decodes a LiDAR share; angles come from the (shared) sensor config.
pub fn decode_lidar_payload(bytes: &[u8], config: &LidarConfig) -> Result<(usize, u64, LidarScan), LidarPayloadError> {
    if bytes.len() < LIDAR_HEADER_BYTES + LIDAR_POSE_BYTES {
        return Err(LidarPayloadError);
    }
    let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
    let f32_at = |o: usize| f32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]) as f64;
    let sender = u16_at(0) as usize;
    let rays = u16_at(2) as usize;
    let step = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]) as u64;
    if bytes.len() != lidar_payload_len(rays) {
        return Err(LidarPayloadError);
    }
    let origin = Vec2::new(f32_at(8), f32_at(12));
    let heading = f32_at(16);
    let mut ranges = Vec::with_capacity(rays);
    let mut hit_flags = Vec::with_capacity(rays);
    for k in 0..rays {
        let o = LIDAR_HEADER_BYTES + LIDAR_POSE_BYTES + k * LIDAR_RAY_BYTES;
        ranges.push(f32_at(o));
        hit_flags.push(bytes[o + 4] != 0);
    }
    let scan = LidarScan {
        origin,
        origin_heading: heading,
        field_of_view: config.field_of_view,
        max_range: config.max_range,
        ranges,
        hit_flags,
    };
    Ok((sender, step, scan))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn payloads(n: usize, len: usize) -> Vec<Arc<[u8]>> {
        (0..n).map(|i| Arc::from(vec![i as u8; len])).collect()
    }

    fn map_of(len: usize) -> impl FnMut(usize) -> Arc<[u8]> {
        move |i| Arc::from(vec![i as u8; len])
    }

    #[test]
    fn range_rule_is_inclusive() {
        let cfg = CommConfig::default();
        let g = build_graph(0, &[Vec2::new(0.0, 0.0), Vec2::new(3.9, 0.0)], &cfg);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
        let g = build_graph(0, &[Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0)], &cfg);
        assert!(g.has_edge(0, 1));
        let g = build_graph(0, &[Vec2::new(0.0, 0.0), Vec2::new(4.01, 0.0)], &cfg);
        assert!(!g.has_edge(0, 1));
        assert!(!g.has_edge(0, 0));
    }

    #[test]
    fn off_mode_has_no_edges() {
        let cfg = CommConfig { mode: CommMode::Off, ..Default::default() };
        let g = build_graph(0, &[Vec2::ZERO, Vec2::new(0.1, 0.0), Vec2::new(0.2, 0.0)], &cfg);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn delay_model() {
        let cfg = CommConfig::default();
        assert_eq!(cfg.delay_steps(200, 0.1), 1);
        assert_eq!(cfg.delay_steps(25_000, 0.1), 1);
        assert_eq!(cfg.delay_steps(25_001, 0.1), 2);
        assert_eq!(cfg.delay_steps(80_016, 0.1), 4);
        assert_eq!(cfg.delay_steps(0, 0.1), 1);
        let inf = CommConfig { bandwidth: f64::INFINITY, ..cfg };
        assert_eq!(inf.delay_steps(10_000_000, 0.1), 1);
    }

    #[test]
    fn two_agents_exchange_scans_and_maps_on_contact() {
        let cfg = CommConfig::default();
        let mut net = Network::new(cfg, 2, 0.1);
        let pos = [Vec2::ZERO, Vec2::new(1.0, 0.0)];
        let map_len = 16 + 2 * 200 * 200;
        let out = net.tick(&build_graph(0, &pos, &cfg), &payloads(2, 200), map_of(map_len));
        assert!(out.is_empty());
        let lidar: Vec<_> = net.in_flight().iter().filter(|e| e.kind == MessageKind::LidarShare).collect();
        let maps: Vec<_> = net.in_flight().iter().filter(|e| e.kind == MessageKind::MapShare).collect();
        assert_eq!(lidar.len(), 2);
        assert_eq!(maps.len(), 2);
        assert!(maps.iter().all(|e| e.payload_bytes == map_len));
        assert_eq!(net.metrics().bytes_map, 2 * map_len as u64);

        // Next step: the link persists, so only scans are queued.
        let out = net.tick(&build_graph(1, &pos, &cfg), &payloads(2, 200), map_of(map_len));
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|e| e.kind == MessageKind::LidarShare && e.deliver_step == 1));
        assert_eq!(net.metrics().enqueued_map, 2);
        assert_eq!(net.metrics().enqueued_lidar, 4);
    }

    #[test]
    fn broken_link_drops_in_flight() {
        let cfg = CommConfig::default();
        let mut net = Network::new(cfg, 2, 0.1);
        let near = [Vec2::ZERO, Vec2::new(1.0, 0.0)];
        let far = [Vec2::ZERO, Vec2::new(10.0, 0.0)];
        net.tick(&build_graph(0, &near, &cfg), &payloads(2, 200), map_of(80_016));
        let out = net.tick(&build_graph(1, &far, &cfg), &payloads(2, 200), map_of(80_016));
        assert!(out.is_empty());
        assert_eq!(net.metrics().dropped, 4);
        assert!(net.in_flight().is_empty());
        // Reconnection triggers a fresh map share.
        net.tick(&build_graph(2, &near, &cfg), &payloads(2, 200), map_of(80_016));
        assert_eq!(net.metrics().enqueued_map, 4);
    }

    #[test]
    fn multi_hop_relays_along_a_line() {
        let cfg = CommConfig { mode: CommMode::MultiHop, ..Default::default() };
        let pos = [Vec2::ZERO, Vec2::new(3.0, 0.0), Vec2::new(6.0, 0.0)];
        let mut net = Network::new(cfg, 3, 0.1);
        let mut a_at_b = None;
        let mut a_at_c = None;
        for t in 0..6 {
            let out = net.tick(&build_graph(t, &pos, &cfg), &payloads(3, 200), map_of(64));
            for e in out {
                if e.origin == 0 && e.kind == MessageKind::LidarShare && e.created_step == 0 {
                    if e.receiver == 1 {
                        a_at_b = Some(t);
                    }
                    if e.receiver == 2 {
                        a_at_c = Some((t, e.hop_count));
                    }
                }
            }
        }
        assert_eq!(a_at_b, Some(1));
        assert_eq!(a_at_c, Some((2, 2)));
    }

    #[test]
    fn one_hop_never_relays() {
        let cfg = CommConfig::default();
        let pos = [Vec2::ZERO, Vec2::new(3.0, 0.0), Vec2::new(6.0, 0.0)];
        let mut net = Network::new(cfg, 3, 0.1);
        for t in 0..10 {
            for e in net.tick(&build_graph(t, &pos, &cfg), &payloads(3, 200), map_of(64)) {
                assert_eq!(e.hop_count, 1);
                assert!(!(e.origin == 0 && e.receiver == 2));
            }
        }
    }

    #[test]
    fn multi_hop_deduplicates_in_triangle() {
        let cfg = CommConfig { mode: CommMode::MultiHop, bandwidth: f64::INFINITY, ..Default::default() };
        let pos = [Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.5, 0.8)];
        let mut net = Network::new(cfg, 3, 0.1);
        let mut seen = std::collections::HashSet::new();
        for t in 0..8 {
            for e in net.tick(&build_graph(t, &pos, &cfg), &payloads(3, 50), map_of(64)) {
                assert!(seen.insert((e.receiver, e.origin, e.kind, e.created_step)), "duplicate {e:?}");
                assert_eq!(e.deliver_step, e.sent_step + 1);
            }
        }
        assert!(net.metrics().duplicates > 0);
    }

    #[test]
    fn byte_accounting_matches_enqueued_events() {
        let cfg = CommConfig { mode: CommMode::MultiHop, ..Default::default() };
        let mut net = Network::new(cfg, 4, 0.1);
        let mut total_lidar = 0u64;
        let mut total_map = 0u64;
        for t in 0..50u64 {
            let x = (t as f64 * 0.37) % 6.0;
            let pos = [Vec2::ZERO, Vec2::new(x, 0.0), Vec2::new(3.0, x), Vec2::new(6.0 - x, 1.0)];
            let before: Vec<_> = net.in_flight().iter().map(|e| (e.sent_step, e.sender, e.receiver, e.kind)).collect();
            net.tick(&build_graph(t, &pos, &cfg), &payloads(4, 200), map_of(5000));
            for e in net.in_flight() {
                if e.sent_step == t && !before.contains(&(e.sent_step, e.sender, e.receiver, e.kind)) {
                    match e.kind {
                        MessageKind::LidarShare => total_lidar += e.payload_bytes as u64,
                        MessageKind::MapShare => total_map += e.payload_bytes as u64,
                    }
                }
            }
        }
        // Every event sent at step t with delay >= 1 is still in flight right after the tick.
        assert_eq!(net.metrics().bytes_lidar, total_lidar);
        assert_eq!(net.metrics().bytes_map, total_map);
    }

    #[test]
    fn lidar_payload_layout() {
        let scan = LidarScan {
            origin: Vec2::new(1.5, 2.25),
            origin_heading: 0.5,
            field_of_view: core::f64::consts::TAU,
            max_range: 5.0,
            ranges: vec![1.0; 36],
            hit_flags: vec![true; 36],
        };
        let bytes = encode_lidar_payload(3, 7, &scan);
        assert_eq!(bytes.len(), 200);
        assert_eq!(lidar_payload_len(36), 8 + 5 * 36 + 12);
        let (sender, step, back) = decode_lidar_payload(&bytes, &LidarConfig::default()).unwrap();
        assert_eq!((sender, step), (3, 7));
        assert_eq!(back.origin, scan.origin);
        assert_eq!(back.ranges, scan.ranges);
        assert!(decode_lidar_payload(&bytes[..100], &LidarConfig::default()).is_err());
    }

    #[test]
    fn three_agents_have_eight_topologies() {
        // Exhaustive sweep of placements on a coarse lattice.
        let cfg = CommConfig::default();
        let mut keys = std::collections::BTreeSet::new();
        let coords: Vec<f64> = (0..5).map(|k| k as f64 * 2.5).collect();
        for &ax in &coords {
            for &bx in &coords {
                for &cx in &coords {
                    for &cy in &coords {
                        let p = [Vec2::new(ax, 0.0), Vec2::new(bx, 0.0), Vec2::new(cx, cy)];
                        keys.insert(build_graph(0, &p, &cfg).topology_key());
                    }
                }
            }
        }
        assert_eq!(keys.len(), 1 << (3 * 2 / 2));
    }
}

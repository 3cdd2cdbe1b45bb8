//! Grid topology, packets, queues and the statistics nodes piggyback on
//! every transmission.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::error::{Error, Result};

/// Grid address of a node. Doubles as the node identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub i: u16,
    pub j: u16,
}

impl Coord {
    pub const fn new(i: u16, j: u16) -> Self {
        Self { i, j }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Manhattan distance between two grid cells.
pub fn manhattan(a: Coord, b: Coord) -> u32 {
    u32::from(a.i.abs_diff(b.i)) + u32::from(a.j.abs_diff(b.j))
}

/// Up to four neighbours in N, S, W, E order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbors {
    items: [Coord; 4],
    len: u8,
}

impl Neighbors {
    pub const fn empty() -> Self {
        Self {
            items: [Coord::new(0, 0); 4],
            len: 0,
        }
    }

    pub fn push(&mut self, c: Coord) {
        self.items[usize::from(self.len)] = c;
        self.len += 1;
    }
}

impl Deref for Neighbors {
    type Target = [Coord];
    fn deref(&self) -> &[Coord] {
        &self.items[..usize::from(self.len)]
    }
}

impl FromIterator<Coord> for Neighbors {
    fn from_iter<I: IntoIterator<Item = Coord>>(iter: I) -> Self {
        let mut out = Neighbors::empty();
        for c in iter {
            out.push(c);
        }
        out
    }
}

/// Rectangular grid with wired 4-connectivity and a fixed set of gateways.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTopology {
    rows: u16,
    cols: u16,
    /// Sorted by `(i, j)`; this order breaks nearest-gateway ties.
    gateways: Vec<Coord>,
}

impl GridTopology {
    /// Grid with gateways at the middle-most point of each edge.
    pub fn new(rows: u16, cols: u16) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidConfig(alloc::vec![alloc::format!(
                "grid must be at least 2x2, got {rows}x{cols}"
            )]));
        }
        let mid_r = (rows - 1) / 2;
        let mid_c = (cols - 1) / 2;
        Self::with_gateways(
            rows,
            cols,
            alloc::vec![
                Coord::new(0, mid_c),
                Coord::new(rows - 1, mid_c),
                Coord::new(mid_r, 0),
                Coord::new(mid_r, cols - 1),
            ],
        )
    }

    pub fn with_gateways(rows: u16, cols: u16, mut gateways: Vec<Coord>) -> Result<Self> {
        let mut violations = Vec::new();
        if rows == 0 || cols == 0 {
            violations.push(alloc::format!("grid dimensions must be positive, got {rows}x{cols}"));
        }
        if gateways.is_empty() {
            violations.push("at least one gateway is required".into());
        }
        for g in &gateways {
            if g.i >= rows || g.j >= cols {
                violations.push(alloc::format!("gateway {g} outside {rows}x{cols} grid"));
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidConfig(violations));
        }
        gateways.sort_unstable();
        gateways.dedup();
        Ok(Self {
            rows,
            cols,
            gateways,
        })
    }

    pub fn rows(&self) -> u16 {
        self.rows
    }

    pub fn cols(&self) -> u16 {
        self.cols
    }

    pub fn gateways(&self) -> &[Coord] {
        &self.gateways
    }

    pub fn node_count(&self) -> usize {
        usize::from(self.rows) * usize::from(self.cols)
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.i < self.rows && c.j < self.cols
    }

    fn check(&self, c: Coord) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                coord: c,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Row-major index of `c`.
    pub fn index(&self, c: Coord) -> usize {
        usize::from(c.i) * usize::from(self.cols) + usize::from(c.j)
    }

    pub fn coord(&self, index: usize) -> Coord {
        let cols = usize::from(self.cols);
        Coord::new((index / cols) as u16, (index % cols) as u16)
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.node_count()).map(|k| self.coord(k))
    }

    pub fn is_gateway(&self, c: Coord) -> bool {
        self.gateways.binary_search(&c).is_ok()
    }

    /// In-bounds 4-neighbours of `c` in N, S, W, E order.
    pub fn neighbors(&self, c: Coord) -> Result<Neighbors> {
        self.check(c)?;
        let mut out = Neighbors::empty();
        if c.i > 0 {
            out.push(Coord::new(c.i - 1, c.j));
        }
        if c.i + 1 < self.rows {
            out.push(Coord::new(c.i + 1, c.j));
        }
        if c.j > 0 {
            out.push(Coord::new(c.i, c.j - 1));
        }
        if c.j + 1 < self.cols {
            out.push(Coord::new(c.i, c.j + 1));
        }
        Ok(out)
    }

    /// Gateway closest to `c` in Manhattan distance, first in `(i, j)` order
    /// on ties.
    pub fn nearest_gateway(&self, c: Coord) -> Result<Coord> {
        self.check(c)?;
        let mut best = self.gateways[0];
        for &g in &self.gateways[1..] {
            if manhattan(c, g) < manhattan(c, best) {
                best = g;
            }
        }
        Ok(best)
    }

    /// Whether `c` is one hop away from gateway `w`.
    pub fn adjacent_to(&self, c: Coord, w: Coord) -> bool {
        manhattan(c, w) == 1
    }
}

/// Node status piggybacked on every transmitted packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsSnapshot {
    pub reporter: Coord,
    pub queue_len: u32,
    /// Packets per second, measured between consecutive transmissions.
    pub queue_gradient: f64,
    /// pJ.
    pub battery: f64,
    /// Simulation time the snapshot was taken, s.
    pub report_time: f64,
}

/// One sensor reading in flight.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub origin: Coord,
    pub destination: Coord,
    /// mW, always positive.
    pub power_reading: f64,
    pub sensed_at: f64,
    /// Status of the node currently transmitting the packet.
    pub stats: StatsSnapshot,
    pub hop_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enqueue {
    Accepted,
    Overflowed,
}

/// Queue, battery and neighbour knowledge of one nano-node.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: Coord,
    pub queue: VecDeque<Packet>,
    pub queue_capacity: usize,
    /// pJ, kept in `[0, capacity]`.
    pub battery: f64,
    pub resting_until: Option<f64>,
    /// Latest snapshot heard from each neighbour.
    pub neighbor_estimates: BTreeMap<Coord, StatsSnapshot>,
    pub overflow_count: u64,
    /// Time up to which harvesting has been applied to `battery`.
    pub(crate) energy_clock: f64,
    pub(crate) initial_battery: f64,
    pub(crate) harvested_total: f64,
    pub(crate) drained_total: f64,
    pub(crate) tx_count: u64,
    /// Queue length and time of the previous transmission batch.
    pub(crate) last_tx: Option<(u32, f64)>,
    /// Set once the node has rested on an empty queue; cleared by the next
    /// arrival so resting stays edge-triggered.
    pub(crate) idle: bool,
}

impl NodeState {
    pub fn new(id: Coord, battery: f64, queue_capacity: usize) -> Self {
        Self {
            id,
            queue: VecDeque::with_capacity(queue_capacity),
            queue_capacity,
            battery,
            resting_until: None,
            neighbor_estimates: BTreeMap::new(),
            overflow_count: 0,
            energy_clock: 0.0,
            initial_battery: battery,
            harvested_total: 0.0,
            drained_total: 0.0,
            tx_count: 0,
            last_tx: None,
            idle: false,
        }
    }

    /// Appends `p` unless the queue is full, in which case the packet is
    /// dropped and counted.
    pub fn enqueue(&mut self, p: Packet) -> Enqueue {
        if self.queue.len() < self.queue_capacity {
            self.queue.push_back(p);
            self.idle = false;
            Enqueue::Accepted
        } else {
            self.overflow_count += 1;
            Enqueue::Overflowed
        }
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Number of queued packets destined to gateway `w`.
    pub fn queued_for(&self, w: Coord) -> usize {
        self.queue.iter().filter(|p| p.destination == w).count()
    }

    /// Gateways with pending traffic, in FIFO order of their first packet.
    pub fn pending_destinations(&self) -> Vec<Coord> {
        let mut out: Vec<Coord> = Vec::new();
        for p in &self.queue {
            if !out.contains(&p.destination) {
                out.push(p.destination);
            }
        }
        out
    }

    /// Stores a neighbour's snapshot. A snapshot showing the neighbour out of
    /// power (unable to afford one more emission) resets its entry to the
    /// defaults.
    pub fn record_neighbor_stats(&mut self, stats: StatsSnapshot, drain_per_tx: f64) {
        if stats.battery < drain_per_tx {
            self.neighbor_estimates.remove(&stats.reporter);
        } else {
            self.neighbor_estimates.insert(stats.reporter, stats);
        }
    }

    pub fn transmissions(&self) -> u64 {
        self.tx_count
    }

    pub fn harvested_total(&self) -> f64 {
        self.harvested_total
    }

    pub fn drained_total(&self) -> f64 {
        self.drained_total
    }

    pub fn initial_battery(&self) -> f64 {
        self.initial_battery
    }
}

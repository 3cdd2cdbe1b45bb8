//! Deterministic discrete-event simulation of one run.
//!
//! Events are processed in `(time, seq)` order, where `seq` is a global
//! insertion counter, so a run is a pure function of its [`RunConfig`]. The
//! only randomness is the sensing phase of each node, drawn once from the
//! seed.
//!
//! Sensing events for nodes the beam cannot reach yet are skipped ahead to
//! the first sensing instant at which the source could illuminate them.
//! Those events would produce nothing, so skipping them does not change the
//! outcome.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::EnergyConfig;
use crate::error::{Error, Result};
use crate::estimator::{direction_error, offset_error, DirectionMethod, EstimatorConfig, Reading, Server};
use crate::geom::Point2;
use crate::grid::{Coord, Enqueue, GridTopology, NodeState, Packet, StatsSnapshot};
use crate::routing::{estimated_views, forwarding_step, ideal_estimates, RoutingConfig, Variant};
use crate::scene::{cell_area, node_surface_position, SceneConfig};

/// Everything that defines one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridTopology,
    pub scene: SceneConfig,
    pub energy: EnergyConfig,
    pub routing: RoutingConfig,
    /// Seconds between successive sensing events at one node.
    pub sensing_period: f64,
    /// Propagation time of one packet over one link, s.
    pub link_delay: f64,
    pub seed: u64,
    /// Defaults to the time the source needs to traverse its path.
    pub duration: Option<f64>,
    pub queue_capacity: usize,
    /// Metric sampling cadence, s.
    pub metric_interval: f64,
    /// Packets exceeding this many hops are dropped. Defaults to
    /// `4 · (rows + cols)`.
    pub hop_limit: Option<u32>,
    pub record_trace: bool,
}

impl RunConfig {
    /// Defaults for a 31x31 surface with the given sensing period.
    pub fn new(sensing_period: f64, variant: Variant) -> Self {
        Self {
            grid: GridTopology::new(31, 31).expect("31x31 grid is valid"),
            scene: SceneConfig::default(),
            energy: EnergyConfig::default(),
            routing: RoutingConfig {
                sense_rate_global: 1.0 / sensing_period,
                variant,
                ..RoutingConfig::default()
            },
            sensing_period,
            link_delay: 0.001,
            seed: 1,
            duration: None,
            queue_capacity: 10,
            metric_interval: 0.1,
            hop_limit: None,
            record_trace: false,
        }
    }

    /// Sets the sensing period and the matching hard-wired sense rate.
    pub fn with_period(mut self, period: f64) -> Self {
        self.sensing_period = period;
        self.routing.sense_rate_global = 1.0 / period;
        self
    }

    pub fn effective_duration(&self) -> f64 {
        self.duration.unwrap_or_else(|| self.scene.traversal_time())
    }

    pub fn effective_hop_limit(&self) -> u32 {
        self.hop_limit
            .unwrap_or(4 * (u32::from(self.grid.rows()) + u32::from(self.grid.cols())))
    }

    pub fn violations(&self) -> Vec<alloc::string::String> {
        let mut v = Vec::new();
        if !(self.sensing_period > 0.0 && self.sensing_period.is_finite()) {
            v.push(alloc::format!("sim.sensing_period must be positive, got {}", self.sensing_period));
        }
        if !(self.link_delay > 0.0 && self.link_delay.is_finite()) {
            v.push(alloc::format!("sim.link_delay must be positive, got {}", self.link_delay));
        }
        if let Some(d) = self.duration {
            if !(d >= 0.0 && d.is_finite()) {
                v.push(alloc::format!("sim.duration must be non-negative, got {d}"));
            }
        }
        if self.queue_capacity == 0 {
            v.push("sim.queue_capacity must be at least 1".into());
        }
        if !(self.metric_interval > 0.0 && self.metric_interval.is_finite()) {
            v.push(alloc::format!("sim.metric_interval must be positive, got {}", self.metric_interval));
        }
        v.extend(self.scene.violations());
        v.extend(self.energy.violations());
        v.extend(self.routing.violations());
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    /// A node sensed a non-zero power and created a packet.
    Sense,
    Transmit,
    Arrive,
    Deliver,
    Drop,
    RestStart,
    RestEnd,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Sense => "sense",
            TraceKind::Transmit => "transmit",
            TraceKind::Arrive => "arrive",
            TraceKind::Deliver => "deliver",
            TraceKind::Drop => "drop",
            TraceKind::RestStart => "rest_start",
            TraceKind::RestEnd => "rest_end",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub kind: TraceKind,
    pub node: Coord,
    pub packet: Option<u64>,
}

/// Fixed-width histogram of delivery latencies.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyHistogram {
    /// s.
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl LatencyHistogram {
    fn new(bin_width: f64) -> Self {
        Self {
            bin_width,
            counts: Vec::new(),
        }
    }

    fn record(&mut self, latency: f64) {
        let bin = libm::floor(latency / self.bin_width).max(0.0) as usize;
        if bin >= self.counts.len() {
            self.counts.resize(bin + 1, 0);
        }
        self.counts[bin] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// One metric sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub time: f64,
    /// Degrees; `None` before the estimate is valid.
    pub direction_error: Option<f64>,
    /// cm.
    pub offset_error: Option<f64>,
    pub mean_battery_fraction: f64,
}

/// Invariants checked while the run executes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantReport {
    /// Battery outside `[0, capacity]` or queue over capacity, counted per
    /// event.
    pub bound_violations: u64,
    /// Largest per-node `|initial + harvested - drained - final|`, relative.
    pub max_energy_residual: f64,
    /// `generated == delivered + dropped + in_flight`.
    pub accounting_holds: bool,
}

/// Per-node totals at the end of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSummary {
    pub coord: Coord,
    pub transmissions: u64,
    pub initial_battery: f64,
    pub harvested: f64,
    pub drained: f64,
    pub final_battery: f64,
    pub overflows: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    /// Degrees, averaged over samples with a valid estimate. NaN if none.
    pub mean_direction_error: f64,
    /// cm, same averaging.
    pub mean_offset_error: f64,
    /// Dropped packets per second per sensing node.
    pub overflow_rate: f64,
    /// Battery over capacity, averaged over sensing nodes and samples.
    pub mean_battery_fraction: f64,
    pub generated_count: u64,
    pub delivered_count: u64,
    pub dropped_count: u64,
    /// Queued or on a link when the run ended.
    pub in_flight_count: u64,
    /// Subset of `dropped_count` caused by the hop limit.
    pub hop_limit_drops: u64,
    pub transmissions: u64,
    pub latency_histogram: LatencyHistogram,
    /// s; NaN if nothing was delivered.
    pub mean_latency: f64,
    pub valid_samples: u64,
    /// Valid samples whose direction came from the normal fallback.
    pub fallback_samples: u64,
    pub first_valid_at: Option<f64>,
    pub series: Vec<SamplePoint>,
    pub invariants: InvariantReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub nodes: Vec<NodeSummary>,
    /// Present when `record_trace` was set.
    pub trace: Option<Vec<TraceRecord>>,
}

#[derive(Debug)]
enum EventKind {
    Sense(usize),
    Forward(usize),
    Arrive { to: usize, packet: Packet },
    RestEnd(usize),
    MetricSample(u64),
}

#[derive(Debug)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed: BinaryHeap is a max-heap and we pop the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Sim<'a> {
    cfg: &'a RunConfig,
    duration: f64,
    cell_area: f64,
    hop_limit: u32,
    nodes: Vec<NodeState>,
    gateway: Vec<bool>,
    positions: Vec<Point2>,
    nearest: Vec<Coord>,
    phases: Vec<f64>,
    forward_pending: Vec<bool>,
    busy_until: Vec<f64>,
    events: BinaryHeap<Event>,
    seq: u64,
    now: f64,
    next_packet: u64,
    server: Server,
    trace: Option<Vec<TraceRecord>>,

    generated: u64,
    delivered: u64,
    dropped: u64,
    hop_drops: u64,
    latency_sum: f64,
    latency: LatencyHistogram,
    bound_violations: u64,
    dir_sum: f64,
    offset_sum: f64,
    battery_sum: f64,
    battery_samples: u64,
    valid_samples: u64,
    fallback_samples: u64,
    series: Vec<SamplePoint>,
}

/// Executes one run.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut sim = Sim::new(cfg)?;
    sim.prime();
    sim.execute()?;
    Ok(sim.finish())
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        let topo = &cfg.grid;
        let n = topo.node_count();
        let mut gateway = vec![false; n];
        let mut positions = Vec::with_capacity(n);
        let mut nearest = Vec::with_capacity(n);
        let mut nodes = Vec::with_capacity(n);
        for (k, c) in topo.coords().enumerate() {
            gateway[k] = topo.is_gateway(c);
            positions.push(node_surface_position(c, topo, &cfg.scene));
            nearest.push(topo.nearest_gateway(c)?);
            nodes.push(NodeState::new(c, cfg.energy.initial_battery, cfg.queue_capacity));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let phases = (0..n)
            .map(|k| {
                if gateway[k] {
                    0.0
                } else {
                    rng.random::<f64>() * cfg.sensing_period
                }
            })
            .collect();
        Ok(Self {
            cfg,
            duration: cfg.effective_duration(),
            cell_area: cell_area(topo, &cfg.scene),
            hop_limit: cfg.effective_hop_limit(),
            nodes,
            gateway,
            positions,
            nearest,
            phases,
            forward_pending: vec![false; n],
            busy_until: vec![0.0; n],
            events: BinaryHeap::new(),
            seq: 0,
            now: 0.0,
            next_packet: 0,
            server: Server::new(EstimatorConfig::new(&cfg.scene, topo)),
            trace: cfg.record_trace.then(Vec::new),
            generated: 0,
            delivered: 0,
            dropped: 0,
            hop_drops: 0,
            latency_sum: 0.0,
            latency: LatencyHistogram::new(0.01),
            bound_violations: 0,
            dir_sum: 0.0,
            offset_sum: 0.0,
            battery_sum: 0.0,
            battery_samples: 0,
            valid_samples: 0,
            fallback_samples: 0,
            series: Vec::new(),
        })
    }

    fn push(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.events.push(Event {
            time,
            seq: self.seq,
            kind,
        });
    }

    fn log(&mut self, kind: TraceKind, node: Coord, packet: Option<u64>) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceRecord {
                time: self.now,
                kind,
                node,
                packet,
            });
        }
    }

    fn prime(&mut self) {
        for k in 0..self.nodes.len() {
            if !self.gateway[k] {
                self.schedule_sense(k, 0);
            }
        }
        if self.duration > 0.0 {
            self.push(0.0, EventKind::MetricSample(0));
        }
    }

    /// Schedules the first sensing instant of node `k` with index `>= from`
    /// at which the beam could reach it.
    fn schedule_sense(&mut self, k: usize, from: u64) {
        let period = self.cfg.sensing_period;
        let phase = self.phases[k];
        let mut idx = from;
        let t = phase + idx as f64 * period;
        if t >= self.duration {
            return;
        }
        let earliest = self.cfg.scene.earliest_illumination(self.positions[k], t);
        if earliest >= self.duration {
            return;
        }
        if earliest > t {
            let skip = libm::ceil((earliest - phase) / period);
            if skip > idx as f64 {
                idx = skip as u64;
            }
        }
        let t = phase + idx as f64 * period;
        if t < self.duration {
            self.push(t, EventKind::Sense(k));
        }
    }

    fn sense_index(&self, k: usize) -> u64 {
        let raw = (self.now - self.phases[k]) / self.cfg.sensing_period;
        libm::round(raw) as u64
    }

    fn execute(&mut self) -> Result<()> {
        while let Some(ev) = self.events.pop() {
            if ev.time >= self.duration {
                // Put it back so in-flight packets are still counted.
                self.events.push(ev);
                break;
            }
            self.now = ev.time;
            match ev.kind {
                EventKind::Sense(k) => self.on_sense(k)?,
                EventKind::Forward(k) => self.on_forward(k)?,
                EventKind::Arrive { to, packet } => self.on_arrive(to, packet),
                EventKind::RestEnd(k) => {
                    self.log(TraceKind::RestEnd, self.nodes[k].id, None);
                    self.try_schedule_forward(k);
                }
                EventKind::MetricSample(i) => self.on_sample(i)?,
            }
        }
        Ok(())
    }

    fn snapshot_of(&self, k: usize) -> StatsSnapshot {
        let node = &self.nodes[k];
        StatsSnapshot {
            reporter: node.id,
            queue_len: node.queue_len() as u32,
            queue_gradient: 0.0,
            battery: node.battery_at(self.now, &self.cfg.energy),
            report_time: self.now,
        }
    }

    fn check_bounds(&mut self, k: usize) {
        let node = &self.nodes[k];
        let cap = self.cfg.energy.capacity;
        if !(node.battery >= 0.0 && node.battery <= cap * (1.0 + 1e-12)) || node.queue_len() > node.queue_capacity {
            self.bound_violations += 1;
        }
    }

    fn drop_packet(&mut self, k: usize, packet: &Packet) {
        self.dropped += 1;
        self.log(TraceKind::Drop, self.nodes[k].id, Some(packet.id));
    }

    fn on_sense(&mut self, k: usize) -> Result<()> {
        let idx = self.sense_index(k);
        let power = self.cfg.scene.impinging_power(self.positions[k], self.now, self.cell_area)?;
        if power > 0.0 {
            let id = self.next_packet;
            self.next_packet += 1;
            self.generated += 1;
            let packet = Packet {
                id,
                origin: self.nodes[k].id,
                destination: self.nearest[k],
                power_reading: power,
                sensed_at: self.now,
                stats: self.snapshot_of(k),
                hop_count: 0,
            };
            self.log(TraceKind::Sense, self.nodes[k].id, Some(id));
            if self.nodes[k].enqueue(packet.clone()) == Enqueue::Overflowed {
                self.drop_packet(k, &packet);
            } else {
                self.try_schedule_forward(k);
            }
            self.check_bounds(k);
        }
        self.schedule_sense(k, idx + 1);
        Ok(())
    }

    fn try_schedule_forward(&mut self, k: usize) {
        if self.forward_pending[k] {
            return;
        }
        let node = &self.nodes[k];
        if node.queue.is_empty() || node.is_resting(self.now) {
            return;
        }
        let start = self.now.max(self.busy_until[k]);
        let at = node.energy_ready_at(start, &self.cfg.energy);
        self.forward_pending[k] = true;
        self.push(at, EventKind::Forward(k));
    }

    fn on_forward(&mut self, k: usize) -> Result<()> {
        self.forward_pending[k] = false;
        let energy = self.cfg.energy;
        self.nodes[k].bring_up_to_date(self.now, &energy);
        {
            let node = &self.nodes[k];
            if node.queue.is_empty() || node.is_resting(self.now) {
                return Ok(());
            }
            if !node.can_transmit(&energy) {
                self.try_schedule_forward(k);
                return Ok(());
            }
        }
        let id = self.nodes[k].id;
        let views = match self.cfg.routing.variant {
            Variant::Ideal => ideal_estimates(&self.nodes, &self.cfg.grid, id, self.now, &energy)?,
            Variant::Estimated => {
                estimated_views(&self.nodes[k], &self.cfg.grid, self.now, &self.cfg.routing, energy.capacity)?
            }
        };
        let outcome = forwarding_step(
            &mut self.nodes[k],
            &self.cfg.grid,
            &self.cfg.routing,
            &energy,
            self.now,
            &views,
        );
        self.check_bounds(k);
        let sent = outcome.transmissions.len();
        let at = self.now + self.cfg.link_delay;
        for tx in outcome.transmissions {
            self.log(TraceKind::Transmit, id, Some(tx.packet.id));
            let to = self.cfg.grid.index(tx.next_hop);
            self.push(at, EventKind::Arrive { to, packet: tx.packet });
        }
        // One service interval per batch, equal to the link slot.
        self.busy_until[k] = at;
        if outcome.rest_started {
            self.log(TraceKind::RestStart, id, None);
            if let Some(until) = self.nodes[k].resting_until {
                self.push(until, EventKind::RestEnd(k));
            }
        } else if sent > 0 {
            self.try_schedule_forward(k);
        }
        Ok(())
    }

    fn on_arrive(&mut self, to: usize, mut packet: Packet) {
        if self.gateway[to] {
            self.delivered += 1;
            let latency = self.now - packet.sensed_at;
            self.latency_sum += latency;
            self.latency.record(latency);
            self.log(TraceKind::Deliver, self.nodes[to].id, Some(packet.id));
            let origin = self.cfg.grid.index(packet.origin);
            self.server.deliver(Reading {
                origin: packet.origin,
                position: self.positions[origin],
                power: packet.power_reading,
                sensed_at: packet.sensed_at,
                delivered_at: self.now,
            });
            return;
        }
        self.log(TraceKind::Arrive, self.nodes[to].id, Some(packet.id));
        self.nodes[to].record_neighbor_stats(packet.stats, self.cfg.energy.drain_per_tx);
        if packet.hop_count > self.hop_limit {
            self.hop_drops += 1;
            self.drop_packet(to, &packet);
            return;
        }
        packet.stats = self.snapshot_of(to);
        let id = packet.id;
        if self.nodes[to].enqueue(packet) == Enqueue::Overflowed {
            self.dropped += 1;
            self.log(TraceKind::Drop, self.nodes[to].id, Some(id));
        } else {
            self.try_schedule_forward(to);
        }
        self.check_bounds(to);
    }

    fn on_sample(&mut self, i: u64) -> Result<()> {
        let energy = self.cfg.energy;
        let mut sum = 0.0;
        let mut count = 0u64;
        for (k, node) in self.nodes.iter().enumerate() {
            if !self.gateway[k] {
                sum += node.battery_at(self.now, &energy) / energy.capacity;
                count += 1;
            }
        }
        let battery = if count > 0 { sum / count as f64 } else { f64::NAN };
        self.battery_sum += battery;
        self.battery_samples += 1;

        let est = *self.server.estimate();
        let (dir, off) = if est.valid {
            let truth = self.cfg.scene.ground_truth(self.now);
            let d = direction_error(est.direction_est, truth.incident_direction)?;
            let o = offset_error(est.impact_point_est, truth.impact_point);
            self.dir_sum += d;
            self.offset_sum += o;
            self.valid_samples += 1;
            if est.method == DirectionMethod::NormalFallback {
                self.fallback_samples += 1;
            }
            (Some(d), Some(o))
        } else {
            (None, None)
        };
        self.series.push(SamplePoint {
            time: self.now,
            direction_error: dir,
            offset_error: off,
            mean_battery_fraction: battery,
        });
        let next = (i + 1) as f64 * self.cfg.metric_interval;
        if next < self.duration {
            self.push(next, EventKind::MetricSample(i + 1));
        }
        Ok(())
    }

    fn finish(mut self) -> RunOutput {
        let energy = self.cfg.energy;
        let end = self.duration;
        let mut max_residual: f64 = 0.0;
        let mut queued = 0u64;
        let mut transmissions = 0u64;
        let mut nodes = Vec::new();
        for k in 0..self.nodes.len() {
            if self.gateway[k] {
                continue;
            }
            let node = &mut self.nodes[k];
            node.bring_up_to_date(end, &energy);
            max_residual = max_residual.max(node.energy_residual());
            queued += node.queue_len() as u64;
            transmissions += node.transmissions();
            nodes.push(NodeSummary {
                coord: node.id,
                transmissions: node.transmissions(),
                initial_battery: node.initial_battery(),
                harvested: node.harvested_total(),
                drained: node.drained_total(),
                final_battery: node.battery,
                overflows: node.overflow_count,
            });
        }
        let on_links = self
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Arrive { .. }))
            .count() as u64;
        let in_flight = queued + on_links;
        let sensing_nodes = nodes.len() as f64;
        let nan_if_empty = |sum: f64, n: u64| if n > 0 { sum / n as f64 } else { f64::NAN };

        let metrics = RunMetrics {
            mean_direction_error: nan_if_empty(self.dir_sum, self.valid_samples),
            mean_offset_error: nan_if_empty(self.offset_sum, self.valid_samples),
            overflow_rate: if end > 0.0 && sensing_nodes > 0.0 {
                self.dropped as f64 / (end * sensing_nodes)
            } else {
                0.0
            },
            mean_battery_fraction: nan_if_empty(self.battery_sum, self.battery_samples),
            generated_count: self.generated,
            delivered_count: self.delivered,
            dropped_count: self.dropped,
            in_flight_count: in_flight,
            hop_limit_drops: self.hop_drops,
            transmissions,
            mean_latency: nan_if_empty(self.latency_sum, self.delivered),
            latency_histogram: self.latency,
            valid_samples: self.valid_samples,
            fallback_samples: self.fallback_samples,
            first_valid_at: self.server.first_valid_at(),
            series: self.series,
            invariants: InvariantReport {
                bound_violations: self.bound_violations,
                max_energy_residual: max_residual,
                accounting_holds: self.generated == self.delivered + self.dropped + in_flight,
            },
        };
        RunOutput {
            metrics,
            nodes,
            trace: self.trace,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_duration_runs_nothing() {
        let mut cfg = RunConfig::new(1.0, Variant::Estimated);
        cfg.duration = Some(0.0);
        let out = run(&cfg).unwrap();
        assert_eq!(out.metrics.generated_count, 0);
        assert_eq!(out.metrics.delivered_count, 0);
        assert!(out.metrics.series.is_empty());
        assert!(out.metrics.invariants.accounting_holds);
    }

    #[test]
    fn invalid_config_is_rejected_before_running() {
        let mut cfg = RunConfig::new(1.0, Variant::Ideal);
        cfg.sensing_period = -1.0;
        cfg.link_delay = 0.0;
        match run(&cfg) {
            Err(Error::InvalidConfig(v)) => assert_eq!(v.len(), 2),
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
    }

    #[test]
    fn event_order_is_time_then_sequence() {
        let mut heap = BinaryHeap::new();
        for (time, seq) in [(2.0, 1), (1.0, 3), (1.0, 2), (0.5, 9)] {
            heap.push(Event {
                time,
                seq,
                kind: EventKind::MetricSample(0),
            });
        }
        let order: Vec<(f64, u64)> = core::iter::from_fn(|| heap.pop().map(|e| (e.time, e.seq))).collect();
        assert_eq!(order, [(0.5, 9), (1.0, 2), (1.0, 3), (2.0, 1)]);
    }
}

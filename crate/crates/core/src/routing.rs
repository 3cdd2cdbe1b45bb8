//! Hyper-CP forwarding: neighbour status estimation, the battery and
//! distance eligibility policy, and the drift-bound next-hop rule.
//!
//! For traffic destined to gateway `w`, node `n` forwards to the eligible
//! neighbour `m` maximising `U(n,w) - (Ue(m,w) + G(m,w))`, where `Ue` is the
//! neighbour's estimated current backlog and `G` the packets it has sensed
//! since its last report. `U(n,w)` is common to every candidate, so the rule
//! picks the neighbour with the smallest estimated load.

use alloc::vec::Vec;

use crate::energy::EnergyConfig;
use crate::error::{Error, Result};
use crate::grid::{manhattan, Coord, GridTopology, NodeState, Packet, StatsSnapshot};

/// Where neighbour status comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// Exact, instantaneous knowledge of every neighbour.
    Ideal,
    /// Extrapolated from statistics piggybacked on received packets.
    Estimated,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Ideal, Variant::Estimated];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Ideal => "ideal",
            Variant::Estimated => "estimated",
        }
    }
}

impl core::str::FromStr for Variant {
    type Err = alloc::string::String;
    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "ideal" => Ok(Variant::Ideal),
            "estimated" => Ok(Variant::Estimated),
            other => Err(alloc::format!("unknown variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingConfig {
    /// Fraction of battery capacity a neighbour needs to be eligible.
    pub battery_threshold_fraction: f64,
    /// Hard-wired per-node sensing rate, packets/s.
    pub sense_rate_global: f64,
    pub variant: Variant,
}

impl Default for RoutingConfig {
    fn default() -> Self {
        Self {
            battery_threshold_fraction: 0.5,
            sense_rate_global: 0.5,
            variant: Variant::Estimated,
        }
    }
}

impl RoutingConfig {
    pub fn violations(&self) -> Vec<alloc::string::String> {
        let mut v = Vec::new();
        if !(0.0..=1.0).contains(&self.battery_threshold_fraction) {
            v.push(alloc::format!(
                "routing.battery_threshold_fraction must lie in [0, 1], got {}",
                self.battery_threshold_fraction
            ));
        }
        if !(self.sense_rate_global >= 0.0 && self.sense_rate_global.is_finite()) {
            v.push(alloc::format!(
                "routing.sense_rate_global must be non-negative, got {}",
                self.sense_rate_global
            ));
        }
        v
    }
}

/// What node `n` believes about neighbour `m` right now.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEstimate {
    /// Estimated backlog, packets.
    pub queue_est: f64,
    /// pJ.
    pub battery_est: f64,
    /// Packets sensed since the report, packets.
    pub generated_est: f64,
    /// Age of the underlying report, s.
    pub age: f64,
}

impl NeighborEstimate {
    /// The convention for a neighbour never heard from: empty buffer, full
    /// battery.
    pub fn default_for(full_battery: f64) -> Self {
        Self {
            queue_est: 0.0,
            battery_est: full_battery,
            generated_est: 0.0,
            age: 0.0,
        }
    }

    /// `Ue + G`, the load the next-hop rule minimises.
    pub fn load(&self) -> f64 {
        self.queue_est + self.generated_est
    }
}

/// Extrapolates a neighbour's last report to `now`.
pub fn estimate_neighbor(
    snapshot: Option<&StatsSnapshot>,
    now: f64,
    cfg: &RoutingConfig,
    full_battery: f64,
) -> Result<NeighborEstimate> {
    let Some(s) = snapshot else {
        return Ok(NeighborEstimate::default_for(full_battery));
    };
    let age = now - s.report_time;
    if age < 0.0 {
        return Err(Error::NegativeAge { age: -age });
    }
    let extrapolated = f64::from(s.queue_len) + s.queue_gradient * age;
    Ok(NeighborEstimate {
        queue_est: if extrapolated > 0.0 { extrapolated } else { 0.0 },
        battery_est: s.battery,
        generated_est: cfg.sense_rate_global * age,
        age,
    })
}

/// A neighbour together with the status attributed to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub coord: Coord,
    pub estimate: NeighborEstimate,
}

/// Eligible next hops of `n` for traffic to `w`.
///
/// Neighbours must clear the battery threshold and be strictly closer to
/// `w`. When nobody qualifies the distance condition is dropped first, then
/// the battery condition, and finally every neighbour is eligible, so the
/// result is empty only when `views` is.
pub fn policy_filter(
    n: Coord,
    w: Coord,
    views: &[Candidate],
    cfg: &RoutingConfig,
    battery_capacity: f64,
) -> Vec<Candidate> {
    let threshold = cfg.battery_threshold_fraction * battery_capacity;
    let own_distance = manhattan(n, w);
    let charged = |c: &Candidate| c.estimate.battery_est >= threshold;
    let closer = |c: &Candidate| manhattan(c.coord, w) < own_distance;

    let both: Vec<Candidate> = views.iter().copied().filter(|c| charged(c) && closer(c)).collect();
    if !both.is_empty() {
        return both;
    }
    let battery_only: Vec<Candidate> = views.iter().copied().filter(charged).collect();
    if !battery_only.is_empty() {
        return battery_only;
    }
    let distance_only: Vec<Candidate> = views.iter().copied().filter(closer).collect();
    if !distance_only.is_empty() {
        return distance_only;
    }
    views.to_vec()
}

/// The drift-bound next hop: maximises `own_queue - load(m)`, first in
/// candidate order on ties.
pub fn select_next_hop(own_queue: f64, candidates: &[Candidate]) -> Option<Coord> {
    let mut best: Option<(Coord, f64)> = None;
    for c in candidates {
        let differential = own_queue - c.estimate.load();
        match best {
            Some((_, d)) if differential <= d => {}
            _ => best = Some((c.coord, differential)),
        }
    }
    best.map(|(c, _)| c)
}

/// Neighbour views built from the node's own table of received snapshots.
pub fn estimated_views(
    node: &NodeState,
    topo: &GridTopology,
    now: f64,
    cfg: &RoutingConfig,
    full_battery: f64,
) -> Result<Vec<Candidate>> {
    let mut out = Vec::with_capacity(4);
    for m in topo.neighbors(node.id)?.iter().copied() {
        if topo.is_gateway(m) {
            continue;
        }
        let estimate = estimate_neighbor(node.neighbor_estimates.get(&m), now, cfg, full_battery)?;
        out.push(Candidate { coord: m, estimate });
    }
    Ok(out)
}

/// Neighbour views with perfect knowledge of the current network state.
/// `nodes` is indexed row-major like the grid.
pub fn ideal_estimates(
    nodes: &[NodeState],
    topo: &GridTopology,
    n: Coord,
    now: f64,
    energy: &EnergyConfig,
) -> Result<Vec<Candidate>> {
    let mut out = Vec::with_capacity(4);
    for m in topo.neighbors(n)?.iter().copied() {
        if topo.is_gateway(m) {
            continue;
        }
        let state = &nodes[topo.index(m)];
        out.push(Candidate {
            coord: m,
            estimate: NeighborEstimate {
                queue_est: state.queue_len() as f64,
                battery_est: state.battery_at(now, energy),
                generated_est: 0.0,
                age: 0.0,
            },
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub packet: Packet,
    pub next_hop: Coord,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutcome {
    /// In emission order.
    pub transmissions: Vec<Transmission>,
    /// Whether the node started a rest period.
    pub rest_started: bool,
}

/// One pass of the forwarding loop at `node`.
///
/// For each gateway with pending traffic (in FIFO order of first packet) the
/// next hop is chosen once and every packet for that gateway is sent to it,
/// as far as the battery allows. Nodes adjacent to the destination gateway
/// hand packets to the gateway directly. Emitted packets carry the node's
/// status after the pass. A node whose queue is empty after the pass starts
/// resting.
pub fn forwarding_step(
    node: &mut NodeState,
    topo: &GridTopology,
    cfg: &RoutingConfig,
    energy: &EnergyConfig,
    now: f64,
    views: &[Candidate],
) -> StepOutcome {
    node.bring_up_to_date(now, energy);
    let mut out = StepOutcome::default();
    if node.is_resting(now) {
        return out;
    }
    if node.queue.is_empty() {
        out.rest_started = node.enter_rest(now, energy);
        return out;
    }

    for w in node.pending_destinations() {
        if !node.can_transmit(energy) {
            break;
        }
        let next_hop = if topo.adjacent_to(node.id, w) {
            Some(w)
        } else {
            let candidates = policy_filter(node.id, w, views, cfg, energy.capacity);
            select_next_hop(node.queued_for(w) as f64, &candidates)
        };
        let Some(next_hop) = next_hop else { continue };

        let paid = node.charge_emissions(node.queued_for(w), energy);
        let mut taken = 0;
        let mut kept = alloc::collections::VecDeque::with_capacity(node.queue.len());
        for p in node.queue.drain(..) {
            if taken < paid && p.destination == w {
                taken += 1;
                out.transmissions.push(Transmission { packet: p, next_hop });
            } else {
                kept.push_back(p);
            }
        }
        node.queue = kept;
    }

    if out.transmissions.is_empty() {
        return out;
    }

    let queue_len = node.queue.len() as u32;
    let gradient = match node.last_tx {
        Some((prev_len, prev_t)) if now > prev_t => {
            (f64::from(queue_len) - f64::from(prev_len)) / (now - prev_t)
        }
        _ => 0.0,
    };
    node.last_tx = Some((queue_len, now));
    let stats = StatsSnapshot {
        reporter: node.id,
        queue_len,
        queue_gradient: gradient,
        battery: node.battery,
        report_time: now,
    };
    for t in &mut out.transmissions {
        t.packet.stats = stats;
        t.packet.hop_count += 1;
    }
    if node.queue.is_empty() {
        out.rest_started = node.enter_rest(now, energy);
    }
    out
}

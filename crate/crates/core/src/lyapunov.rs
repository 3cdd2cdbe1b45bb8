//! Verification-grade evaluation of the Lyapunov drift analysis behind the
//! forwarding rule, and brute-force decision oracles to check it against.
//!
//! None of this runs in the forwarding path. The tests and the acceptance
//! suite use it to confirm that the closed-form next-hop rule is the
//! minimiser of the drift bound over single-neighbour choices.

use alloc::vec::Vec;

use crate::grid::Coord;

/// Per-node queue state entering the drift bound.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTerms {
    pub node: Coord,
    /// Backlog per gateway, packets.
    pub queues: Vec<f64>,
    /// Locally generated packets per gateway over the horizon.
    pub generated: Vec<f64>,
    /// Staleness horizon, s.
    pub tau: f64,
}

/// Network-wide queue state with a uniform nominal link rate.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSnapshot {
    pub nodes: Vec<NodeTerms>,
    /// Packets/s on every link.
    pub link_rate: f64,
}

/// Sum of squared backlogs over all nodes and gateways.
pub fn lyapunov(snapshot: &NetworkSnapshot) -> f64 {
    snapshot
        .nodes
        .iter()
        .flat_map(|n| n.queues.iter())
        .map(|u| u * u)
        .sum()
}

/// `max{0, U - outgoing} + incoming + generated`.
pub fn queue_estimate(u_old: f64, outgoing: f64, incoming: f64, generated: f64) -> f64 {
    let served = u_old - outgoing;
    (if served > 0.0 { served } else { 0.0 }) + incoming + generated
}

/// Whether `V² ≤ U² + μ² + A² − 2U(μ − A)`. The inequality holds whenever
/// `V ≤ max{0, U − μ} + A` with non-negative inputs; equality cases are
/// compared with a relative rounding allowance.
pub fn check_identity(v: f64, u: f64, mu: f64, a: f64) -> bool {
    let lhs = v * v;
    let rhs = u * u + mu * mu + a * a - 2.0 * u * (mu - a);
    let scale = (u * u + mu * mu + a * a + v * v).max(f64::MIN_POSITIVE);
    lhs <= rhs + 8.0 * f64::EPSILON * scale
}

/// One node-gateway summand of the drift bound:
/// `[τ·R_in + U + G]² + [τ·R_out − U]² − 2U²`.
pub fn node_summand(tau: f64, in_rate: f64, out_rate: f64, u: f64, g: f64) -> f64 {
    let inflow = tau * in_rate + u + g;
    let outflow = tau * out_rate - u;
    inflow * inflow + outflow * outflow - 2.0 * u * u
}

/// The summand of node `n` for gateway index `w` when `n` activates the
/// outgoing links in `choice` and receives over `incoming` links.
pub fn local_drift_bound(
    snapshot: &NetworkSnapshot,
    n: usize,
    w: usize,
    incoming: usize,
    choice: &[Coord],
) -> f64 {
    let node = &snapshot.nodes[n];
    let r = snapshot.link_rate;
    node_summand(
        node.tau,
        incoming as f64 * r,
        choice.len() as f64 * r,
        node.queues[w],
        node.generated[w],
    )
}

/// The local decision problem at one node: its own backlog towards `w` and
/// the estimated state of each eligible neighbour, in N, S, W, E order.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDecision {
    pub own_queue: f64,
    /// Decision horizon, s.
    pub tau: f64,
    pub link_rate: f64,
    /// `(neighbour, estimated backlog, estimated generation)`.
    pub neighbors: Vec<(Coord, f64, f64)>,
}

impl LocalDecision {
    /// Bound restricted to the node and its neighbours when the links to
    /// `targets` are activated. Neighbours contribute their in-flow summand
    /// with the estimated backlog standing in for the queue.
    pub fn bound(&self, targets: &[Coord]) -> f64 {
        let step = self.tau * self.link_rate;
        let own = node_summand(self.tau, 0.0, targets.len() as f64 * self.link_rate, self.own_queue, 0.0);
        let others: f64 = self
            .neighbors
            .iter()
            .map(|&(m, u, g)| {
                let inflow = if targets.contains(&m) { step } else { 0.0 };
                node_summand(1.0, inflow, 0.0, u, g)
            })
            .sum();
        own + others
    }

    /// Single next hop minimising the bound, first in order on ties.
    pub fn brute_force_next_hop(&self) -> Option<Coord> {
        let mut best: Option<(Coord, f64)> = None;
        for &(m, _, _) in &self.neighbors {
            let b = self.bound(&[m]);
            match best {
                Some((_, v)) if b >= v => {}
                _ => best = Some((m, b)),
            }
        }
        best.map(|(m, _)| m)
    }

    /// Exhaustive minimiser over every subset of outgoing links, including
    /// holding all traffic. Subsets are visited in bitmask order.
    pub fn best_link_subset(&self) -> (Vec<Coord>, f64) {
        let k = self.neighbors.len();
        let mut best: Option<(Vec<Coord>, f64)> = None;
        for mask in 0u32..(1 << k) {
            let set: Vec<Coord> = (0..k)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| self.neighbors[i].0)
                .collect();
            let b = self.bound(&set);
            match &best {
                Some((_, v)) if b >= *v => {}
                _ => best = Some((set, b)),
            }
        }
        best.unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn terms(queues: Vec<f64>) -> NodeTerms {
        let n = queues.len();
        NodeTerms {
            node: Coord::new(0, 0),
            queues,
            generated: vec![0.0; n],
            tau: 1.0,
        }
    }

    #[test]
    fn lyapunov_examples() {
        let empty = NetworkSnapshot {
            nodes: vec![terms(vec![0.0]), terms(vec![0.0])],
            link_rate: 1.0,
        };
        assert_eq!(lyapunov(&empty), 0.0);
        let one = NetworkSnapshot {
            nodes: vec![terms(vec![3.0])],
            link_rate: 1.0,
        };
        assert_eq!(lyapunov(&one), 9.0);
        let two = NetworkSnapshot {
            nodes: vec![terms(vec![1.0]), terms(vec![2.0])],
            link_rate: 1.0,
        };
        assert_eq!(lyapunov(&two), 5.0);
    }

    #[test]
    fn queue_estimate_examples() {
        assert_eq!(queue_estimate(5.0, 2.0, 1.0, 1.0), 5.0);
        assert_eq!(queue_estimate(1.0, 4.0, 0.0, 0.0), 0.0);
        assert_eq!(queue_estimate(0.0, 0.0, 3.0, 2.0), 5.0);
    }

    #[test]
    fn identity_examples() {
        assert!(check_identity(0.0, 0.0, 0.0, 0.0));
        let v = queue_estimate(5.0, 2.0, 1.0, 0.0);
        assert_eq!(v, 4.0);
        assert!(check_identity(v, 5.0, 2.0, 1.0));
        assert!(!check_identity(10.0, 5.0, 2.0, 1.0));
    }

    #[test]
    fn local_bound_examples() {
        let snap = NetworkSnapshot {
            nodes: vec![terms(vec![0.0])],
            link_rate: 1.0,
        };
        assert_eq!(local_drift_bound(&snap, 0, 0, 0, &[]), 0.0);
        let snap = NetworkSnapshot {
            nodes: vec![terms(vec![3.0])],
            link_rate: 1.0,
        };
        assert_eq!(local_drift_bound(&snap, 0, 0, 0, &[Coord::new(0, 1)]), -5.0);
    }

    #[test]
    fn holding_beats_a_zero_differential_forward() {
        // own queue 1, one neighbour with Ue = G = 0.5: the differential is
        // zero and the rule still forwards, while the bound prefers holding
        // whenever U - (Ue + G) < τR.
        let d = LocalDecision {
            own_queue: 1.0,
            tau: 1e-3,
            link_rate: 1000.0,
            neighbors: vec![(Coord::new(0, 1), 0.5, 0.5)],
        };
        assert_eq!(d.brute_force_next_hop(), Some(Coord::new(0, 1)));
        let forward = d.bound(&[Coord::new(0, 1)]);
        let hold = d.bound(&[]);
        assert!((forward - hold - 2.0).abs() < 1e-12);
        assert!(d.best_link_subset().0.is_empty());
    }
}

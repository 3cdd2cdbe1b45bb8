//! Self-contained verification runs that need no sweep: the next-hop rule
//! against the brute-force drift-bound minimiser, the squared queue
//! inequality, and estimator recovery on synthetic footprints.

use hypercp_core::estimator::{
    direction_error, estimate_direction, estimate_impact_point, offset_error, EstimatorConfig, Reading, Window,
};
use hypercp_core::lyapunov::{check_identity, queue_estimate, LocalDecision};
use hypercp_core::routing::{policy_filter, select_next_hop, Candidate, NeighborEstimate};
use hypercp_core::scene::{cell_area, node_surface_position, SceneConfig, CONE_AXIS};
use hypercp_core::{Coord, GridTopology, Point2, RoutingConfig, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Agreement {
    pub trials: u64,
    pub agreements: u64,
}

impl Agreement {
    pub fn all_agree(&self) -> bool {
        self.trials > 0 && self.agreements == self.trials
    }
}

/// A dyadic value `k / 8` with `k < 256`: every sum and square formed by
/// the drift bound is exact, so ties stay ties.
fn dyadic(rng: &mut ChaCha8Rng) -> f64 {
    f64::from(rng.random_range(0u32..256)) / 8.0
}

/// Random local decisions on a 31x31 grid: a node, its policy-filtered
/// neighbours with random loads and batteries, and its own backlog. Counts
/// how often the next-hop rule picks the minimiser of the local bound.
pub fn theorem_oracle(trials: u64, seed: u64) -> Agreement {
    let topo = GridTopology::new(31, 31).expect("valid grid");
    let cfg = RoutingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agreements = 0;
    for _ in 0..trials {
        let n = loop {
            let c = Coord::new(rng.random_range(0..31), rng.random_range(0..31));
            if !topo.is_gateway(c) {
                break c;
            }
        };
        let w = topo.nearest_gateway(n).expect("in bounds");
        let views: Vec<Candidate> = topo
            .neighbors(n)
            .expect("in bounds")
            .iter()
            .filter(|m| !topo.is_gateway(**m))
            .map(|&m| Candidate {
                coord: m,
                estimate: NeighborEstimate {
                    queue_est: dyadic(&mut rng),
                    battery_est: f64::from(rng.random_range(0u32..=1000)),
                    generated_est: dyadic(&mut rng),
                    age: 0.0,
                },
            })
            .collect();
        let eligible = policy_filter(n, w, &views, &cfg, 1000.0);
        let own = f64::from(rng.random_range(1u32..=10));
        let decision = LocalDecision {
            own_queue: own,
            tau: f64::powi(2.0, -rng.random_range(0..8)),
            link_rate: f64::from(rng.random_range(1u32..=8)),
            neighbors: eligible
                .iter()
                .map(|c| (c.coord, c.estimate.queue_est, c.estimate.generated_est))
                .collect(),
        };
        if select_next_hop(own, &eligible) == decision.brute_force_next_hop() {
            agreements += 1;
        }
    }
    Agreement { trials, agreements }
}

/// Random `(V, U, μ, A)` with `V ≤ max{0, U − μ} + A`; counts how many
/// satisfy `V² ≤ U² + μ² + A² − 2U(μ − A)`.
pub fn identity_check(trials: u64, seed: u64) -> Agreement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agreements = 0;
    for _ in 0..trials {
        let scale = 10f64.powi(rng.random_range(-3..4));
        let u = rng.random::<f64>() * scale;
        let mu = rng.random::<f64>() * scale;
        let a = rng.random::<f64>() * scale;
        let v = queue_estimate(u, mu, a, 0.0) * rng.random::<f64>();
        if check_identity(v, u, mu, a) {
            agreements += 1;
        }
    }
    Agreement { trials, agreements }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Recovery {
    /// Worst over source positions along the default path, degrees.
    pub direction_error_deg: f64,
    /// cm.
    pub offset_error_cm: f64,
    pub cell_diagonal_cm: f64,
    /// Worst over tilted-cone footprints, degrees.
    pub tilted_error_deg: f64,
}

impl Recovery {
    pub fn passes(&self) -> bool {
        self.direction_error_deg < 1.0 && self.offset_error_cm < self.cell_diagonal_cm && self.tilted_error_deg < 1.0
    }
}

fn synthetic_footprint(topo: &GridTopology, scene: &SceneConfig, source: Vec3, axis: Vec3) -> Window {
    let k = scene.tx_power * cell_area(topo, scene) / scene.solid_angle();
    let cos_half = scene.half_angle().cos();
    let mut window = Window::new(50);
    for c in topo.coords() {
        let pos = node_surface_position(c, topo, scene);
        let r = Vec3::on_surface(pos) - source;
        let range = r.norm();
        if r.dot(axis) / range >= cos_half {
            window.update(Reading {
                origin: c,
                position: pos,
                power: k / (range * range),
                sensed_at: 0.0,
                delivered_at: 0.0,
            });
        }
    }
    window
}

/// Noiseless footprints, all readings delivered at once: perpendicular
/// beams along the default path and cones tilted by 10–20°.
pub fn estimator_recovery() -> Recovery {
    let scene = SceneConfig::default();
    let topo = GridTopology::new(31, 31).expect("valid grid");
    let cfg = EstimatorConfig::new(&scene, &topo);
    let dy = scene.y_max / f64::from(topo.cols());
    let dz = scene.z_max / f64::from(topo.rows());
    let mut out = Recovery {
        direction_error_deg: 0.0,
        offset_error_cm: 0.0,
        cell_diagonal_cm: (dy * dy + dz * dz).sqrt(),
        tilted_error_deg: 0.0,
    };
    let total = scene.traversal_time();
    for step in 1..10 {
        let t = total * f64::from(step) / 10.0;
        let truth = scene.ground_truth(t);
        let window = synthetic_footprint(&topo, &scene, scene.source_position(t), CONE_AXIS);
        let (dir, offset) = match (estimate_direction(&window, &cfg), estimate_impact_point(&window)) {
            (Some((d, _)), Some(p)) => (
                direction_error(d, truth.incident_direction).unwrap_or(f64::INFINITY),
                offset_error(p, truth.impact_point),
            ),
            _ => (f64::INFINITY, f64::INFINITY),
        };
        out.direction_error_deg = out.direction_error_deg.max(dir);
        out.offset_error_cm = out.offset_error_cm.max(offset);
    }
    let height = 500.0;
    let hit = Point2::new(250.0, 250.0);
    for (tilt_deg, heading_deg) in [(20.0f64, 0.0f64), (20.0, 90.0), (20.0, 210.0), (10.0, 45.0)] {
        let (tilt, heading) = (tilt_deg.to_radians(), heading_deg.to_radians());
        let axis = Vec3::new(-tilt.cos(), tilt.sin() * heading.cos(), tilt.sin() * heading.sin());
        let source = Vec3::new(
            height,
            hit.y - height * tilt.tan() * heading.cos(),
            hit.z - height * tilt.tan() * heading.sin(),
        );
        let window = synthetic_footprint(&topo, &scene, source, axis);
        let err = estimate_direction(&window, &cfg)
            .and_then(|(d, _)| direction_error(d, axis).ok())
            .unwrap_or(f64::INFINITY);
        out.tilted_error_deg = out.tilted_error_deg.max(err);
    }
    out
}

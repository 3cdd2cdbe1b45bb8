//! Core models for the Hyper-CP nanonetwork control protocol.
//!
//! Energy-harvesting nano-nodes laid out on a rectangular grid sense the
//! power of a moving electromagnetic source and route their readings to edge
//! gateways. Every node picks its next hop by minimising a bound on the
//! Lyapunov drift of the network queues, filtered by a battery and
//! distance-to-gateway policy. A server behind the gateways reconstructs the
//! beam impact point and incident direction from the delivered readings.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and parallel sweeps live in the `hypercp` crate.
#![no_std]

extern crate alloc;

pub mod conic;
pub mod energy;
pub mod error;
pub mod estimator;
pub mod geom;
pub mod grid;
pub mod lyapunov;
pub mod routing;
pub mod scene;
pub mod sim;

pub use error::{Error, Result};
pub use geom::{Point2, Vec3};
pub use grid::{Coord, Enqueue, GridTopology, NodeState, Packet, StatsSnapshot};
pub use routing::{RoutingConfig, Variant};
pub use sim::{run, RunConfig, RunMetrics};

//! The macroscopic scene: a point source gliding parallel to the surface,
//! emitting uniformly into a narrow cone whose axis is the surface normal.
//!
//! The surface is the plane `x = 0`; the source sits at positive `x` and
//! emits towards `-x`. A node receives the flux `P / (Ω r²)` through an
//! aperture of one grid cell when it lies inside the cone, and nothing
//! otherwise.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{Point2, Vec3};
use crate::grid::{Coord, GridTopology};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    /// Surface extent along y, cm.
    pub y_max: f64,
    /// Surface extent along z, cm.
    pub z_max: f64,
    pub source_start: Vec3,
    pub source_end: Vec3,
    /// cm/s.
    pub speed: f64,
    /// Full opening angle of the emission cone, degrees.
    pub cone_opening_deg: f64,
    /// mW.
    pub tx_power: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            y_max: 500.0,
            z_max: 500.0,
            source_start: Vec3::new(500.0, 0.0, 500.0),
            source_end: Vec3::new(500.0, 500.0, 0.0),
            speed: 5.0,
            cone_opening_deg: 10.0,
            tx_power: 100.0,
        }
    }
}

/// True beam state at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub impact_point: Point2,
    pub incident_direction: Vec3,
}

/// The cone axis: perpendicular to the surface, pointing into it.
pub const CONE_AXIS: Vec3 = Vec3::new(-1.0, 0.0, 0.0);

impl SceneConfig {
    pub fn violations(&self) -> Vec<alloc::string::String> {
        let mut v = Vec::new();
        for (name, value) in [
            ("scene.y_max", self.y_max),
            ("scene.z_max", self.z_max),
            ("scene.speed", self.speed),
            ("scene.tx_power", self.tx_power),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                v.push(alloc::format!("{name} must be positive and finite, got {value}"));
            }
        }
        if !(self.cone_opening_deg > 0.0 && self.cone_opening_deg < 180.0) {
            v.push(alloc::format!(
                "scene.cone_opening_deg must lie in (0, 180), got {}",
                self.cone_opening_deg
            ));
        }
        if self.source_start.x != self.source_end.x {
            v.push(alloc::format!(
                "source path must be parallel to the surface: start x {} differs from end x {}",
                self.source_start.x,
                self.source_end.x
            ));
        }
        if !(self.source_start.x > 0.0) {
            v.push(alloc::format!(
                "source must lie in front of the surface (x > 0), got x = {}",
                self.source_start.x
            ));
        }
        v
    }

    pub fn half_angle(&self) -> f64 {
        self.cone_opening_deg.to_radians() * 0.5
    }

    /// Solid angle of the emission cone, sr.
    pub fn solid_angle(&self) -> f64 {
        2.0 * PI * (1.0 - libm::cos(self.half_angle()))
    }

    pub fn path_length(&self) -> f64 {
        (self.source_end - self.source_start).norm()
    }

    /// Time for the source to reach the end of its path, s.
    pub fn traversal_time(&self) -> f64 {
        self.path_length() / self.speed
    }

    /// Source position at `t`, clamped to the end points.
    pub fn source_position(&self, t: f64) -> Vec3 {
        let total = self.traversal_time();
        if !(total > 0.0) || t >= total {
            return self.source_end;
        }
        if t <= 0.0 {
            return self.source_start;
        }
        let frac = t / total;
        self.source_start + (self.source_end - self.source_start) * frac
    }

    /// Radius of the illuminated disc on the surface, cm.
    pub fn footprint_radius(&self) -> f64 {
        self.source_start.x * libm::tan(self.half_angle())
    }

    /// Power collected by a node at `node_pos` with aperture `cell_area`
    /// (cm²) at time `t`, mW.
    pub fn impinging_power(&self, node_pos: Point2, t: f64, cell_area: f64) -> Result<f64> {
        let source = self.source_position(t);
        let r = Vec3::on_surface(node_pos) - source;
        let range = r.norm();
        if !(range > 0.0) {
            return Err(Error::ZeroRange);
        }
        let cos_off_axis = r.dot(CONE_AXIS) / range;
        if cos_off_axis < libm::cos(self.half_angle()) {
            return Ok(0.0);
        }
        Ok(self.tx_power / (self.solid_angle() * range * range) * cell_area)
    }

    pub fn ground_truth(&self, t: f64) -> GroundTruth {
        GroundTruth {
            impact_point: self.source_position(t).lateral(),
            incident_direction: CONE_AXIS,
        }
    }

    /// Lower bound on the first time `>= t` at which a node at `node_pos`
    /// can be inside the cone. `f64::INFINITY` when it never will be.
    pub fn earliest_illumination(&self, node_pos: Point2, t: f64) -> f64 {
        let lateral = node_pos.distance(self.source_position(t).lateral());
        // Small slack so rounding never skips a lit instant.
        let gap = lateral - self.footprint_radius() * (1.0 + 1e-9) - 1e-9;
        if gap <= 0.0 {
            return t;
        }
        if t >= self.traversal_time() || self.speed <= 0.0 {
            return f64::INFINITY;
        }
        t + gap / self.speed
    }
}

/// Cell-centred position of a node on the surface, cm.
pub fn node_surface_position(c: Coord, topo: &GridTopology, cfg: &SceneConfig) -> Point2 {
    Point2::new(
        (f64::from(c.j) + 0.5) * cfg.y_max / f64::from(topo.cols()),
        (f64::from(c.i) + 0.5) * cfg.z_max / f64::from(topo.rows()),
    )
}

/// Surface area served by one node, cm².
pub fn cell_area(topo: &GridTopology, cfg: &SceneConfig) -> f64 {
    (cfg.y_max / f64::from(topo.cols())) * (cfg.z_max / f64::from(topo.rows()))
}

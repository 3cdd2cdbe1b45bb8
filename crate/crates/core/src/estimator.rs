//! The external server: a sliding window over the most recent readings,
//! the impact-point and incident-direction estimates derived from it, and
//! the two error metrics.
//!
//! The impact point is the centroid of the window positions. For the
//! direction, a conic is fitted to the window positions; a window that does
//! not look like a bounded elliptical footprint falls back to the surface
//! normal. Otherwise the source is located by multilateration: with the
//! emitter model known, each power reading fixes the range
//! `r² = P·A / (Ω·power)` from the source to the reporting node, and the
//! ranges are linear in the unknown source position once squared. The
//! estimated incident direction runs from the located source to the
//! estimated impact point.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::conic::fit_conic;
use crate::error::{Error, Result};
use crate::geom::{Point2, Vec3};
use crate::grid::{Coord, GridTopology};
use crate::scene::{cell_area, SceneConfig, CONE_AXIS};

/// A reading as seen by the server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reading {
    pub origin: Coord,
    /// Surface position of the origin node, cm.
    pub position: Point2,
    /// mW, positive.
    pub power: f64,
    pub sensed_at: f64,
    pub delivered_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Distinct sensors kept.
    pub window_size: usize,
    /// Readings needed before an estimate is valid.
    pub min_readings: usize,
    /// `tx_power · aperture / Ω`, mW·cm²: a reading of power `p` lies at
    /// squared range `emitter_constant / p` from the source.
    pub emitter_constant: f64,
}

impl EstimatorConfig {
    pub fn new(scene: &SceneConfig, topo: &GridTopology) -> Self {
        Self {
            window_size: 50,
            min_readings: 6,
            emitter_constant: scene.tx_power * cell_area(topo, scene) / scene.solid_angle(),
        }
    }
}

/// The most recent readings, at most one per sensor, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    capacity: usize,
    readings: VecDeque<Reading>,
}

impl Window {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            readings: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    pub fn readings(&self) -> impl ExactSizeIterator<Item = &Reading> + '_ {
        self.readings.iter()
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.readings.iter().map(|r| r.position).collect()
    }

    /// Adds `r`, dropping any older reading from the same sensor and then
    /// the oldest reading if the window is over capacity. Returns whether an
    /// older reading from the same sensor was replaced.
    pub fn update(&mut self, r: Reading) -> bool {
        let replaced = match self.readings.iter().position(|x| x.origin == r.origin) {
            Some(k) => {
                self.readings.remove(k);
                true
            }
            None => false,
        };
        let at = self
            .readings
            .iter()
            .rposition(|x| x.delivered_at <= r.delivered_at)
            .map_or(0, |k| k + 1);
        self.readings.insert(at, r);
        while self.readings.len() > self.capacity {
            self.readings.pop_front();
        }
        replaced
    }
}

/// How the direction estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionMethod {
    /// From the located source through the estimated impact point.
    SourceToImpactPoint,
    /// Surface normal; the fit or the multilateration was degenerate.
    NormalFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub impact_point_est: Point2,
    /// Unit vector, pointing into the surface.
    pub direction_est: Vec3,
    pub valid: bool,
    pub method: DirectionMethod,
}

impl Estimate {
    pub const INVALID: Estimate = Estimate {
        impact_point_est: Point2::new(0.0, 0.0),
        direction_est: CONE_AXIS,
        valid: false,
        method: DirectionMethod::NormalFallback,
    };
}

/// Unweighted mean of the window positions.
pub fn estimate_impact_point(window: &Window) -> Option<Point2> {
    if window.is_empty() {
        return None;
    }
    let n = window.len() as f64;
    let sum = window.readings().fold(Point2::default(), |acc, r| acc + r.position);
    Some(sum * (1.0 / n))
}

/// Source position from positions and squared ranges, by linear least
/// squares on `r² - |u|² = -2 u·s + c` in centroid-relative coordinates.
/// `None` when the positions are collinear or the ranges are inconsistent
/// with a source in front of the surface.
pub fn locate_source(points: &[(Point2, f64)]) -> Option<Vec3> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Point2::default(), |acc, &(p, _)| acc + p) * (1.0 / n);
    let (mut syy, mut syz, mut szz) = (0.0, 0.0, 0.0);
    let (mut by, mut bz, mut csum) = (0.0, 0.0, 0.0);
    for &(p, r2) in points {
        let u = p - mean;
        let t = r2 - u.dot(u);
        syy += u.y * u.y;
        syz += u.y * u.z;
        szz += u.z * u.z;
        by += u.y * t;
        bz += u.z * t;
        csum += t;
    }
    let det = syy * szz - syz * syz;
    let trace = syy + szz;
    if !(trace > 0.0) || det <= 1e-10 * trace * trace {
        return None;
    }
    // s = -1/2 · S⁻¹ · Σ u t
    let sy = -0.5 * (szz * by - syz * bz) / det;
    let sz = -0.5 * (syy * bz - syz * by) / det;
    let c = csum / n;
    let h2 = c - (sy * sy + sz * sz);
    if !(h2 > 0.0) || !h2.is_finite() {
        return None;
    }
    Some(Vec3::new(libm::sqrt(h2), mean.y + sy, mean.z + sz))
}

/// Incident direction from the window, or `None` with fewer than
/// `cfg.min_readings` readings.
pub fn estimate_direction(window: &Window, cfg: &EstimatorConfig) -> Option<(Vec3, DirectionMethod)> {
    if window.len() < cfg.min_readings {
        return None;
    }
    let fallback = Some((CONE_AXIS, DirectionMethod::NormalFallback));
    let positions = window.positions();
    let Some(ellipse) = fit_conic(&positions).and_then(|c| c.ellipse()) else {
        return fallback;
    };
    let (mut lo, mut hi) = (positions[0], positions[0]);
    for p in &positions {
        lo = Point2::new(lo.y.min(p.y), lo.z.min(p.z));
        hi = Point2::new(hi.y.max(p.y), hi.z.max(p.z));
    }
    let c = ellipse.center;
    if !(c.y >= lo.y && c.y <= hi.y && c.z >= lo.z && c.z <= hi.z) {
        return fallback;
    }
    let ranged: Vec<(Point2, f64)> = window
        .readings()
        .map(|r| (r.position, cfg.emitter_constant / r.power))
        .collect();
    let (Some(source), Some(impact)) = (locate_source(&ranged), estimate_impact_point(window)) else {
        return fallback;
    };
    match (Vec3::on_surface(impact) - source).normalized() {
        Some(d) => Some((d, DirectionMethod::SourceToImpactPoint)),
        None => fallback,
    }
}

/// Angle between two directions, degrees in `[0, 180]`.
pub fn direction_error(est: Vec3, truth: Vec3) -> Result<f64> {
    let a = est.normalized().ok_or(Error::ZeroVector)?;
    let b = truth.normalized().ok_or(Error::ZeroVector)?;
    let cos = a.dot(b).clamp(-1.0, 1.0);
    Ok(libm::acos(cos).to_degrees())
}

/// Distance between true and estimated impact points, cm.
pub fn offset_error(p_est: Point2, p_true: Point2) -> f64 {
    p_est.distance(p_true)
}

/// Window plus the latest estimate, refreshed on every delivery.
#[derive(Debug, Clone)]
pub struct Server {
    cfg: EstimatorConfig,
    window: Window,
    estimate: Estimate,
    first_valid_at: Option<f64>,
}

impl Server {
    pub fn new(cfg: EstimatorConfig) -> Self {
        Self {
            window: Window::new(cfg.window_size),
            cfg,
            estimate: Estimate::INVALID,
            first_valid_at: None,
        }
    }

    pub fn deliver(&mut self, r: Reading) {
        self.window.update(r);
        self.estimate = match (
            estimate_impact_point(&self.window),
            estimate_direction(&self.window, &self.cfg),
        ) {
            (Some(p), Some((d, method))) => Estimate {
                impact_point_est: p,
                direction_est: d,
                valid: true,
                method,
            },
            _ => Estimate::INVALID,
        };
        if self.estimate.valid && self.first_valid_at.is_none() {
            self.first_valid_at = Some(r.delivered_at);
        }
    }

    pub fn estimate(&self) -> &Estimate {
        &self.estimate
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn first_valid_at(&self) -> Option<f64> {
        self.first_valid_at
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reading(k: u16, y: f64, z: f64, t: f64) -> Reading {
        Reading {
            origin: Coord::new(k, 0),
            position: Point2::new(y, z),
            power: 1.0,
            sensed_at: t,
            delivered_at: t,
        }
    }

    #[test]
    fn window_evicts_oldest_distinct_sensor() {
        let mut w = Window::new(50);
        for k in 0..50 {
            w.update(reading(k, f64::from(k), 0.0, f64::from(k)));
        }
        assert_eq!(w.len(), 50);
        w.update(reading(50, 50.0, 0.0, 50.0));
        assert_eq!(w.len(), 50);
        assert!(w.readings().all(|r| r.origin != Coord::new(0, 0)));
    }

    #[test]
    fn window_replaces_repeat_sensor() {
        let mut w = Window::new(50);
        w.update(reading(1, 0.0, 0.0, 0.0));
        w.update(reading(2, 1.0, 0.0, 1.0));
        assert!(w.update(reading(1, 0.0, 0.0, 2.0)));
        assert_eq!(w.len(), 2);
        let order: Vec<u16> = w.readings().map(|r| r.origin.i).collect();
        assert_eq!(order, [2, 1]);
    }

    #[test]
    fn single_reading_is_not_a_valid_estimate() {
        let mut s = Server::new(EstimatorConfig {
            window_size: 50,
            min_readings: 6,
            emitter_constant: 1.0,
        });
        s.deliver(reading(1, 3.0, 4.0, 0.0));
        assert_eq!(s.window().len(), 1);
        assert!(!s.estimate().valid);
    }

    #[test]
    fn impact_point_is_mean() {
        let mut w = Window::new(50);
        w.update(reading(1, 100.0, 100.0, 0.0));
        w.update(reading(2, 200.0, 200.0, 1.0));
        assert_eq!(estimate_impact_point(&w), Some(Point2::new(150.0, 150.0)));
        assert_eq!(estimate_impact_point(&Window::new(50)), None);
    }

    #[test]
    fn direction_error_examples() {
        let x = Vec3::new(-1.0, 0.0, 0.0);
        assert_eq!(direction_error(x, x).unwrap(), 0.0);
        assert!((direction_error(x, Vec3::new(0.0, 1.0, 0.0)).unwrap() - 90.0).abs() < 1e-12);
        let four = 4f64.to_radians();
        let tilted = Vec3::new(-libm::cos(four), libm::sin(four), 0.0);
        assert!((direction_error(x, tilted).unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(direction_error(Vec3::default(), x), Err(Error::ZeroVector));
    }

    #[test]
    fn offset_error_examples() {
        assert_eq!(offset_error(Point2::new(250.0, 250.0), Point2::new(250.0, 250.0)), 0.0);
        assert_eq!(offset_error(Point2::new(250.0, 250.0), Point2::new(280.0, 290.0)), 50.0);
    }

    #[test]
    fn locate_source_exact_ranges() {
        let src = Vec3::new(420.0, 130.0, 260.0);
        let pts: Vec<(Point2, f64)> = [(100.0, 250.0), (160.0, 240.0), (120.0, 300.0), (140.0, 270.0)]
            .iter()
            .map(|&(y, z)| {
                let p = Point2::new(y, z);
                let d = Vec3::on_surface(p) - src;
                (p, d.dot(d))
            })
            .collect();
        let s = locate_source(&pts).unwrap();
        assert!((s - src).norm() < 1e-6);
        let line: Vec<(Point2, f64)> = (0..5).map(|k| (Point2::new(f64::from(k), 0.0), 1.0)).collect();
        assert!(locate_source(&line).is_none());
    }

    #[test]
    fn too_few_readings_give_no_direction() {
        let mut w = Window::new(50);
        for k in 0..5 {
            w.update(reading(k, f64::from(k), f64::from(k * k), f64::from(k)));
        }
        let cfg = EstimatorConfig {
            window_size: 50,
            min_readings: 6,
            emitter_constant: 1.0,
        };
        assert!(estimate_direction(&w, &cfg).is_none());
    }
}

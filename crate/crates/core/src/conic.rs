//! Algebraic least-squares conic fitting.
//!
//! Fits `a y² + b yz + c z² + d y + e z + f = 0` to a point set by
//! minimising the summed squared algebraic residual subject to a unit-norm
//! coefficient vector. The minimiser is the eigenvector of the 6x6 scatter
//! matrix with the smallest eigenvalue. Points are centred and scaled first
//! so the scatter matrix stays well conditioned.

use crate::geom::Point2;

/// General conic coefficients `[a, b, c, d, e, f]` in surface coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conic(pub [f64; 6]);

/// Geometric ellipse parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: Point2,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Angle of the major axis from +y, radians.
    pub angle: f64,
}

impl Ellipse {
    /// Point on the boundary at parameter `theta`.
    pub fn point_at(&self, theta: f64) -> Point2 {
        let (s, c) = (libm::sin(self.angle), libm::cos(self.angle));
        let u = self.semi_major * libm::cos(theta);
        let v = self.semi_minor * libm::sin(theta);
        Point2::new(self.center.y + u * c - v * s, self.center.z + u * s + v * c)
    }
}

impl Conic {
    pub fn eval(&self, p: Point2) -> f64 {
        let [a, b, c, d, e, f] = self.0;
        a * p.y * p.y + b * p.y * p.z + c * p.z * p.z + d * p.y + e * p.z + f
    }

    /// Geometric ellipse, or `None` for hyperbolas, parabolas, degenerate
    /// and imaginary conics.
    pub fn ellipse(&self) -> Option<Ellipse> {
        let [a, b, c, d, e, f] = self.0;
        let disc = b * b - 4.0 * a * c;
        let scale = a.abs().max(b.abs()).max(c.abs());
        if !(scale > 0.0) || disc >= -1e-12 * scale * scale {
            return None;
        }
        // Centre solves the gradient = 0 system.
        let det = 4.0 * a * c - b * b;
        let cy = (b * e - 2.0 * c * d) / det;
        let cz = (b * d - 2.0 * a * e) / det;
        let f0 = f + 0.5 * (d * cy + e * cz);

        let (l1, l2, angle1) = sym2_eigen(a, 0.5 * b, c);
        let s1 = -f0 / l1;
        let s2 = -f0 / l2;
        if !(s1 > 0.0 && s2 > 0.0) || !s1.is_finite() || !s2.is_finite() {
            return None;
        }
        let (r1, r2) = (libm::sqrt(s1), libm::sqrt(s2));
        let (semi_major, semi_minor, angle) = if r1 >= r2 {
            (r1, r2, angle1)
        } else {
            (r2, r1, angle1 + core::f64::consts::FRAC_PI_2)
        };
        Some(Ellipse {
            center: Point2::new(cy, cz),
            semi_major,
            semi_minor,
            angle,
        })
    }
}

/// Eigen decomposition of `[[a, b], [b, c]]`: eigenvalues and the angle of
/// the first eigenvector from the first axis.
fn sym2_eigen(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let angle = 0.5 * libm::atan2(2.0 * b, a - c);
    let (s, co) = (libm::sin(angle), libm::cos(angle));
    let l1 = a * co * co + 2.0 * b * s * co + c * s * s;
    let l2 = a * s * s - 2.0 * b * s * co + c * co * co;
    (l1, l2, angle)
}

/// Fits a conic to `points`. Needs at least five points in general position;
/// returns `None` otherwise.
pub fn fit_conic(points: &[Point2]) -> Option<Conic> {
    if points.len() < 5 {
        return None;
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Point2::default(), |acc, &p| acc + p) * (1.0 / n);
    let rms = libm::sqrt(points.iter().map(|&p| (p - mean).dot(p - mean)).sum::<f64>() / n);
    if !(rms > 0.0) {
        return None;
    }
    let scale = 1.0 / rms;

    let mut scatter = [[0.0f64; 6]; 6];
    for &p in points {
        let q = (p - mean) * scale;
        let row = [q.y * q.y, q.y * q.z, q.z * q.z, q.y, q.z, 1.0];
        for r in 0..6 {
            for c in r..6 {
                scatter[r][c] += row[r] * row[c];
            }
        }
    }
    for r in 0..6 {
        for c in 0..r {
            scatter[r][c] = scatter[c][r];
        }
    }
    let (values, vectors) = jacobi_eigen(scatter);
    let mut k = 0;
    for i in 1..6 {
        if values[i] < values[k] {
            k = i;
        }
    }
    let [a, b, c, d, e, f] = core::array::from_fn(|i| vectors[i][k]);

    // Undo the normalisation q = s (p - m).
    let (s, my, mz) = (scale, mean.y, mean.z);
    let (a2, b2, c2) = (a * s * s, b * s * s, c * s * s);
    let (d1, e1) = (d * s, e * s);
    let coeffs = [
        a2,
        b2,
        c2,
        d1 - 2.0 * a2 * my - b2 * mz,
        e1 - 2.0 * c2 * mz - b2 * my,
        a2 * my * my + b2 * my * mz + c2 * mz * mz - d1 * my - e1 * mz + f,
    ];
    if coeffs.iter().all(|v| v.is_finite()) {
        Some(Conic(coeffs))
    } else {
        None
    }
}

/// Cyclic Jacobi eigen solver for a symmetric 6x6 matrix. Returns the
/// eigenvalues and the eigenvectors as columns.
pub(crate) fn jacobi_eigen(mut m: [[f64; 6]; 6]) -> ([f64; 6], [[f64; 6]; 6]) {
    const N: usize = 6;
    let mut v = [[0.0f64; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..N {
            for j in 0..N {
                total += m[i][j] * m[i][j];
                if i != j {
                    off += m[i][j] * m[i][j];
                }
            }
        }
        if off <= 1e-30 * total || off == 0.0 {
            break;
        }
        for p in 0..N - 1 {
            for q in p + 1..N {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..N {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..N {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    (core::array::from_fn(|i| m[i][i]), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn ring(e: &Ellipse, n: usize) -> Vec<Point2> {
        (0..n)
            .map(|k| e.point_at(2.0 * core::f64::consts::PI * k as f64 / n as f64))
            .collect()
    }

    #[test]
    fn recovers_circle() {
        let truth = Ellipse {
            center: Point2::new(250.0, 250.0),
            semi_major: 43.7,
            semi_minor: 43.7,
            angle: 0.0,
        };
        let fit = fit_conic(&ring(&truth, 24)).unwrap().ellipse().unwrap();
        assert!(fit.center.distance(truth.center) < 1e-8);
        assert!((fit.semi_major - 43.7).abs() < 1e-8);
        assert!((fit.semi_minor - 43.7).abs() < 1e-8);
    }

    #[test]
    fn recovers_rotated_ellipse() {
        let truth = Ellipse {
            center: Point2::new(120.0, 310.0),
            semi_major: 60.0,
            semi_minor: 25.0,
            angle: 0.6,
        };
        let pts = ring(&truth, 40);
        let conic = fit_conic(&pts).unwrap();
        for p in &pts {
            assert!(conic.eval(*p).abs() < 1e-9 * conic.0.iter().map(|v| v.abs()).sum::<f64>() * 1e4);
        }
        let fit = conic.ellipse().unwrap();
        assert!(fit.center.distance(truth.center) < 1e-7);
        assert!((fit.semi_major - 60.0).abs() < 1e-7);
        assert!((fit.semi_minor - 25.0).abs() < 1e-7);
        let d = libm::fmod(fit.angle - truth.angle + 10.0 * core::f64::consts::PI, core::f64::consts::PI);
        assert!(d < 1e-7 || (core::f64::consts::PI - d) < 1e-7);
    }

    #[test]
    fn collinear_points_do_not_yield_an_ellipse() {
        let pts: Vec<Point2> = (0..10).map(|k| Point2::new(k as f64, 2.0 * k as f64)).collect();
        assert!(fit_conic(&pts).and_then(|c| c.ellipse()).is_none());
    }

    #[test]
    fn hyperbola_is_not_an_ellipse() {
        let pts: Vec<Point2> = (1..12)
            .flat_map(|k| {
                let y = k as f64 * 0.5;
                [Point2::new(y, 1.0 / y), Point2::new(-y, -1.0 / y)]
            })
            .collect();
        assert!(fit_conic(&pts).unwrap().ellipse().is_none());
    }

    #[test]
    fn jacobi_diagonalises() {
        let mut m = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                m[i][j] = 1.0 / (1.0 + i as f64 + j as f64);
            }
        }
        let (vals, vecs) = jacobi_eigen(m);
        for k in 0..6 {
            for i in 0..6 {
                let mv: f64 = (0..6).map(|j| m[i][j] * vecs[j][k]).sum();
                assert!((mv - vals[k] * vecs[i][k]).abs() < 1e-12);
            }
        }
    }
}

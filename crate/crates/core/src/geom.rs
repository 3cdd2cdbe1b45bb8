//! Small fixed-size vector types for the surface plane and 3D scene.

use core::ops::{Add, Mul, Sub};

/// A point on the surface plane, in cm. `y` runs along grid columns, `z`
/// along grid rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub y: f64,
    pub z: f64,
}

impl Point2 {
    pub const fn new(y: f64, z: f64) -> Self {
        Self { y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.y, self.z)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.y * s, self.z * s)
    }
}

/// A 3D vector, in cm. The surface is the plane `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Lifts a surface point into 3D.
    pub const fn on_surface(p: Point2) -> Self {
        Self::new(0.0, p.y, p.z)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    /// Unit vector in the same direction, or `None` for a zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn lateral(self) -> Point2 {
        Point2::new(self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

//! The chart on the space of oriented lines.
//!
//! A direction is a point of the unit sphere written as the complex number
//! `xi` obtained by stereographic projection from the south pole, so the north
//! pole (0, 0, 1) is `xi = 0` and the south pole has no coordinate. An oriented
//! line is `(xi, eta)`; the incidence map sends `(line, r)` to the point at
//! signed distance `r` from the foot of the line (its point closest to the
//! origin).

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Tolerance used to decide that a unit vector is the south pole.
const SOUTH_POLE_TOL: f64 = 1e-12;

/// Stereographic coordinate of a direction. Always finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirCoord(Complex64);

impl DirCoord {
    /// Wraps `xi`, rejecting non-finite values (the south pole).
    pub fn new(xi: Complex64) -> Result<Self> {
        if xi.re.is_finite() && xi.im.is_finite() {
            Ok(DirCoord(xi))
        } else {
            Err(Error::SouthPole)
        }
    }

    pub fn north() -> Self {
        DirCoord(Complex64::new(0.0, 0.0))
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    /// `1 + |xi|^2`, the conformal factor that appears everywhere.
    #[inline]
    pub fn weight(self) -> f64 {
        1.0 + self.0.norm_sqr()
    }

    /// The opposite direction, `-1 / conj(xi)`. Fails for the north pole.
    pub fn antipode(self) -> Result<Self> {
        DirCoord::new(-1.0 / self.0.conj())
    }
}

impl From<DirCoord> for Complex64 {
    fn from(d: DirCoord) -> Self {
        d.0
    }
}

/// An oriented affine line in `(xi, eta)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedLine {
    pub xi: DirCoord,
    pub eta: Complex64,
}

impl OrientedLine {
    pub fn new(xi: DirCoord, eta: Complex64) -> Self {
        OrientedLine { xi, eta }
    }

    /// Convenience constructor from raw complex numbers.
    pub fn from_parts(xi: Complex64, eta: Complex64) -> Result<Self> {
        Ok(OrientedLine::new(DirCoord::new(xi)?, eta))
    }

    pub fn direction(&self) -> UnitVec3 {
        dir_to_vec(self.xi)
    }

    pub fn point_at(&self, r: f64) -> Point3 {
        incidence(self, r)
    }
}

/// A point of Euclidean 3-space, `z = x1 + i x2`, `t = x3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub z: Complex64,
    pub t: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        z: Complex64::new(0.0, 0.0),
        t: 0.0,
    };

    pub fn new(z: Complex64, t: f64) -> Self {
        Point3 { z, t }
    }

    pub fn from_xyz(x1: f64, x2: f64, x3: f64) -> Self {
        Point3::new(Complex64::new(x1, x2), x3)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.z.re, self.z.im, self.t]
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.z.re * other.z.re + self.z.im * other.z.im + self.t * other.t
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.z.re.is_finite() && self.z.im.is_finite() && self.t.is_finite()
    }

    pub fn cross(self, other: Point3) -> Point3 {
        let [a1, a2, a3] = self.to_array();
        let [b1, b2, b3] = other.to_array();
        Point3::from_xyz(a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1)
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.z + rhs.z, self.t + rhs.t)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.z - rhs.z, self.t - rhs.t)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.z, -self.t)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.z * s, self.t * s)
    }
}

impl From<UnitVec3> for Point3 {
    fn from(u: UnitVec3) -> Point3 {
        Point3::new(u.h, u.v)
    }
}

/// A unit vector split into horizontal (complex) and vertical parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3 {
    pub h: Complex64,
    pub v: f64,
}

impl UnitVec3 {
    /// Normalises `(h, v)`. Returns `None` for the zero vector.
    pub fn normalize(h: Complex64, v: f64) -> Option<Self> {
        let n = (h.norm_sqr() + v * v).sqrt();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(UnitVec3 { h: h / n, v: v / n })
    }

    pub fn dot(self, other: UnitVec3) -> f64 {
        Point3::from(self).dot(Point3::from(other))
    }

    /// `|h|^2 + v^2 - 1`.
    pub fn norm_defect(self) -> f64 {
        self.h.norm_sqr() + self.v * self.v - 1.0
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;
    fn neg(self) -> UnitVec3 {
        UnitVec3 {
            h: -self.h,
            v: -self.v,
        }
    }
}

/// Inverse stereographic projection.
pub fn dir_to_vec(xi: DirCoord) -> UnitVec3 {
    let x = xi.value();
    let w = xi.weight();
    UnitVec3 {
        h: 2.0 * x / w,
        v: (1.0 - x.norm_sqr()) / w,
    }
}

/// Stereographic projection from the south pole, `xi = h / (1 + v)`.
pub fn vec_to_dir(u: UnitVec3) -> Result<DirCoord> {
    if 1.0 + u.v <= SOUTH_POLE_TOL {
        return Err(Error::SouthPole);
    }
    // For v < 0 the algebraically equal form conj(h)^-1 (1 - v) keeps precision.
    let xi = if u.v >= 0.0 {
        u.h / (1.0 + u.v)
    } else {
        (1.0 - u.v) / u.h.conj()
    };
    DirCoord::new(xi)
}

/// The incidence map: the point at affine parameter `r` on `line`.
pub fn incidence(line: &OrientedLine, r: f64) -> Point3 {
    let xi = line.xi.value();
    let eta = line.eta;
    let w = line.xi.weight();
    let w2 = w * w;
    let z = (2.0 * (eta - eta.conj() * xi * xi) + 2.0 * xi * w * r) / w2;
    let t = (-2.0 * (eta * xi.conj() + eta.conj() * xi).re
        + (1.0 - xi.norm_sqr() * xi.norm_sqr()) * r)
        / w2;
    Point3::new(z, t)
}

/// The oriented line through `p` with direction `xi`, and the affine
/// parameter of `p` on it.
pub fn line_through(p: Point3, xi: DirCoord) -> (OrientedLine, f64) {
    let x = xi.value();
    let eta = 0.5 * (p.z - 2.0 * p.t * x - p.z.conj() * x * x);
    let r = ((x.conj() * p.z + x * p.z.conj()).re + (1.0 - x.norm_sqr()) * p.t) / xi.weight();
    (OrientedLine::new(xi, eta), r)
}

/// `|foot . direction|`: zero when `incidence(line, 0)` is the foot point.
pub fn closest_point_orthogonality(line: &OrientedLine) -> f64 {
    let foot = incidence(line, 0.0);
    foot.dot(dir_to_vec(line.xi).into()).abs()
}

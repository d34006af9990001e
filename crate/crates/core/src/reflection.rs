//! The reflection law in line coordinates.
//!
//! A mirror is described locally by its normal line `(xi0, eta0)` and the
//! affine parameter `r0` of the surface point on that normal. An incoming ray
//! `(xi1, eta1)` is reflected only if it actually passes through that surface
//! point.

use num_complex::Complex64;

use crate::line_space::{
    dir_to_vec, incidence, line_through, vec_to_dir, DirCoord, OrientedLine, Point3,
};
use crate::{Error, Result};

/// Maximum intersection residual for a ray to count as incident.
pub const INCIDENCE_TOL: f64 = 1e-9;

/// Agreement required between the two expressions for the reflected `eta`.
pub const ETA_FORMS_TOL: f64 = 1e-9;

/// The normal line of a surface at one point, plus that point's parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFrame {
    pub xi0: DirCoord,
    pub eta0: Complex64,
    pub r0: f64,
}

impl SurfaceFrame {
    pub fn new(xi0: DirCoord, eta0: Complex64, r0: f64) -> Self {
        SurfaceFrame { xi0, eta0, r0 }
    }

    /// The frame at surface point `p` with normal direction `xi0`.
    pub fn at_point(p: Point3, xi0: DirCoord) -> Self {
        let (normal, r0) = line_through(p, xi0);
        SurfaceFrame::new(xi0, normal.eta, r0)
    }

    pub fn normal_line(&self) -> OrientedLine {
        OrientedLine::new(self.xi0, self.eta0)
    }

    pub fn surface_point(&self) -> Point3 {
        incidence(&self.normal_line(), self.r0)
    }

    /// How far `(eta0, r0)` is from re-deriving itself through its surface point.
    pub fn round_trip_residual(&self) -> f64 {
        let (line, r) = line_through(self.surface_point(), self.xi0);
        (line.eta - self.eta0).norm().max((r - self.r0).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceRay {
    pub xi1: DirCoord,
    pub eta1: Complex64,
}

impl SourceRay {
    pub fn new(xi1: DirCoord, eta1: Complex64) -> Self {
        SourceRay { xi1, eta1 }
    }

    pub fn line(&self) -> OrientedLine {
        OrientedLine::new(self.xi1, self.eta1)
    }
}

impl From<OrientedLine> for SourceRay {
    fn from(l: OrientedLine) -> Self {
        SourceRay::new(l.xi, l.eta)
    }
}

/// `(1 - |xi0|^2) conj(xi1) - 2 conj(xi0)`, shared by all reflection formulas.
fn reflection_denominator(xi0: Complex64, xi1: Complex64) -> Complex64 {
    (1.0 - xi0.norm_sqr()) * xi1.conj() - 2.0 * xi0.conj()
}

/// Direction of the reflected ray.
pub fn reflect_direction(f: &SurfaceFrame, xi1: DirCoord) -> Result<DirCoord> {
    let x0 = f.xi0.value();
    let x1 = xi1.value();
    let den = reflection_denominator(x0, x1);
    let num = 2.0 * x0 * x1.conj() + 1.0 - x0.norm_sqr();
    if den.norm() <= f64::EPSILON * num.norm() || den.norm() == 0.0 {
        return Err(Error::SouthPole);
    }
    DirCoord::new(num / den)
}

/// Residual of the intersection equation; zero iff the ray meets the surface
/// point of `f`.
pub fn intersection_residual(f: &SurfaceFrame, ray: &SourceRay) -> Complex64 {
    let x0 = f.xi0.value();
    let x1 = ray.xi1.value();
    let w = f.xi0.weight();
    let a = 1.0 + x0.conj() * x1;
    let b = x0 - x1;
    ray.eta1 - (a * a * f.eta0 - b * b * f.eta0.conj()) / (w * w) - b * a * f.r0 / w
}

/// The reflected `eta` written with the surface data `(eta0, r0)`.
fn reflected_eta_surface_form(f: &SurfaceFrame, x1: Complex64, den: Complex64) -> Complex64 {
    let x0 = f.xi0.value();
    let d2 = den * den;
    let p = x0.conj() - x1.conj();
    let q = 1.0 + x0 * x1.conj();
    p * p / d2 * f.eta0 - q * q / d2 * f.eta0.conj() + p * q * f.xi0.weight() / d2 * f.r0
}

/// The reflected `eta` written with the incoming `eta1`, valid on incident rays.
fn reflected_eta_ray_form(f: &SurfaceFrame, ray: &SourceRay, den: Complex64) -> Complex64 {
    let x0 = f.xi0.value();
    let x1 = ray.xi1.value();
    let w = f.xi0.weight();
    let d2 = den * den;
    -(w * w) / d2 * ray.eta1.conj()
        + 2.0 * (x0.conj() - x1.conj()) * (1.0 + x0 * x1.conj()) * w / d2 * f.r0
}

/// Reflects an incident ray. Rays that miss the surface point are rejected.
/// Both expressions for the reflected `eta` are evaluated and must agree.
pub fn reflect_line(f: &SurfaceFrame, ray: &SourceRay) -> Result<OrientedLine> {
    let residual = intersection_residual(f, ray).norm();
    let scale = 1.0 + ray.eta1.norm();
    if !(residual <= INCIDENCE_TOL * scale) {
        return Err(Error::NotIncident { residual });
    }
    let xi = reflect_direction(f, ray.xi1)?;
    let den = reflection_denominator(f.xi0.value(), ray.xi1.value());
    let eta = reflected_eta_surface_form(f, ray.xi1.value(), den);
    let alt = reflected_eta_ray_form(f, ray, den);
    // a disagreement beyond round-off means the intersection equation drifted
    let eta_scale = 1.0 + eta.norm();
    if !((eta - alt).norm() <= ETA_FORMS_TOL * eta_scale) {
        return Err(Error::NotIncident {
            residual: (eta - alt).norm(),
        });
    }
    Ok(OrientedLine::new(xi, eta))
}

/// Both reflected-`eta` expressions, for diagnostics and tests.
pub fn reflected_eta_forms(f: &SurfaceFrame, ray: &SourceRay) -> Result<(Complex64, Complex64)> {
    let den = reflection_denominator(f.xi0.value(), ray.xi1.value());
    if den.norm() == 0.0 {
        return Err(Error::SouthPole);
    }
    Ok((
        reflected_eta_surface_form(f, ray.xi1.value(), den),
        reflected_eta_ray_form(f, ray, den),
    ))
}

/// Independent check: reflect the direction vector across the normal with
/// `d' = d - 2 (d.n) n` and rebuild the line through the surface point.
pub fn reflect_oracle(f: &SurfaceFrame, ray: &SourceRay) -> Result<OrientedLine> {
    let p = f.surface_point();
    let d = Point3::from(dir_to_vec(ray.xi1));
    let n = Point3::from(dir_to_vec(f.xi0));
    let reflected = d - n * (2.0 * d.dot(n));
    let dir =
        crate::line_space::UnitVec3::normalize(reflected.z, reflected.t).ok_or(Error::SouthPole)?;
    let xi = vec_to_dir(dir)?;
    Ok(line_through(p, xi).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dir(x: Complex64) -> DirCoord {
        DirCoord::new(x).unwrap()
    }

    fn circle_frame(v: f64) -> SurfaceFrame {
        SurfaceFrame::new(dir(c(1.0, 0.0)), c(-v, 0.0), 1.0)
    }

    #[test]
    fn normal_incidence_retro_reflects() {
        for x0 in [c(0.4, -1.2), c(2.0, 0.5), c(-0.1, 0.05)] {
            let f = SurfaceFrame::new(dir(x0), c(0.0, 0.0), 0.0);
            let back = reflect_direction(&f, dir(-1.0 / x0.conj())).unwrap();
            assert!((back.value() - x0).norm() < 1e-12 * (1.0 + x0.norm()));
        }
    }

    #[test]
    fn horizontal_mirror_directions() {
        let f = SurfaceFrame::new(DirCoord::north(), c(0.0, 0.0), 0.0);
        let out = reflect_direction(&f, dir(c(1.0, 0.0))).unwrap();
        assert!((out.value() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(
            reflect_direction(&f, DirCoord::north()),
            Err(Error::SouthPole)
        );
    }

    #[test]
    fn intersection_examples() {
        let f = circle_frame(0.0);
        assert_eq!(
            intersection_residual(&f, &SourceRay::new(dir(c(1.0, 0.0)), c(0.0, 0.0))),
            c(0.0, 0.0)
        );
        let r = intersection_residual(&f, &SourceRay::new(dir(c(1.0, 0.0)), c(1.0, 0.0)));
        assert!((r - c(1.0, 0.0)).norm() < 1e-15);
        let g = SurfaceFrame::new(DirCoord::north(), c(1.0, 0.0), 0.0);
        assert_eq!(
            intersection_residual(&g, &SourceRay::new(DirCoord::north(), c(1.0, 0.0))),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn circle_retro_reflection() {
        let f = circle_frame(0.0);
        let ray = SourceRay::new(dir(c(1.0, 0.0)), c(0.0, 0.0));
        for out in [
            reflect_line(&f, &ray).unwrap(),
            reflect_oracle(&f, &ray).unwrap(),
        ] {
            assert!((out.xi.value() - c(-1.0, 0.0)).norm() < 1e-15);
            assert!(out.eta.norm() < 1e-15);
        }
    }

    #[test]
    fn grazing_ray_on_horizontal_mirror() {
        let z = c(1.0, 1.0);
        let f = SurfaceFrame::at_point(Point3::new(z, 0.0), DirCoord::north());
        assert_eq!(f.eta0, z / 2.0);
        assert_eq!(f.r0, 0.0);
        let ray = SourceRay::new(dir(c(1.0, 0.0)), c(0.0, 1.0));
        for out in [
            reflect_line(&f, &ray).unwrap(),
            reflect_oracle(&f, &ray).unwrap(),
        ] {
            assert!((out.xi.value() - c(1.0, 0.0)).norm() < 1e-15);
            assert!((out.eta - c(0.0, 1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn circle_oblique_ray() {
        let s2 = 2f64.sqrt();
        let f = circle_frame(1.0);
        assert!((f.surface_point() - Point3::from_xyz(1.0, 0.0, 1.0)).norm() < 1e-15);
        let ray = SourceRay::new(dir(c(s2 - 1.0, 0.0)), c(0.0, 0.0));
        for out in [
            reflect_line(&f, &ray).unwrap(),
            reflect_oracle(&f, &ray).unwrap(),
        ] {
            assert!((out.xi.value() - c(1.0 - s2, 0.0)).norm() < 1e-14);
            assert!((out.eta - c(2.0 * s2 - 2.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn missing_rays_are_rejected() {
        let f = circle_frame(0.0);
        let ray = SourceRay::new(dir(c(1.0, 0.0)), c(0.3, 0.0));
        assert!(matches!(
            reflect_line(&f, &ray),
            Err(Error::NotIncident { .. })
        ));
    }

    #[test]
    fn frame_round_trip() {
        let f = SurfaceFrame::at_point(Point3::from_xyz(0.3, -2.0, 1.5), dir(c(0.2, 0.9)));
        assert!(f.round_trip_residual() < 1e-12);
    }
}

//! Translation-invariant mirrors lit by a point source at the origin.
//!
//! The mirror is `(u, v) -> (z0(u), v)`. Its normal congruence, the reflected
//! congruence of the source and the two closed-form focal sheets (a curve in
//! the plane `x3 = 0` and a translation-invariant surface) live here.

mod profile;

pub use profile::{ProfileCurve, ProfileJet, ProfileShape};

use std::fmt;

use num_complex::Complex64;

use crate::congruence::{base_scalars, Derivatives, LineCongruence, MuGrid};
use crate::line_space::{dir_to_vec, incidence, DirCoord, OrientedLine, Point3};
use crate::reflection::{SourceRay, SurfaceFrame};
use crate::{par, Error, Result};

/// `|dz0/du|` below which the profile is singular.
pub const SINGULAR_SPEED: f64 = 1e-12;

/// Relative margin on the focal-surface denominator.
pub const DEGENERATE_FOCAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Orientation of the normal and branch of the source ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signs {
    pub sign0: Sign,
    pub branch1: Sign,
}

impl Signs {
    pub const PLUS_PLUS: Signs = Signs {
        sign0: Sign::Plus,
        branch1: Sign::Plus,
    };

    /// All four choices, `++` first.
    pub const ALL: [Signs; 4] = [
        Signs::PLUS_PLUS,
        Signs {
            sign0: Sign::Plus,
            branch1: Sign::Minus,
        },
        Signs {
            sign0: Sign::Minus,
            branch1: Sign::Plus,
        },
        Signs {
            sign0: Sign::Minus,
            branch1: Sign::Minus,
        },
    ];
}

impl fmt::Display for Signs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sign0.symbol(), self.branch1.symbol())
    }
}

/// A point `(u, v)` of the mirror together with the sign choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderParam {
    pub u: f64,
    pub v: f64,
    pub sign0: Sign,
    pub branch1: Sign,
}

impl CylinderParam {
    pub fn new(u: f64, v: f64, signs: Signs) -> Self {
        CylinderParam {
            u,
            v,
            sign0: signs.sign0,
            branch1: signs.branch1,
        }
    }

    pub fn plus(u: f64, v: f64) -> Self {
        CylinderParam::new(u, v, Signs::PLUS_PLUS)
    }

    pub fn signs(&self) -> Signs {
        Signs {
            sign0: self.sign0,
            branch1: self.branch1,
        }
    }
}

fn regular_jet(p: &ProfileCurve, u: f64) -> Result<ProfileJet> {
    let jet = p.jet(u);
    let speed = jet.dz.norm();
    if !(speed >= SINGULAR_SPEED) {
        return Err(Error::SingularProfile { u, speed });
    }
    Ok(jet)
}

/// `i dz0/|dz0|`, the left normal; continuous wherever the profile is regular.
fn left_normal(jet: &ProfileJet) -> Complex64 {
    Complex64::i() * jet.dz / jet.dz.norm()
}

/// Principal square root convention for `xi0^2 = -dz0 / conj(dz0)`: the root
/// with positive real part, or positive imaginary part on the imaginary axis.
fn is_principal(root: Complex64) -> bool {
    root.re > 1e-15 || (root.re.abs() <= 1e-15 && root.im > 0.0)
}

/// `xi0(u)`: the root of `-dz0/conj(dz0)` continued along the profile from the
/// left end of `u_range`, where `sign0 = Plus` picks the principal root.
pub fn normal_direction(p: &ProfileCurve, u: f64, sign0: Sign) -> Result<Complex64> {
    let jet = regular_jet(p, u)?;
    let start = regular_jet(p, p.u_range.0)?;
    let start_orientation = if is_principal(left_normal(&start)) {
        1.0
    } else {
        -1.0
    };
    Ok(left_normal(&jet) * (start_orientation * sign0.factor()))
}

fn frame_from(jet: &ProfileJet, xi0: Complex64, v: f64) -> Result<SurfaceFrame> {
    let z = jet.z;
    let eta0 = 0.5 * (z - 2.0 * v * xi0 - z.conj() * xi0 * xi0);
    let r0 = ((xi0.conj() * z + xi0 * z.conj()).re + (1.0 - xi0.norm_sqr()) * v)
        / (1.0 + xi0.norm_sqr());
    Ok(SurfaceFrame::new(DirCoord::new(xi0)?, eta0, r0))
}

/// The normal line of the mirror at `(u, v)`.
pub fn normal_congruence(p: &ProfileCurve, q: &CylinderParam) -> Result<SurfaceFrame> {
    let jet = regular_jet(p, q.u)?;
    let xi0 = normal_direction(p, q.u, q.sign0)?;
    frame_from(&jet, xi0, q.v)
}

/// The line through the origin and the mirror point `(z0(u), v)`; `Plus`
/// points from the source to the mirror, `Minus` the other way.
pub fn source_ray(p: &ProfileCurve, q: &CylinderParam) -> Result<SourceRay> {
    let z = p.z0(q.u);
    let v = q.v;
    let dist2 = z.norm_sqr() + v * v;
    if dist2 < 1e-24 {
        return Err(Error::SourceOnMirror);
    }
    let dist = dist2.sqrt();
    // (-v +- dist) / conj(z0), rewritten where needed to avoid cancellation
    let xi1 = match q.branch1 {
        Sign::Plus if v >= 0.0 => z / (dist + v),
        Sign::Plus => (dist - v) / z.conj(),
        Sign::Minus if v <= 0.0 => -z / (dist - v),
        Sign::Minus => -(dist + v) / z.conj(),
    };
    Ok(SourceRay::new(
        DirCoord::new(xi1)?,
        Complex64::new(0.0, 0.0),
    ))
}

/// Closed form of the reflected source ray at `(u, v)`.
pub fn reflected_point_source(p: &ProfileCurve, q: &CylinderParam) -> Result<OrientedLine> {
    let frame = normal_congruence(p, q)?;
    let ray = source_ray(p, q)?;
    Ok(reflected_from_parts(&frame, &ray))
}

fn reflected_from_parts(frame: &SurfaceFrame, ray: &SourceRay) -> OrientedLine {
    let x0 = frame.xi0.value();
    let x1 = ray.xi1.value();
    let x0sq = x0 * x0;
    let xi = -x0sq * x1.conj();
    let eta = (x0.conj() - x0 * x1.conj() * x1.conj()) * x0sq * frame.r0;
    // |xi| = |xi1| since |xi0| = 1, so xi is finite whenever xi1 is
    OrientedLine::new(DirCoord::new(xi).expect("finite reflected direction"), eta)
}

/// The curve sheet: the mirror image of the source in the tangent plane at `u`.
pub fn focal_curve(p: &ProfileCurve, u: f64) -> Result<Point3> {
    let j = regular_jet(p, u)?;
    let z = (j.z * j.dz.conj() - j.z.conj() * j.dz) / j.dz.conj();
    Ok(Point3::new(z, 0.0))
}

/// Shared denominator of the focal-surface formulas and the magnitude of its
/// largest term.
pub fn focal_surface_denominator(p: &ProfileCurve, u: f64) -> Result<(Complex64, f64)> {
    let j = regular_jet(p, u)?;
    let (z, zb) = (j.z, j.z.conj());
    let (d, db) = (j.dz, j.dz.conj());
    let (dd, ddb) = (j.ddz, j.ddz.conj());
    let terms = [
        2.0 * dd * db * z * zb,
        -2.0 * ddb * d * z * zb,
        -d * d * db * zb,
        d * db * db * z,
    ];
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    Ok((terms.iter().sum(), scale))
}

/// The surface sheet. `z` does not depend on `v`; `t` is linear in `v`.
pub fn focal_surface(p: &ProfileCurve, u: f64, v: f64) -> Result<Point3> {
    let j = regular_jet(p, u)?;
    let (den, scale) = focal_surface_denominator(p, u)?;
    if !(den.norm() > DEGENERATE_FOCAL_TOL * scale) {
        return Err(Error::DegenerateFocal {
            u,
            denominator: den.norm(),
        });
    }
    let (z, zb) = (j.z, j.z.conj());
    let (d, db) = (j.dz, j.dz.conj());
    let (dd, ddb) = (j.ddz, j.ddz.conj());
    let num = 2.0 * dd * db * z * z * zb - 2.0 * ddb * d * z * z * zb + d * d * d * zb * zb
        - 2.0 * d * d * db * z * zb
        + d * db * db * z * z;
    let t = 2.0 * v * z * zb * (ddb * d - dd * db) / den;
    Ok(Point3::new(num / den, t.re))
}

/// The mirror as a congruence of normals over `mu = u + iv`.
#[derive(Debug, Clone)]
pub struct NormalCongruence {
    pub profile: ProfileCurve,
    pub sign0: Sign,
}

impl NormalCongruence {
    pub fn new(profile: ProfileCurve, sign0: Sign) -> Self {
        NormalCongruence { profile, sign0 }
    }
}

impl LineCongruence for NormalCongruence {
    fn line(&self, mu: Complex64) -> Result<OrientedLine> {
        let q = CylinderParam::new(
            mu.re,
            mu.im,
            Signs {
                sign0: self.sign0,
                branch1: Sign::Plus,
            },
        );
        Ok(normal_congruence(&self.profile, &q)?.normal_line())
    }

    fn analytic_derivatives(&self, mu: Complex64) -> Option<Derivatives> {
        let (u, v) = (mu.re, mu.im);
        let j = self.profile.jet(u);
        let xi = normal_direction(&self.profile, u, self.sign0).ok()?;
        let speed = j.dz.norm();
        // xi = k i T with T = dz/|dz|; T' = ddz/|dz| - dz Re(ddz conj dz)/|dz|^3
        let k = xi / (Complex64::i() * j.dz / speed);
        let dt = j.ddz / speed - j.dz * (j.ddz * j.dz.conj()).re / (speed * speed * speed);
        let xi_u = k * Complex64::i() * dt;
        let eta_u =
            0.5 * (j.dz - 2.0 * v * xi_u - j.dz.conj() * xi * xi - 2.0 * j.z.conj() * xi * xi_u);
        let eta_v = -xi;
        let i = Complex64::i();
        Some(Derivatives {
            d_xi: 0.5 * xi_u,
            dbar_xi: 0.5 * xi_u,
            d_eta: 0.5 * (eta_u - i * eta_v),
            dbar_eta: 0.5 * (eta_u + i * eta_v),
        })
    }
}

/// The reflected point-source congruence over `mu = u + iv`. Derivatives
/// are finite differences.
#[derive(Debug, Clone)]
pub struct ReflectedCongruence {
    pub profile: ProfileCurve,
    pub signs: Signs,
}

impl ReflectedCongruence {
    pub fn new(profile: ProfileCurve, signs: Signs) -> Self {
        ReflectedCongruence { profile, signs }
    }
}

impl LineCongruence for ReflectedCongruence {
    fn line(&self, mu: Complex64) -> Result<OrientedLine> {
        reflected_point_source(&self.profile, &CylinderParam::new(mu.re, mu.im, self.signs))
    }
}

/// Which focal sheet a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Closed-form curve sheet.
    Curve,
    /// Closed-form surface sheet.
    Surface,
    /// Numeric root of the focal quadratic, in increasing affine parameter.
    Numeric(usize),
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Curve => f.write_str("curve"),
            Branch::Surface => f.write_str("surface"),
            Branch::Numeric(k) => write!(f, "numeric-{}", k + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalPoint {
    pub branch: Branch,
    pub point: Point3,
    /// Signed distance from the mirror point along the reflected ray.
    pub distance: f64,
    /// Behind the mirror (negative distance along the reflected ray).
    pub is_virtual: bool,
}

impl FocalPoint {
    fn on_ray(branch: Branch, point: Point3, mirror: Point3, line: &OrientedLine) -> Self {
        let distance = (point - mirror).dot(dir_to_vec(line.xi).into());
        FocalPoint {
            branch,
            point,
            distance,
            is_virtual: distance < 0.0,
        }
    }
}

/// The closed-form focal points on the reflected ray at `q`.
///
/// The curve sheet contributes `focal_curve(u)`. The surface formula, read per
/// ray, places the focal point of the ray through height `v` at
/// `focal_surface(u, -v)`; that is the point returned here, so that both
/// points lie on the ray at `q`. As sets over a grid symmetric in `v` the two
/// readings coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct RayFocalPoints {
    pub curve: Result<FocalPoint>,
    pub surface: Result<FocalPoint>,
}

pub fn ray_focal_points(p: &ProfileCurve, q: &CylinderParam) -> Result<RayFocalPoints> {
    let line = reflected_point_source(p, q)?;
    let mirror = Point3::new(p.z0(q.u), q.v);
    Ok(RayFocalPoints {
        curve: focal_curve(p, q.u).map(|x| FocalPoint::on_ray(Branch::Curve, x, mirror, &line)),
        surface: focal_surface(p, q.u, -q.v)
            .map(|x| FocalPoint::on_ray(Branch::Surface, x, mirror, &line)),
    })
}

/// Focal points of one reflected ray from the numeric pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericFocalRecord {
    pub u: f64,
    pub v: f64,
    pub signs: Signs,
    pub points: Result<Vec<FocalPoint>>,
}

fn numeric_focal_points(cong: &ReflectedCongruence, u: f64, v: f64) -> Result<Vec<FocalPoint>> {
    let mu = Complex64::new(u, v);
    let line = cong.line(mu)?;
    let mirror = Point3::new(cong.profile.z0(u), v);
    let solution = base_scalars(cong, mu)?.focal_solution();
    Ok(solution
        .roots
        .iter()
        .enumerate()
        .map(|(k, &r)| FocalPoint::on_ray(Branch::Numeric(k), incidence(&line, r), mirror, &line))
        .collect())
}

/// Runs the line-space pipeline on every grid point and sign choice: the
/// reflected congruence over `mu = u + iv`, optical scalars by finite
/// differences, roots of the focal quadratic, incidence. Output order is
/// row-major in the grid, then `signs`.
pub fn focal_set_numeric(
    p: &ProfileCurve,
    grid: &[(f64, f64)],
    signs: &[Signs],
) -> Vec<NumericFocalRecord> {
    let congruences: Vec<ReflectedCongruence> = signs
        .iter()
        .map(|&s| ReflectedCongruence::new(p.clone(), s))
        .collect();
    let jobs: Vec<(f64, f64, usize)> = grid
        .iter()
        .flat_map(|&(u, v)| (0..signs.len()).map(move |k| (u, v, k)))
        .collect();
    par::map_ordered(&jobs, |&(u, v, k)| NumericFocalRecord {
        u,
        v,
        signs: signs[k],
        points: numeric_focal_points(&congruences[k], u, v),
    })
}

/// `(u, v)` pairs of a tensor grid, row-major.
pub fn uv_grid(u_range: (f64, f64), nu: usize, v_range: (f64, f64), nv: usize) -> Vec<(f64, f64)> {
    match MuGrid::linspace(u_range, nu, v_range, nv) {
        Ok(g) => g.nodes().into_iter().map(|m| (m.re, m.im)).collect(),
        Err(_) => vec![],
    }
}

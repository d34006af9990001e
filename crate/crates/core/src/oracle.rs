//! Cartesian ray tracing and numerical caustic detection.
//!
//! Nothing here uses line coordinates: rays are an origin and a unit vector,
//! reflection is `d - 2 (d.n) n`, and caustics are where the map
//! `(u, v, r) -> origin(u, v) + r dir(u, v)` loses rank. That keeps the
//! agreement with the closed forms in [`crate::cylinder`] a real cross-check.

use num_complex::Complex64;

use crate::cylinder::{ProfileCurve, SINGULAR_SPEED};
use crate::line_space::{Point3, UnitVec3};
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray3 {
    pub origin: Point3,
    pub dir: UnitVec3,
}

impl Ray3 {
    pub fn at(&self, r: f64) -> Point3 {
        self.origin + Point3::from(self.dir) * r
    }

    /// Distance from `p` to the (bi-infinite) line carrying the ray.
    pub fn distance_to(&self, p: Point3) -> f64 {
        let d = Point3::from(self.dir);
        let w = p - self.origin;
        (w - d * w.dot(d)).norm()
    }
}

/// A two-parameter family of rays.
pub trait RayFamily: Sync {
    fn ray(&self, u: f64, v: f64) -> Result<Ray3>;
}

/// Point source at the origin reflected by the mirror `(z0(u), v)`.
#[derive(Debug, Clone)]
pub struct MirrorFamily {
    pub profile: ProfileCurve,
}

impl MirrorFamily {
    pub fn new(profile: ProfileCurve) -> Self {
        MirrorFamily { profile }
    }
}

impl RayFamily for MirrorFamily {
    fn ray(&self, u: f64, v: f64) -> Result<Ray3> {
        trace_reflect(&self.profile, u, v)
    }
}

/// Rays leaving the origin; `u` is the azimuth and `v` the polar angle.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointSourceFamily;

impl RayFamily for PointSourceFamily {
    fn ray(&self, u: f64, v: f64) -> Result<Ray3> {
        let (sv, cv) = v.sin_cos();
        Ok(Ray3 {
            origin: Point3::ORIGIN,
            dir: UnitVec3 {
                h: Complex64::from_polar(sv, u),
                v: cv,
            },
        })
    }
}

/// Vertical rays through `(u, v, 0)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParallelBeam;

impl RayFamily for ParallelBeam {
    fn ray(&self, u: f64, v: f64) -> Result<Ray3> {
        Ok(Ray3 {
            origin: Point3::from_xyz(u, v, 0.0),
            dir: UnitVec3 {
                h: Complex64::new(0.0, 0.0),
                v: 1.0,
            },
        })
    }
}

/// The reflected ray leaving the mirror point `(z0(u), v)` for a source at
/// the origin. The normal is the horizontal unit vector `i dz0 / |dz0|`.
pub fn trace_reflect(p: &ProfileCurve, u: f64, v: f64) -> Result<Ray3> {
    let jet = p.jet(u);
    let speed = jet.dz.norm();
    if !(speed >= SINGULAR_SPEED) {
        return Err(Error::SingularProfile { u, speed });
    }
    let hit = Point3::new(jet.z, v);
    let dist = hit.norm();
    if dist < 1e-12 {
        return Err(Error::SourceOnMirror);
    }
    let d = hit * (1.0 / dist);
    let n = Point3::new(Complex64::i() * jet.dz / speed, 0.0);
    let out = d - n * (2.0 * d.dot(n));
    let dir = UnitVec3::normalize(out.z, out.t).ok_or(Error::SourceOnMirror)?;
    Ok(Ray3 { origin: hit, dir })
}

/// Origin and direction of a ray with their central differences in `u`, `v`.
#[derive(Debug, Clone, Copy)]
struct RayJet {
    ray: Ray3,
    origin_u: Point3,
    origin_v: Point3,
    dir_u: Point3,
    dir_v: Point3,
}

fn fd_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}

fn ray_jet<F: RayFamily + ?Sized>(fam: &F, u: f64, v: f64) -> Result<RayJet> {
    let ray = fam.ray(u, v)?;
    let (hu, hv) = (fd_step(u), fd_step(v));
    let up = fam.ray(u + hu, v)?;
    let um = fam.ray(u - hu, v)?;
    let vp = fam.ray(u, v + hv)?;
    let vm = fam.ray(u, v - hv)?;
    let diff = |a: Point3, b: Point3, h: f64| (a - b) * (0.5 / h);
    Ok(RayJet {
        ray,
        origin_u: diff(up.origin, um.origin, hu),
        origin_v: diff(vp.origin, vm.origin, hv),
        dir_u: diff(up.dir.into(), um.dir.into(), hu),
        dir_v: diff(vp.dir.into(), vm.dir.into(), hv),
    })
}

impl RayJet {
    /// Columns `d/du`, `d/dv`, `d/dr` of `origin + r dir`.
    fn columns(&self, r: f64) -> [Point3; 3] {
        [
            self.origin_u + self.dir_u * r,
            self.origin_v + self.dir_v * r,
            self.ray.dir.into(),
        ]
    }

    fn det(&self, r: f64) -> f64 {
        let [a, b, c] = self.columns(r);
        a.dot(b.cross(c))
    }

    /// Determinant divided by a per-ray scale, so a threshold on it does not
    /// depend on units. `len` is the size of the `r` window.
    fn normalized_det(&self, r: f64, len: f64) -> f64 {
        let scale = (self.origin_u.norm() + len * self.dir_u.norm())
            * (self.origin_v.norm() + len * self.dir_v.norm());
        if scale == 0.0 {
            0.0
        } else {
            self.det(r) / scale
        }
    }
}

/// Determinant of the Jacobian of `(u, v, r) -> origin + r dir`, by central
/// differences in `u` and `v`.
pub fn jacobian_det<F: RayFamily + ?Sized>(fam: &F, u: f64, v: f64, r: f64) -> Result<f64> {
    Ok(ray_jet(fam, u, v)?.det(r))
}

/// How the ray map degenerates at a caustic point, read off the null vector
/// of the Jacobian in `(u, v, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    /// Null vector along `v`: rays through one ruling of the mirror meet.
    Ruling,
    /// Null vector with a `u` component: neighbouring rays across the
    /// profile meet (envelope of the in-plane fan).
    Envelope,
    /// Rank below two; both directions collapse.
    Degenerate,
}

/// Relative size of the `u` component of the null vector below which a
/// degeneracy counts as purely along the ruling.
const RULING_TOL: f64 = 1e-6;

fn classify(jet: &RayJet, r: f64) -> Sheet {
    let [a, b, c] = jet.columns(r);
    let rows = [
        Point3::from_xyz(a.z.re, b.z.re, c.z.re),
        Point3::from_xyz(a.z.im, b.z.im, c.z.im),
        Point3::from_xyz(a.t, b.t, c.t),
    ];
    let candidates = [
        rows[0].cross(rows[1]),
        rows[1].cross(rows[2]),
        rows[2].cross(rows[0]),
    ];
    let null = candidates
        .into_iter()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or(Point3::ORIGIN);
    let row_scale = rows.iter().map(|r| r.norm()).fold(0.0, f64::max);
    if null.norm() <= 1e-8 * row_scale * row_scale {
        return Sheet::Degenerate;
    }
    // components are (u, v, r)
    if null.z.re.abs() <= RULING_TOL * null.norm() {
        Sheet::Ruling
    } else {
        Sheet::Envelope
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausticPoint {
    pub u: f64,
    pub v: f64,
    /// Distance from the ray origin.
    pub r: f64,
    pub point: Point3,
    pub sheet: Sheet,
    /// A touching zero: found as a minimum of `|det|` without a sign change.
    pub tangential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub samples: usize,
    /// Bisection stops once the bracket is shorter than this.
    pub r_tol: f64,
    /// Threshold on the normalised determinant for sign-less minima.
    pub touch_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            samples: 64,
            r_tol: 1e-10,
            touch_tol: 1e-8,
        }
    }
}

fn bisect(jet: &RayJet, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = jet.det(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = jet.det(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimum of `sign * normalised det` on `[lo, hi]`.
fn minimize(jet: &RayJet, mut lo: f64, mut hi: f64, sign: f64, len: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |r: f64| sign * jet.normalized_det(r, len);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= tol || f1 < 0.0 || f2 < 0.0 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    // a negative value means the determinant crossed zero twice
    if f1 < 0.0 || f2 < 0.0 {
        return if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    }
    let r = 0.5 * (lo + hi);
    (r, f(r))
}

fn scan_ray(
    jet: &RayJet,
    u: f64,
    v: f64,
    window: (f64, f64),
    opts: &ScanOptions,
) -> Vec<CausticPoint> {
    let n = opts.samples.max(2);
    let rs: Vec<f64> = (0..n)
        .map(|k| window.0 + (window.1 - window.0) * k as f64 / (n - 1) as f64)
        .collect();
    let dets: Vec<f64> = rs.iter().map(|&r| jet.det(r)).collect();
    let mut roots: Vec<(f64, bool)> = Vec::new();
    for k in 0..n - 1 {
        let (a, b) = (dets[k], dets[k + 1]);
        if a == 0.0 {
            roots.push((rs[k], false));
        } else if b != 0.0 && (a < 0.0) != (b < 0.0) {
            roots.push((bisect(jet, rs[k], rs[k + 1], opts.r_tol), false));
        }
    }
    if dets[n - 1] == 0.0 {
        roots.push((rs[n - 1], false));
    }
    // Local minima of |det| between samples of one sign hide either a
    // touching zero or a pair of close roots; push the determinant towards
    // the other sign to tell them apart.
    let len = window.0.abs().max(window.1.abs()).max(1.0);
    for k in 0..n {
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(n - 1);
        let b = dets[k];
        let same_sign = (lo..=hi).all(|j| dets[j] != 0.0 && (dets[j] < 0.0) == (b < 0.0));
        let is_min = (lo..=hi).all(|j| b.abs() <= dets[j].abs());
        if !(same_sign && is_min) {
            continue;
        }
        let sign = b.signum();
        let (r, val) = minimize(jet, rs[lo], rs[hi], sign, len, opts.r_tol);
        if val < 0.0 {
            roots.push((bisect(jet, rs[lo], r, opts.r_tol), false));
            roots.push((bisect(jet, r, rs[hi], opts.r_tol), false));
        } else if val < opts.touch_tol && !roots.iter().any(|&(x, _)| (x - r).abs() < 1e-6) {
            roots.push((r, true));
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    roots
        .into_iter()
        .map(|(r, tangential)| CausticPoint {
            u,
            v,
            r,
            point: jet.ray.at(r),
            sheet: classify(jet, r),
            tangential,
        })
        .collect()
}

/// Scans every ray of the grid for zeros of the Jacobian determinant on
/// `r_window`: sign changes are refined by bisection, sign-less minima by a
/// golden-section search. Output is in grid order, increasing `r` per ray.
pub fn caustic_scan<F: RayFamily + ?Sized>(
    fam: &F,
    grid: &[(f64, f64)],
    r_window: (f64, f64),
) -> Vec<CausticPoint> {
    caustic_scan_with(fam, grid, r_window, &ScanOptions::default())
}

pub fn caustic_scan_with<F: RayFamily + ?Sized>(
    fam: &F,
    grid: &[(f64, f64)],
    r_window: (f64, f64),
    opts: &ScanOptions,
) -> Vec<CausticPoint> {
    if !(r_window.0.is_finite() && r_window.1.is_finite() && r_window.1 > r_window.0) {
        return Vec::new();
    }
    par::map_ordered(grid, |&(u, v)| match ray_jet(fam, u, v) {
        Ok(jet) => scan_ray(&jet, u, v, r_window, opts),
        Err(_) => Vec::new(),
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Symmetric Hausdorff distance between two point clouds (brute force).
pub fn hausdorff(a: &[Point3], b: &[Point3]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// `max_{x in a} min_{y in b} |x - y|`; infinite if `b` is empty and `a` is not.
pub fn directed_hausdorff(a: &[Point3], b: &[Point3]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    par::map_ordered(a, |&x| {
        b.iter()
            .map(|&y| x.distance(y))
            .fold(f64::INFINITY, f64::min)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn unit_circle() -> ProfileCurve {
        ProfileCurve::circle(Complex64::new(0.0, 0.0), 1.0)
    }

    #[test]
    fn trace_examples() {
        let p = unit_circle();
        let ray = trace_reflect(&p, 0.0, 0.0).unwrap();
        assert!(ray.origin.distance(Point3::from_xyz(1.0, 0.0, 0.0)) < 1e-15);
        assert!(Point3::from(ray.dir).distance(Point3::from_xyz(-1.0, 0.0, 0.0)) < 1e-15);

        let ray = trace_reflect(&p, 0.0, 1.0).unwrap();
        assert!(ray.origin.distance(Point3::from_xyz(1.0, 0.0, 1.0)) < 1e-15);
        let expect = Point3::from_xyz(-FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2);
        assert!(Point3::from(ray.dir).distance(expect) < 1e-15);

        let parabola = ProfileCurve::parabola(1.0, 0.0, (-3.0, 3.0));
        for u in [-2.5, -1.0, 0.0, 0.4, 2.0] {
            let ray = trace_reflect(&parabola, u, 0.0).unwrap();
            assert!((ray.dir.h - Complex64::i()).norm() < 1e-14);
            assert!(ray.dir.v.abs() < 1e-15);
        }
    }

    #[test]
    fn trace_errors() {
        let plane = ProfileCurve::plane((-1.0, 1.0));
        assert_eq!(trace_reflect(&plane, 0.0, 0.0), Err(Error::SourceOnMirror));
        let cusp = ProfileCurve::polynomial(
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 1.0),
            ],
            (-1.0, 1.0),
        );
        assert!(matches!(
            trace_reflect(&cusp, 0.0, 0.0),
            Err(Error::SingularProfile { .. })
        ));
    }

    #[test]
    fn point_source_det_is_quadratic_in_r() {
        let fam = PointSourceFamily;
        let (u, v) = (0.4, 1.1);
        let d1 = jacobian_det(&fam, u, v, 1.0).unwrap();
        let d2 = jacobian_det(&fam, u, v, 2.0).unwrap();
        assert!(jacobian_det(&fam, u, v, 0.0).unwrap().abs() < 1e-15);
        assert!((d2 - 4.0 * d1).abs() < 1e-9 * d2.abs());
        assert!((d1.abs() - v.sin()).abs() < 1e-9);
    }

    #[test]
    fn parallel_beam_det_is_constant() {
        for r in [-5.0, 0.0, 3.0] {
            assert!((jacobian_det(&ParallelBeam, 0.2, -0.3, r).unwrap() - 1.0).abs() < 1e-9);
        }
        let grid = [(0.0, 0.0), (1.0, 2.0)];
        assert!(caustic_scan(&ParallelBeam, &grid, (-10.0, 10.0)).is_empty());
    }

    #[test]
    fn point_source_caustic_is_the_source() {
        let grid = [(0.3, 0.8), (2.0, 1.9)];
        // shifted window so that no sample lands on r = 0 exactly
        let pts = caustic_scan(&PointSourceFamily, &grid, (-1.03, 0.97));
        assert_eq!(pts.len(), 2);
        for p in pts {
            assert!(p.tangential);
            assert!(p.point.norm() < 1e-4);
        }
    }

    #[test]
    fn circle_caustic_rays() {
        let fam = MirrorFamily::new(unit_circle());
        let grid = [(0.3, 0.5), (2.0, -0.7)];
        let pts = caustic_scan(&fam, &grid, (-4.0, 4.0));
        assert_eq!(pts.len(), 4);
        for p in pts {
            let rho = (1.0 + p.v * p.v).sqrt();
            if p.r < 0.0 {
                assert!((p.r + rho).abs() < 1e-8);
                assert!((p.point.z.norm() - 2.0).abs() < 1e-8 && p.point.t.abs() < 1e-8);
                assert_eq!(p.sheet, Sheet::Ruling);
            } else {
                assert!((p.r - rho).abs() < 1e-8);
                assert!(p.point.z.norm() < 1e-8 && (p.point.t - 2.0 * p.v).abs() < 1e-8);
                assert_eq!(p.sheet, Sheet::Envelope);
            }
        }
    }

    /// Rays through `(u, v, 0)` with direction `(a u, b v, 1)`: focal lines at
    /// `r = -1/a` and `r = -1/b` above the origin.
    struct Astigmatic(f64, f64);

    impl RayFamily for Astigmatic {
        fn ray(&self, u: f64, v: f64) -> Result<Ray3> {
            Ok(Ray3 {
                origin: Point3::from_xyz(u, v, 0.0),
                dir: UnitVec3::normalize(Complex64::new(self.0 * u, self.1 * v), 1.0).unwrap(),
            })
        }
    }

    #[test]
    fn close_root_pairs_are_split() {
        let fam = Astigmatic(1.0, 1.05);
        // both roots fall between two samples of the default scan
        let pts = caustic_scan(&fam, &[(0.0, 0.0)], (-9.5, 9.5));
        let rs: Vec<f64> = pts.iter().map(|p| p.r).collect();
        assert_eq!(rs.len(), 2, "{rs:?}");
        assert!(
            (rs[0] + 1.0).abs() < 1e-8 && (rs[1] + 1.0 / 1.05).abs() < 1e-8,
            "{rs:?}"
        );
        assert!(pts.iter().all(|p| !p.tangential));
    }

    #[test]
    fn hausdorff_basics() {
        let a = [Point3::ORIGIN, Point3::from_xyz(1.0, 0.0, 0.0)];
        let b = [Point3::ORIGIN];
        assert_eq!(hausdorff(&a, &b), 1.0);
        assert_eq!(directed_hausdorff(&b, &a), 0.0);
        assert_eq!(hausdorff(&a, &a), 0.0);
    }
}

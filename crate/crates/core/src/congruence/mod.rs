//! Two-parameter families of oriented lines.
//!
//! A congruence is parameterised by a complex number `mu`; derivatives are the
//! Wirtinger derivatives `d = (d/dx - i d/dy) / 2` and `dbar = (d/dx + i d/dy) / 2`
//! with `mu = x + i y`. They come either from the congruence itself or from
//! central finite differences.

mod focal;
mod sachs;
mod wavefront;

pub use focal::{base_scalars, focal_set, BaseScalars, FocalLineReport, LineFocalPoint};
pub use sachs::{
    focal_distances, sachs_denominator, sachs_evolve, sachs_residual, FocalKind, FocalSolution,
};
pub use wavefront::{
    integrate_wavefront, wavefront_rhs, MuGrid, Wavefront, CLOSURE_TOL, TWIST_TOL,
};

use num_complex::Complex64;

use crate::line_space::{DirCoord, OrientedLine};
use crate::{Error, Result};

/// Relative finite-difference step; the absolute step is this times `max(1, |mu|)`.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// The optical scalars blow up where `|den| <= tol * scale`.
const BLOWUP_TOL: f64 = 1e-14;

/// Flatness threshold on `|kappa| / scale^2`.
pub const FLATNESS_TOL: f64 = 1e-10;

/// Wirtinger derivatives of `xi` and `eta` at a parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub d_xi: Complex64,
    pub dbar_xi: Complex64,
    pub d_eta: Complex64,
    pub dbar_eta: Complex64,
}

/// A smoothly parameterised line congruence `mu -> (xi, eta)`.
pub trait LineCongruence: Sync {
    fn line(&self, mu: Complex64) -> Result<OrientedLine>;

    /// Exact derivatives, when the congruence knows them.
    fn analytic_derivatives(&self, _mu: Complex64) -> Option<Derivatives> {
        None
    }

    fn fd_step(&self, mu: Complex64) -> f64 {
        DEFAULT_FD_STEP * mu.norm().max(1.0)
    }
}

type LineFn = dyn Fn(Complex64) -> (Complex64, Complex64) + Send + Sync;
type DerivFn = dyn Fn(Complex64) -> Derivatives + Send + Sync;

/// A congruence given by closures.
pub struct ParametricCongruence {
    eval: Box<LineFn>,
    derivs: Option<Box<DerivFn>>,
    fd_step: Option<f64>,
}

impl ParametricCongruence {
    pub fn new<F>(eval: F) -> Self
    where
        F: Fn(Complex64) -> (Complex64, Complex64) + Send + Sync + 'static,
    {
        ParametricCongruence {
            eval: Box::new(eval),
            derivs: None,
            fd_step: None,
        }
    }

    pub fn with_derivatives<D>(mut self, derivs: D) -> Self
    where
        D: Fn(Complex64) -> Derivatives + Send + Sync + 'static,
    {
        self.derivs = Some(Box::new(derivs));
        self
    }

    /// Fixes the absolute finite-difference step.
    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = Some(h);
        self
    }

    /// Drops analytic derivatives so finite differences are used.
    pub fn without_derivatives(mut self) -> Self {
        self.derivs = None;
        self
    }

    /// All lines through the origin: `xi = mu`, `eta = 0`.
    pub fn point_source() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        ParametricCongruence::new(move |mu| (mu, zero)).with_derivatives(move |_| Derivatives {
            d_xi: one,
            dbar_xi: zero,
            d_eta: zero,
            dbar_eta: zero,
        })
    }

    /// Parallel lines with fixed direction `xi`, charted by `eta = mu`.
    pub fn parallel_beam(xi: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        ParametricCongruence::new(move |mu| (xi, mu)).with_derivatives(move |_| Derivatives {
            d_xi: zero,
            dbar_xi: zero,
            d_eta: one,
            dbar_eta: zero,
        })
    }

    /// Normals of the unit-axis cylinder: `xi = e^{iu}`, `eta = -v e^{iu}`, `mu = u + iv`.
    pub fn cylinder_normals() -> Self {
        let i = Complex64::i();
        ParametricCongruence::new(move |mu: Complex64| {
            let e = (i * mu.re).exp();
            (e, -mu.im * e)
        })
        .with_derivatives(move |mu: Complex64| {
            let e = (i * mu.re).exp();
            // xi_u = i e, xi_v = 0; eta_u = -i v e, eta_v = -e
            let xi_u = i * e;
            let eta_u = -i * mu.im * e;
            let eta_v = -e;
            Derivatives {
                d_xi: 0.5 * xi_u,
                dbar_xi: 0.5 * xi_u,
                d_eta: 0.5 * (eta_u - i * eta_v),
                dbar_eta: 0.5 * (eta_u + i * eta_v),
            }
        })
    }
}

impl LineCongruence for ParametricCongruence {
    fn line(&self, mu: Complex64) -> Result<OrientedLine> {
        let (xi, eta) = (self.eval)(mu);
        let xi = DirCoord::new(xi).map_err(|_| Error::DegenerateChart { mu })?;
        Ok(OrientedLine::new(xi, eta))
    }

    fn analytic_derivatives(&self, mu: Complex64) -> Option<Derivatives> {
        self.derivs.as_ref().map(|d| d(mu))
    }

    fn fd_step(&self, mu: Complex64) -> f64 {
        self.fd_step
            .unwrap_or_else(|| DEFAULT_FD_STEP * mu.norm().max(1.0))
    }
}

/// Central-difference Wirtinger derivatives, ignoring any analytic ones.
pub fn finite_difference_derivatives<C: LineCongruence + ?Sized>(
    c: &C,
    mu: Complex64,
) -> Result<Derivatives> {
    let h = c.fd_step(mu);
    let dx = Complex64::new(h, 0.0);
    let dy = Complex64::new(0.0, h);
    let xp = c.line(mu + dx)?;
    let xm = c.line(mu - dx)?;
    let yp = c.line(mu + dy)?;
    let ym = c.line(mu - dy)?;
    let xi_x = (xp.xi.value() - xm.xi.value()) / (2.0 * h);
    let xi_y = (yp.xi.value() - ym.xi.value()) / (2.0 * h);
    let eta_x = (xp.eta - xm.eta) / (2.0 * h);
    let eta_y = (yp.eta - ym.eta) / (2.0 * h);
    let i = Complex64::i();
    Ok(Derivatives {
        d_xi: 0.5 * (xi_x - i * xi_y),
        dbar_xi: 0.5 * (xi_x + i * xi_y),
        d_eta: 0.5 * (eta_x - i * eta_y),
        dbar_eta: 0.5 * (eta_x + i * eta_y),
    })
}

/// Analytic derivatives if available, finite differences otherwise.
pub fn derivatives<C: LineCongruence + ?Sized>(c: &C, mu: Complex64) -> Result<Derivatives> {
    match c.analytic_derivatives(mu) {
        Some(d) => Ok(d),
        None => finite_difference_derivatives(c, mu),
    }
}

/// The pair `(d+ eta, d- eta)` at affine parameter `r`.
pub fn fiber_derivatives(line: &OrientedLine, d: &Derivatives, r: f64) -> (Complex64, Complex64) {
    let xi = line.xi.value();
    let shift = 2.0 * line.eta * xi.conj() / line.xi.weight();
    let plus = d.d_eta + r * d.d_xi - shift * d.d_xi;
    let minus = d.dbar_eta + r * d.dbar_xi - shift * d.dbar_xi;
    (plus, minus)
}

pub fn d_plus_eta<C: LineCongruence + ?Sized>(c: &C, mu: Complex64, r: f64) -> Result<Complex64> {
    let line = c.line(mu)?;
    let d = derivatives(c, mu)?;
    Ok(fiber_derivatives(&line, &d, r).0)
}

pub fn d_minus_eta<C: LineCongruence + ?Sized>(c: &C, mu: Complex64, r: f64) -> Result<Complex64> {
    let line = c.line(mu)?;
    let d = derivatives(c, mu)?;
    Ok(fiber_derivatives(&line, &d, r).1)
}

/// Divergence/twist `rho = theta + i lambda`, shear `sigma`, curvature `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalScalars {
    pub rho: Complex64,
    pub sigma: Complex64,
    pub kappa: f64,
}

impl OpticalScalars {
    pub fn new(rho: Complex64, sigma: Complex64) -> Self {
        OpticalScalars {
            rho,
            sigma,
            kappa: rho.norm_sqr() - sigma.norm_sqr(),
        }
    }

    pub fn from_parts(theta: f64, lambda: f64, sigma: Complex64) -> Self {
        OpticalScalars::new(Complex64::new(theta, lambda), sigma)
    }

    pub fn theta(&self) -> f64 {
        self.rho.re
    }

    pub fn twist(&self) -> f64 {
        self.rho.im
    }

    pub fn scale(&self) -> f64 {
        self.rho.norm().max(self.sigma.norm()).max(1.0)
    }

    pub fn is_flat(&self) -> bool {
        let s = self.scale();
        self.kappa.abs() < FLATNESS_TOL * s * s
    }

    pub fn is_finite(&self) -> bool {
        self.rho.re.is_finite()
            && self.rho.im.is_finite()
            && self.sigma.re.is_finite()
            && self.sigma.im.is_finite()
    }
}

/// Optical scalars from a line, its derivatives and an affine parameter.
pub fn scalars_from_derivatives(
    line: &OrientedLine,
    d: &Derivatives,
    r: f64,
) -> Result<OpticalScalars> {
    let (plus, minus) = fiber_derivatives(line, d, r);
    let den = minus.norm_sqr() - plus.norm_sqr();
    let scale = minus.norm_sqr() + plus.norm_sqr();
    if !(den.abs() > BLOWUP_TOL * scale) {
        return Err(Error::FocalBlowup {
            r,
            denominator: den.abs(),
        });
    }
    // d(conj xi) = conj(dbar xi), dbar(conj xi) = conj(d xi)
    let d_xibar = d.dbar_xi.conj();
    let dbar_xibar = d.d_xi.conj();
    let rho = (plus * dbar_xibar - minus * d_xibar) / den;
    let sigma = (plus.conj() * d_xibar - minus.conj() * dbar_xibar) / den;
    Ok(OpticalScalars::new(rho, sigma))
}

pub fn optical_scalars<C: LineCongruence + ?Sized>(
    c: &C,
    mu: Complex64,
    r: f64,
) -> Result<OpticalScalars> {
    let line = c.line(mu)?;
    let d = derivatives(c, mu)?;
    scalars_from_derivatives(&line, &d, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flatness {
    Flat,
    NonFlat,
}

/// Flatness verdict plus the direction-map rank used as a cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatnessReport {
    pub flatness: Flatness,
    pub kappa: f64,
    /// Real Jacobian determinant of `mu -> xi`, `|d xi|^2 - |dbar xi|^2`.
    pub direction_jacobian: f64,
    /// Rank of that 2x2 Jacobian (0, 1 or 2).
    pub direction_rank: u8,
    /// The affine parameter the scalars were evaluated at.
    pub r_base: f64,
}

impl FlatnessReport {
    /// Whether the curvature test and the rank test agree.
    pub fn consistent(&self) -> bool {
        (self.flatness == Flatness::Flat) == (self.direction_rank < 2)
    }
}

/// Flat iff `kappa` vanishes. Whether `kappa` vanishes does not depend on `r`,
/// so a focal base point is moved as in [`base_scalars`].
pub fn classify_flatness<C: LineCongruence + ?Sized>(
    c: &C,
    mu: Complex64,
) -> Result<FlatnessReport> {
    let base = base_scalars(c, mu)?;
    let d = derivatives(c, mu)?;
    let a = d.d_xi.norm_sqr();
    let b = d.dbar_xi.norm_sqr();
    let jac = a - b;
    let rank = if a + b == 0.0 || a + b < f64::MIN_POSITIVE {
        0
    } else if jac.abs() < FLATNESS_TOL * (a + b) {
        1
    } else {
        2
    };
    let flatness = if base.scalars.is_flat() {
        Flatness::Flat
    } else {
        Flatness::NonFlat
    };
    Ok(FlatnessReport {
        flatness,
        kappa: base.scalars.kappa,
        direction_jacobian: jac,
        direction_rank: rank,
        r_base: base.r_base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fiber_derivatives_point_source() {
        let pc = ParametricCongruence::point_source();
        for (mu, r) in [(c(0.3, -0.2), 2.0), (c(-1.5, 0.7), -0.4)] {
            assert!((d_plus_eta(&pc, mu, r).unwrap() - c(r, 0.0)).norm() < 1e-15);
            assert_eq!(d_minus_eta(&pc, mu, r).unwrap(), c(0.0, 0.0));
        }
        let fd = ParametricCongruence::point_source().without_derivatives();
        assert!((d_plus_eta(&fd, c(0.3, 0.1), 2.0).unwrap() - c(2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn fiber_derivatives_constant_congruence() {
        let k = ParametricCongruence::new(|_| (c(0.4, 1.0), c(-2.0, 3.0)));
        assert_eq!(d_plus_eta(&k, c(0.1, 0.2), 3.0).unwrap(), c(0.0, 0.0));
        assert_eq!(d_minus_eta(&k, c(0.1, 0.2), 3.0).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn fiber_derivatives_cylinder_normals() {
        let analytic = ParametricCongruence::cylinder_normals();
        let fd = ParametricCongruence::cylinder_normals().without_derivatives();
        for (mu, r) in [
            (c(0.0, 0.0), 1.0),
            (c(0.8, -1.3), 2.5),
            (c(-2.0, 0.4), -0.7),
        ] {
            let e = (Complex64::i() * mu.re).exp();
            let plus = 0.5 * Complex64::i() * e * (1.0 + r);
            let minus = 0.5 * Complex64::i() * e * (r - 1.0);
            for cong in [&analytic, &fd] {
                assert!((d_plus_eta(cong, mu, r).unwrap() - plus).norm() < 1e-9);
                assert!((d_minus_eta(cong, mu, r).unwrap() - minus).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_chart_is_reported() {
        let bad = ParametricCongruence::new(|mu| (1.0 / (mu - c(1.0, 0.0)), mu));
        assert!(matches!(
            d_plus_eta(&bad, c(1.0, 0.0), 0.0),
            Err(Error::DegenerateChart { .. })
        ));
    }

    #[test]
    fn scalars_of_point_source() {
        for cong in [
            ParametricCongruence::point_source(),
            ParametricCongruence::point_source().without_derivatives(),
        ] {
            for (mu, r) in [(c(0.2, 0.1), 1.0), (c(-0.7, 2.0), 3.0), (c(0.0, 0.0), -2.0)] {
                let s = optical_scalars(&cong, mu, r).unwrap();
                assert!((s.rho - c(-1.0 / r, 0.0)).norm() < 1e-9);
                assert!(s.sigma.norm() < 1e-9);
            }
        }
        assert!(matches!(
            optical_scalars(&ParametricCongruence::point_source(), c(0.3, 0.3), 0.0),
            Err(Error::FocalBlowup { .. })
        ));
    }

    #[test]
    fn scalars_of_cylinder_normals() {
        let cn = ParametricCongruence::cylinder_normals();
        let s = optical_scalars(&cn, c(0.0, 0.0), 1.0).unwrap();
        assert!((s.rho - c(-0.5, 0.0)).norm() < 1e-14);
        assert!((s.sigma - c(0.5, 0.0)).norm() < 1e-14);
        for (u, r) in [(0.7, 2.0), (-1.9, 0.5)] {
            let s = optical_scalars(&cn, c(u, 0.3), r).unwrap();
            let sigma = (Complex64::i() * (-2.0 * u)).exp() / (2.0 * r);
            assert!((s.rho - c(-0.5 / r, 0.0)).norm() < 1e-13);
            assert!((s.sigma - sigma).norm() < 1e-13);
            assert!((s.kappa - (s.rho.norm_sqr() - s.sigma.norm_sqr())).abs() < 1e-12);
        }
    }

    #[test]
    fn flatness_examples() {
        let cyl =
            classify_flatness(&ParametricCongruence::cylinder_normals(), c(0.4, 0.2)).unwrap();
        assert_eq!(cyl.flatness, Flatness::Flat);
        assert!(cyl.consistent());
        let ps = classify_flatness(&ParametricCongruence::point_source(), c(0.4, 0.2)).unwrap();
        assert_eq!(ps.flatness, Flatness::NonFlat);
        assert!(ps.consistent());
        let beam = classify_flatness(
            &ParametricCongruence::parallel_beam(c(0.5, 0.5)),
            c(1.0, -1.0),
        )
        .unwrap();
        assert_eq!(beam.flatness, Flatness::Flat);
        assert_eq!(beam.direction_rank, 0);
        assert!(beam.consistent());
    }

    #[test]
    fn analytic_and_fd_scalars_agree() {
        let exact = ParametricCongruence::new(|mu: Complex64| {
            (mu * mu * 0.3 + mu.conj() * 0.2, mu.exp() * 0.5)
        })
        .with_derivatives(|mu: Complex64| Derivatives {
            d_xi: 0.6 * mu,
            dbar_xi: c(0.2, 0.0),
            d_eta: 0.5 * mu.exp(),
            dbar_eta: c(0.0, 0.0),
        });
        let fd = ParametricCongruence::new(|mu: Complex64| {
            (mu * mu * 0.3 + mu.conj() * 0.2, mu.exp() * 0.5)
        });
        for mu in [c(0.5, 0.2), c(-0.3, 0.9), c(1.1, -0.4)] {
            let a = optical_scalars(&exact, mu, 0.7).unwrap();
            let b = optical_scalars(&fd, mu, 0.7).unwrap();
            let scale = a.rho.norm().max(a.sigma.norm());
            assert!((a.rho - b.rho).norm() < 1e-6 * scale);
            assert!((a.sigma - b.sigma).norm() < 1e-6 * scale);
        }
    }
}

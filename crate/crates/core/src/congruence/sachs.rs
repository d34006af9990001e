//! Closed-form Sachs evolution and the focal quadratic.

use num_complex::Complex64;

use super::OpticalScalars;
use crate::{Error, Result};

/// Blow-up test for the evolution: `|D(r)| <= tol * max(1, |2 theta r|, |kappa| r^2)`.
const EVOLVE_BLOWUP_TOL: f64 = 1e-12;

/// Double-root threshold on `|discriminant| / (1 + theta^2)^2`.
const DOUBLE_ROOT_TOL: f64 = 1e-10;

/// `1 - 2 theta r + kappa r^2`.
pub fn sachs_denominator(s0: &OpticalScalars, r: f64) -> f64 {
    1.0 - 2.0 * s0.theta() * r + s0.kappa * r * r
}

fn denominator_scale(s0: &OpticalScalars, r: f64) -> f64 {
    1f64.max((2.0 * s0.theta() * r).abs())
        .max((s0.kappa * r * r).abs())
}

/// The scalars at distance `r` along the ray from where they equal `s0`.
pub fn sachs_evolve(s0: &OpticalScalars, r: f64) -> Result<OpticalScalars> {
    let den = sachs_denominator(s0, r);
    if !(den.abs() > EVOLVE_BLOWUP_TOL * denominator_scale(s0, r)) {
        return Err(Error::FocalBlowup {
            r,
            denominator: den.abs(),
        });
    }
    let rho = (s0.rho - Complex64::new(s0.kappa * r, 0.0)) / den;
    let sigma = s0.sigma / den;
    Ok(OpticalScalars::new(rho, sigma))
}

/// Central-difference residuals of `rho' = rho^2 + |sigma|^2` and
/// `sigma' = (rho + conj rho) sigma` along the closed-form evolution.
pub fn sachs_residual(s0: &OpticalScalars, r: f64, h: f64) -> Result<(f64, f64)> {
    let at = sachs_evolve(s0, r)?;
    let ahead = sachs_evolve(s0, r + h)?;
    let behind = sachs_evolve(s0, r - h)?;
    let drho = (ahead.rho - behind.rho) / (2.0 * h);
    let dsigma = (ahead.sigma - behind.sigma) / (2.0 * h);
    let rho_rhs = at.rho * at.rho + at.sigma.norm_sqr();
    let sigma_rhs = (at.rho + at.rho.conj()) * at.sigma;
    Ok(((drho - rho_rhs).norm(), (dsigma - sigma_rhs).norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FocalKind {
    /// Flat with zero divergence: no focal point.
    FlatEmpty,
    /// Flat with non-zero divergence: one focal point at `1 / (2 theta)`.
    FlatOne,
    /// Curved, negative discriminant.
    NoReal,
    Double,
    TwoReal,
}

/// Classified roots of `1 - 2 theta r + kappa r^2 = 0`, in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalSolution {
    pub kind: FocalKind,
    pub roots: Vec<f64>,
}

impl FocalSolution {
    /// Re-expresses roots found relative to a base point `r_base` in the
    /// original affine parameter.
    pub fn shifted(mut self, r_base: f64) -> Self {
        for r in &mut self.roots {
            *r += r_base;
        }
        self
    }
}

/// Solves the focal quadratic with coefficients taken from `s0`.
pub fn focal_distances(s0: &OpticalScalars) -> FocalSolution {
    let theta = s0.theta();
    if s0.is_flat() {
        return if theta == 0.0 {
            FocalSolution {
                kind: FocalKind::FlatEmpty,
                roots: vec![],
            }
        } else {
            FocalSolution {
                kind: FocalKind::FlatOne,
                roots: vec![1.0 / (2.0 * theta)],
            }
        };
    }
    let kappa = s0.kappa;
    // discriminant of kappa r^2 - 2 theta r + 1, divided by 4
    let quarter = s0.sigma.norm_sqr() - s0.twist() * s0.twist();
    let scale = (1.0 + theta * theta) * (1.0 + theta * theta);
    if (4.0 * quarter).abs() < DOUBLE_ROOT_TOL * scale {
        return FocalSolution {
            kind: FocalKind::Double,
            roots: vec![theta / kappa],
        };
    }
    if quarter < 0.0 {
        return FocalSolution {
            kind: FocalKind::NoReal,
            roots: vec![],
        };
    }
    // q = theta + sgn(theta) sqrt(quarter); roots q / kappa and 1 / q.
    let q = theta
        + quarter
            .sqrt()
            .copysign(if theta == 0.0 { 1.0 } else { theta });
    let mut roots = vec![q / kappa, 1.0 / q];
    roots.sort_by(f64::total_cmp);
    FocalSolution {
        kind: FocalKind::TwoReal,
        roots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evolve_examples() {
        let zero = OpticalScalars::new(c(0.0, 0.0), c(0.0, 0.0));
        let s = sachs_evolve(&zero, 12.5).unwrap();
        assert_eq!((s.rho, s.sigma), (c(0.0, 0.0), c(0.0, 0.0)));

        let one = OpticalScalars::new(c(1.0, 0.0), c(0.0, 0.0));
        assert!((sachs_evolve(&one, 0.5).unwrap().rho - c(2.0, 0.0)).norm() < 1e-15);

        let twist = OpticalScalars::new(c(0.0, 1.0), c(0.0, 0.0));
        assert!((sachs_evolve(&twist, 1.0).unwrap().rho - c(-0.5, 0.5)).norm() < 1e-15);

        assert!(matches!(
            sachs_evolve(&one, 1.0),
            Err(Error::FocalBlowup { .. })
        ));
    }

    #[test]
    fn residual_examples() {
        let one = OpticalScalars::new(c(1.0, 0.0), c(0.0, 0.0));
        let (a, b) = sachs_residual(&one, 0.25, 1e-5).unwrap();
        assert!(a < 1e-6 && b < 1e-6);

        let zero = OpticalScalars::new(c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(sachs_residual(&zero, 3.0, 1e-5).unwrap(), (0.0, 0.0));

        // point source seen from r = 1: rho = -1, evolves as -1/(1 + s)
        let ps = OpticalScalars::new(c(-1.0, 0.0), c(0.0, 0.0));
        let (a, b) = sachs_residual(&ps, 0.0, 1e-5).unwrap();
        assert!(a < 1e-6 && b < 1e-6);
    }

    #[test]
    fn focal_distance_examples() {
        let double = focal_distances(&OpticalScalars::from_parts(1.0, 0.0, c(0.0, 0.0)));
        assert_eq!(double.kind, FocalKind::Double);
        assert!((double.roots[0] - 1.0).abs() < 1e-15);

        // |sigma| = |rho| makes the congruence flat
        let flat = focal_distances(&OpticalScalars::from_parts(0.5, 0.0, c(0.5, 0.0)));
        assert_eq!(
            flat,
            FocalSolution {
                kind: FocalKind::FlatOne,
                roots: vec![1.0]
            }
        );

        let two = focal_distances(&OpticalScalars::from_parts(2.0, 0.0, c(1.0, 0.0)));
        assert_eq!(two.kind, FocalKind::TwoReal);
        assert!((two.roots[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((two.roots[1] - 1.0).abs() < 1e-15);

        let none = focal_distances(&OpticalScalars::from_parts(0.0, 1.0, c(0.0, 0.0)));
        assert_eq!(none.kind, FocalKind::NoReal);
        assert!(none.roots.is_empty());

        let empty = focal_distances(&OpticalScalars::from_parts(0.0, 0.0, c(0.0, 0.0)));
        assert_eq!(empty.kind, FocalKind::FlatEmpty);
    }

    #[test]
    fn shifted_moves_roots() {
        let s = focal_distances(&OpticalScalars::from_parts(2.0, 0.0, c(1.0, 0.0))).shifted(1.0);
        assert!((s.roots[0] - 4.0 / 3.0).abs() < 1e-15);
    }

    fn scalars() -> impl Strategy<Value = OpticalScalars> {
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
            .prop_map(|(a, b, x, y)| OpticalScalars::new(c(a, b), c(x, y)))
    }

    proptest! {
        #[test]
        fn roots_satisfy_the_quadratic(s in scalars()) {
            let sol = focal_distances(&s);
            for &r in &sol.roots {
                let scale = 1f64.max(s.kappa.abs() * r * r);
                prop_assert!(sachs_denominator(&s, r).abs() < 1e-10 * scale);
            }
        }

        #[test]
        fn root_count_follows_discriminant(s in scalars()) {
            prop_assume!(!s.is_flat());
            let sol = focal_distances(&s);
            let disc = 4.0 * (s.sigma.norm_sqr() - s.twist() * s.twist());
            let th = 1.0 + s.theta() * s.theta();
            let expected = if disc.abs() < 1e-10 * th * th { 1 } else if disc > 0.0 { 2 } else { 0 };
            prop_assert_eq!(sol.roots.len(), expected);
        }

        #[test]
        fn kappa_is_consistent(s in scalars()) {
            prop_assert!((s.kappa - (s.rho.norm_sqr() - s.sigma.norm_sqr())).abs() < 1e-12);
        }
    }
}

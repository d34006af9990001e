use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

/// Relative steps for the finite-difference fallback (first, second derivative).
const FD_STEP_1: f64 = 1e-5;
const FD_STEP_2: f64 = 1e-4;

type ProfileFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// A planar curve `u -> z0(u)` swept along the x3-axis.
#[derive(Clone)]
pub enum ProfileShape {
    /// `center + radius e^{iu}`.
    Circle { center: Complex64, radius: f64 },
    /// `a cos u + i b sin u`.
    Ellipse { a: f64, b: f64 },
    /// `u + i (u^2 / 4f - f + vertex_offset)`; with zero offset the focus is at the origin.
    Parabola {
        focal_length: f64,
        vertex_offset: f64,
    },
    /// `sum_k coeffs[k] u^k`.
    Polynomial { coeffs: Vec<Complex64> },
    /// Any other curve; derivatives by central differences.
    Function(Arc<ProfileFn>),
}

impl fmt::Debug for ProfileShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileShape::Circle { center, radius } => f
                .debug_struct("Circle")
                .field("center", center)
                .field("radius", radius)
                .finish(),
            ProfileShape::Ellipse { a, b } => f
                .debug_struct("Ellipse")
                .field("a", a)
                .field("b", b)
                .finish(),
            ProfileShape::Parabola {
                focal_length,
                vertex_offset,
            } => f
                .debug_struct("Parabola")
                .field("focal_length", focal_length)
                .field("vertex_offset", vertex_offset)
                .finish(),
            ProfileShape::Polynomial { coeffs } => f
                .debug_struct("Polynomial")
                .field("coeffs", coeffs)
                .finish(),
            ProfileShape::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Value and first two derivatives of the profile at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub z: Complex64,
    pub dz: Complex64,
    pub ddz: Complex64,
}

#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub shape: ProfileShape,
    pub u_range: (f64, f64),
}

impl ProfileCurve {
    pub fn new(shape: ProfileShape, u_range: (f64, f64)) -> Self {
        ProfileCurve { shape, u_range }
    }

    pub fn circle(center: Complex64, radius: f64) -> Self {
        ProfileCurve::new(
            ProfileShape::Circle { center, radius },
            (0.0, std::f64::consts::TAU),
        )
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        ProfileCurve::new(ProfileShape::Ellipse { a, b }, (0.0, std::f64::consts::TAU))
    }

    pub fn parabola(focal_length: f64, vertex_offset: f64, u_range: (f64, f64)) -> Self {
        ProfileCurve::new(
            ProfileShape::Parabola {
                focal_length,
                vertex_offset,
            },
            u_range,
        )
    }

    pub fn polynomial(coeffs: Vec<Complex64>, u_range: (f64, f64)) -> Self {
        ProfileCurve::new(ProfileShape::Polynomial { coeffs }, u_range)
    }

    /// The straight line `z0 = u`.
    pub fn plane(u_range: (f64, f64)) -> Self {
        ProfileCurve::polynomial(
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            u_range,
        )
    }

    pub fn function<F>(f: F, u_range: (f64, f64)) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        ProfileCurve::new(ProfileShape::Function(Arc::new(f)), u_range)
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        !matches!(self.shape, ProfileShape::Function(_))
    }

    pub fn z0(&self, u: f64) -> Complex64 {
        self.jet(u).z
    }

    pub fn dz0(&self, u: f64) -> Complex64 {
        self.jet(u).dz
    }

    pub fn ddz0(&self, u: f64) -> Complex64 {
        self.jet(u).ddz
    }

    pub fn jet(&self, u: f64) -> ProfileJet {
        let i = Complex64::i();
        match &self.shape {
            ProfileShape::Circle { center, radius } => {
                let e = (i * u).exp() * *radius;
                ProfileJet {
                    z: center + e,
                    dz: i * e,
                    ddz: -e,
                }
            }
            ProfileShape::Ellipse { a, b } => {
                let (s, c) = u.sin_cos();
                ProfileJet {
                    z: Complex64::new(a * c, b * s),
                    dz: Complex64::new(-a * s, b * c),
                    ddz: Complex64::new(-a * c, -b * s),
                }
            }
            ProfileShape::Parabola {
                focal_length: f,
                vertex_offset,
            } => ProfileJet {
                z: Complex64::new(u, u * u / (4.0 * f) - f + vertex_offset),
                dz: Complex64::new(1.0, u / (2.0 * f)),
                ddz: Complex64::new(0.0, 1.0 / (2.0 * f)),
            },
            ProfileShape::Polynomial { coeffs } => {
                // Horner for the value and both derivatives at once.
                let zero = Complex64::new(0.0, 0.0);
                let (mut p, mut dp, mut ddp) = (zero, zero, zero);
                for &c in coeffs.iter().rev() {
                    ddp = ddp * u + 2.0 * dp;
                    dp = dp * u + p;
                    p = p * u + c;
                }
                ProfileJet {
                    z: p,
                    dz: dp,
                    ddz: ddp,
                }
            }
            ProfileShape::Function(f) => {
                let s = u.abs().max(1.0);
                let h1 = FD_STEP_1 * s;
                let h2 = FD_STEP_2 * s;
                let z = f(u);
                ProfileJet {
                    z,
                    dz: (f(u + h1) - f(u - h1)) / (2.0 * h1),
                    ddz: (f(u + h2) - 2.0 * z + f(u - h2)) / (h2 * h2),
                }
            }
        }
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.u_range.0 && u <= self.u_range.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_matches_fd(p: &ProfileCurve, us: &[f64]) {
        let fd = {
            let q = p.clone();
            ProfileCurve::function(move |u| q.z0(u), p.u_range)
        };
        for &u in us {
            let a = p.jet(u);
            let b = fd.jet(u);
            assert!(
                (a.dz - b.dz).norm() <= 1e-6 * a.dz.norm().max(1.0),
                "dz at {u}"
            );
            assert!(
                (a.ddz - b.ddz).norm() <= 1e-6 * a.ddz.norm().max(1.0),
                "ddz at {u}"
            );
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let us = [-1.3, -0.2, 0.0, 0.7, 2.9];
        assert_matches_fd(&ProfileCurve::circle(c(0.5, -0.2), 1.7), &us);
        assert_matches_fd(&ProfileCurve::ellipse(2.0, 0.7), &us);
        assert_matches_fd(&ProfileCurve::parabola(0.8, 0.3, (-3.0, 3.0)), &us);
        assert_matches_fd(
            &ProfileCurve::polynomial(
                vec![c(2.0, 1.0), c(1.0, 0.0), c(0.1, 0.3), c(-0.05, 0.02)],
                (-2.0, 2.0),
            ),
            &us,
        );
    }

    #[test]
    fn parabola_focus_is_the_origin() {
        let p = ProfileCurve::parabola(1.5, 0.0, (-3.0, 3.0));
        // distance to the focus equals distance to the directrix x2 = -2f
        for u in [-2.0, -0.5, 0.0, 1.0, 2.5] {
            let z = p.z0(u);
            assert!((z.norm() - (z.im + 3.0)).abs() < 1e-13);
        }
    }
}

//! Orthogonal surfaces of twist-free congruences.
//!
//! A real function `r(mu)` picks out a surface orthogonal to the congruence
//! when `dbar r = (2 eta dbar(conj xi) + 2 conj(eta) dbar xi) / (1 + |xi|^2)^2`.
//! Since `r` is real, `dr = 2 Re(dbar r * conj(dmu))`, which is integrated
//! with the trapezoidal rule along grid edges.

use num_complex::Complex64;

use super::{base_scalars, derivatives, LineCongruence};
use crate::{par, Error, Result};

/// Twist, relative to the size of the optical scalars, above which no
/// orthogonal wavefront is attempted.
pub const TWIST_TOL: f64 = 1e-8;

/// Loop-closure residual above which the integration is rejected.
pub const CLOSURE_TOL: f64 = 1e-6;

/// A tensor grid `mu = re[i] + i im[j]`, visited row-major (`re` outer).
#[derive(Debug, Clone, PartialEq)]
pub struct MuGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MuGrid {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.is_empty() || im.is_empty() {
            return Err(Error::InvalidGrid("grid axes must be non-empty".into()));
        }
        let increasing = |a: &[f64]| a.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&re) || !increasing(&im) {
            return Err(Error::InvalidGrid(
                "grid axes must be strictly increasing".into(),
            ));
        }
        Ok(MuGrid { re, im })
    }

    /// `n` evenly spaced samples on each closed interval.
    pub fn linspace(re: (f64, f64), n_re: usize, im: (f64, f64), n_im: usize) -> Result<Self> {
        MuGrid::new(linspace(re.0, re.1, n_re), linspace(im.0, im.1, n_im))
    }

    pub fn len(&self) -> usize {
        self.re.len() * self.im.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.im.len() + j
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[i], self.im[j])
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for &x in &self.re {
            for &y in &self.im {
                out.push(Complex64::new(x, y));
            }
        }
        out
    }

    fn locate(&self, mu: Complex64) -> Option<(usize, usize)> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
        let i = self.re.iter().position(|&x| close(mu.re, x))?;
        let j = self.im.iter().position(|&y| close(mu.im, y))?;
        Some((i, j))
    }
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    b
                } else {
                    a + (b - a) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// The right-hand side `dbar r` of the wavefront equation at `mu`.
pub fn wavefront_rhs<C: LineCongruence + ?Sized>(c: &C, mu: Complex64) -> Result<Complex64> {
    let line = c.line(mu)?;
    let d = derivatives(c, mu)?;
    let w = line.xi.weight();
    // dbar(conj xi) = conj(d xi)
    Ok((2.0 * line.eta * d.d_xi.conj() + 2.0 * line.eta.conj() * d.dbar_xi) / (w * w))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wavefront {
    /// `(mu, r(mu))` in grid order.
    pub values: Vec<(Complex64, f64)>,
    pub max_loop_residual: f64,
    pub max_twist: f64,
}

impl Wavefront {
    pub fn r_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|&(_, r)| r)
    }
}

/// Integrates the wavefront through `(mu0, r0)` over `grid`. `mu0` must be a
/// grid node. Rows (varying `re`) are integrated first from `mu0`, then every
/// column (varying `im`) from that row.
pub fn integrate_wavefront<C: LineCongruence + ?Sized>(
    c: &C,
    mu0: Complex64,
    r0: f64,
    grid: &MuGrid,
) -> Result<Wavefront> {
    let (i0, j0) = grid
        .locate(mu0)
        .ok_or_else(|| Error::InvalidGrid(format!("start point {mu0} is not a grid node")))?;
    let nodes = grid.nodes();

    let per_node = par::map_ordered(&nodes, |&mu| -> Result<(Complex64, f64, f64)> {
        let s = base_scalars(c, mu)?.scalars;
        Ok((wavefront_rhs(c, mu)?, s.twist().abs(), s.scale()))
    });
    let mut rhs = Vec::with_capacity(nodes.len());
    let mut max_twist = 0f64;
    for (mu, res) in nodes.iter().zip(per_node) {
        let (g, twist, scale) = res?;
        if !(twist <= TWIST_TOL * scale) {
            return Err(Error::TwistedCongruence { mu: *mu, twist });
        }
        max_twist = max_twist.max(twist);
        rhs.push(g);
    }

    let (nu, nv) = (grid.re.len(), grid.im.len());
    let g = |i: usize, j: usize| rhs[grid.index(i, j)];
    // dr along re: 2 Re(G) dx; along im: 2 Im(G) dy.
    let step_re =
        |i: usize, j: usize| (g(i, j).re + g(i + 1, j).re) * (grid.re[i + 1] - grid.re[i]);
    let step_im =
        |i: usize, j: usize| (g(i, j).im + g(i, j + 1).im) * (grid.im[j + 1] - grid.im[j]);

    let mut r = vec![0.0; nodes.len()];
    r[grid.index(i0, j0)] = r0;
    for i in (i0 + 1)..nu {
        r[grid.index(i, j0)] = r[grid.index(i - 1, j0)] + step_re(i - 1, j0);
    }
    for i in (0..i0).rev() {
        r[grid.index(i, j0)] = r[grid.index(i + 1, j0)] - step_re(i, j0);
    }
    for i in 0..nu {
        for j in (j0 + 1)..nv {
            r[grid.index(i, j)] = r[grid.index(i, j - 1)] + step_im(i, j - 1);
        }
        for j in (0..j0).rev() {
            r[grid.index(i, j)] = r[grid.index(i, j + 1)] - step_im(i, j);
        }
    }

    let mut max_loop_residual = 0f64;
    for i in 0..nu.saturating_sub(1) {
        for j in 0..nv.saturating_sub(1) {
            let loop_sum = step_re(i, j) + step_im(i + 1, j) - step_re(i, j + 1) - step_im(i, j);
            max_loop_residual = max_loop_residual.max(loop_sum.abs());
        }
    }
    if !(max_loop_residual <= CLOSURE_TOL) {
        return Err(Error::NonIntegrable {
            residual: max_loop_residual,
            tolerance: CLOSURE_TOL,
        });
    }

    Ok(Wavefront {
        values: nodes.into_iter().zip(r).collect(),
        max_loop_residual,
        max_twist,
    })
}

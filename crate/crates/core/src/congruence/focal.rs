use num_complex::Complex64;

use super::{derivatives, fiber_derivatives, focal_distances, scalars_from_derivatives};
use super::{FocalSolution, LineCongruence, OpticalScalars};
use crate::line_space::{incidence, Point3};
use crate::{par, Result};

/// Relative size `|den| / (|d+ eta|^2 + |d- eta|^2)` below which a base
/// point is treated as (nearly) focal and moved.
const REBASE_CONDITION: f64 = 1e-3;

/// Base points tried in order; `0` is the foot of the line.
const BASE_CANDIDATES: [f64; 9] = [0.0, 1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 4.0, -4.0];

/// Optical scalars at a non-focal base point `r_base` of a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseScalars {
    pub scalars: OpticalScalars,
    pub r_base: f64,
}

impl BaseScalars {
    /// Focal roots in the line's own affine parameter.
    pub fn focal_solution(&self) -> FocalSolution {
        focal_distances(&self.scalars).shifted(self.r_base)
    }
}

/// Scalars at `r = 0`, or at the first well-conditioned alternative base
/// point when the foot of the line is (close to) focal.
pub fn base_scalars<C: LineCongruence + ?Sized>(c: &C, mu: Complex64) -> Result<BaseScalars> {
    let line = c.line(mu)?;
    let d = derivatives(c, mu)?;
    let mut best: Option<(f64, f64)> = None;
    for &r in &BASE_CANDIDATES {
        let (plus, minus) = fiber_derivatives(&line, &d, r);
        let scale = plus.norm_sqr() + minus.norm_sqr();
        let cond = if scale > 0.0 {
            (minus.norm_sqr() - plus.norm_sqr()).abs() / scale
        } else {
            0.0
        };
        if cond >= REBASE_CONDITION {
            return Ok(BaseScalars {
                scalars: scalars_from_derivatives(&line, &d, r)?,
                r_base: r,
            });
        }
        if best.is_none_or(|(_, b)| cond > b) {
            best = Some((r, cond));
        }
    }
    let (r, _) = best.unwrap_or((0.0, 0.0));
    Ok(BaseScalars {
        scalars: scalars_from_derivatives(&line, &d, r)?,
        r_base: r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFocalPoint {
    /// Index of the root in increasing order.
    pub root: usize,
    pub r: f64,
    pub point: Point3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocalLineReport {
    pub mu: Complex64,
    pub r_base: f64,
    pub solution: FocalSolution,
    pub points: Vec<LineFocalPoint>,
}

fn focal_line<C: LineCongruence + ?Sized>(c: &C, mu: Complex64) -> Result<FocalLineReport> {
    let line = c.line(mu)?;
    let base = base_scalars(c, mu)?;
    let solution = base.focal_solution();
    let points = solution
        .roots
        .iter()
        .enumerate()
        .map(|(root, &r)| LineFocalPoint {
            root,
            r,
            point: incidence(&line, r),
        })
        .collect();
    Ok(FocalLineReport {
        mu,
        r_base: base.r_base,
        solution,
        points,
    })
}

/// Focal points of every line on the grid, in grid order. Failures are kept
/// per point.
pub fn focal_set<C: LineCongruence + ?Sized>(
    c: &C,
    grid: &[Complex64],
) -> Vec<(Complex64, Result<FocalLineReport>)> {
    par::map_ordered(grid, |&mu| (mu, focal_line(c, mu)))
}

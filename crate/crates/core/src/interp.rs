//! Point evaluation of nodal data on uniform grids.

use crate::grid::Grid1D;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpaceInterp {
    Linear,
    #[default]
    Cubic,
}

/// Piecewise-linear value at `x`, clamped to the grid interval.
#[inline]
pub fn linear_at<S: Real>(values: &[S], grid: &Grid1D<S>, x: S) -> S {
    let n = values.len();
    let s = ((x - grid.x_left) / grid.dx)
        .max(S::zero())
        .min(S::of_usize(n - 1));
    let i = s.floor().to_usize().unwrap_or(0).min(n - 2);
    let th = s - S::of_usize(i);
    values[i] + th * (values[i + 1] - values[i])
}

/// Four-point Lagrange cubic value at `x`, clamped to the grid interval.
///
/// The stencil is centred on the containing cell and shifted inward at the
/// ends, so cubics are reproduced everywhere.
#[inline]
pub fn cubic_at<S: Real>(values: &[S], grid: &Grid1D<S>, x: S) -> S {
    let n = values.len();
    if n < 4 {
        return linear_at(values, grid, x);
    }
    let s = ((x - grid.x_left) / grid.dx)
        .max(S::zero())
        .min(S::of_usize(n - 1));
    let cell = s.floor().to_usize().unwrap_or(0).min(n - 2);
    let j = cell.saturating_sub(1).min(n - 4);
    let u = s - S::of_usize(j);
    let (one, two, three, six) = (S::one(), S::lit(2.0), S::lit(3.0), S::lit(6.0));
    let (um1, um2, um3) = (u - one, u - two, u - three);
    let w0 = -um1 * um2 * um3 / six;
    let w1 = u * um2 * um3 / two;
    let w2 = -u * um1 * um3 / two;
    let w3 = u * um1 * um2 / six;
    w0 * values[j] + w1 * values[j + 1] + w2 * values[j + 2] + w3 * values[j + 3]
}

#[inline]
pub fn eval_at<S: Real>(kind: SpaceInterp, values: &[S], grid: &Grid1D<S>, x: S) -> S {
    match kind {
        SpaceInterp::Linear => linear_at(values, grid, x),
        SpaceInterp::Cubic => cubic_at(values, grid, x),
    }
}

/// Value at `x`, or `outside` when `x` lies off the grid interval.
#[inline]
pub fn eval_or<S: Real>(kind: SpaceInterp, values: &[S], grid: &Grid1D<S>, x: S, outside: S) -> S {
    if x < grid.x_left || x > grid.x_right {
        outside
    } else {
        eval_at(kind, values, grid, x)
    }
}

/// Linear interpolation of a uniformly sampled time series.
#[inline]
pub fn series_at<S: Real>(samples: &[S], t0: S, dt: S, t: S) -> S {
    let m = samples.len() - 1;
    let s = ((t - t0) / dt).max(S::zero()).min(S::of_usize(m));
    let k = s.floor().to_usize().unwrap_or(0).min(m.saturating_sub(1));
    if m == 0 {
        return samples[0];
    }
    let th = s - S::of_usize(k);
    samples[k] + th * (samples[k + 1] - samples[k])
}

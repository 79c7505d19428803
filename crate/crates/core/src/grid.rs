//! Uniform grids, nodal fields, difference operators and discrete norms.

use crate::error::{Error, Result};
use crate::scalar::{sup_abs, Real};
use serde::Serialize;

/// Uniform spatial mesh `x_i = x_left + i*dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<S> {
    pub x_left: S,
    pub x_right: S,
    pub n: usize,
    pub dx: S,
}

impl<S: Real> Grid1D<S> {
    pub fn new(x_left: S, x_right: S, n: usize) -> Result<Self> {
        if !(x_left < x_right) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::config(format!(
                "grid interval must satisfy x_left < x_right (got {x_left}, {x_right})"
            )));
        }
        if n < 3 {
            return Err(Error::config(format!("grid needs n >= 3 nodes (got {n})")));
        }
        let dx = (x_right - x_left) / S::of_usize(n - 1);
        Ok(Self {
            x_left,
            x_right,
            n,
            dx,
        })
    }

    #[inline]
    pub fn x(&self, i: usize) -> S {
        self.x_left + S::of_usize(i) * self.dx
    }

    pub fn nodes(&self) -> Vec<S> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn length(&self) -> S {
        self.x_right - self.x_left
    }

    /// Same node set up to a relative tolerance on the endpoints.
    pub fn matches(&self, other: &Self) -> bool {
        let tol = S::lit(1e-9) * self.dx;
        self.n == other.n
            && (self.x_left - other.x_left).abs() <= tol
            && (self.x_right - other.x_right).abs() <= tol
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "[{}, {}]/{} vs [{}, {}]/{}",
                self.x_left, self.x_right, self.n, other.x_left, other.x_right, other.n
            )))
        }
    }

    /// Trapezoid quadrature weights.
    pub fn trapezoid_weights(&self) -> Vec<S> {
        let mut w = vec![self.dx; self.n];
        w[0] = self.dx * S::lit(0.5);
        w[self.n - 1] = self.dx * S::lit(0.5);
        w
    }
}

/// Uniform time mesh `t_k = t0 + k*dt`, `k = 0..=m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<S> {
    pub t0: S,
    pub t1: S,
    pub m: usize,
    pub dt: S,
}

impl<S: Real> TimeGrid<S> {
    pub fn new(t0: S, t1: S, m: usize) -> Result<Self> {
        if !(t0 < t1) {
            return Err(Error::config(format!(
                "time interval must satisfy t0 < t1 (got {t0}, {t1})"
            )));
        }
        if m < 1 {
            return Err(Error::config("time grid needs m >= 1 steps"));
        }
        Ok(Self {
            t0,
            t1,
            m,
            dt: (t1 - t0) / S::of_usize(m),
        })
    }

    #[inline]
    pub fn t(&self, k: usize) -> S {
        if k == self.m {
            self.t1
        } else {
            self.t0 + S::of_usize(k) * self.dt
        }
    }

    pub fn times(&self) -> Vec<S> {
        (0..=self.m).map(|k| self.t(k)).collect()
    }

    pub fn horizon(&self) -> S {
        self.t1 - self.t0
    }

    /// Same steps, translated by `offset`.
    pub fn shifted(&self, offset: S) -> Self {
        Self {
            t0: self.t0 + offset,
            t1: self.t1 + offset,
            ..*self
        }
    }

    /// Index of the node nearest to `t`, clamped to the grid.
    pub fn nearest(&self, t: S) -> usize {
        let s = ((t - self.t0) / self.dt).round();
        s.max(S::zero()).min(S::of_usize(self.m)).to_usize().unwrap_or(0)
    }
}

/// Nodal samples of a function of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<S> {
    pub grid: Grid1D<S>,
    pub values: Vec<S>,
}

impl<S: Real> Field<S> {
    pub fn new(grid: Grid1D<S>, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.n
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Unchecked constructor for solver internals that maintain the invariants.
    pub(crate) fn from_parts(grid: Grid1D<S>, values: Vec<S>) -> Self {
        debug_assert_eq!(values.len(), grid.n);
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid1D<S>, f: impl Fn(S) -> S) -> Self {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid1D<S>, c: S) -> Self {
        Self {
            grid,
            values: vec![c; grid.n],
        }
    }

    pub fn zeros(grid: Grid1D<S>) -> Self {
        Self::constant(grid, S::zero())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> S {
        self.values[0]
    }

    pub fn last(&self) -> S {
        self.values[self.values.len() - 1]
    }

    pub fn sup(&self) -> S {
        sup_abs(&self.values)
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: S) -> Self {
        self.map(|v| c * v)
    }

    /// `x -> f(L - x)` on the same grid (node reversal).
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn axpy(&self, a: S, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| x + a * y)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-S::one(), other)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Time-indexed family of fields on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField<S> {
    pub tgrid: TimeGrid<S>,
    pub grid: Grid1D<S>,
    pub frames: Vec<Vec<S>>,
}

impl<S: Real> SpaceTimeField<S> {
    pub fn new(tgrid: TimeGrid<S>, grid: Grid1D<S>, frames: Vec<Vec<S>>) -> Result<Self> {
        if frames.len() != tgrid.m + 1 {
            return Err(Error::GridMismatch(format!(
                "{} frames for {} time steps",
                frames.len(),
                tgrid.m
            )));
        }
        if frames.iter().any(|f| f.len() != grid.n) {
            return Err(Error::GridMismatch("frame length differs from grid".into()));
        }
        Ok(Self {
            tgrid,
            grid,
            frames,
        })
    }

    pub fn from_fields(tgrid: TimeGrid<S>, fields: Vec<Field<S>>) -> Result<Self> {
        let grid = fields
            .first()
            .map(|f| f.grid)
            .ok_or_else(|| Error::GridMismatch("no frames".into()))?;
        for f in &fields {
            grid.check_same(&f.grid)?;
        }
        Self::new(tgrid, grid, fields.into_iter().map(|f| f.values).collect())
    }

    pub fn zeros(tgrid: TimeGrid<S>, grid: Grid1D<S>) -> Self {
        Self {
            tgrid,
            grid,
            frames: vec![vec![S::zero(); grid.n]; tgrid.m + 1],
        }
    }

    pub fn from_fn(tgrid: TimeGrid<S>, grid: Grid1D<S>, f: impl Fn(S, S) -> S) -> Self {
        let frames = (0..=tgrid.m)
            .map(|k| {
                let t = tgrid.t(k);
                (0..grid.n).map(|i| f(t, grid.x(i))).collect()
            })
            .collect();
        Self {
            tgrid,
            grid,
            frames,
        }
    }

    pub fn frame(&self, k: usize) -> Field<S> {
        Field::from_parts(self.grid, self.frames[k].clone())
    }

    pub fn last_frame(&self) -> Field<S> {
        self.frame(self.tgrid.m)
    }

    pub fn sup(&self) -> S {
        self.frames
            .iter()
            .fold(S::zero(), |m, f| m.max(sup_abs(f)))
    }

    /// Time series of the value at spatial node `i`.
    pub fn node_series(&self, i: usize) -> Vec<S> {
        self.frames.iter().map(|f| f[i]).collect()
    }

    /// Largest nodal difference between two trajectories on the same meshes.
    pub fn sup_distance(&self, other: &Self) -> Result<S> {
        self.grid.check_same(&other.grid)?;
        if self.frames.len() != other.frames.len() {
            return Err(Error::GridMismatch("different frame counts".into()));
        }
        Ok(self
            .frames
            .iter()
            .zip(&other.frames)
            .fold(S::zero(), |m, (a, b)| m.max(crate::scalar::sup_diff(a, b))))
    }
}

// ---------------------------------------------------------------------------
// Difference operators

/// First difference: centered inside, one-sided second order at both ends.
pub fn diff1_slice<S: Real>(f: &[S], dx: S, out: &mut [S]) {
    let n = f.len();
    debug_assert!(n >= 3 && out.len() == n);
    let h2 = S::lit(2.0) * dx;
    out[0] = (S::lit(-3.0) * f[0] + S::lit(4.0) * f[1] - f[2]) / h2;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / h2;
    }
    out[n - 1] = (S::lit(3.0) * f[n - 1] - S::lit(4.0) * f[n - 2] + f[n - 3]) / h2;
}

/// Second difference: 3-point stencil inside, 4-point one-sided at the ends.
pub fn diff2_slice<S: Real>(f: &[S], dx: S, out: &mut [S]) {
    let n = f.len();
    debug_assert!(n >= 3 && out.len() == n);
    let h2 = dx * dx;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - S::lit(2.0) * f[i] + f[i - 1]) / h2;
    }
    if n >= 4 {
        let (two, five, four) = (S::lit(2.0), S::lit(5.0), S::lit(4.0));
        out[0] = (two * f[0] - five * f[1] + four * f[2] - f[3]) / h2;
        out[n - 1] = (two * f[n - 1] - five * f[n - 2] + four * f[n - 3] - f[n - 4]) / h2;
    } else {
        out[0] = out[1];
        out[n - 1] = out[n - 2];
    }
}

pub fn diff1<S: Real>(f: &Field<S>) -> Field<S> {
    let mut out = vec![S::zero(); f.len()];
    diff1_slice(&f.values, f.grid.dx, &mut out);
    Field::from_parts(f.grid, out)
}

pub fn diff2<S: Real>(f: &Field<S>) -> Field<S> {
    let mut out = vec![S::zero(); f.len()];
    diff2_slice(&f.values, f.grid.dx, &mut out);
    Field::from_parts(f.grid, out)
}

// ---------------------------------------------------------------------------
// Norms

/// Discrete Hölder and Sobolev norms of a nodal field.
///
/// `c1 = c0 + sup|D1 f|`, `c2 = c1 + sup|D2 f|`; the `l2` family uses
/// trapezoid weights so constants and sine modes integrate exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
}

pub fn l2_slice<S: Real>(f: &[S], grid: &Grid1D<S>) -> S {
    let n = f.len();
    let mut acc = S::zero();
    for (i, &v) in f.iter().enumerate() {
        let w = if i == 0 || i == n - 1 {
            S::lit(0.5)
        } else {
            S::one()
        };
        acc += w * v * v;
    }
    (acc * grid.dx).sqrt()
}

pub fn norms<S: Real>(f: &Field<S>) -> NormReport {
    let d1 = diff1(f);
    let d2 = diff2(f);
    let c0 = f.sup();
    let c1 = c0 + d1.sup();
    let c2 = c1 + d2.sup();
    let l2 = l2_slice(&f.values, &f.grid);
    let l2d1 = l2_slice(&d1.values, &f.grid);
    let l2d2 = l2_slice(&d2.values, &f.grid);
    let h1 = (l2 * l2 + l2d1 * l2d1).sqrt();
    let h2 = (h1 * h1 + l2d2 * l2d2).sqrt();
    NormReport {
        c0: c0.as_f64(),
        c1: c1.as_f64(),
        c2: c2.as_f64(),
        l2: l2.as_f64(),
        h1: h1.as_f64(),
        h2: h2.as_f64(),
    }
}

/// Spatial norm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceNorm {
    C0,
    C1,
    C2,
    L2,
    H1,
    H2,
}

impl SpaceNorm {
    pub fn pick(self, r: &NormReport) -> f64 {
        match self {
            SpaceNorm::C0 => r.c0,
            SpaceNorm::C1 => r.c1,
            SpaceNorm::C2 => r.c2,
            SpaceNorm::L2 => r.l2,
            SpaceNorm::H1 => r.h1,
            SpaceNorm::H2 => r.h2,
        }
    }
}

/// Norm of a trajectory: sup over frames, or trapezoid `L^2` in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryNorm {
    Sup(SpaceNorm),
    L2(SpaceNorm),
}

pub fn trajectory_norms<S: Real>(traj: &SpaceTimeField<S>, kind: TrajectoryNorm) -> f64 {
    let per_frame = |space: SpaceNorm| -> Vec<f64> {
        traj.frames
            .iter()
            .map(|f| space.pick(&norms(&Field::from_parts(traj.grid, f.clone()))))
            .collect()
    };
    match kind {
        TrajectoryNorm::Sup(space) => per_frame(space).into_iter().fold(0.0, f64::max),
        TrajectoryNorm::L2(space) => {
            let vals = per_frame(space);
            let dt = traj.tgrid.dt.as_f64();
            let last = vals.len() - 1;
            let acc: f64 = vals
                .iter()
                .enumerate()
                .map(|(k, v)| if k == 0 || k == last { 0.5 * v * v } else { v * v })
                .sum();
            (acc * dt).sqrt()
        }
    }
}

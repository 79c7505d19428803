//! Helmholtz filter `z - alpha^2 z_xx = y`, reflection extensions to the
//! padded interval `[-eta, L + eta]`, and the smooth cutoff.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::interp::cubic_at;
use crate::scalar::Real;
use crate::tridiag::{FactoredTridiagonal, Tridiagonal};

/// Filter length `alpha >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam<S> {
    pub alpha: S,
}

impl<S: Real> AlphaParam<S> {
    pub fn new(alpha: S) -> Result<Self> {
        if !(alpha >= S::zero()) || !alpha.is_finite() {
            return Err(Error::config(format!("alpha must be >= 0 (got {alpha})")));
        }
        Ok(Self { alpha })
    }
}

/// Factored filter operator for one grid and one `alpha`.
#[derive(Debug, Clone)]
pub struct FilterSolver<S> {
    pub grid: Grid1D<S>,
    pub alpha: AlphaParam<S>,
    lu: Option<FactoredTridiagonal<S>>,
}

impl<S: Real> FilterSolver<S> {
    pub fn new(grid: Grid1D<S>, alpha: AlphaParam<S>) -> Self {
        let lu = if alpha.alpha == S::zero() {
            None
        } else {
            let n = grid.n;
            let a = alpha.alpha * alpha.alpha / (grid.dx * grid.dx);
            let mut m = Tridiagonal::zeros(n);
            for i in 1..n - 1 {
                m.lower[i] = -a;
                m.diag[i] = S::one() + a + a;
                m.upper[i] = -a;
            }
            m.pin(0);
            m.pin(n - 1);
            Some(FactoredTridiagonal::new(&m).expect("filter matrix is diagonally dominant"))
        };
        Self { grid, alpha, lu }
    }

    /// Writes the filtered values of `y` into `out`.
    pub fn solve_into(&self, y: &[S], v_l: S, v_r: S, out: &mut [S]) {
        let n = y.len();
        out.copy_from_slice(y);
        out[0] = v_l;
        out[n - 1] = v_r;
        if let Some(lu) = &self.lu {
            lu.solve_in_place(out);
        }
    }

    pub fn solve(&self, y: &Field<S>, v_l: S, v_r: S) -> Result<Field<S>> {
        self.grid.check_same(&y.grid)?;
        let mut out = vec![S::zero(); y.len()];
        self.solve_into(&y.values, v_l, v_r, &mut out);
        Ok(Field::from_parts(y.grid, out))
    }

    /// Filter with the field's own end values as boundary data.
    pub fn solve_with_traces(&self, y: &[S], out: &mut [S]) {
        let (l, r) = (y[0], y[y.len() - 1]);
        self.solve_into(y, l, r, out);
    }
}

/// Solves the discrete filter problem with Dirichlet data `v_l`, `v_r`.
pub fn solve_filter<S: Real>(y: &Field<S>, v_l: S, v_r: S, alpha: AlphaParam<S>) -> Field<S> {
    FilterSolver::new(y.grid, alpha)
        .solve(y, v_l, v_r)
        .expect("solver built on the field's own grid")
}

/// `[0, L]` grid padded by `pad` cells on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedGrid<S> {
    pub base: Grid1D<S>,
    pub ext: Grid1D<S>,
    pub pad: usize,
    /// Effective band width `pad * dx`.
    pub eta: S,
}

impl<S: Real> ExtendedGrid<S> {
    /// Pads by `round(eta/dx)` cells; requires `0 < eta < L/2`.
    pub fn new(base: Grid1D<S>, eta: S) -> Result<Self> {
        let len = base.length();
        if !(eta > S::zero()) || !(eta < len / S::lit(2.0)) {
            return Err(Error::config(format!(
                "extension width must satisfy 0 < eta < L/2 (got eta = {eta}, L = {len})"
            )));
        }
        let pad = (eta / base.dx).round().to_usize().unwrap_or(0).max(2);
        let eta = S::of_usize(pad) * base.dx;
        if !(eta < len / S::lit(2.0)) {
            return Err(Error::config("grid too coarse for the requested extension width"));
        }
        let ext = Grid1D {
            x_left: base.x_left - eta,
            x_right: base.x_right + eta,
            n: base.n + 2 * pad,
            dx: base.dx,
        };
        Ok(Self { base, ext, pad, eta })
    }

    pub fn restrict(&self, ext_values: &[S]) -> Vec<S> {
        ext_values[self.pad..self.pad + self.base.n].to_vec()
    }

    pub fn restrict_field(&self, f: &Field<S>) -> Result<Field<S>> {
        self.ext.check_same(&f.grid)?;
        Ok(Field::from_parts(self.base, self.restrict(&f.values)))
    }

    /// Index range of the base nodes inside the extended grid.
    pub fn base_range(&self) -> std::ops::Range<usize> {
        self.pad..self.pad + self.base.n
    }
}

fn extend_with<S: Real>(
    f: &Field<S>,
    ext: &ExtendedGrid<S>,
    left: impl Fn(S) -> S,
    right: impl Fn(S) -> S,
) -> Result<Field<S>> {
    ext.base.check_same(&f.grid)?;
    let mut out = vec![S::zero(); ext.ext.n];
    for (j, o) in out.iter_mut().enumerate() {
        *o = if j < ext.pad {
            left(ext.ext.x(j) - ext.base.x_left)
        } else if j >= ext.pad + ext.base.n {
            right(ext.ext.x(j) - ext.base.x_right)
        } else {
            f.values[j - ext.pad]
        };
    }
    Ok(Field::from_parts(ext.ext, out))
}

/// Twice-differentiable reflection `5z(-x) - 20z(-x/2) + 16z(-x/4)` on the
/// left band, mirrored on the right.
pub fn extend_even_c2<S: Real>(z: &Field<S>, ext: &ExtendedGrid<S>) -> Result<Field<S>> {
    let g = z.grid;
    let at = |x: S| cubic_at(&z.values, &g, x);
    let (five, twenty, sixteen) = (S::lit(5.0), S::lit(20.0), S::lit(16.0));
    let (half, quarter) = (S::lit(0.5), S::lit(0.25));
    let (x0, x1) = (g.x_left, g.x_right);
    extend_with(
        z,
        ext,
        |d| five * at(x0 - d) - twenty * at(x0 - half * d) + sixteen * at(x0 - quarter * d),
        |d| five * at(x1 - d) - twenty * at(x1 - half * d) + sixteen * at(x1 - quarter * d),
    )
}

/// Once-differentiable odd reflection `2y(0) - y(-x)`, mirrored on the right.
pub fn extend_odd_c1<S: Real>(y: &Field<S>, ext: &ExtendedGrid<S>) -> Result<Field<S>> {
    let g = y.grid;
    let two = S::lit(2.0);
    let (first, last) = (y.first(), y.last());
    let n = y.len();
    // Band nodes mirror exactly onto base nodes.
    extend_with(
        y,
        ext,
        |d| {
            let k = (-d / g.dx).round().to_usize().unwrap_or(0).min(n - 1);
            two * first - y.values[k]
        },
        |d| {
            let k = (d / g.dx).round().to_usize().unwrap_or(0).min(n - 1);
            two * last - y.values[n - 1 - k]
        },
    )
}

/// Quintic smoothstep, `0` at `u <= 0`, `1` at `u >= 1`, `C^2` joins.
pub fn smoothstep5<S: Real>(u: S) -> S {
    if u <= S::zero() {
        S::zero()
    } else if u >= S::one() {
        S::one()
    } else {
        u * u * u * (S::lit(10.0) + u * (S::lit(-15.0) + S::lit(6.0) * u))
    }
}

/// Cutoff equal to one on `[0, L]` and vanishing outside `(-eta/2, L + eta/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile<S> {
    pub eta: S,
    pub samples: Field<S>,
}

pub fn make_cutoff<S: Real>(ext: &ExtendedGrid<S>) -> CutoffProfile<S> {
    let half = ext.eta / S::lit(2.0);
    let (x0, x1) = (ext.base.x_left, ext.base.x_right);
    let base = ext.base_range();
    let values = (0..ext.ext.n)
        .map(|i| {
            let x = ext.ext.x(i);
            if base.contains(&i) {
                S::one()
            } else if i < base.start {
                smoothstep5((x - (x0 - half)) / half)
            } else {
                smoothstep5(((x1 + half) - x) / half)
            }
        })
        .collect();
    let samples = Field::from_parts(ext.ext, values);
    CutoffProfile {
        eta: ext.eta,
        samples,
    }
}

pub fn apply_cutoff<S: Real>(f: &Field<S>, chi: &CutoffProfile<S>) -> Result<Field<S>> {
    chi.samples.grid.check_same(&f.grid)?;
    Ok(Field::from_parts(
        f.grid,
        f.values
            .iter()
            .zip(&chi.samples.values)
            .map(|(&a, &c)| a * c)
            .collect(),
    ))
}

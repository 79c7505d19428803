//! Penalized HUM null control of `u_t - u_xx + a(t, x) u_x = v 1_(a,b)` on the
//! padded interval with homogeneous Dirichlet ends.
//!
//! The state is discretized by backward Euler, `(I + dt A_k) u^k = u^{k-1} +
//! dt B v^k`, and the gradient uses the exact transpose of that scheme, so
//! the optimality system solved by conjugate gradients is the discrete one.

use crate::error::{Error, Result};
use crate::filter::ExtendedGrid;
use crate::grid::{Field, Grid1D, SpaceTimeField, TimeGrid};
use crate::scalar::Real;
use crate::tridiag::{FactoredTridiagonal, Tridiagonal};
use serde::Serialize;
use std::ops::Range;

#[derive(Debug, Clone, PartialEq)]
pub struct HumProblem<S> {
    pub ext: ExtendedGrid<S>,
    /// Control window `(a, b)` with `L < a < b < L + eta`.
    pub window: (S, S),
    pub tgrid: TimeGrid<S>,
    /// Advection field on `ext.ext`, one frame per time node.
    pub advection: SpaceTimeField<S>,
    /// Initial state on `ext.ext`; its end values are ignored.
    pub u0: Field<S>,
    pub epsilon: S,
    /// Penalty of a warm-start solve preceding the final one.
    pub continuation: Option<S>,
    pub cg_tol: S,
    pub max_cg: usize,
}

impl<S: Real> HumProblem<S> {
    /// Defaults: window `(L + eta/4, L + 3 eta/4)`, `epsilon = 1e-8` reached
    /// from `1e-4`, CG tolerance `1e-10`.
    pub fn new(ext: ExtendedGrid<S>, tgrid: TimeGrid<S>, advection: SpaceTimeField<S>, u0: Field<S>) -> Result<Self> {
        let right = ext.base.x_right;
        let p = Self {
            ext,
            window: (right + ext.eta / S::lit(4.0), right + S::lit(0.75) * ext.eta),
            tgrid,
            advection,
            u0,
            epsilon: S::lit(1e-8),
            continuation: Some(S::lit(1e-4)),
            cg_tol: S::lit(1e-10),
            max_cg: 2000,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.window;
        let right = self.ext.base.x_right;
        if !(right < a && a < b && b < right + self.ext.eta) {
            return Err(Error::config(format!(
                "control window ({a}, {b}) must satisfy L < a < b < L + eta = {}",
                right + self.ext.eta
            )));
        }
        if !(self.epsilon > S::zero()) {
            return Err(Error::config("HUM penalty must be positive"));
        }
        self.ext.ext.check_same(&self.u0.grid)?;
        self.ext.ext.check_same(&self.advection.grid)?;
        if self.advection.tgrid.m != self.tgrid.m {
            return Err(Error::GridMismatch("advection frames do not match the time grid".into()));
        }
        if window_nodes(&self.ext.ext, self.window).is_empty() {
            return Err(Error::config("control window contains no grid node"));
        }
        Ok(())
    }
}

fn window_nodes<S: Real>(g: &Grid1D<S>, (a, b): (S, S)) -> Range<usize> {
    let first = (0..g.n).find(|&i| g.x(i) > a).unwrap_or(g.n);
    let last = (0..g.n).rev().find(|&i| g.x(i) < b).map(|i| i + 1).unwrap_or(0);
    first..last.max(first)
}

/// The linear control-to-terminal-state map of a [`HumProblem`] and its
/// adjoint. Controls are `m` frames (one per step) on the window nodes with
/// inner product `dt dx sum`; states use `dx sum`.
pub struct HumOperator<S> {
    pub grid: Grid1D<S>,
    pub tgrid: TimeGrid<S>,
    pub window: Range<usize>,
    step: Vec<FactoredTridiagonal<S>>,
    step_t: Vec<FactoredTridiagonal<S>>,
}

impl<S: Real> HumOperator<S> {
    pub fn new(problem: &HumProblem<S>) -> Result<Self> {
        let g = problem.ext.ext;
        let tg = problem.tgrid;
        let n = g.n;
        let dt = tg.dt;
        let diff = dt / (g.dx * g.dx);
        let conv = dt / (S::lit(2.0) * g.dx);
        let mut step = Vec::with_capacity(tg.m);
        let mut step_t = Vec::with_capacity(tg.m);
        for k in 1..=tg.m {
            let a = &problem.advection.frames[k];
            let mut e = Tridiagonal::zeros(n);
            for i in 1..n - 1 {
                e.lower[i] = -diff - conv * a[i];
                e.diag[i] = S::one() + diff + diff;
                e.upper[i] = -diff + conv * a[i];
            }
            e.pin(0);
            e.pin(n - 1);
            let mut et = Tridiagonal::zeros(n);
            for i in 0..n {
                et.diag[i] = e.diag[i];
                if i > 0 {
                    et.lower[i] = e.upper[i - 1];
                }
                if i + 1 < n {
                    et.upper[i] = e.lower[i + 1];
                }
            }
            step.push(FactoredTridiagonal::new(&e)?);
            step_t.push(FactoredTridiagonal::new(&et)?);
        }
        Ok(Self {
            grid: g,
            tgrid: tg,
            window: window_nodes(&g, problem.window),
            step,
            step_t,
        })
    }

    pub fn control_len(&self) -> usize {
        self.tgrid.m * self.window.len()
    }

    /// Full trajectory from `u0` under control `v` (`None` for zero).
    pub fn trajectory(&self, u0: &[S], v: Option<&[S]>) -> Vec<Vec<S>> {
        let n = self.grid.n;
        let w = self.window.len();
        let mut u = u0.to_vec();
        u[0] = S::zero();
        u[n - 1] = S::zero();
        let mut frames = Vec::with_capacity(self.tgrid.m + 1);
        frames.push(u.clone());
        for (k, lu) in self.step.iter().enumerate() {
            if let Some(v) = v {
                for (j, i) in self.window.clone().enumerate() {
                    u[i] += self.tgrid.dt * v[k * w + j];
                }
            }
            lu.solve_in_place(&mut u);
            frames.push(u.clone());
        }
        frames
    }

    /// Terminal state of the zero-datum problem driven by `v`.
    pub fn apply(&self, v: &[S]) -> Vec<S> {
        let n = self.grid.n;
        let w = self.window.len();
        let mut u = vec![S::zero(); n];
        for (k, lu) in self.step.iter().enumerate() {
            for (j, i) in self.window.clone().enumerate() {
                u[i] += self.tgrid.dt * v[k * w + j];
            }
            lu.solve_in_place(&mut u);
        }
        u
    }

    /// Adjoint of [`apply`](Self::apply) applied to a terminal datum `g`;
    /// also returns the backward state at time zero.
    pub fn adjoint(&self, g: &[S]) -> (Vec<S>, Vec<S>) {
        let w = self.window.len();
        let mut phi = g.to_vec();
        let mut out = vec![S::zero(); self.control_len()];
        for k in (0..self.tgrid.m).rev() {
            self.step_t[k].solve_in_place(&mut phi);
            for (j, i) in self.window.clone().enumerate() {
                out[k * w + j] = phi[i];
            }
        }
        (out, phi)
    }

    pub fn control_dot(&self, a: &[S], b: &[S]) -> S {
        self.tgrid.dt * self.grid.dx * a.iter().zip(b).map(|(&x, &y)| x * y).sum::<S>()
    }

    pub fn state_dot(&self, a: &[S], b: &[S]) -> S {
        self.grid.dx * a.iter().zip(b).map(|(&x, &y)| x * y).sum::<S>()
    }
}

/// Convergence record of a HUM solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HumReport {
    pub iterations: usize,
    pub terminal_l2: f64,
    /// Optimal value of the penalized functional.
    pub cost: f64,
    pub epsilon: f64,
    /// Final CG residual relative to the right-hand side.
    pub residual: f64,
    #[serde(skip)]
    pub objective_history: Vec<f64>,
    #[serde(skip)]
    pub residual_history: Vec<f64>,
    /// `| |v|^2 - (<u(T), phi_T> - <u0, phi(0)>) | / |v|^2` with `phi_T = -u(T)/eps`.
    #[serde(skip)]
    pub duality_defect: f64,
}

#[derive(Debug, Clone)]
pub struct HumSolution<S> {
    /// Control on the window nodes; frame `k >= 1` acts on `(t_{k-1}, t_k]`
    /// and frame 0 repeats frame 1.
    pub v: SpaceTimeField<S>,
    pub u: SpaceTimeField<S>,
    pub report: HumReport,
}

/// Minimizes `|v|^2/2 + |u(T)|^2/(2 eps)`.
pub fn hum_null_control<S: Real>(problem: &HumProblem<S>) -> Result<HumSolution<S>> {
    problem.validate()?;
    let op = HumOperator::new(problem)?;
    hum_with_operator(problem, &op)
}

/// As [`hum_null_control`] with a prebuilt operator.
pub fn hum_with_operator<S: Real>(problem: &HumProblem<S>, op: &HumOperator<S>) -> Result<HumSolution<S>> {
    let free = op.trajectory(&problem.u0.values, None);
    let free_t = free.last().expect("at least one frame").clone();
    let mut v = vec![S::zero(); op.control_len()];
    let mut total_iters = 0;
    let mut stages: Vec<S> = problem.continuation.into_iter().filter(|&c| c > problem.epsilon).collect();
    stages.push(problem.epsilon);
    let mut last = None;
    for eps in stages {
        let r = conjugate_gradient(op, &free_t, eps, problem.cg_tol, problem.max_cg, &mut v)?;
        total_iters += r.iterations;
        last = Some(r);
    }
    let mut report = last.expect("at least one stage");
    report.iterations = total_iters;

    let frames = op.trajectory(&problem.u0.values, Some(&v));
    let u_t = frames.last().expect("frames").clone();
    let eps = problem.epsilon;
    let terminal = op.state_dot(&u_t, &u_t);
    let vv = op.control_dot(&v, &v);
    let phi_t: Vec<S> = u_t.iter().map(|&x| -x / eps).collect();
    let (_, phi0) = op.adjoint(&phi_t);
    let mut u0 = problem.u0.values.clone();
    let n = u0.len();
    u0[0] = S::zero();
    u0[n - 1] = S::zero();
    let dual = op.state_dot(&u_t, &phi_t) - op.state_dot(&u0, &phi0);
    report.terminal_l2 = terminal.sqrt().as_f64();
    report.cost = (vv / S::lit(2.0) + terminal / (S::lit(2.0) * eps)).as_f64();
    report.duality_defect = if vv > S::zero() {
        ((vv - dual) / vv).abs().as_f64()
    } else {
        dual.abs().as_f64()
    };

    let w = op.window.len();
    let wg = Grid1D::new(op.grid.x(op.window.start), op.grid.x(op.window.end - 1), w.max(2))?;
    let mut vf = Vec::with_capacity(op.tgrid.m + 1);
    for k in 0..op.tgrid.m {
        let mut row = v[k * w..(k + 1) * w].to_vec();
        if w == 1 {
            row.push(row[0]);
        }
        if k == 0 {
            vf.push(row.clone());
        }
        vf.push(row);
    }
    Ok(HumSolution {
        v: SpaceTimeField::new(op.tgrid, wg, vf)?,
        u: SpaceTimeField::new(op.tgrid, op.grid, frames)?,
        report,
    })
}

/// CG on `(I + S*S/eps) v = -S* u_free(T)/eps`, warm-started from `v`.
fn conjugate_gradient<S: Real>(
    op: &HumOperator<S>,
    free_t: &[S],
    eps: S,
    tol: S,
    max_iter: usize,
    v: &mut [S],
) -> Result<HumReport> {
    let inv = S::one() / eps;
    let (b_raw, _) = op.adjoint(free_t);
    let b: Vec<S> = b_raw.iter().map(|&x| -inv * x).collect();
    let b_norm = op.control_dot(&b, &b).sqrt();
    let mut sv = op.apply(v);
    let hess = |p: &[S], sp: &[S]| -> Vec<S> {
        let (sts, _) = op.adjoint(sp);
        p.iter().zip(&sts).map(|(&a, &c)| a + inv * c).collect()
    };
    let objective = |v: &[S], sv: &[S]| -> f64 {
        let ut: Vec<S> = sv.iter().zip(free_t).map(|(&a, &b)| a + b).collect();
        (op.control_dot(v, v) / S::lit(2.0) + op.state_dot(&ut, &ut) * inv / S::lit(2.0)).as_f64()
    };
    let hv = hess(v, &sv);
    let mut r: Vec<S> = b.iter().zip(&hv).map(|(&x, &y)| x - y).collect();
    let mut p = r.clone();
    let mut rr = op.control_dot(&r, &r);
    let mut objective_history = vec![objective(v, &sv)];
    let mut residual_history = Vec::new();
    let scale = if b_norm > S::zero() { b_norm } else { S::one() };
    let mut iterations = 0;
    loop {
        let rel = rr.sqrt() / scale;
        residual_history.push(rel.as_f64());
        if rel <= tol || rr == S::zero() {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence {
                what: "HUM conjugate gradient".into(),
                iterations,
                last: rel.as_f64(),
                history: residual_history,
            });
        }
        let sp = op.apply(&p);
        let hp = hess(&p, &sp);
        let php = op.control_dot(&p, &hp);
        if !(php > S::zero()) {
            return Err(Error::Solver("HUM operator lost positivity".into()));
        }
        let step = rr / php;
        for i in 0..v.len() {
            v[i] += step * p[i];
            r[i] -= step * hp[i];
        }
        for (a, &c) in sv.iter_mut().zip(&sp) {
            *a += step * c;
        }
        let rr_new = op.control_dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        iterations += 1;
        objective_history.push(objective(v, &sv));
    }
    Ok(HumReport {
        iterations,
        terminal_l2: 0.0,
        cost: 0.0,
        epsilon: eps.as_f64(),
        residual: (rr.sqrt() / scale).as_f64(),
        objective_history,
        residual_history,
        duality_defect: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn problem(n: usize, m: usize) -> HumProblem<f64> {
        let base = Grid1D::new(0.0, 1.0, n).unwrap();
        let ext = ExtendedGrid::new(base, 0.25).unwrap();
        let tg = TimeGrid::new(0.0, 1.0, m).unwrap();
        let (l, len) = (ext.ext.x_left, ext.ext.length());
        let u0 = Field::from_fn(ext.ext, |x| (PI * (x - l) / len).sin());
        HumProblem::new(ext, tg, SpaceTimeField::zeros(tg, ext.ext), u0).unwrap()
    }

    #[test]
    fn zero_datum_gives_zero_control() {
        let mut p = problem(41, 40);
        p.u0 = Field::zeros(p.ext.ext);
        let s = hum_null_control(&p).unwrap();
        assert_eq!(s.v.sup(), 0.0);
        assert_eq!(s.u.sup(), 0.0);
    }

    #[test]
    fn drives_sine_mode_near_zero() {
        let p = problem(61, 60);
        let s = hum_null_control(&p).unwrap();
        let u0 = (p.ext.ext.dx * p.u0.values.iter().map(|v| v * v).sum::<f64>()).sqrt();
        assert!(s.report.terminal_l2 <= 1e-4 * u0, "{:?}", s.report);
        assert!(s.report.duality_defect < 1e-6, "{}", s.report.duality_defect);
        assert!(s.report.objective_history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn window_must_sit_in_the_right_band() {
        let mut p = problem(41, 20);
        p.window = (0.5, 0.6);
        assert!(p.validate().is_err());
    }
}

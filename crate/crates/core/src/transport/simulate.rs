//! Forward semi-Lagrangian solvers: transport with a source, and the
//! controlled inviscid Burgers-alpha system driven by given controls.

use crate::controls::ControlTriple;
use crate::error::{Error, Result};
use crate::filter::{AlphaParam, FilterSolver};
use crate::grid::{Field, Grid1D, SpaceTimeField, TimeGrid};
use crate::interp::cubic_at;
use crate::scalar::{sup_abs, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One backward-characteristic update of `y_t + v y_x = g` on `[t_a, t_b]`.
///
/// Interior nodes follow their characteristic back to `t_a` with `substeps`
/// RK4 steps; a foot that leaves the interval takes the boundary value at the
/// exit time. `source_integral(t0, x0, t1, x1)` integrates `g` along the
/// segment from `(t0, x0)` to `(t1, x1)`. End nodes are left untouched.
#[allow(clippy::too_many_arguments)]
pub fn transport_step<S: Real>(
    grid: &Grid1D<S>,
    y_prev: &[S],
    t_a: S,
    t_b: S,
    substeps: usize,
    vel: impl Fn(S, S) -> S,
    source_integral: impl Fn(S, S, S, S) -> S,
    inflow: impl Fn(Side, S) -> S,
    out: &mut [S],
) {
    let n = grid.n;
    let (x0, x1) = (grid.x_left, grid.x_right);
    let h = (t_a - t_b) / S::of_usize(substeps);
    let half = h / S::lit(2.0);
    let sixth = h / S::lit(6.0);
    let two = S::lit(2.0);
    let clamp = |x: S| x.max(x0).min(x1);
    for i in 1..n - 1 {
        let mut t = t_b;
        let mut x = grid.x(i);
        let mut acc = S::zero();
        let mut exited = None;
        for _ in 0..substeps {
            let k1 = vel(t, clamp(x));
            let k2 = vel(t + half, clamp(x + half * k1));
            let k3 = vel(t + half, clamp(x + half * k2));
            let k4 = vel(t + h, clamp(x + h * k3));
            let xn = x + sixth * (k1 + two * (k2 + k3) + k4);
            let tn = t + h;
            if xn < x0 || xn > x1 {
                let edge = if xn < x0 { x0 } else { x1 };
                let th = (edge - x) / (xn - x);
                let te = t + th * h;
                acc += source_integral(te, edge, t, x);
                let side = if xn < x0 { Side::Left } else { Side::Right };
                exited = Some(inflow(side, te));
                break;
            }
            acc += source_integral(tn, xn, t, x);
            t = tn;
            x = xn;
        }
        out[i] = match exited {
            Some(v) => v + acc,
            None => cubic_at(y_prev, grid, x) + acc,
        };
    }
}

/// Result of a forward run of the controlled inviscid system.
#[derive(Debug, Clone)]
pub struct InviscidRun<S> {
    pub y: SpaceTimeField<S>,
    pub z: SpaceTimeField<S>,
}

/// Simulates `y_t + z y_x = p(t)`, `z - alpha^2 z_xx = y`, with both
/// Dirichlet traces prescribed by `controls`, on `controls.tgrid`.
///
/// Each step traces characteristics through a velocity extrapolated from
/// the last two frames, then repeats once with the corrected end frame.
pub fn simulate_inviscid<S: Real>(
    y0: &Field<S>,
    controls: &ControlTriple<S>,
    alpha: AlphaParam<S>,
) -> Result<InviscidRun<S>> {
    let tg: TimeGrid<S> = controls.tgrid;
    let grid = y0.grid;
    let n = grid.n;
    let filter = FilterSolver::new(grid, alpha);
    let mut y = y0.values.clone();
    y[0] = controls.v_l[0];
    y[n - 1] = controls.v_r[0];
    let mut z = vec![S::zero(); n];
    filter.solve_with_traces(&y, &mut z);
    let mut ys = vec![y.clone()];
    let mut zs = vec![z.clone()];
    let mut z_prev = z.clone();
    let mut next = vec![S::zero(); n];
    let mut z_next = vec![S::zero(); n];
    for k in 0..tg.m {
        let (ta, tb) = (tg.t(k), tg.t(k + 1));
        let z_cur = zs[k].clone();
        // Linear extrapolation of the velocity to the end of the step.
        for i in 0..n {
            z_next[i] = if k == 0 {
                z_cur[i]
            } else {
                z_cur[i] + (z_cur[i] - z_prev[i])
            };
        }
        for _pass in 0..2 {
            let speed = sup_abs(&z_cur).max(sup_abs(&z_next));
            let substeps = ((speed * tg.dt / grid.dx).ceil().to_usize().unwrap_or(1)).max(1);
            let vel = |t: S, x: S| {
                let th = (t - ta) / tg.dt;
                let a = cubic_at(&z_cur, &grid, x);
                let b = cubic_at(&z_next, &grid, x);
                a + th * (b - a)
            };
            let src = |t0: S, _x0: S, t1: S, _x1: S| controls.p_integral(t0, t1);
            let inflow = |side: Side, t: S| match side {
                Side::Left => controls.v_l_at(t),
                Side::Right => controls.v_r_at(t),
            };
            transport_step(&grid, &y, ta, tb, substeps, vel, src, inflow, &mut next);
            next[0] = controls.v_l[k + 1];
            next[n - 1] = controls.v_r[k + 1];
            filter.solve_with_traces(&next, &mut z_next);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite state at step {}", k + 1)));
        }
        y.copy_from_slice(&next);
        z_prev = z_cur;
        ys.push(y.clone());
        zs.push(z_next.clone());
    }
    Ok(InviscidRun {
        y: SpaceTimeField::new(tg, grid, ys)?,
        z: SpaceTimeField::new(tg, grid, zs)?,
    })
}

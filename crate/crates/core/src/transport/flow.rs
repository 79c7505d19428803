//! Characteristic flows of `xi' = lambda(t) + z*(t, xi)`.

use super::lambda::LambdaProfile;
use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;
use crate::interp::{eval_at, SpaceInterp};
use crate::scalar::Real;

/// Velocity `lambda(t) + z*(t, x)`, with `z*` linear in time between frames
/// and zero off its grid.
#[derive(Debug, Clone, Copy)]
pub struct Velocity<'a, S> {
    pub lambda: &'a LambdaProfile<S>,
    pub zstar: &'a SpaceTimeField<S>,
    pub interp: SpaceInterp,
}

impl<'a, S: Real> Velocity<'a, S> {
    pub fn new(lambda: &'a LambdaProfile<S>, zstar: &'a SpaceTimeField<S>, interp: SpaceInterp) -> Self {
        Self {
            lambda,
            zstar,
            interp,
        }
    }

    /// `z*` at `x`, blended between frames `k` and `k + 1` with weight `th`.
    #[inline]
    fn z_blend(&self, k: usize, th: S, x: S) -> S {
        let g = &self.zstar.grid;
        if x < g.x_left || x > g.x_right {
            return S::zero();
        }
        let (a, b) = (&self.zstar.frames[k], &self.zstar.frames[k + 1]);
        match self.interp {
            SpaceInterp::Linear => {
                let n = g.n;
                let s = ((x - g.x_left) / g.dx).min(S::of_usize(n - 1));
                let i = s.to_usize().unwrap_or(0).min(n - 2);
                let w = s - S::of_usize(i);
                let za = a[i] + w * (a[i + 1] - a[i]);
                let zb = b[i] + w * (b[i + 1] - b[i]);
                za + th * (zb - za)
            }
            SpaceInterp::Cubic => {
                let za = eval_at(SpaceInterp::Cubic, a, g, x);
                let zb = eval_at(SpaceInterp::Cubic, b, g, x);
                za + th * (zb - za)
            }
        }
    }

    /// Velocity at `(t, x)` for `t` inside frame interval `k`.
    #[inline]
    pub fn in_interval(&self, k: usize, t: S, x: S) -> S {
        let tg = &self.zstar.tgrid;
        let th = ((t - tg.t(k)) / tg.dt).max(S::zero()).min(S::one());
        self.lambda.value(t) + self.z_blend(k, th, x)
    }

    /// Precomputes the time-dependent parts of an RK4 sweep over
    /// `[t_a, t_b]` inside frame interval `k`.
    pub fn stepper(&self, k: usize, t_a: S, t_b: S, substeps: usize) -> IntervalStepper<'_, 'a, S> {
        let tg = &self.zstar.tgrid;
        let h = (t_b - t_a) / S::of_usize(substeps);
        let half = h / S::lit(2.0);
        let mut lam = Vec::with_capacity(2 * substeps + 1);
        let mut th = Vec::with_capacity(2 * substeps + 1);
        for j in 0..=2 * substeps {
            let t = t_a + half * S::of_usize(j);
            lam.push(self.lambda.value(t));
            th.push(((t - tg.t(k)) / tg.dt).max(S::zero()).min(S::one()));
        }
        IntervalStepper {
            vel: self,
            k,
            h,
            lam,
            th,
        }
    }

    fn interval_of(&self, t: S) -> usize {
        let tg = &self.zstar.tgrid;
        ((t - tg.t0) / tg.dt)
            .floor()
            .max(S::zero())
            .to_usize()
            .unwrap_or(0)
            .min(tg.m - 1)
    }

    /// Largest speed over the sampled frames.
    pub fn speed_bound(&self) -> S {
        self.lambda.max_value().abs() + self.zstar.sup()
    }

    /// RK4 from `t_a` to `t_b`, both inside frame interval `k`, in `substeps` steps.
    pub fn rk4_in_interval(&self, k: usize, t_a: S, t_b: S, x: S, substeps: usize) -> S {
        self.stepper(k, t_a, t_b, substeps).run(x)
    }

    /// Position at `t` of the characteristic through `(s, x)`, in either
    /// time direction, splitting the path at frame times.
    pub fn advance(&self, s: S, t: S, x: S, substeps: usize) -> S {
        let tg = &self.zstar.tgrid;
        let mut cur = s;
        let mut pos = x;
        let eps = tg.dt * S::lit(1e-9);
        if t > s {
            while t - cur > eps {
                let k = self.interval_of(cur + eps);
                let edge = tg.t(k + 1).min(t);
                pos = self.rk4_in_interval(k, cur, edge, pos, substeps);
                cur = edge;
            }
        } else {
            while cur - t > eps {
                let k = self.interval_of(cur - eps);
                let edge = tg.t(k).max(t);
                pos = self.rk4_in_interval(k, cur, edge, pos, substeps);
                cur = edge;
            }
        }
        pos
    }
}

/// RK4 sweep over one frame interval with the time samples cached.
pub struct IntervalStepper<'v, 'a, S> {
    vel: &'v Velocity<'a, S>,
    k: usize,
    h: S,
    lam: Vec<S>,
    th: Vec<S>,
}

impl<S: Real> IntervalStepper<'_, '_, S> {
    #[inline]
    fn f(&self, j: usize, x: S) -> S {
        self.lam[j] + self.vel.z_blend(self.k, self.th[j], x)
    }

    #[inline]
    pub fn run(&self, x: S) -> S {
        let h = self.h;
        let half = h / S::lit(2.0);
        let sixth = h / S::lit(6.0);
        let two = S::lit(2.0);
        let mut x = x;
        for sub in 0..(self.lam.len() - 1) / 2 {
            let j = 2 * sub;
            let k1 = self.f(j, x);
            let k2 = self.f(j + 1, x + half * k1);
            let k3 = self.f(j + 1, x + half * k2);
            let k4 = self.f(j + 2, x + h * k3);
            x += sixth * (k1 + two * (k2 + k3) + k4);
        }
        x
    }
}

/// Sampled flow `Phi(s; t, x)` for a set of start points and target times.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap<S> {
    pub base: S,
    pub times: Vec<S>,
    pub starts: Vec<S>,
    /// `values[j][i] = Phi(base; times[j], starts[i])`.
    pub values: Vec<Vec<S>>,
}

impl<S: Real> FlowMap<S> {
    /// Strictly increasing in the start point at every target time.
    pub fn is_monotone(&self) -> bool {
        self.values
            .iter()
            .all(|row| row.windows(2).all(|w| w[1] > w[0]))
    }
}

/// Integrates the characteristic ODE from `s` to each of `targets` (all on
/// the same side of `s`, ordered away from it) for every start in `xs`.
pub fn integrate_flow<S: Real>(
    vel: &Velocity<'_, S>,
    s: S,
    targets: &[S],
    xs: &[S],
    substeps: usize,
) -> Result<FlowMap<S>> {
    let forward = targets.first().map(|&t| t >= s).unwrap_or(true);
    let ordered = targets.windows(2).all(|w| if forward { w[1] >= w[0] } else { w[1] <= w[0] });
    if !ordered || targets.iter().any(|&t| (t >= s) != forward && t != s) {
        return Err(Error::config("flow targets must lie on one side of the base time, ordered away from it"));
    }
    let tg = &vel.zstar.tgrid;
    let pad = tg.dt * S::lit(1e-9);
    if targets.iter().chain(std::iter::once(&s)).any(|&t| t < tg.t0 - pad || t > tg.t1 + pad) {
        return Err(Error::config("flow times outside the velocity time grid"));
    }
    let mut values = vec![vec![S::zero(); xs.len()]; targets.len()];
    for (i, &x0) in xs.iter().enumerate() {
        let mut cur = s;
        let mut pos = x0;
        for (j, &t) in targets.iter().enumerate() {
            pos = vel.advance(cur, t, pos, substeps);
            cur = t;
            values[j][i] = pos;
        }
    }
    Ok(FlowMap {
        base: s,
        times: targets.to_vec(),
        starts: xs.to_vec(),
        values,
    })
}

/// Largest `|Phi(t; s, Phi(s; t, x)) - x|` over the flow's samples.
pub fn group_defect<S: Real>(vel: &Velocity<'_, S>, flow: &FlowMap<S>, substeps: usize) -> S {
    let mut worst = S::zero();
    for (j, &t) in flow.times.iter().enumerate() {
        for (i, &x0) in flow.starts.iter().enumerate() {
            let back = vel.advance(t, flow.base, flow.values[j][i], substeps);
            worst = worst.max((back - x0).abs());
        }
    }
    worst
}

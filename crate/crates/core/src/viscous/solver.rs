//! Time stepping of `y_t - y_xx + z y_x = p(t) + f(t, x)`, `z - alpha^2 z_xx = y`
//! with Dirichlet traces on `y` and `z = y` at both ends.

use crate::controls::ControlTriple;
use crate::error::{Error, Result};
use crate::filter::{AlphaParam, FilterSolver};
use crate::grid::{diff1_slice, diff2_slice, l2_slice, Field, Grid1D, SpaceTimeField};
use crate::scalar::{sup_abs, sup_diff, Real};
use crate::tridiag::Tridiagonal;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct ViscousState<S> {
    pub t: S,
    pub y: Field<S>,
    pub z: Field<S>,
    pub alpha: AlphaParam<S>,
}

impl<S: Real> ViscousState<S> {
    /// State at time `t` with `z` filtered from `y` and its own traces.
    pub fn new(t: S, y: Field<S>, alpha: AlphaParam<S>) -> Self {
        let filter = FilterSolver::new(y.grid, alpha);
        let mut z = vec![S::zero(); y.len()];
        filter.solve_with_traces(&y.values, &mut z);
        let z = Field::new(y.grid, z).expect("same grid");
        Self { t, y, z, alpha }
    }

    pub fn filter_residual(&self) -> S {
        filter_residual(&self.y.values, &self.z.values, &self.y.grid, self.alpha)
    }
}

/// Normwise backward error of `z` as a solution of the filter problem with
/// the traces of `y`.
pub fn filter_residual<S: Real>(y: &[S], z: &[S], grid: &Grid1D<S>, alpha: AlphaParam<S>) -> S {
    let n = y.len();
    let a = alpha.alpha * alpha.alpha / (grid.dx * grid.dx);
    let mut worst = (z[0] - y[0]).abs().max((z[n - 1] - y[n - 1]).abs());
    for i in 1..n - 1 {
        let r = z[i] - a * (z[i - 1] - S::lit(2.0) * z[i] + z[i + 1]) - y[i];
        worst = worst.max(r.abs());
    }
    let scale = sup_abs(y) + (S::one() + S::lit(4.0) * a) * sup_abs(z);
    if scale == S::zero() {
        worst
    } else {
        worst / scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViscousConfig<S> {
    /// Picard passes on `z` per step.
    pub min_passes: usize,
    pub max_passes: usize,
    /// A step is accepted once the last pass moved `y` by at most
    /// `pass_tol * sup|y|`.
    pub pass_tol: S,
    pub max_halvings: usize,
    /// Leading steps replaced by two backward-Euler half steps.
    pub startup_steps: usize,
    /// Slack allowed on the sup-norm bound.
    pub monitor_tol: S,
}

impl<S: Real> Default for ViscousConfig<S> {
    fn default() -> Self {
        Self {
            min_passes: 2,
            max_passes: 8,
            pass_tol: S::lit(1e-8),
            max_halvings: 5,
            startup_steps: 2,
            monitor_tol: S::lit(1e-8),
        }
    }
}

/// Time-dependent data driving a run.
pub struct Drive<'a, S> {
    pub p: &'a dyn Fn(S) -> S,
    pub traces: &'a dyn Fn(S) -> (S, S),
    pub forcing: Option<&'a dyn Fn(S, S) -> S>,
}

/// Reusable buffers and factorizations for one grid and one `alpha`.
pub struct ViscousStepper<S> {
    pub grid: Grid1D<S>,
    pub alpha: AlphaParam<S>,
    pub config: ViscousConfig<S>,
    filter: FilterSolver<S>,
    mat: Tridiagonal<S>,
    base: Vec<S>,
    work: Vec<S>,
    d1: Vec<S>,
    d2: Vec<S>,
    y_new: Vec<S>,
    y_pass: Vec<S>,
    z_new: Vec<S>,
    /// Total rejected steps and the most passes used by an accepted step.
    pub halvings: usize,
    pub max_passes_used: usize,
    /// `sum dt |D+ y_theta|^2` over accepted steps, `y_theta` being the
    /// state each step's diffusion acts on.
    pub dissipation: S,
}

impl<S: Real> ViscousStepper<S> {
    pub fn new(grid: Grid1D<S>, alpha: AlphaParam<S>, config: ViscousConfig<S>) -> Self {
        let n = grid.n;
        let buf = || vec![S::zero(); n];
        Self {
            grid,
            alpha,
            config,
            filter: FilterSolver::new(grid, alpha),
            mat: Tridiagonal::zeros(n),
            base: buf(),
            work: buf(),
            d1: buf(),
            d2: buf(),
            y_new: buf(),
            y_pass: buf(),
            z_new: buf(),
            halvings: 0,
            max_passes_used: 0,
            dissipation: S::zero(),
        }
    }

    /// One theta-step to `t_b` (`theta = 1/2` Crank-Nicolson, `1` backward
    /// Euler). `None` when the passes on `z` do not settle.
    fn try_step(&mut self, state: &ViscousState<S>, t_b: S, theta: S, drive: &Drive<'_, S>) -> Option<ViscousState<S>> {
        let n = self.grid.n;
        let dx = self.grid.dx;
        let t_a = state.t;
        let dt = t_b - t_a;
        let expl = (S::one() - theta) * dt;
        let y = &state.y.values;
        let z = &state.z.values;
        diff1_slice(y, dx, &mut self.d1);
        diff2_slice(y, dx, &mut self.d2);
        let src = dt * ((S::one() - theta) * (drive.p)(t_a) + theta * (drive.p)(t_b));
        for i in 0..n {
            let mut b = y[i] + expl * (self.d2[i] - z[i] * self.d1[i]) + src;
            if let Some(f) = drive.forcing {
                let x = self.grid.x(i);
                b += dt * ((S::one() - theta) * f(t_a, x) + theta * f(t_b, x));
            }
            self.base[i] = b;
        }
        let (v_l, v_r) = (drive.traces)(t_b);
        self.z_new.copy_from_slice(z);
        let c = theta * dt;
        let diff = c / (dx * dx);
        let conv = c / (S::lit(2.0) * dx);
        for pass in 1..=self.config.max_passes {
            for i in 1..n - 1 {
                self.mat.lower[i] = -diff - conv * self.z_new[i];
                self.mat.diag[i] = S::one() + diff + diff;
                self.mat.upper[i] = -diff + conv * self.z_new[i];
            }
            self.mat.pin(0);
            self.mat.pin(n - 1);
            self.y_new.copy_from_slice(&self.base);
            self.y_new[0] = v_l;
            self.y_new[n - 1] = v_r;
            self.mat.solve_in_place(&mut self.y_new, &mut self.work).ok()?;
            if self.y_new.iter().any(|v| !v.is_finite()) {
                return None;
            }
            self.filter.solve_with_traces(&self.y_new, &mut self.z_new);
            if pass > 1 {
                let inc = sup_diff(&self.y_new, &self.y_pass);
                if pass >= self.config.min_passes && inc <= self.config.pass_tol * sup_abs(&self.y_new) {
                    self.max_passes_used = self.max_passes_used.max(pass);
                    let mix = |i: usize| theta * self.y_new[i] + (S::one() - theta) * y[i];
                    let form = (0..n - 1).fold(S::zero(), |acc, i| acc + (mix(i + 1) - mix(i)).powi(2));
                    self.dissipation += dt * form / dx;
                    return Some(ViscousState {
                        t: t_b,
                        y: Field::new(self.grid, self.y_new.clone()).ok()?,
                        z: Field::new(self.grid, self.z_new.clone()).ok()?,
                        alpha: self.alpha,
                    });
                }
            }
            self.y_pass.copy_from_slice(&self.y_new);
        }
        None
    }

    /// Advances to `t_b`, halving the step on rejection.
    pub fn advance(&mut self, state: &ViscousState<S>, t_b: S, theta: S, drive: &Drive<'_, S>) -> Result<ViscousState<S>> {
        self.advance_depth(state, t_b, theta, drive, 0)
    }

    fn advance_depth(
        &mut self,
        state: &ViscousState<S>,
        t_b: S,
        theta: S,
        drive: &Drive<'_, S>,
        depth: usize,
    ) -> Result<ViscousState<S>> {
        if let Some(next) = self.try_step(state, t_b, theta, drive) {
            return Ok(next);
        }
        if depth >= self.config.max_halvings {
            return Err(Error::NonConvergence {
                what: "viscous step".to_string(),
                iterations: depth,
                last: f64::NAN,
                history: Vec::new(),
            });
        }
        self.halvings += 1;
        let mid = state.t + (t_b - state.t) / S::lit(2.0);
        let half = self.advance_depth(state, mid, theta, drive, depth + 1)?;
        self.advance_depth(&half, t_b, theta, drive, depth + 1)
    }
}

/// One Crank-Nicolson step with constant `p` and end traces `v_l`, `v_r`.
pub fn step_viscous<S: Real>(state: &ViscousState<S>, p: S, v_l: S, v_r: S, dt: S) -> Result<ViscousState<S>> {
    let mut stepper = ViscousStepper::new(state.y.grid, state.alpha, ViscousConfig::default());
    let pf = move |_t: S| p;
    let tf = move |_t: S| (v_l, v_r);
    let drive = Drive {
        p: &pf,
        traces: &tf,
        forcing: None,
    };
    stepper.advance(state, state.t + dt, S::lit(0.5), &drive)
}

/// Runtime monitors of a viscous run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViscousReport {
    /// `|y0| + |v_l| + |v_r| + T |p| (+ T |f|)`, all sup norms.
    pub m_t: f64,
    pub max_sup: f64,
    pub max_principle_ok: bool,
    /// `|y(t)|^2 + 2 int_0^t |y_x|^2` at every frame.
    pub energy: Vec<f64>,
    /// `|y0|^2 exp(int_0^t sup|z_x|)`, checked only for homogeneous data
    /// with relative slack `10 (dx^2 + dt^2)`.
    pub energy_bound: Option<Vec<f64>>,
    pub energy_ok: Option<bool>,
    pub max_filter_residual: f64,
    pub filter_ok: bool,
    pub halvings: usize,
    pub max_passes: usize,
}

impl ViscousReport {
    pub fn all_ok(&self) -> bool {
        self.max_principle_ok && self.filter_ok && self.energy_ok.unwrap_or(true)
    }
}

#[derive(Debug, Clone)]
pub struct ViscousRun<S> {
    pub y: SpaceTimeField<S>,
    pub z: SpaceTimeField<S>,
    pub report: ViscousReport,
}

/// Runs the controlled viscous system on `controls.tgrid`.
pub fn simulate_viscous<S: Real>(
    y0: &Field<S>,
    controls: &ControlTriple<S>,
    alpha: AlphaParam<S>,
    config: &ViscousConfig<S>,
) -> Result<ViscousRun<S>> {
    run(y0, controls, alpha, None, config)
}

/// As [`simulate_viscous`] with an extra source `f(t, x)`.
pub fn simulate_viscous_forced<S: Real>(
    y0: &Field<S>,
    controls: &ControlTriple<S>,
    alpha: AlphaParam<S>,
    forcing: &dyn Fn(S, S) -> S,
    config: &ViscousConfig<S>,
) -> Result<ViscousRun<S>> {
    run(y0, controls, alpha, Some(forcing), config)
}

fn run<S: Real>(
    y0: &Field<S>,
    controls: &ControlTriple<S>,
    alpha: AlphaParam<S>,
    forcing: Option<&dyn Fn(S, S) -> S>,
    config: &ViscousConfig<S>,
) -> Result<ViscousRun<S>> {
    let tg = controls.tgrid;
    let grid = y0.grid;
    let n = grid.n;
    let mut start = y0.values.clone();
    start[0] = controls.v_l[0];
    start[n - 1] = controls.v_r[0];
    let mut state = ViscousState::new(tg.t0, Field::new(grid, start)?, alpha);
    let mut stepper = ViscousStepper::new(grid, alpha, config.clone());
    let pf = |t: S| controls.p_at(t);
    let tf = |t: S| (controls.v_l_at(t), controls.v_r_at(t));
    let drive = Drive {
        p: &pf,
        traces: &tf,
        forcing,
    };
    let mut ys = Vec::with_capacity(tg.m + 1);
    let mut zs = Vec::with_capacity(tg.m + 1);
    ys.push(state.y.values.clone());
    zs.push(state.z.values.clone());
    let mut max_res = state.filter_residual();
    let mut dissipation = vec![0.0];
    let half = S::lit(0.5);
    for k in 0..tg.m {
        let tb = tg.t(k + 1);
        let result = if k < config.startup_steps {
            let mid = tg.t(k) + tg.dt * half;
            stepper
                .advance(&state, mid, S::one(), &drive)
                .and_then(|s| stepper.advance(&s, tb, S::one(), &drive))
        } else {
            stepper.advance(&state, tb, half, &drive)
        };
        state = result.map_err(|e| match e {
            Error::NonConvergence { what, iterations, last, history } => Error::NonConvergence {
                what: format!("{what} {} (t = {})", k + 1, tb.as_f64()),
                iterations,
                last,
                history,
            },
            e => e,
        })?;
        state.t = tb;
        max_res = max_res.max(state.filter_residual());
        dissipation.push(stepper.dissipation.as_f64());
        ys.push(state.y.values.clone());
        zs.push(state.z.values.clone());
    }
    let y = SpaceTimeField::new(tg, grid, ys)?;
    let z = SpaceTimeField::new(tg, grid, zs)?;

    let horizon = tg.horizon().as_f64();
    let mut f_sup = 0.0f64;
    if let Some(f) = forcing {
        for t in tg.times() {
            for x in grid.nodes() {
                f_sup = f_sup.max(f(t, x).abs().as_f64());
            }
        }
    }
    let m_t = y0.sup().as_f64()
        + sup_abs(&controls.v_l).as_f64()
        + sup_abs(&controls.v_r).as_f64()
        + horizon * (sup_abs(&controls.p).as_f64() + f_sup);
    let max_sup = y.sup().as_f64();

    let (energy, bound) = energy_ledger(&y, &z, &dissipation);
    let homogeneous = forcing.is_none()
        && controls.p.iter().all(|v| *v == S::zero())
        && controls.v_l.iter().all(|v| *v == S::zero())
        && controls.v_r.iter().all(|v| *v == S::zero());
    let (energy_bound, energy_ok) = if homogeneous {
        let slack = 10.0 * (grid.dx.as_f64().powi(2) + tg.dt.as_f64().powi(2));
        let ok = energy.iter().zip(&bound).all(|(e, b)| *e <= b * (1.0 + slack) + 1e-14);
        (Some(bound), Some(ok))
    } else {
        (None, None)
    };
    let report = ViscousReport {
        m_t,
        max_sup,
        max_principle_ok: max_sup <= m_t + config.monitor_tol.as_f64(),
        energy,
        energy_bound,
        energy_ok,
        max_filter_residual: max_res.as_f64(),
        filter_ok: max_res.as_f64() <= 1e-10,
        halvings: stepper.halvings,
        max_passes: stepper.max_passes_used,
    };
    Ok(ViscousRun { y, z, report })
}

/// Energy `|y|^2 + 2 int |y_x|^2` and its Gronwall bound per frame, given
/// the accumulated dissipation at each frame.
fn energy_ledger<S: Real>(y: &SpaceTimeField<S>, z: &SpaceTimeField<S>, dissipation: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let grid = y.grid;
    let dt = y.tgrid.dt.as_f64();
    let mut d = vec![S::zero(); grid.n];
    let mut growth = 0.0;
    let mut prev: Option<f64> = None;
    let e0 = l2_slice(&y.frames[0], &grid).as_f64().powi(2);
    let mut energy = Vec::with_capacity(y.frames.len());
    let mut bound = Vec::with_capacity(y.frames.len());
    for ((yk, zk), diss) in y.frames.iter().zip(&z.frames).zip(dissipation) {
        diff1_slice(zk, grid.dx, &mut d);
        let zx = sup_abs(&d).as_f64();
        if let Some(s0) = prev {
            growth += 0.5 * dt * (s0 + zx);
        }
        prev = Some(zx);
        energy.push(l2_slice(yk, &grid).as_f64().powi(2) + 2.0 * diss);
        bound.push(e0 * growth.exp());
    }
    (energy, bound)
}

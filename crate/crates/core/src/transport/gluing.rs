//! Global exact control of the inviscid system by scaling and time reversal
//! of two small-data null-control runs.

use super::lambda::{LambdaProfile, LambdaWindow};
use super::picard::{picard_null_control, NullControlProblem, PicardConfig, PicardSolution};
use crate::controls::ControlTriple;
use crate::error::{Error, Result};
use crate::filter::{AlphaParam, ExtendedGrid};
use crate::grid::{norms, Field, SpaceTimeField, TimeGrid};
use crate::scalar::Real;
use serde::Serialize;

/// Phase split of `[0, T]`: forward arc on `[0, gamma0 T]`, rest on
/// `[gamma0 T, gamma_t T]`, reversed arc on `[gamma_t T, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GluingPlan {
    pub gamma0: f64,
    pub gamma_t: f64,
    /// Global steps in the first and last phase.
    pub m_first: usize,
    pub m_last: usize,
}

impl GluingPlan {
    /// `gamma0 = min(0.4, d/(2 max(1, |y0|_C1)))`, likewise `1 - gamma_t`
    /// from `y_T`, each rounded down to whole steps of the global grid.
    pub fn from_norms(y0_c1: f64, yt_c1: f64, delta_hat: f64, m: usize) -> Result<Self> {
        let pick = |c1: f64| (delta_hat / (2.0 * c1.max(1.0))).min(0.4);
        let steps = |g: f64| (g * m as f64 + 1e-9).floor() as usize;
        let (m_first, m_last) = (steps(pick(y0_c1)), steps(pick(yt_c1)));
        if m_first == 0 || m_last == 0 {
            return Err(Error::config(format!(
                "time grid with {m} steps too coarse for the gluing phases (threshold {delta_hat:.3e})"
            )));
        }
        Self::with_steps(m_first, m_last, m)
    }

    pub fn with_steps(m_first: usize, m_last: usize, m: usize) -> Result<Self> {
        if m_first + m_last > m || m_first == 0 || m_last == 0 {
            return Err(Error::config(format!(
                "gluing phases of {m_first} and {m_last} steps do not fit {m} steps"
            )));
        }
        Ok(Self {
            gamma0: m_first as f64 / m as f64,
            gamma_t: 1.0 - m_last as f64 / m as f64,
            m_first,
            m_last,
        })
    }

    /// The same phase fractions on a grid refined by an integer factor.
    pub fn refined(&self, factor: usize, m: usize) -> Result<Self> {
        Self::with_steps(self.m_first * factor, self.m_last * factor, m)
    }
}

#[derive(Debug, Clone)]
pub struct InviscidControlConfig<S> {
    pub eta: S,
    pub margin: S,
    pub picard: PicardConfig<S>,
}

impl<S: Real> Default for InviscidControlConfig<S> {
    fn default() -> Self {
        Self {
            eta: S::lit(0.25),
            margin: S::lit(0.1),
            picard: PicardConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlobalInviscidControl<S> {
    pub y: SpaceTimeField<S>,
    pub z: SpaceTimeField<S>,
    pub controls: ControlTriple<S>,
    pub plan: GluingPlan,
    pub forward: PicardSolution<S>,
    pub backward: PicardSolution<S>,
    /// Sub-problem steps per global step.
    pub refinement: usize,
}

/// Steers `y0` to `y_t` over `tgrid` using `delta_hat` to size the phases
/// (or an explicit `plan`).
pub fn global_inviscid_control<S: Real>(
    y0: &Field<S>,
    y_t: &Field<S>,
    alpha: AlphaParam<S>,
    tgrid: TimeGrid<S>,
    delta_hat: f64,
    plan: Option<GluingPlan>,
    config: &InviscidControlConfig<S>,
) -> Result<GlobalInviscidControl<S>> {
    y0.grid.check_same(&y_t.grid)?;
    let grid = y0.grid;
    let m = tgrid.m;
    let plan = match plan {
        Some(p) => p,
        None => GluingPlan::from_norms(norms(y0).c1, norms(y_t).c1, delta_hat, m)?,
    };
    let horizon = tgrid.horizon();
    let ext = ExtendedGrid::new(grid, config.eta)?;
    let lambda = LambdaProfile::new(grid.length(), horizon, ext.eta, config.margin, LambdaWindow::Full)?;

    // Sub-problems live on [0, T]; refine their steps so that one step moves
    // a characteristic by at most half the band.
    let shortest = plan.m_first.min(plan.m_last);
    let per_step = horizon * lambda.max_value() * S::lit(1.25) / S::of_usize(shortest);
    let refinement = (per_step / (ext.eta * S::lit(0.5))).ceil().to_usize().unwrap_or(1).max(1);

    let g0 = S::lit(plan.gamma0);
    let c = S::lit(1.0 - plan.gamma_t);
    let sub = |data: Field<S>, steps: usize| -> Result<PicardSolution<S>> {
        let problem = NullControlProblem {
            y0: data,
            lambda,
            alpha,
            ext,
            tgrid: TimeGrid::new(S::zero(), horizon, steps * refinement)?,
        };
        picard_null_control(&problem, &config.picard)
    };
    let forward = sub(y0.scaled(g0), plan.m_first)?;
    let backward = sub(y_t.reflected().scaled(c), plan.m_last)?;

    let n = grid.n;
    let mut ys = vec![vec![S::zero(); n]; m + 1];
    let mut zs = vec![vec![S::zero(); n]; m + 1];
    let mut p = vec![S::zero(); m + 1];
    let inv0 = S::one() / g0;
    for (k, (yk, zk)) in ys.iter_mut().zip(zs.iter_mut()).enumerate().take(plan.m_first + 1) {
        let j = k * refinement;
        let s = forward.y.tgrid.t(j);
        let l = lambda.value(s);
        for i in 0..n {
            yk[i] = inv0 * (forward.y.frames[j][i] + l);
            zk[i] = inv0 * (forward.z.frames[j][i] + l);
        }
        p[k] = inv0 * inv0 * lambda.derivative(s);
    }
    let invc = S::one() / c;
    let start_last = m - plan.m_last;
    for k in start_last..=m {
        let j = (m - k) * refinement;
        let s = backward.y.tgrid.t(j);
        let l = lambda.value(s);
        for i in 0..n {
            ys[k][i] = invc * (backward.y.frames[j][n - 1 - i] + l);
            zs[k][i] = invc * (backward.z.frames[j][n - 1 - i] + l);
        }
        p[k] = -invc * invc * lambda.derivative(s);
    }
    let y = SpaceTimeField::new(tgrid, grid, ys)?;
    let z = SpaceTimeField::new(tgrid, grid, zs)?;
    let controls = ControlTriple::new(tgrid, p, y.node_series(0), y.node_series(n - 1))?;
    Ok(GlobalInviscidControl {
        y,
        z,
        controls,
        plan,
        forward,
        backward,
        refinement,
    })
}

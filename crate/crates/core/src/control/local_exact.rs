//! Local exact control of the viscous system to a spatially constant
//! trajectory `m(t)`.
//!
//! With `u = y - m`, `w = z - m` the problem becomes
//! `u_t - u_xx + (w + m) u_x = 0`, `w - alpha^2 w_xx = u`, which is solved by
//! a fixed-point loop: freeze `w` from the previous iterate, extend it to the
//! padded interval, and null-control the resulting linear problem there.

use super::hum::{hum_with_operator, HumOperator, HumProblem, HumReport};
use crate::controls::ControlTriple;
use crate::error::{Error, Result};
use crate::filter::{apply_cutoff, extend_even_c2, extend_odd_c1, make_cutoff, AlphaParam, ExtendedGrid, FilterSolver};
use crate::grid::{norms, Field, Grid1D, SpaceTimeField, TimeGrid};
use crate::scalar::{sup_abs, sup_diff, Real};
use crate::transport::calibrate::{bisect_threshold, Calibrator, Threshold};
use serde::Serialize;

/// The constant-in-space target trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanPath<S> {
    Constant(S),
    /// Values and time derivatives at the nodes of the run's time grid.
    Sampled { values: Vec<S>, rates: Vec<S> },
}

impl<S: Real> MeanPath<S> {
    pub fn value(&self, k: usize) -> S {
        match self {
            MeanPath::Constant(c) => *c,
            MeanPath::Sampled { values, .. } => values[k],
        }
    }

    pub fn rate(&self, k: usize) -> S {
        match self {
            MeanPath::Constant(_) => S::zero(),
            MeanPath::Sampled { rates, .. } => rates[k],
        }
    }

    fn check(&self, tgrid: &TimeGrid<S>) -> Result<()> {
        if let MeanPath::Sampled { values, rates } = self {
            if values.len() != tgrid.m + 1 || rates.len() != tgrid.m + 1 {
                return Err(Error::GridMismatch("mean path samples do not match the time grid".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalExactConfig<S> {
    pub eta: S,
    /// Stop when successive iterates differ by at most `tol` times the
    /// initial deviation, in sup norm.
    pub tol: S,
    pub max_iter: usize,
    /// Relaxation used once the gaps stop decreasing.
    pub damping: S,
    pub epsilon: S,
    pub continuation: Option<S>,
    pub cg_tol: S,
    pub max_cg: usize,
}

impl<S: Real> Default for LocalExactConfig<S> {
    fn default() -> Self {
        Self {
            eta: S::lit(0.25),
            tol: S::lit(1e-8),
            max_iter: 50,
            damping: S::lit(0.5),
            epsilon: S::lit(1e-8),
            continuation: Some(S::lit(1e-4)),
            cg_tol: S::lit(1e-10),
            max_cg: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalExactReport {
    pub iterations: usize,
    pub gaps: Vec<f64>,
    pub damped: bool,
    pub hum: HumReport,
    /// `sup |y(T) - m(T)|` on `[0, L]` for the controlled state.
    pub terminal_sup: f64,
    /// Sup of the boundary perturbations `v - m`.
    pub trace_sup: f64,
}

#[derive(Debug, Clone)]
pub struct LocalExactSolution<S> {
    pub controls: ControlTriple<S>,
    pub y: SpaceTimeField<S>,
    pub z: SpaceTimeField<S>,
    /// Controlled perturbation on the padded interval.
    pub u_ext: SpaceTimeField<S>,
    pub report: LocalExactReport,
}

/// Steers `y0` to `target` over `tgrid` with `p = m'` and both boundary
/// traces as controls.
pub fn local_exact_to_constant<S: Real>(
    y0: &Field<S>,
    target: &MeanPath<S>,
    alpha: AlphaParam<S>,
    tgrid: TimeGrid<S>,
    config: &LocalExactConfig<S>,
) -> Result<LocalExactSolution<S>> {
    target.check(&tgrid)?;
    let base = y0.grid;
    let n = base.n;
    let m = tgrid.m;
    let ext = ExtendedGrid::new(base, config.eta)?;
    let chi = make_cutoff(&ext);
    let filter = FilterSolver::new(base, alpha);
    let dev0 = y0.map(|v| v - target.value(0));
    let u0_star = apply_cutoff(&extend_odd_c1(&dev0, &ext)?, &chi)?;
    let scale = dev0.sup().max(S::min_positive_value());

    let filtered = |frame: &[S]| -> Vec<S> {
        let mut w = vec![S::zero(); n];
        filter.solve_with_traces(frame, &mut w);
        w
    };
    let mut ubar = vec![vec![S::zero(); n]; m + 1];
    let mut gaps = Vec::new();
    let mut damped = false;
    for iter in 1..=config.max_iter {
        let mut adv = Vec::with_capacity(m + 1);
        for (k, frame) in ubar.iter().enumerate() {
            let w = Field::new(base, filtered(frame))?;
            let w_star = apply_cutoff(&extend_even_c2(&w, &ext)?, &chi)?;
            let mk = target.value(k);
            adv.push(w_star.values.into_iter().map(|v| v + mk).collect());
        }
        let problem = HumProblem {
            epsilon: config.epsilon,
            continuation: config.continuation,
            cg_tol: config.cg_tol,
            max_cg: config.max_cg,
            ..HumProblem::new(ext, tgrid, SpaceTimeField::new(tgrid, ext.ext, adv)?, u0_star.clone())?
        };
        let op = HumOperator::new(&problem)?;
        let sol = hum_with_operator(&problem, &op)?;
        let u_new: Vec<Vec<S>> = sol.u.frames.iter().map(|f| ext.restrict(f)).collect();
        let gap = ubar
            .iter()
            .zip(&u_new)
            .fold(S::zero(), |g, (a, b)| g.max(sup_diff(a, b)));
        gaps.push(gap.as_f64());
        if gap <= config.tol * scale {
            return assemble(u_new, sol, target, tgrid, &filtered, base, iter, gaps, damped);
        }
        if gaps.len() >= 2 && gaps[gaps.len() - 1] >= gaps[gaps.len() - 2] {
            damped = true;
        }
        let w = if damped { config.damping } else { S::one() };
        for (a, b) in ubar.iter_mut().zip(&u_new) {
            for (x, &y) in a.iter_mut().zip(b) {
                *x += w * (y - *x);
            }
        }
    }
    Err(Error::NonConvergence {
        what: "local exact control fixed point".into(),
        iterations: config.max_iter,
        last: gaps.last().copied().unwrap_or(f64::NAN),
        history: gaps,
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble<S: Real>(
    u: Vec<Vec<S>>,
    sol: super::hum::HumSolution<S>,
    target: &MeanPath<S>,
    tgrid: TimeGrid<S>,
    filtered: &dyn Fn(&[S]) -> Vec<S>,
    base: Grid1D<S>,
    iterations: usize,
    gaps: Vec<f64>,
    damped: bool,
) -> Result<LocalExactSolution<S>> {
    let n = base.n;
    let m = tgrid.m;
    let mut ys = Vec::with_capacity(m + 1);
    let mut zs = Vec::with_capacity(m + 1);
    let (mut p, mut v_l, mut v_r) = (Vec::new(), Vec::new(), Vec::new());
    let mut trace_sup = S::zero();
    for (k, frame) in u.iter().enumerate() {
        let mk = target.value(k);
        let w = filtered(frame);
        ys.push(frame.iter().map(|&v| v + mk).collect());
        zs.push(w.iter().map(|&v| v + mk).collect());
        p.push(target.rate(k));
        v_l.push(frame[0] + mk);
        v_r.push(frame[n - 1] + mk);
        trace_sup = trace_sup.max(frame[0].abs()).max(frame[n - 1].abs());
    }
    let terminal_sup = sup_abs(&u[m]).as_f64();
    Ok(LocalExactSolution {
        controls: ControlTriple::new(tgrid, p, v_l, v_r)?,
        y: SpaceTimeField::new(tgrid, base, ys)?,
        z: SpaceTimeField::new(tgrid, base, zs)?,
        u_ext: sol.u,
        report: LocalExactReport {
            iterations,
            gaps,
            damped,
            hum: sol.report,
            terminal_sup,
            trace_sup: trace_sup.as_f64(),
        },
    })
}

/// Configuration family over which the viscous smallness threshold (in
/// `H^1` distance to the target) is calibrated.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscousCalibrationSpec<S> {
    pub length: S,
    pub horizon: S,
    pub target: S,
    pub n: usize,
    pub m: usize,
    pub alphas: Vec<S>,
    pub upper: f64,
    pub bisection_steps: usize,
    pub config: LocalExactConfig<S>,
}

impl<S: Real> ViscousCalibrationSpec<S> {
    /// Coarse 51-node, 50-step family at `alpha in {0.05, 0.5, 5}`.
    pub fn coarse(length: S, horizon: S, target: S) -> Self {
        Self {
            length,
            horizon,
            target,
            n: 51,
            m: 50,
            alphas: vec![S::lit(0.05), S::lit(0.5), S::lit(5.0)],
            upper: 1.0,
            bisection_steps: 6,
            config: LocalExactConfig::default(),
        }
    }

    fn key(&self) -> String {
        format!(
            "viscous|{}|{}|{}|{}|{}|{:?}|{}|{}|{}|{}",
            self.length,
            self.horizon,
            self.target,
            self.n,
            self.m,
            self.alphas,
            self.upper,
            self.bisection_steps,
            self.config.eta,
            self.config.max_iter
        )
    }

    /// Unit-`H^1` deviations: a half sine, and a ramp that is nonzero at the
    /// right end.
    pub fn reference_shapes(&self, grid: Grid1D<S>) -> Vec<Field<S>> {
        let l = self.length;
        [
            Field::from_fn(grid, |x| (S::PI() * x / l).sin()),
            Field::from_fn(grid, |x| x / l),
        ]
        .into_iter()
        .map(|f| {
            let h1 = norms(&f).h1;
            f.scaled(S::lit(1.0 / h1))
        })
        .collect()
    }

    /// Whether deviations of `H^1` size `amplitude` are controlled for every
    /// shape and alpha.
    pub fn admissible(&self, amplitude: S) -> Result<bool> {
        let grid = Grid1D::new(S::zero(), self.length, self.n)?;
        let tgrid = TimeGrid::new(S::zero(), self.horizon, self.m)?;
        for shape in self.reference_shapes(grid) {
            let y0 = shape.scaled(amplitude).map(|v| v + self.target);
            for &a in &self.alphas {
                match local_exact_to_constant(&y0, &MeanPath::Constant(self.target), AlphaParam::new(a)?, tgrid, &self.config) {
                    Ok(_) => {}
                    Err(Error::NonConvergence { .. }) | Err(Error::Solver(_)) => return Ok(false),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(true)
    }
}

/// Calibrated `H^1` threshold for [`local_exact_to_constant`], cached in `cal`.
pub fn viscous_threshold<S: Real>(cal: &mut Calibrator, spec: &ViscousCalibrationSpec<S>) -> Result<Threshold> {
    cal.cached(spec.key(), || {
        bisect_threshold(spec.upper, spec.bisection_steps, |a| spec.admissible(S::lit(a)))
    })
}

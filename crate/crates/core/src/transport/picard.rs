//! Fixed-point null control of the perturbed transport system
//! `y_t + (lambda + z) y_x = 0` around the return trajectory.

use super::flow::Velocity;
use super::lambda::LambdaProfile;
use crate::controls::ControlTriple;
use crate::error::{Error, Result};
use crate::filter::{
    extend_even_c2, extend_odd_c1, make_cutoff, AlphaParam, CutoffProfile, ExtendedGrid, FilterSolver,
};
use crate::grid::{Field, SpaceTimeField, TimeGrid};
use crate::interp::{cubic_at, SpaceInterp};
use crate::scalar::{sup_diff, Real};
use serde::Serialize;

/// Smoothness class of the extension applied to the initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum Regularity {
    /// Odd reflection, continuous first derivative.
    #[default]
    C1,
    /// Even three-point reflection, continuous second derivative.
    C2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig<S> {
    pub tol: S,
    pub max_iter: usize,
    pub interp: SpaceInterp,
    pub substeps: usize,
    pub regularity: Regularity,
}

impl<S: Real> Default for PicardConfig<S> {
    fn default() -> Self {
        Self {
            tol: S::lit(1e-10),
            max_iter: 30,
            interp: SpaceInterp::Linear,
            substeps: 4,
            regularity: Regularity::C1,
        }
    }
}

/// Initial datum, return profile, filter and meshes of one null-control run.
#[derive(Debug, Clone)]
pub struct NullControlProblem<S> {
    pub y0: Field<S>,
    pub lambda: LambdaProfile<S>,
    pub alpha: AlphaParam<S>,
    pub ext: ExtendedGrid<S>,
    pub tgrid: TimeGrid<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardReport {
    pub iterations: usize,
    pub gaps: Vec<f64>,
    pub converged: bool,
    /// `sup |z*|` of the last map evaluation.
    pub max_zstar: f64,
    /// `sup |D_k(x) - (x - int_0^{t_k} lambda)|` over nodes and frames.
    pub max_deviation: f64,
    /// Departure maps strictly increasing at every frame.
    pub monotone: bool,
    /// Largest displacement of a characteristic over one time step.
    pub max_step_displacement: f64,
}

#[derive(Debug, Clone)]
pub struct PicardSolution<S> {
    pub y: SpaceTimeField<S>,
    pub z: SpaceTimeField<S>,
    /// Cut-off extension of `z` on the padded grid.
    pub zstar: SpaceTimeField<S>,
    /// `departures[k][j]`: foot at time `t0` of the characteristic through
    /// padded node `j` at time `t_k`.
    pub departures: SpaceTimeField<S>,
    /// Perturbation-level controls: traces of `y`, zero distributed control.
    pub controls: ControlTriple<S>,
    pub lambda: LambdaProfile<S>,
    pub report: PicardReport,
}

struct MapOutput<S> {
    y: Vec<Vec<S>>,
    zstar: Vec<Vec<S>>,
    departures: Vec<Vec<S>>,
    max_zstar: S,
    max_deviation: S,
    monotone: bool,
    max_step: S,
}

/// Map `h -> y` of the fixed-point argument, evaluated on a fixed problem.
struct TransportMap<S> {
    problem: NullControlProblem<S>,
    config: PicardConfig<S>,
    filter: FilterSolver<S>,
    chi: CutoffProfile<S>,
    y0_star: Vec<S>,
}

impl<S: Real> TransportMap<S> {
    fn new(problem: NullControlProblem<S>, config: PicardConfig<S>) -> Result<Self> {
        problem.ext.base.check_same(&problem.y0.grid)?;
        let chi = make_cutoff(&problem.ext);
        let extended = match config.regularity {
            Regularity::C1 => extend_odd_c1(&problem.y0, &problem.ext)?,
            Regularity::C2 => extend_even_c2(&problem.y0, &problem.ext)?,
        };
        let y0_star = extended
            .values
            .iter()
            .zip(&chi.samples.values)
            .map(|(&a, &c)| a * c)
            .collect();
        let filter = FilterSolver::new(problem.ext.base, problem.alpha);
        Ok(Self {
            problem,
            config,
            filter,
            chi,
            y0_star,
        })
    }

    fn zstar_frame(&self, h: &[S]) -> Result<(Vec<S>, Vec<S>)> {
        let base = self.problem.ext.base;
        let mut z = vec![S::zero(); base.n];
        self.filter.solve_with_traces(h, &mut z);
        let zf = Field::from_parts(base, z);
        let ext = extend_even_c2(&zf, &self.problem.ext)?;
        let star = ext
            .values
            .iter()
            .zip(&self.chi.samples.values)
            .map(|(&a, &c)| a * c)
            .collect();
        Ok((zf.values, star))
    }

    fn y0_star_at(&self, x: S) -> S {
        let g = &self.problem.ext.ext;
        if x < g.x_left || x > g.x_right {
            S::zero()
        } else {
            cubic_at(&self.y0_star, g, x)
        }
    }

    fn apply(&self, h: &[Vec<S>]) -> Result<MapOutput<S>> {
        let p = &self.problem;
        let tg = p.tgrid;
        let ext = p.ext.ext;
        let pad = p.ext.pad;
        let nb = p.ext.base.n;
        let mut zstar = Vec::with_capacity(tg.m + 1);
        for frame in h {
            zstar.push(self.zstar_frame(frame)?.1);
        }
        let zs = SpaceTimeField {
            tgrid: tg,
            grid: ext,
            frames: zstar,
        };
        let max_zstar = zs.sup();
        let vel = Velocity::new(&p.lambda, &zs, self.config.interp);
        let max_step = tg.dt * vel.speed_bound();
        if max_step > p.ext.eta {
            return Err(Error::StepTooCoarse {
                displacement: max_step.as_f64(),
                limit: p.ext.eta.as_f64(),
            });
        }

        let nodes = ext.nodes();
        let mut dep = nodes.clone();
        let mut departures = Vec::with_capacity(tg.m + 1);
        departures.push(dep.clone());
        let mut y = Vec::with_capacity(tg.m + 1);
        y.push(p.y0.values.clone());
        let mut monotone = true;
        let mut max_dev = S::zero();
        let mut next = vec![S::zero(); ext.n];
        for k in 0..tg.m {
            let (ta, tb) = (tg.t(k), tg.t(k + 1));
            let shift = p.lambda.primitive(ta) - p.lambda.primitive(tg.t0);
            let stepper = vel.stepper(k, tb, ta, self.config.substeps);
            for (j, &xj) in nodes.iter().enumerate() {
                let xback = stepper.run(xj);
                next[j] = if xback < ext.x_left {
                    xback - shift
                } else if xback > ext.x_right {
                    dep[ext.n - 1] + (xback - ext.x_right)
                } else {
                    cubic_at(&dep, &ext, xback)
                };
            }
            std::mem::swap(&mut dep, &mut next);
            let shift_b = p.lambda.primitive(tb) - p.lambda.primitive(tg.t0);
            for (j, &xj) in nodes.iter().enumerate() {
                max_dev = max_dev.max((dep[j] - (xj - shift_b)).abs());
            }
            monotone &= dep.windows(2).all(|w| w[1] > w[0]);
            let frame: Vec<S> = (0..nb).map(|i| self.y0_star_at(dep[pad + i])).collect();
            y.push(frame);
            departures.push(dep.clone());
        }
        Ok(MapOutput {
            y,
            zstar: zs.frames,
            departures,
            max_zstar,
            max_deviation: max_dev,
            monotone,
            max_step,
        })
    }
}

/// Iterates the transport map from `h = 0` until successive iterates agree
/// to `config.tol` in the space-time sup norm.
pub fn picard_null_control<S: Real>(
    problem: &NullControlProblem<S>,
    config: &PicardConfig<S>,
) -> Result<PicardSolution<S>> {
    let map = TransportMap::new(problem.clone(), *config)?;
    let tg = problem.tgrid;
    let base = problem.ext.base;
    let mut h = vec![vec![S::zero(); base.n]; tg.m + 1];
    let mut gaps: Vec<f64> = Vec::new();
    let mut out;
    loop {
        out = map.apply(&h)?;
        let gap = h
            .iter()
            .zip(&out.y)
            .fold(S::zero(), |m, (a, b)| m.max(sup_diff(a, b)));
        gaps.push(gap.as_f64());
        h = std::mem::take(&mut out.y);
        let done = gap <= config.tol;
        let diverged = !gap.is_finite() || (gaps.len() > 3 && gap.as_f64() > 1e3 * gaps[0].max(1e-300));
        if done {
            break;
        }
        if gaps.len() >= config.max_iter || diverged {
            return Err(Error::NonConvergence {
                what: "transport fixed point".into(),
                iterations: gaps.len(),
                last: gap.as_f64(),
                history: gaps,
            });
        }
    }
    let iterations = gaps.len();
    let y = SpaceTimeField::new(tg, base, h)?;
    let z_frames: Vec<Vec<S>> = y
        .frames
        .iter()
        .map(|f| map.zstar_frame(f).map(|(z, _)| z))
        .collect::<Result<_>>()?;
    let z = SpaceTimeField::new(tg, base, z_frames)?;
    let v_l = y.node_series(0);
    let v_r = y.node_series(base.n - 1);
    let controls = ControlTriple::new(tg, vec![S::zero(); tg.m + 1], v_l, v_r)?;
    Ok(PicardSolution {
        zstar: SpaceTimeField::new(tg, problem.ext.ext, out.zstar)?,
        departures: SpaceTimeField::new(tg, problem.ext.ext, out.departures)?,
        y,
        z,
        controls,
        lambda: problem.lambda,
        report: PicardReport {
            iterations,
            gaps,
            converged: true,
            max_zstar: out.max_zstar.as_f64(),
            max_deviation: out.max_deviation.as_f64(),
            monotone: out.monotone,
            max_step_displacement: out.max_step.as_f64(),
        },
    })
}

/// Full state `(lambda + y, lambda + z)` with controls `(lambda', lambda + traces)`.
#[derive(Debug, Clone)]
pub struct FullState<S> {
    pub y: SpaceTimeField<S>,
    pub z: SpaceTimeField<S>,
    pub controls: ControlTriple<S>,
}

pub fn lift_to_full_state<S: Real>(
    y_pert: &SpaceTimeField<S>,
    z_pert: &SpaceTimeField<S>,
    lambda: &LambdaProfile<S>,
) -> Result<FullState<S>> {
    y_pert.grid.check_same(&z_pert.grid)?;
    let tg = y_pert.tgrid;
    let lam = lambda.samples(&tg);
    let shift = |f: &SpaceTimeField<S>| SpaceTimeField {
        tgrid: tg,
        grid: f.grid,
        frames: f
            .frames
            .iter()
            .zip(&lam)
            .map(|(row, &l)| row.iter().map(|&v| v + l).collect())
            .collect(),
    };
    let y = shift(y_pert);
    let z = shift(z_pert);
    let n = y.grid.n;
    let controls = ControlTriple::new(
        tg,
        lambda.derivative_samples(&tg),
        y.node_series(0),
        y.node_series(n - 1),
    )?;
    Ok(FullState { y, z, controls })
}

/// `max |Y_t + Z Y_x - p|` over interior space-time nodes, with centred
/// differences in both variables.
pub fn transport_residual<S: Real>(
    y: &SpaceTimeField<S>,
    z: &SpaceTimeField<S>,
    controls: &ControlTriple<S>,
) -> f64 {
    let tg = y.tgrid;
    let dx = y.grid.dx;
    let two = S::lit(2.0);
    let mut worst = S::zero();
    for k in 1..tg.m {
        let (a, b, c) = (&y.frames[k - 1], &y.frames[k], &y.frames[k + 1]);
        for i in 1..y.grid.n - 1 {
            let yt = (c[i] - a[i]) / (two * tg.dt);
            let yx = (b[i + 1] - b[i - 1]) / (two * dx);
            worst = worst.max((yt + z.frames[k][i] * yx - controls.p[k]).abs());
        }
    }
    worst.as_f64()
}

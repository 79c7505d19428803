//! Global exact control of the viscous system onto a constant `N`: a free
//! smoothing run, an approximate-control window of length `tau` ending at
//! `T/2`, and local exact control over `[T/2, T]`.

use super::spectral::h34_surrogate;
use crate::control::{
    approx_control_stage, local_exact_to_constant, viscous_threshold, ApproxReport, BridgeConfig, LocalExactConfig,
    LocalExactReport, MeanPath, ViscousCalibrationSpec,
};
use crate::controls::{ControlNorms, ControlTriple};
use crate::error::{Error, Result};
use crate::filter::AlphaParam;
use crate::grid::{norms, Field, SpaceTimeField, TimeGrid};
use crate::scalar::{sup_diff, Real};
use crate::transport::{CalibrationSpec, Calibrator};
use crate::viscous::{simulate_viscous, smoothing_monitor, SmoothingReport, ViscousConfig, ViscousReport, ViscousRun};
use serde::Serialize;
use std::time::Instant;

/// Time layout of the three stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StagePlan {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "T_star")]
    pub t_star: f64,
    pub tau: f64,
    #[serde(rename = "N")]
    pub target: f64,
}

impl StagePlan {
    pub fn new(horizon: f64, t_star: f64, tau: f64, target: f64) -> Result<Self> {
        if !(horizon > 0.0 && tau > 0.0 && t_star >= 0.0) {
            return Err(Error::config(format!(
                "stage plan needs T > 0, tau > 0, T* >= 0 (got T = {horizon}, tau = {tau}, T* = {t_star})"
            )));
        }
        if !(t_star < 0.5 * horizon - tau) {
            return Err(Error::config(format!(
                "stage plan violates T* < T/2 - tau: T* = {t_star}, T/2 - tau = {}",
                0.5 * horizon - tau
            )));
        }
        Ok(Self { horizon, t_star, tau, target })
    }

    /// `[0, T/2 - tau]`, `[T/2 - tau, T/2]`, `[T/2, T]`.
    pub fn windows(&self) -> [(f64, f64); 3] {
        let h = 0.5 * self.horizon;
        [(0.0, h - self.tau), (h - self.tau, h), (h, self.horizon)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<S> {
    /// Steps over `[0, T]`; the free and local stages use this step size.
    pub steps: usize,
    /// Initial approximate-control window; `T/20` when unset.
    pub tau: Option<S>,
    pub max_tau_halvings: usize,
    /// `H^1` radius around `N` within which local exact control is trusted.
    pub delta_hat_v: f64,
    /// Terminal tolerance is `terminal_factor * (dx + dt)`.
    pub terminal_factor: f64,
    pub bridge: BridgeConfig<S>,
    pub local: LocalExactConfig<S>,
    pub viscous: ViscousConfig<S>,
}

impl<S: Real> PipelineConfig<S> {
    pub fn new(steps: usize, delta_hat2: f64, delta_hat_v: f64) -> Self {
        Self {
            steps,
            tau: None,
            max_tau_halvings: 6,
            delta_hat_v,
            terminal_factor: 20.0,
            bridge: BridgeConfig::new(delta_hat2),
            local: LocalExactConfig::default(),
            viscous: ViscousConfig::default(),
        }
    }

    /// Thresholds from the default calibration families for `[0, length]`
    /// and horizon `horizon`, with cutoff width `eta`.
    pub fn calibrated(cal: &mut Calibrator, length: S, horizon: S, target: S, eta: S, steps: usize) -> Result<Self> {
        let d2 = cal.threshold(&CalibrationSpec::c2_half_window(length, eta))?.delta_hat;
        let mut vspec = ViscousCalibrationSpec::coarse(length, horizon * S::lit(0.5), target);
        vspec.config.eta = eta;
        let dv = viscous_threshold(cal, &vspec)?.delta_hat;
        Ok(Self::new(steps, d2, dv).with_eta(eta))
    }

    pub fn with_eta(mut self, eta: S) -> Self {
        self.bridge.eta = eta;
        self.local.eta = eta;
        self
    }
}

/// End-node zeroing applied to data with nonzero traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Taper {
    pub applied: bool,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub name: String,
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    pub seconds: f64,
    /// `H^1` distance to `N` at entry and exit, and sup distance at exit.
    pub entry_h1: f64,
    pub exit_h1: f64,
    pub exit_sup: f64,
    pub controls: ControlNorms,
    pub max_principle_ok: bool,
    pub filter_ok: bool,
    pub energy_ok: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSurrogates {
    pub v_l: f64,
    pub v_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub alpha: f64,
    pub eta: f64,
    pub n: usize,
    pub dx: f64,
    pub plan: StagePlan,
    pub delta_hat: f64,
    pub delta_hat_v: f64,
    pub tau: f64,
    pub tau_halvings: usize,
    /// `(tau, ||y(T/2) - N||_{H^1})` for every window tried.
    pub tau_history: Vec<(f64, f64)>,
    pub taper: Taper,
    pub smoothing: Option<SmoothingReport>,
    pub stages: Vec<StageSummary>,
    pub approx: Option<ApproxReport>,
    pub local_exact: Option<LocalExactReport>,
    pub control_norms: ControlNorms,
    pub h34: TraceSurrogates,
    pub joint_defects: Vec<f64>,
    pub terminal_sup: f64,
    pub terminal_tolerance: f64,
    pub terminal_ok: bool,
    pub monitors_ok: bool,
    pub seconds: f64,
}

/// One stage, on absolute times.
#[derive(Debug, Clone)]
pub struct StageRun<S> {
    pub name: &'static str,
    pub y: SpaceTimeField<S>,
    pub z: SpaceTimeField<S>,
    pub controls: ControlTriple<S>,
    pub monitors: ViscousReport,
}

#[derive(Debug, Clone)]
pub struct GlobalViscousControl<S> {
    pub stages: Vec<StageRun<S>>,
    pub report: PipelineReport,
}

impl<S: Real> GlobalViscousControl<S> {
    /// `(t, p, v_l, v_r)` over `[0, T]`, listing each stage joint once.
    pub fn control_rows(&self) -> Vec<[S; 4]> {
        control_rows(&self.stages)
    }

    /// `(t, frame)` over `[0, T]`, listing each stage joint once.
    pub fn frames(&self) -> Vec<(S, &[S])> {
        let mut out = Vec::new();
        for (i, s) in self.stages.iter().enumerate() {
            for (k, f) in s.y.frames.iter().enumerate().skip(usize::from(i > 0)) {
                out.push((s.y.tgrid.t(k), f.as_slice()));
            }
        }
        out
    }

    pub fn terminal(&self) -> Field<S> {
        self.stages.last().expect("at least one stage").y.last_frame()
    }
}

fn control_rows<S: Real>(stages: &[StageRun<S>]) -> Vec<[S; 4]> {
    let mut rows = Vec::new();
    for (i, s) in stages.iter().enumerate() {
        rows.extend(s.controls.rows().into_iter().skip(usize::from(i > 0)));
    }
    rows
}

fn summary<S: Real>(
    name: &str,
    run: &ViscousRun<S>,
    controls: &ControlTriple<S>,
    target: &Field<S>,
    offset: f64,
    seconds: f64,
) -> Result<StageSummary> {
    let entry = run.y.frame(0).sub(target)?;
    let exit = run.y.last_frame().sub(target)?;
    Ok(StageSummary {
        name: name.to_string(),
        t_start: offset,
        t_end: offset + controls.tgrid.horizon().as_f64(),
        steps: controls.tgrid.m,
        seconds,
        entry_h1: norms(&entry).h1,
        exit_h1: norms(&exit).h1,
        exit_sup: exit.sup().as_f64(),
        controls: controls.norms(),
        max_principle_ok: run.report.max_principle_ok,
        filter_ok: run.report.filter_ok,
        energy_ok: run.report.energy_ok,
    })
}

fn shifted<S: Real>(name: &'static str, run: ViscousRun<S>, controls: ControlTriple<S>, offset: S) -> StageRun<S> {
    let tg = controls.tgrid.shifted(offset);
    StageRun {
        name,
        y: SpaceTimeField { tgrid: tg, ..run.y },
        z: SpaceTimeField { tgrid: tg, ..run.z },
        controls: ControlTriple { tgrid: tg, ..controls },
        monitors: run.report,
    }
}

/// Pins the first trace samples to the incoming state so that the hand-off
/// between stages is exact.
fn pin_entry<S: Real>(controls: &mut ControlTriple<S>, y: &Field<S>) {
    controls.v_l[0] = y.first();
    controls.v_r[0] = y.last();
}

fn combine(stages: &[StageSummary]) -> ControlNorms {
    stages.iter().fold(
        ControlNorms { p_c0: 0.0, v_l_c0: 0.0, v_r_c0: 0.0, trace_c1: 0.0 },
        |a, s| ControlNorms {
            p_c0: a.p_c0.max(s.controls.p_c0),
            v_l_c0: a.v_l_c0.max(s.controls.v_l_c0),
            v_r_c0: a.v_r_c0.max(s.controls.v_r_c0),
            trace_c1: a.trace_c1.max(s.controls.trace_c1),
        },
    )
}

/// Drives `y0` to the constant `target` at time `horizon`.
pub fn global_viscous_control<S: Real>(
    y0: &Field<S>,
    target: S,
    horizon: S,
    alpha: AlphaParam<S>,
    config: &PipelineConfig<S>,
) -> Result<GlobalViscousControl<S>> {
    let clock = Instant::now();
    let grid = y0.grid;
    let goal = Field::constant(grid, target);
    let dt = horizon / S::of_usize(config.steps.max(1));
    let steps_for = |len: S| (len / dt).round().to_usize().unwrap_or(1).max(1);
    let half = horizon * S::lit(0.5);
    let tau0 = config.tau.unwrap_or(horizon / S::lit(20.0));

    let scale = target.abs().max(S::one());
    if sup_diff(&y0.values, &goal.values) <= S::lit(1e-14) * scale {
        return Ok(trivial(y0, target, horizon, tau0, alpha, config, steps_for, clock));
    }

    let mut start = y0.clone();
    let n = grid.n;
    let negligible = S::lit(1e-12) * y0.sup().max(S::one());
    let taper = Taper {
        applied: y0.first().abs() > negligible || y0.last().abs() > negligible,
        left: y0.first().as_f64(),
        right: y0.last().as_f64(),
    };
    start.values[0] = S::zero();
    start.values[n - 1] = S::zero();

    let smoothing = smoothing_monitor(&start, alpha, horizon, config.steps, &config.viscous)
        .map_err(|e| e.in_stage("smoothing"))?;

    let mut tau = tau0;
    let mut history = Vec::new();
    let mut halvings = 0;
    let (plan, free, approx, run2, approx_controls, secs) = loop {
        let plan = StagePlan::new(horizon.as_f64(), smoothing.t_star, tau.as_f64(), target.as_f64())?;
        let t = Instant::now();
        let len1 = half - tau;
        let tg1 = TimeGrid::new(S::zero(), len1, steps_for(len1))?;
        let c1 = ControlTriple::zeros(tg1);
        let run1 = simulate_viscous(&start, &c1, alpha, &config.viscous).map_err(|e| e.in_stage("free"))?;
        let s1 = t.elapsed().as_secs_f64();
        let y20 = run1.y.last_frame();

        let t = Instant::now();
        let stage = approx_control_stage(&y20, &goal, alpha, tau, &config.bridge).map_err(|e| e.in_stage("approx"))?;
        let mut c2 = stage.controls.clone();
        pin_entry(&mut c2, &y20);
        let run2 = simulate_viscous(&y20, &c2, alpha, &config.viscous).map_err(|e| e.in_stage("approx"))?;
        let s2 = t.elapsed().as_secs_f64();
        let dist = norms(&run2.y.last_frame().sub(&goal)?).h1;
        history.push((tau.as_f64(), dist));
        if dist <= config.delta_hat_v {
            break (plan, (run1, c1), stage.report, run2, c2, (s1, s2));
        }
        if halvings == config.max_tau_halvings {
            return Err(Error::NonConvergence {
                what: format!("tau halving toward the H1 radius {} around N", config.delta_hat_v),
                iterations: halvings,
                last: dist,
                history: history.iter().map(|h| h.1).collect(),
            }
            .in_stage("approx"));
        }
        tau *= S::lit(0.5);
        halvings += 1;
    };

    let t = Instant::now();
    let y30 = run2.y.last_frame();
    let tg3 = TimeGrid::new(S::zero(), half, steps_for(half))?;
    let local = local_exact_to_constant(&y30, &MeanPath::Constant(target), alpha, tg3, &config.local)
        .map_err(|e| e.in_stage("local-exact"))?;
    let mut c3 = local.controls.clone();
    pin_entry(&mut c3, &y30);
    let run3 = simulate_viscous(&y30, &c3, alpha, &config.viscous).map_err(|e| e.in_stage("local-exact"))?;
    let s3 = t.elapsed().as_secs_f64();

    let windows = plan.windows();
    let summaries = vec![
        summary("free", &free.0, &free.1, &goal, windows[0].0, secs.0)?,
        summary("approx", &run2, &approx_controls, &goal, windows[1].0, secs.1)?,
        summary("local-exact", &run3, &c3, &goal, windows[2].0, s3)?,
    ];
    let stages = vec![
        shifted("free", free.0, free.1, S::zero()),
        shifted("approx", run2, approx_controls, half - tau),
        shifted("local-exact", run3, c3, half),
    ];
    let tol = config.terminal_factor * (grid.dx + tg3.dt).as_f64();
    Ok(finish(
        stages,
        summaries,
        FinishInfo {
            alpha,
            target,
            plan,
            config,
            tau_halvings: halvings,
            tau_history: history,
            taper,
            smoothing: Some(smoothing),
            approx: Some(approx),
            local_exact: Some(local.report),
            tolerance: tol,
            clock,
        },
    ))
}

struct FinishInfo<'a, S> {
    alpha: AlphaParam<S>,
    target: S,
    plan: StagePlan,
    config: &'a PipelineConfig<S>,
    tau_halvings: usize,
    tau_history: Vec<(f64, f64)>,
    taper: Taper,
    smoothing: Option<SmoothingReport>,
    approx: Option<ApproxReport>,
    local_exact: Option<LocalExactReport>,
    tolerance: f64,
    clock: Instant,
}

fn finish<S: Real>(stages: Vec<StageRun<S>>, summaries: Vec<StageSummary>, info: FinishInfo<'_, S>) -> GlobalViscousControl<S> {
    let joint_defects = stages
        .windows(2)
        .map(|w| sup_diff(&w[0].y.frames[w[0].y.frames.len() - 1], &w[1].y.frames[0]).as_f64())
        .collect();
    let grid = stages[0].y.grid;
    let rows = control_rows(&stages);
    let series = |j: usize| rows.iter().map(|r| (r[0].as_f64(), r[j].as_f64())).collect::<Vec<_>>();
    let last = &stages[stages.len() - 1].y;
    let terminal_sup = last.last_frame().map(|v| v - info.target).sup().as_f64();
    let monitors_ok = summaries
        .iter()
        .all(|s| s.max_principle_ok && s.filter_ok && s.energy_ok.unwrap_or(true));
    let report = PipelineReport {
        alpha: info.alpha.alpha.as_f64(),
        eta: info.config.bridge.eta.as_f64(),
        n: grid.n,
        dx: grid.dx.as_f64(),
        plan: info.plan,
        delta_hat: info.config.bridge.delta_hat2,
        delta_hat_v: info.config.delta_hat_v,
        tau: info.plan.tau,
        tau_halvings: info.tau_halvings,
        tau_history: info.tau_history,
        taper: info.taper,
        smoothing: info.smoothing,
        control_norms: combine(&summaries),
        stages: summaries,
        approx: info.approx,
        local_exact: info.local_exact,
        h34: TraceSurrogates { v_l: h34_surrogate(&series(2)), v_r: h34_surrogate(&series(3)) },
        joint_defects,
        terminal_sup,
        terminal_tolerance: info.tolerance,
        terminal_ok: terminal_sup <= info.tolerance,
        monitors_ok,
        seconds: info.clock.elapsed().as_secs_f64(),
    };
    GlobalViscousControl { stages, report }
}

/// Data already equal to `N`: every stage holds the constant state with
/// both traces at `N`.
#[allow(clippy::too_many_arguments)]
fn trivial<S: Real>(
    y0: &Field<S>,
    target: S,
    horizon: S,
    tau: S,
    alpha: AlphaParam<S>,
    config: &PipelineConfig<S>,
    steps_for: impl Fn(S) -> usize,
    clock: Instant,
) -> GlobalViscousControl<S> {
    let half = horizon * S::lit(0.5);
    let plan = StagePlan { horizon: horizon.as_f64(), t_star: 0.0, tau: tau.as_f64(), target: target.as_f64() };
    let goal = Field::constant(y0.grid, target);
    let mut stages = Vec::new();
    let mut summaries = Vec::new();
    for (name, (a, b)) in ["free", "approx", "local-exact"].into_iter().zip(plan.windows()) {
        let (a, b) = (S::lit(a), S::lit(b));
        let tg = TimeGrid::new(a, b, steps_for(b - a)).expect("positive window");
        let controls = ControlTriple::constant_traces(tg, target);
        let frames = vec![goal.values.clone(); tg.m + 1];
        let y = SpaceTimeField::new(tg, y0.grid, frames).expect("matching frames");
        let monitors = ViscousReport {
            m_t: target.abs().as_f64(),
            max_sup: target.abs().as_f64(),
            max_principle_ok: true,
            energy: Vec::new(),
            energy_bound: None,
            energy_ok: None,
            max_filter_residual: 0.0,
            filter_ok: true,
            halvings: 0,
            max_passes: 0,
        };
        summaries.push(StageSummary {
            name: name.to_string(),
            t_start: a.as_f64(),
            t_end: b.as_f64(),
            steps: tg.m,
            seconds: 0.0,
            entry_h1: 0.0,
            exit_h1: 0.0,
            exit_sup: 0.0,
            controls: controls.norms(),
            max_principle_ok: true,
            filter_ok: true,
            energy_ok: None,
        });
        stages.push(StageRun { name, z: y.clone(), y, controls, monitors });
    }
    let dt = half / S::of_usize(steps_for(half));
    finish(
        stages,
        summaries,
        FinishInfo {
            alpha,
            target,
            plan,
            config,
            tau_halvings: 0,
            tau_history: Vec::new(),
            taper: Taper { applied: false, left: y0.first().as_f64(), right: y0.last().as_f64() },
            smoothing: None,
            approx: None,
            local_exact: None,
            tolerance: config.terminal_factor * (y0.grid.dx + dt).as_f64(),
            clock,
        },
    )
}

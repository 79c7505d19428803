use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use burgers_alpha::control::{
    approx_control_stage, hum_null_control, local_exact_to_constant, ApproxStage, BridgeConfig, HumProblem, LocalExactConfig,
    MeanPath,
};
use burgers_alpha::filter::{apply_cutoff, extend_odd_c1, make_cutoff};
use burgers_alpha::grid::{l2_slice, norms};
use burgers_alpha::io::{write_controls, write_field, write_remainder_sweep, write_table, write_trajectory};
use burgers_alpha::pipeline::{alpha_limit_study, global_viscous_control, loglog_slope, par_map, PipelineConfig};
use burgers_alpha::transport::{
    global_inviscid_control, simulate_inviscid, CalibrationSpec, Calibrator, InviscidControlConfig, PicardConfig, PicardReport,
};
use burgers_alpha::viscous::{simulate_viscous, smoothing_monitor, ViscousConfig, ViscousReport};
use burgers_alpha::{
    Alpha64, AlphaParam, ControlTriple, Error, ExtendedGrid, Field64, Grid64, Result, SpaceTimeField, TimeGrid, TimeGrid64,
    Trajectory64,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Command, RunConfig};
use crate::profile::Profile;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    /// Passes when `value <= limit`.
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), pass: value <= limit, value, limit }
    }

    fn flag(name: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), pass, value: f64::from(u8::from(pass)), limit: 1.0 }
    }
}

pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub dir: PathBuf,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Solver(format!("cannot write {}: {e}", path.display()))
}

pub fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| io_err(&path, e))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Solver(format!("json: {e}")))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))
}

fn frames(traj: &Trajectory64) -> Vec<(f64, &[f64])> {
    traj.frames.iter().enumerate().map(|(k, f)| (traj.tgrid.t(k), f.as_slice())).collect()
}

impl<'a> Run<'a> {
    pub fn new(cfg: &'a RunConfig, dir: PathBuf) -> Self {
        Self { cfg, dir, checks: Vec::new(), artifacts: Vec::new() }
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        write_json(&self.dir, name, value)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn trajectory(&mut self, name: &str, traj: &Trajectory64) -> Result<()> {
        write_trajectory(create(&self.dir, name)?, &traj.grid, &frames(traj), self.cfg.stride)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn controls(&mut self, rows: &[[f64; 4]]) -> Result<()> {
        write_controls(create(&self.dir, "controls.csv")?, rows)?;
        self.artifacts.push("controls.csv".to_string());
        Ok(())
    }

    fn grid(&self) -> Result<Grid64> {
        Grid64::new(0.0, self.cfg.length, self.cfg.n)
    }

    fn tgrid(&self) -> Result<TimeGrid64> {
        TimeGrid::new(0.0, self.cfg.horizon, self.cfg.m)
    }

    fn alpha(&self) -> Result<Alpha64> {
        AlphaParam::new(self.cfg.alpha)
    }

    fn initial(&self) -> Result<Field64> {
        Profile::parse(&self.cfg.profile)?.field(self.grid()?)
    }

    fn final_state(&self) -> Result<Field64> {
        Profile::parse(&self.cfg.target)?.field(self.grid()?)
    }

    fn viscous(&self) -> ViscousConfig<f64> {
        ViscousConfig { startup_steps: self.cfg.startup_steps, monitor_tol: self.cfg.monitor_tol, ..ViscousConfig::default() }
    }

    fn picard(&self) -> PicardConfig<f64> {
        PicardConfig { tol: self.cfg.tol, max_iter: self.cfg.max_iter, ..PicardConfig::default() }
    }

    fn bridge(&self, cal: &mut Calibrator) -> Result<BridgeConfig<f64>> {
        let d2 = match self.cfg.delta_hat2 {
            Some(d) => d,
            None => cal.threshold(&CalibrationSpec::c2_half_window(self.cfg.length, self.cfg.eta))?.delta_hat,
        };
        let mut b = BridgeConfig::new(d2);
        b.eta = self.cfg.eta;
        b.picard.tol = self.cfg.tol;
        b.picard.max_iter = self.cfg.max_iter;
        Ok(b)
    }

    fn tolerance(&self, grid: &Grid64, tgrid: &TimeGrid64) -> f64 {
        self.cfg.terminal_factor * (grid.dx + tgrid.dt)
    }

    fn monitors(&mut self, prefix: &str, r: &ViscousReport) {
        let p = |s: &str| if prefix.is_empty() { s.to_string() } else { format!("{prefix}.{s}") };
        self.checks.push(Check::at_most(p("max_principle"), r.max_sup, r.m_t * (1.0 + self.cfg.monitor_tol) + self.cfg.monitor_tol));
        self.checks.push(Check::flag(p("filter"), r.filter_ok));
        if let Some(ok) = r.energy_ok {
            self.checks.push(Check::flag(p("energy"), ok));
        }
    }

    fn picard_checks(&mut self, prefix: &str, r: &PicardReport) {
        self.checks.push(Check::flag(format!("{prefix}.converged"), r.converged));
        self.checks.push(Check::flag(format!("{prefix}.flow_monotone"), r.monotone));
        self.checks.push(Check::at_most(format!("{prefix}.deviation"), r.max_deviation, self.cfg.eta));
    }

    pub fn execute(&mut self) -> Result<()> {
        match self.cfg.command {
            Command::Simulate => self.simulate(),
            Command::ControlInviscid => self.control_inviscid(),
            Command::ControlViscous => self.control_viscous(),
            Command::Smooth => self.smooth(),
            Command::Approx => self.approx(),
            Command::LocalExact => self.local_exact(),
            Command::Pipeline => self.pipeline(),
            Command::AlphaLimit => self.alpha_limit(),
            Command::Sweep => self.sweep(),
        }
    }

    /// Zero distributed control, traces frozen at the initial end values.
    fn free_controls(&self, y0: &Field64) -> Result<ControlTriple<f64>> {
        let tg = self.tgrid()?;
        let k = tg.m + 1;
        ControlTriple::new(tg, vec![0.0; k], vec![y0.first(); k], vec![y0.last(); k])
    }

    fn simulate(&mut self) -> Result<()> {
        let y0 = self.initial()?;
        let controls = self.free_controls(&y0)?;
        let a = self.alpha()?;
        if self.cfg.system == "inviscid" {
            let run = simulate_inviscid(&y0, &controls, a)?;
            let finite = run.y.frames.iter().flatten().all(|v| v.is_finite());
            self.checks.push(Check::flag("finite", finite));
            self.trajectory("trajectory.csv", &run.y)?;
            self.json("report.json", &json!({ "system": "inviscid", "max_sup": run.y.sup(), "initial_sup": y0.sup() }))?;
            write_field(create(&self.dir, "final.csv")?, &run.y.last_frame())?;
            self.artifacts.push("final.csv".into());
            return Ok(());
        }
        let run = simulate_viscous(&y0, &controls, a, &self.viscous())?;
        self.monitors("", &run.report);
        self.trajectory("trajectory.csv", &run.y)?;
        self.json("report.json", &run.report)?;
        write_field(create(&self.dir, "final.csv")?, &run.y.last_frame())?;
        self.artifacts.push("final.csv".into());
        Ok(())
    }

    fn control_inviscid(&mut self) -> Result<()> {
        let (y0, yt) = (self.initial()?, self.final_state()?);
        let (g, tg, a) = (self.grid()?, self.tgrid()?, self.alpha()?);
        let delta_hat = match self.cfg.delta_hat {
            Some(d) => d,
            None => Calibrator::new().threshold(&CalibrationSpec::c1(self.cfg.length, self.cfg.horizon, self.cfg.eta))?.delta_hat,
        };
        let cfg = InviscidControlConfig { eta: self.cfg.eta, picard: self.picard(), ..InviscidControlConfig::default() };
        let sol = global_inviscid_control(&y0, &yt, a, tg, delta_hat, None, &cfg)?;
        let run = simulate_inviscid(&y0, &sol.controls, a)?;
        let err = run.y.last_frame().sub(&yt)?.sup();
        let tol = self.tolerance(&g, &tg);
        self.picard_checks("forward", &sol.forward.report);
        self.picard_checks("backward", &sol.backward.report);
        self.checks.push(Check::at_most("terminal", err, tol));
        self.controls(&sol.controls.rows())?;
        self.trajectory("trajectory.csv", &run.y)?;
        let report = json!({
            "gamma0": norms(&y0).c1,
            "gamma_T": norms(&yt).c1,
            "eta": self.cfg.eta,
            "delta_hat": delta_hat,
            "plan": sol.plan,
            "iterations": [sol.forward.report.iterations, sol.backward.report.iterations],
            "residuals": [sol.forward.report.gaps, sol.backward.report.gaps],
            "forward": sol.forward.report,
            "backward": sol.backward.report,
            "terminal_error": err,
            "terminal_tolerance": tol,
        });
        self.json("report.json", &report)
    }

    fn control_viscous(&mut self) -> Result<()> {
        let y0 = self.initial()?;
        let ext = ExtendedGrid::new(self.grid()?, self.cfg.eta)?;
        let tg = self.tgrid()?;
        let u0 = apply_cutoff(&extend_odd_c1(&y0, &ext)?, &make_cutoff(&ext))?;
        let adv = SpaceTimeField::from_fn(tg, ext.ext, |_, _| self.cfg.target_constant);
        let problem = HumProblem::new(ext, tg, adv, u0)?;
        let sol = hum_null_control(&problem)?;
        let scale = l2_slice(&problem.u0.values, &ext.ext);
        let ratio = if scale > 0.0 { sol.report.terminal_l2 / scale } else { sol.report.terminal_l2 };
        self.checks.push(Check::at_most("terminal_ratio", ratio, self.cfg.hum_ratio));
        self.trajectory("trajectory.csv", &sol.u)?;
        self.trajectory("control_window.csv", &sol.v)?;
        self.json("report.json", &sol.report)
    }

    fn smooth(&mut self) -> Result<()> {
        let y0 = self.initial()?;
        let r = smoothing_monitor(&y0, self.alpha()?, self.cfg.horizon, self.cfg.m, &self.viscous())?;
        self.checks.push(Check::flag("ordered_times", r.t1 <= r.t2 && r.t2 <= r.t_star && r.t_star <= self.cfg.horizon));
        self.checks.push(Check::flag("finite_bounds", r.lambda1.is_finite() && r.lambda2.is_finite() && r.c2_at_tstar.is_finite()));
        let rows = (0..r.times.len()).map(|k| vec![r.times[k], r.h1_history[k], r.h2_history[k], r.h3_history[k], r.c2_history[k]]);
        write_table(create(&self.dir, "smoothing_history.csv")?, &["t", "h1", "h2", "h3", "c2"], rows)?;
        self.artifacts.push("smoothing_history.csv".into());
        self.json("smoothing.json", &r)
    }

    fn approx_stage(&self, cal: &mut Calibrator, alpha: f64, tau: f64) -> Result<ApproxStage<f64>> {
        let bridge = self.bridge(cal)?;
        approx_control_stage(&self.initial()?, &self.final_state()?, AlphaParam::new(alpha)?, tau, &bridge)
    }

    fn approx(&mut self) -> Result<()> {
        let tau = self.cfg.tau.unwrap_or(self.cfg.horizon);
        let stage = self.approx_stage(&mut Calibrator::new(), self.cfg.alpha, tau)?;
        self.picard_checks("forward", &stage.report.forward);
        self.picard_checks("backward", &stage.report.backward);
        self.checks.push(Check::flag("terminal_h1_finite", stage.report.terminal_h1.is_finite()));
        let run = simulate_viscous(&self.initial()?, &stage.controls, self.alpha()?, &self.viscous())?;
        self.monitors("resimulated", &run.report);
        self.controls(&stage.controls.rows())?;
        self.trajectory("trajectory.csv", &stage.y)?;
        self.json("report.json", &stage.report)
    }

    fn local_exact(&mut self) -> Result<()> {
        let y0 = self.initial()?;
        let (g, tg, a) = (self.grid()?, self.tgrid()?, self.alpha()?);
        let cfg = LocalExactConfig { eta: self.cfg.eta, ..LocalExactConfig::default() };
        let sol = local_exact_to_constant(&y0, &MeanPath::Constant(self.cfg.target_constant), a, tg, &cfg)?;
        self.checks.push(Check::at_most("terminal", sol.report.terminal_sup, self.tolerance(&g, &tg)));
        let run = simulate_viscous(&y0, &sol.controls, a, &self.viscous())?;
        self.monitors("resimulated", &run.report);
        self.controls(&sol.controls.rows())?;
        self.trajectory("trajectory.csv", &sol.y)?;
        self.json("report.json", &sol.report)
    }

    fn pipeline(&mut self) -> Result<()> {
        let y0 = self.initial()?;
        let c = self.cfg;
        let mut pc = match (c.delta_hat2, c.delta_hat_v) {
            (Some(d2), Some(dv)) => PipelineConfig::new(c.m, d2, dv).with_eta(c.eta),
            _ => {
                let mut cal = Calibrator::new();
                let mut pc = PipelineConfig::calibrated(&mut cal, c.length, c.horizon, c.target_constant, c.eta, c.m)?;
                if let Some(d2) = c.delta_hat2 {
                    pc.bridge.delta_hat2 = d2;
                }
                if let Some(dv) = c.delta_hat_v {
                    pc.delta_hat_v = dv;
                }
                pc
            }
        };
        pc.tau = c.tau;
        pc.terminal_factor = c.terminal_factor;
        pc.viscous = self.viscous();
        pc.bridge.picard.tol = c.tol;
        pc.bridge.picard.max_iter = c.max_iter;
        let out = global_viscous_control(&y0, c.target_constant, c.horizon, self.alpha()?, &pc)?;
        let r = &out.report;
        self.checks.push(Check::at_most("terminal", r.terminal_sup, r.terminal_tolerance));
        for s in &out.stages {
            self.monitors(s.name, &s.monitors);
        }
        self.controls(&out.control_rows())?;
        write_trajectory(create(&self.dir, "trajectory.csv")?, &y0.grid, &out.frames(), c.stride)?;
        self.artifacts.push("trajectory.csv".into());
        self.json("report.json", &out.report)
    }

    fn alpha_limit(&mut self) -> Result<()> {
        let y0 = self.initial()?;
        let controls = self.free_controls(&y0)?;
        let table = alpha_limit_study(&y0, &controls, &self.cfg.alphas, self.cfg.reference_alpha, &self.viscous())?;
        self.checks.push(Check::flag("monotone", table.monotone));
        for row in &table.rows {
            self.checks.push(Check::flag(format!("alpha_{}.monitors", row.alpha), row.monitors_ok));
        }
        let rows = table.rows.iter().map(|r| vec![r.alpha, r.distance]);
        write_table(create(&self.dir, "alpha_limit.csv")?, &["alpha", "distance"], rows)?;
        self.artifacts.push("alpha_limit.csv".into());
        self.json("report.json", &table)
    }

    fn sweep(&mut self) -> Result<()> {
        let c = self.cfg;
        let mut cal = Calibrator::new();
        let bridge = self.bridge(&mut cal)?;
        let (y0, yf) = (self.initial()?, self.final_state()?);
        let cells: Vec<(f64, f64)> =
            c.alphas.iter().flat_map(|&a| c.tau_fractions.iter().map(move |&f| (a, f * c.horizon))).collect();
        let dir = &self.dir;
        let results = par_map(&cells, |&(a, tau)| -> Result<f64> {
            let stage = approx_control_stage(&y0, &yf, AlphaParam::new(a)?, tau, &bridge)?;
            let sub = dir.join(format!("alpha_{a}_tau_{tau}"));
            std::fs::create_dir_all(&sub).map_err(|e| io_err(&sub, e))?;
            write_controls(create(&sub, "controls.csv")?, &stage.controls.rows())?;
            write_json(&sub, "report.json", &stage.report)?;
            Ok(stage.report.terminal_h1)
        });
        let mut rows = Vec::with_capacity(cells.len());
        for (&(a, tau), r) in cells.iter().zip(results) {
            let h1 = r.map_err(|e| e.in_stage(&format!("alpha {a}, tau {tau}")))?;
            rows.push((tau, a, h1));
            self.artifacts.push(format!("alpha_{a}_tau_{tau}/controls.csv"));
        }
        write_remainder_sweep(create(&self.dir, "remainder_sweep.csv")?, &rows)?;
        self.artifacts.push("remainder_sweep.csv".into());
        let mut fits = Vec::new();
        for &a in &c.alphas {
            let (taus, errs): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.1 == a).map(|r| (r.0, r.2)).unzip();
            let slope = loglog_slope(&taus, &errs);
            if let Some(s) = slope {
                self.checks.push(Check { name: format!("alpha_{a}.exponent"), pass: s >= 0.45, value: s, limit: 0.45 });
            }
            fits.push(json!({ "alpha": a, "exponent": slope }));
        }
        self.json("tau_fit.json", &json!({ "delta_hat2": bridge.delta_hat2, "fits": fits }))
    }
}

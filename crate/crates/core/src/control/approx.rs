//! Approximate control over a short window `[0, tau]`: a fast inviscid
//! bridge from `y0` to `y_f` driven by `lambda^tau`, plus the parabolic
//! remainder that accounts for viscosity.

use crate::controls::ControlTriple;
use crate::error::{Error, Result};
use crate::filter::{AlphaParam, ExtendedGrid, FilterSolver};
use crate::grid::{diff1_slice, diff2_slice, norms, Field, SpaceTimeField, TimeGrid};
use crate::scalar::{sup_abs, sup_diff, Real};
use crate::transport::lambda::{LambdaProfile, LambdaWindow};
use crate::transport::picard::{picard_null_control, NullControlProblem, PicardConfig, PicardReport, Regularity};
use crate::tridiag::Tridiagonal;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeConfig<S> {
    pub eta: S,
    pub margin: S,
    /// Calibrated second-order smallness threshold of the half-window
    /// null controller; the window must satisfy `tau * M <= delta_hat2`.
    pub delta_hat2: f64,
    /// Steps on each half of the window; by default the return profile moves
    /// at most one cell per step.
    pub steps_per_half: Option<usize>,
    pub picard: PicardConfig<S>,
}

impl<S: Real> BridgeConfig<S> {
    pub fn new(delta_hat2: f64) -> Self {
        Self {
            eta: S::lit(0.25),
            margin: S::lit(0.1),
            delta_hat2,
            steps_per_half: None,
            picard: PicardConfig {
                regularity: Regularity::C2,
                ..PicardConfig::default()
            },
        }
    }
}

/// Inviscid trajectory `u` with velocity `w + lambda^tau` joining two
/// states over `[0, tau]`.
#[derive(Debug, Clone)]
pub struct Bridge<S> {
    pub u: SpaceTimeField<S>,
    pub w: SpaceTimeField<S>,
    /// `lambda^tau(t) = lambda(t/tau)/tau` on `[0, tau]`.
    pub lambda: LambdaProfile<S>,
    /// Largest window admitted by the calibrated threshold.
    pub tau0: f64,
    pub bound: f64,
    pub forward: PicardReport,
    pub backward: PicardReport,
}

/// Builds the bridge from `u0` to `u_f` (both with `C^2` norm at most
/// `bound`, which defaults to the larger of the two).
pub fn inviscid_bridge<S: Real>(
    u0: &Field<S>,
    u_f: &Field<S>,
    alpha: AlphaParam<S>,
    tau: S,
    bound: Option<f64>,
    config: &BridgeConfig<S>,
) -> Result<Bridge<S>> {
    u0.grid.check_same(&u_f.grid)?;
    let grid = u0.grid;
    let n = grid.n;
    let data = norms(u0).c2.max(norms(u_f).c2);
    let bound = bound.unwrap_or(data);
    if data > bound * (1.0 + 1e-12) {
        return Err(Error::config(format!("data C2 norm {data:.4e} exceeds the stated bound {bound:.4e}")));
    }
    let tau0 = if bound > 0.0 { config.delta_hat2 / bound } else { f64::INFINITY };
    if tau.as_f64() > tau0 {
        return Err(Error::config(format!(
            "window tau = {tau} exceeds tau0 = {tau0:.4e} (calibrated threshold {:.4e} over bound {bound:.4e})",
            config.delta_hat2
        )));
    }
    let ext = ExtendedGrid::new(grid, config.eta)?;
    let lambda = LambdaProfile::new(grid.length(), S::one(), ext.eta, config.margin, LambdaWindow::FirstHalf)?;
    let half_steps = match config.steps_per_half {
        Some(s) => s,
        None => (lambda.max_value() / (S::lit(2.0) * grid.dx)).ceil().to_usize().unwrap_or(1).max(1),
    };
    let sub_grid = TimeGrid::new(S::zero(), S::lit(0.5), half_steps)?;
    let run = |data: Field<S>| {
        picard_null_control(
            &NullControlProblem {
                y0: data,
                lambda,
                alpha,
                ext,
                tgrid: sub_grid,
            },
            &config.picard,
        )
    };
    let fwd = run(u0.scaled(tau))?;
    let bwd = run(u_f.reflected().scaled(tau))?;

    let tgrid = TimeGrid::new(S::zero(), tau, 2 * half_steps)?;
    let inv = S::one() / tau;
    let mut us = Vec::with_capacity(2 * half_steps + 1);
    let mut ws = Vec::with_capacity(2 * half_steps + 1);
    for k in 0..=2 * half_steps {
        if k <= half_steps {
            us.push(fwd.y.frames[k].iter().map(|&v| inv * v).collect::<Vec<S>>());
            ws.push(fwd.z.frames[k].iter().map(|&v| inv * v).collect::<Vec<S>>());
        } else {
            let j = 2 * half_steps - k;
            us.push((0..n).map(|i| inv * bwd.y.frames[j][n - 1 - i]).collect());
            ws.push((0..n).map(|i| inv * bwd.z.frames[j][n - 1 - i]).collect());
        }
    }
    Ok(Bridge {
        u: SpaceTimeField::new(tgrid, grid, us)?,
        w: SpaceTimeField::new(tgrid, grid, ws)?,
        lambda: lambda.rescaled(tau),
        tau0,
        bound,
        forward: fwd.report,
        backward: bwd.report,
    })
}

/// Solution of the remainder problem `r_t - r_xx + (q + w + lambda) r_x =
/// u_xx - q u_x` with `r(0) = 0`, `r = 0` at the left end, `r_x = 0` at the
/// right end, and `q` the filter of `r` with traces `0`, `r(L)`.
#[derive(Debug, Clone)]
pub struct RemainderState<S> {
    pub r: SpaceTimeField<S>,
    pub q: SpaceTimeField<S>,
    /// Largest one-sided `|r_x(L)|` over the run.
    pub compatibility_residual: f64,
    pub terminal_h1: f64,
}

pub fn solve_remainder<S: Real>(bridge: &Bridge<S>, alpha: AlphaParam<S>) -> Result<RemainderState<S>> {
    let tg = bridge.u.tgrid;
    let grid = bridge.u.grid;
    let n = grid.n;
    let dx = grid.dx;
    let filter = FilterSolver::new(grid, alpha);
    let lam = &bridge.lambda;
    let buf = || vec![S::zero(); n];
    let (mut ux, mut uxx) = (buf(), buf());
    let forcing = |k: usize, ux: &mut Vec<S>, uxx: &mut Vec<S>| {
        diff1_slice(&bridge.u.frames[k], dx, ux);
        diff2_slice(&bridge.u.frames[k], dx, uxx);
    };
    // Explicit operator at frame `k`: D2 r - (q + w + lambda) D1 r + u_xx - q u_x.
    let explicit = |k: usize, r: &[S], q: &[S], ux: &[S], uxx: &[S], out: &mut [S]| {
        let w = &bridge.w.frames[k];
        let l = lam.value(tg.t(k));
        out[0] = S::zero();
        for i in 1..n - 1 {
            let d2 = (r[i + 1] - S::lit(2.0) * r[i] + r[i - 1]) / (dx * dx);
            let d1 = (r[i + 1] - r[i - 1]) / (S::lit(2.0) * dx);
            out[i] = d2 - (q[i] + w[i] + l) * d1 + uxx[i] - q[i] * ux[i];
        }
        let j = n - 1;
        out[j] = S::lit(2.0) * (r[j - 1] - r[j]) / (dx * dx) + uxx[j] - q[j] * ux[j];
    };

    let mut r = buf();
    let mut q = buf();
    let mut rs = vec![r.clone()];
    let mut qs = vec![q.clone()];
    let mut compat = S::zero();
    let (mut ex, mut base, mut work, mut r_new, mut r_pass, mut q_new) = (buf(), buf(), buf(), buf(), buf(), buf());
    let (mut ux1, mut uxx1) = (buf(), buf());
    let mut mat = Tridiagonal::zeros(n);
    let half = S::lit(0.5);
    for k in 0..tg.m {
        forcing(k, &mut ux, &mut uxx);
        forcing(k + 1, &mut ux1, &mut uxx1);
        explicit(k, &r, &q, &ux, &uxx, &mut ex);
        let dt = tg.dt;
        let w1 = &bridge.w.frames[k + 1];
        let l1 = lam.value(tg.t(k + 1));
        q_new.copy_from_slice(&q);
        let diff = half * dt / (dx * dx);
        let conv = half * dt / (S::lit(2.0) * dx);
        let mut settled = false;
        for pass in 1..=8 {
            for i in 0..n {
                base[i] = r[i] + half * dt * (ex[i] + uxx1[i] - q_new[i] * ux1[i]);
            }
            for i in 1..n - 1 {
                let v = q_new[i] + w1[i] + l1;
                mat.lower[i] = -diff - conv * v;
                mat.diag[i] = S::one() + diff + diff;
                mat.upper[i] = -diff + conv * v;
            }
            mat.pin(0);
            base[0] = S::zero();
            mat.lower[n - 1] = -diff - diff;
            mat.diag[n - 1] = S::one() + diff + diff;
            mat.upper[n - 1] = S::zero();
            r_new.copy_from_slice(&base);
            mat.solve_in_place(&mut r_new, &mut work)?;
            filter.solve_into(&r_new, S::zero(), r_new[n - 1], &mut q_new);
            if pass >= 2 && sup_diff(&r_new, &r_pass) <= S::lit(1e-8) * sup_abs(&r_new) {
                settled = true;
                break;
            }
            r_pass.copy_from_slice(&r_new);
        }
        if !settled || r_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonConvergence {
                what: "remainder step".into(),
                iterations: k + 1,
                last: f64::NAN,
                history: Vec::new(),
            });
        }
        r.copy_from_slice(&r_new);
        q.copy_from_slice(&q_new);
        let slope = (S::lit(3.0) * r[n - 1] - S::lit(4.0) * r[n - 2] + r[n - 3]) / (S::lit(2.0) * dx);
        compat = compat.max(slope.abs());
        rs.push(r.clone());
        qs.push(q.clone());
    }
    let r_field = SpaceTimeField::new(tg, grid, rs)?;
    let terminal_h1 = norms(&r_field.last_frame()).h1;
    Ok(RemainderState {
        q: SpaceTimeField::new(tg, grid, qs)?,
        r: r_field,
        compatibility_residual: compat.as_f64(),
        terminal_h1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxReport {
    pub tau: f64,
    pub tau0: f64,
    pub steps: usize,
    /// `|y(tau) - y_f|_{H^1}`.
    pub terminal_h1: f64,
    pub compatibility_residual: f64,
    pub forward: PicardReport,
    pub backward: PicardReport,
}

#[derive(Debug, Clone)]
pub struct ApproxStage<S> {
    pub y: SpaceTimeField<S>,
    pub z: SpaceTimeField<S>,
    pub controls: ControlTriple<S>,
    pub bridge: Bridge<S>,
    pub remainder: RemainderState<S>,
    pub report: ApproxReport,
}

/// Steers `y0` to within `K sqrt(tau)` (in `H^1`) of `y_f` over `[0, tau]`
/// with `p = (lambda^tau)'`, independent of `alpha`.
pub fn approx_control_stage<S: Real>(
    y0: &Field<S>,
    y_f: &Field<S>,
    alpha: AlphaParam<S>,
    tau: S,
    config: &BridgeConfig<S>,
) -> Result<ApproxStage<S>> {
    let bridge = inviscid_bridge(y0, y_f, alpha, tau, None, config)?;
    let rem = solve_remainder(&bridge, alpha)?;
    let tg = bridge.u.tgrid;
    let n = tg.m + 1;
    let nx = y0.grid.n;
    let mut ys = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    let (mut p, mut v_l, mut v_r) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let t = tg.t(k);
        let l = bridge.lambda.value(t);
        let (u, w) = (&bridge.u.frames[k], &bridge.w.frames[k]);
        let (r, q) = (&rem.r.frames[k], &rem.q.frames[k]);
        ys.push((0..nx).map(|i| u[i] + r[i] + l).collect::<Vec<S>>());
        zs.push((0..nx).map(|i| w[i] + q[i] + l).collect::<Vec<S>>());
        p.push(bridge.lambda.derivative(t));
        v_l.push(u[0] + l);
        v_r.push(u[nx - 1] + r[nx - 1] + l);
    }
    let y = SpaceTimeField::new(tg, y0.grid, ys)?;
    let terminal_h1 = norms(&y.last_frame().sub(y_f)?).h1;
    let report = ApproxReport {
        tau: tau.as_f64(),
        tau0: bridge.tau0,
        steps: tg.m,
        terminal_h1,
        compatibility_residual: rem.compatibility_residual,
        forward: bridge.forward.clone(),
        backward: bridge.backward.clone(),
    };
    Ok(ApproxStage {
        z: SpaceTimeField::new(tg, y0.grid, zs)?,
        controls: ControlTriple::new(tg, p, v_l, v_r)?,
        y,
        bridge,
        remainder: rem,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    fn cfg() -> BridgeConfig<f64> {
        BridgeConfig {
            steps_per_half: Some(60),
            ..BridgeConfig::new(0.45)
        }
    }

    #[test]
    fn trivial_bridge_gives_zero_remainder() {
        let g = Grid1D::new(0.0, 1.0, 41).unwrap();
        let zero = Field::zeros(g);
        let s = approx_control_stage(&zero, &zero, AlphaParam::new(0.1).unwrap(), 0.1, &cfg()).unwrap();
        assert_eq!(s.remainder.r.sup(), 0.0);
        assert_eq!(s.bridge.u.sup(), 0.0);
        assert!(s.controls.p.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn constant_bridge_hits_its_ends() {
        let g = Grid1D::new(0.0, 1.0, 41).unwrap();
        let c = Field::constant(g, 0.2);
        let b = inviscid_bridge(&c, &c, AlphaParam::new(0.1).unwrap(), 0.1, None, &cfg()).unwrap();
        assert!(b.u.frame(0).sub(&c).unwrap().sup() < 1e-12);
        assert!(b.u.last_frame().sub(&c).unwrap().sup() < 1e-12);
    }

    #[test]
    fn window_above_tau0_is_refused() {
        let g = Grid1D::new(0.0, 1.0, 41).unwrap();
        let c = Field::constant(g, 1.0);
        let e = inviscid_bridge(&c, &c, AlphaParam::new(0.1).unwrap(), 0.9, None, &cfg()).unwrap_err();
        assert!(e.to_string().contains("tau0"));
    }
}

//! Acceptance suite. Runs every primary criterion at its stated tolerance
//! and prints one PASS/FAIL line per criterion.

use burgers_alpha::control::*;
use burgers_alpha::filter::{ExtendedGrid, FilterSolver};
use burgers_alpha::grid::{l2_slice, norms};
use burgers_alpha::pipeline::*;
use burgers_alpha::transport::*;
use burgers_alpha::viscous::*;
use burgers_alpha::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

struct Thresholds {
    delta_c1: f64,
    delta_c2: f64,
    delta_v: f64,
}

fn alpha(a: f64) -> Alpha64 {
    AlphaParam::new(a).unwrap()
}

fn unit_grid(n: usize) -> Grid64 {
    Grid1D::new(0.0, 1.0, n).unwrap()
}

// 1

fn filter_exactness() -> Result<Outcome> {
    let n = 101;
    let g = unit_grid(n);
    let mut worst: f64 = 0.0;
    for &a in &[0.01, 0.1, 1.0] {
        let solver = FilterSolver::new(g, alpha(a));
        let c = a * a / (g.dx * g.dx);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        dense[(0, 0)] = 1.0;
        dense[(n - 1, n - 1)] = 1.0;
        for i in 1..n - 1 {
            dense[(i, i - 1)] = -c;
            dense[(i, i)] = 1.0 + 2.0 * c;
            dense[(i, i + 1)] = -c;
        }
        let lu = dense.lu();
        for &k in &[1usize, 2, 5] {
            let kf = k as f64;
            let y = Field::from_fn(g, |x| (kf * PI * x).sin()).map(|v| if v.abs() < 1e-15 { 0.0 } else { v });
            let mu = 4.0 / (g.dx * g.dx) * (kf * PI * g.dx / 2.0).sin().powi(2);
            let z = solver.solve(&y, 0.0, 0.0)?;
            let oracle = lu.solve(&DVector::from_vec(y.values.clone())).expect("nonsingular");
            let scale = y.sup() / (1.0 + a * a * mu);
            for i in 0..n {
                let expect = y.values[i] / (1.0 + a * a * mu);
                worst = worst.max((z.values[i] - expect).abs() / scale);
                worst = worst.max((oracle[i] - expect).abs() / scale);
            }
        }
    }
    outcome(worst <= 1e-12, format!("max relative error {worst:.2e} (tol 1e-12)"))
}

// 2

fn random_smooth(rng: &mut ChaCha8Rng, modes: usize, amp: f64) -> impl Fn(f64) -> f64 {
    let coef: Vec<(f64, f64)> = (0..modes)
        .map(|_| (rng.random_range(-amp..amp), rng.random_range(0.0..2.0 * PI)))
        .collect();
    let c0 = rng.random_range(-amp..amp);
    move |x: f64| c0 + coef.iter().enumerate().map(|(j, (a, ph))| a * ((j + 1) as f64 * PI * x + ph).sin()).sum::<f64>()
}

fn maximum_principles() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut filter_excess: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(5..120);
        let g = unit_grid(n);
        let a = 10f64.powf(rng.random_range(-3.0..1.0));
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let y = Field::new(g, y)?;
        let z = FilterSolver::new(g, alpha(a)).solve(&y, y.first(), y.last())?;
        let (lo, hi) = y.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        for &v in &z.values {
            filter_excess = filter_excess.max(v - hi).max(lo - v);
        }
    }
    let mut viscous_excess: f64 = f64::NEG_INFINITY;
    for _ in 0..20 {
        let n = rng.random_range(21..81);
        let g = unit_grid(n);
        let horizon = rng.random_range(0.1..1.0);
        let tg = TimeGrid::new(0.0, horizon, rng.random_range(50..200))?;
        let a = 10f64.powf(rng.random_range(-2.0..0.5));
        let y0 = Field::from_fn(g, random_smooth(&mut rng, 4, 1.0));
        let (p, vl, vr) = (random_smooth(&mut rng, 3, 1.0), random_smooth(&mut rng, 3, 1.0), random_smooth(&mut rng, 3, 1.0));
        let times = tg.times();
        let controls = ControlTriple::new(
            tg,
            times.iter().map(|&t| p(t / horizon)).collect(),
            times.iter().map(|&t| vl(t / horizon)).collect(),
            times.iter().map(|&t| vr(t / horizon)).collect(),
        )?;
        let run = simulate_viscous(&y0, &controls, alpha(a), &ViscousConfig::default())?;
        viscous_excess = viscous_excess.max(run.report.max_sup - run.report.m_t);
    }
    outcome(
        filter_excess <= 1e-8 && viscous_excess <= 1e-8,
        format!("filter excess {filter_excess:.2e}, viscous sup - M_T {viscous_excess:.2e} (tol 1e-8)"),
    )
}

// 3, 4, 6

struct LocalRuns {
    solutions: Vec<PicardSolution<f64>>,
    resim_errors: Vec<f64>,
    tol: f64,
}

fn local_null_runs(th: &Thresholds) -> Result<LocalRuns> {
    let g = unit_grid(401);
    let tg = TimeGrid::new(0.0, 1.0, 400)?;
    let spec = CalibrationSpec::<f64>::c1(1.0, 1.0, 0.25);
    let raw = Field::from_fn(g, |x| (PI * x).sin());
    let y0 = raw.scaled(0.5 * th.delta_c1 / norms(&raw).c1);
    let ext = ExtendedGrid::new(g, 0.25)?;
    let lambda = LambdaProfile::new(1.0, 1.0, ext.eta, spec.margin, LambdaWindow::Full)?;
    let alphas = [0.05, 0.5, 5.0];
    let results = par_map(&alphas, |&a| -> Result<(PicardSolution<f64>, f64)> {
        let problem = NullControlProblem { y0: y0.clone(), lambda, alpha: alpha(a), ext, tgrid: tg };
        let sol = picard_null_control(&problem, &PicardConfig::default())?;
        let full = lift_to_full_state(&sol.y, &sol.z, &sol.lambda)?;
        let start = Field::new(g, full.y.frames[0].clone())?;
        let run = simulate_inviscid(&start, &full.controls, alpha(a))?;
        let lam_t = sol.lambda.value(tg.t1);
        let err = run.y.last_frame().values.iter().map(|v| (v - lam_t).abs()).fold(0.0, f64::max);
        Ok((sol, err))
    });
    let mut out = LocalRuns { solutions: Vec::new(), resim_errors: Vec::new(), tol: 5.0 * (g.dx + tg.dt) };
    for r in results {
        let (s, e) = r?;
        out.solutions.push(s);
        out.resim_errors.push(e);
    }
    Ok(out)
}

fn local_null_control(runs: &LocalRuns) -> Result<Outcome> {
    let picard_terminal = runs.solutions.iter().map(|s| s.y.last_frame().sup()).fold(0.0, f64::max);
    let resim = runs.resim_errors.iter().cloned().fold(0.0, f64::max);
    let iters = runs.solutions.iter().map(|s| s.report.iterations).max().unwrap_or(0);
    let converged = runs.solutions.iter().all(|s| s.report.converged);
    let totals: Vec<f64> = runs.solutions.iter().map(|s| s.controls.norms().total()).collect();
    let sp = spread(&totals);
    outcome(
        resim.max(picard_terminal) <= runs.tol && converged && iters <= 30 && sp <= 2.0,
        format!(
            "terminal sup {:.2e} (re-simulated {resim:.2e}, tol {:.2e}), Picard iterations <= {iters}, control spread {sp:.3}",
            picard_terminal, runs.tol
        ),
    )
}

fn contraction(runs: &LocalRuns) -> Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();
    for s in &runs.solutions {
        let g = &s.report.gaps;
        let ratios: Vec<f64> = g.windows(2).map(|w| w[1] / w[0]).collect();
        let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
        let last = *g.last().unwrap_or(&f64::INFINITY);
        pass &= decreasing && last <= 1e-10 && g.len() <= 30;
        notes.push(format!("{} gaps, final {last:.1e}, ratios {}", g.len(), if decreasing { "decreasing" } else { "NOT decreasing" }));
    }
    outcome(pass, notes.join("; "))
}

fn flow_stats(sol: &PicardSolution<f64>, interp: burgers_alpha::interp::SpaceInterp, eta: f64) -> Result<(f64, f64, bool)> {
    let vel = Velocity::new(&sol.lambda, &sol.zstar, interp);
    let tg = sol.zstar.tgrid;
    let xs = sol.y.grid.nodes();
    let targets = [tg.t0 + 0.25 * tg.horizon(), tg.t0 + 0.5 * tg.horizon(), tg.t1];
    let flow = integrate_flow(&vel, tg.t0, &targets, &xs, 4)?;
    let defect = group_defect(&vel, &flow, 4);
    Ok((defect, sol.report.max_deviation, sol.report.max_deviation <= eta && flow.is_monotone()))
}

// 5

struct GlobalRuns {
    errors: Vec<f64>,
    dxs: Vec<f64>,
    solutions: Vec<PicardSolution<f64>>,
}

fn global_inviscid_runs(th: &Thresholds) -> Result<GlobalRuns> {
    let mut plan: Option<GluingPlan> = None;
    let mut out = GlobalRuns { errors: Vec::new(), dxs: Vec::new(), solutions: Vec::new() };
    let cfg = InviscidControlConfig::default();
    for (f, n) in [(1usize, 101usize), (2, 201), (4, 401)] {
        let g = unit_grid(n);
        let m = 200 * f;
        let tg = TimeGrid::new(0.0, 1.0, m)?;
        let y0 = Field::from_fn(g, |x| 0.3 * (PI * x).sin() + 0.1);
        let yt = Field::from_fn(g, |x| 0.2 * (PI * x).cos());
        let a = alpha(0.1);
        let fixed = match plan {
            Some(p) => Some(p.refined(f, m)?),
            None => None,
        };
        let sol = global_inviscid_control(&y0, &yt, a, tg, th.delta_c1, fixed, &cfg)?;
        plan.get_or_insert(sol.plan);
        let run = simulate_inviscid(&y0, &sol.controls, a)?;
        out.errors.push(run.y.last_frame().sub(&yt)?.sup());
        out.dxs.push(g.dx);
        out.solutions.push(sol.forward);
        out.solutions.push(sol.backward);
    }
    Ok(out)
}

fn global_inviscid(runs: &GlobalRuns) -> Result<Outcome> {
    let slope = loglog_slope(&runs.dxs, &runs.errors).unwrap_or(f64::NAN);
    outcome(
        slope >= 0.8,
        format!("terminal C0 errors {:.2e} {:.2e} {:.2e}, slope {slope:.3} (min 0.8)", runs.errors[0], runs.errors[1], runs.errors[2]),
    )
}

fn flow_integrity(local: &LocalRuns, global: &GlobalRuns) -> Result<Outcome> {
    let interp = PicardConfig::<f64>::default().interp;
    let eta = 0.25;
    let (mut defect, mut dev, mut ok): (f64, f64, bool) = (0.0, 0.0, true);
    let sols = local.solutions.iter().chain(&global.solutions).collect::<Vec<_>>();
    let stats = par_map(&sols, |s| flow_stats(s, interp, eta));
    for s in stats {
        let (d, v, good) = s?;
        defect = defect.max(d);
        dev = dev.max(v);
        ok &= good;
    }
    outcome(
        defect <= 1e-6 && ok,
        format!("{} flows: group defect {defect:.2e} (tol 1e-6), max deviation {dev:.3} (eta {eta}), monotone {ok}", sols.len()),
    )
}

// 7

fn smoothing() -> Result<Outcome> {
    let g = unit_grid(201);
    let cfg = ViscousConfig::default();
    let alphas = [0.01, 0.1, 1.0];
    let by_alpha = par_map(&alphas, |&a| {
        smoothing_monitor(&Field::from_fn(g, |x| (PI * x).sin()), alpha(a), 1.0, 400, &cfg).map(|r| r.c2_at_tstar)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let amps = [1.0, 0.1, 0.01];
    let by_amp = par_map(&amps, |&m| {
        smoothing_monitor(&Field::from_fn(g, |x| m * (PI * x).sin()), alpha(0.1), 1.0, 400, &cfg).map(|r| r.c2_at_tstar)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let sp = spread(&by_alpha);
    let monotone = by_amp.windows(2).all(|w| w[1] < w[0]);
    outcome(
        sp <= 3.0 && monotone,
        format!("c2_at_Tstar alpha-spread {sp:.3} (max 3), amplitude sequence [{}] monotone {monotone}", by_amp.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")),
    )
}

// 8

fn sqrt_tau_law(th: &Thresholds) -> Result<Outcome> {
    let g = unit_grid(401);
    let horizon = 0.02;
    let fractions = [0.32, 0.16, 0.08, 0.04];
    let alphas = [0.05, 0.5];
    let cfg = BridgeConfig::new(th.delta_c2);
    let y0 = Field::constant(g, 0.2);
    let yf = Field::constant(g, -0.1);
    let cells: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| fractions.iter().map(move |&f| (a, f * horizon))).collect();
    let errs = par_map(&cells, |&(a, tau)| approx_control_stage(&y0, &yf, alpha(a), tau, &cfg).map(|s| s.report.terminal_h1))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let taus: Vec<f64> = fractions.iter().map(|f| f * horizon).collect();
    let k = fractions.len();
    let slopes: Vec<f64> = (0..alphas.len())
        .map(|j| loglog_slope(&taus, &errs[j * k..(j + 1) * k]).unwrap_or(f64::NAN))
        .collect();
    let spreads: Vec<f64> = (0..k).map(|i| spread(&[errs[i], errs[k + i]])).collect();
    let max_spread = spreads.iter().cloned().fold(1.0, f64::max);
    outcome(
        slopes.iter().all(|&s| s >= 0.45) && max_spread <= 3.0,
        format!("fitted exponents {slopes:.3?} (min 0.45), max alpha-spread {max_spread:.3} (max 3)"),
    )
}

// 9

fn hum_problem(n: usize, m: usize, advection: impl Fn(f64, f64) -> f64) -> Result<HumProblem<f64>> {
    let ext = ExtendedGrid::new(unit_grid(n), 0.25)?;
    let tg = TimeGrid::new(0.0, 1.0, m)?;
    let (l, len) = (ext.ext.x_left, ext.ext.length());
    let u0 = Field::from_fn(ext.ext, |x| (PI * (x - l) / len).sin());
    let adv = SpaceTimeField::from_fn(tg, ext.ext, advection);
    HumProblem::new(ext, tg, adv, u0)
}

fn objective(op: &HumOperator<f64>, free: &[f64], v: &[f64], eps: f64) -> f64 {
    let sv = op.apply(v);
    let e: Vec<f64> = sv.iter().zip(free).map(|(a, b)| a + b).collect();
    0.5 * op.control_dot(v, v) + 0.5 / eps * op.state_dot(&e, &e)
}

fn hum_stage() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let p = hum_problem(61, 60, |t, x| 0.3 + 0.2 * (PI * x).sin() * (1.0 - t))?;
    let op = HumOperator::new(&p)?;
    let free = op.trajectory(&p.u0.values, None).pop().expect("frames");
    let eps = p.epsilon;
    let nc = op.control_len();
    let v: Vec<f64> = (0..nc).map(|_| rng.random_range(-1.0..1.0)).collect();
    let e: Vec<f64> = op.apply(&v).iter().zip(&free).map(|(a, b)| a + b).collect();
    let (adj, _) = op.adjoint(&e);
    let grad: Vec<f64> = v.iter().zip(&adj).map(|(a, b)| a + b / eps).collect();
    let mut grad_err: f64 = 0.0;
    for _ in 0..10 {
        let d: Vec<f64> = (0..nc).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = 1e-3;
        let shift = |s: f64| -> Vec<f64> { v.iter().zip(&d).map(|(a, b)| a + s * b).collect() };
        let fd = (objective(&op, &free, &shift(h), eps) - objective(&op, &free, &shift(-h), eps)) / (2.0 * h);
        let an = op.control_dot(&grad, &d);
        grad_err = grad_err.max((fd - an).abs() / an.abs());
    }

    let big = hum_problem(201, 200, |_, _| 0.0)?;
    let sol = hum_null_control(&big)?;
    let u0 = l2_slice(&big.u0.values, &big.ext.ext);
    let ratio = sol.report.terminal_l2 / u0;

    let small = hum_problem(60, 60, |t, x| 0.2 * (PI * x).cos() + 0.1 * t)?;
    let op = HumOperator::new(&small)?;
    let sol_small = hum_with_operator(&small, &op)?;
    let free = op.trajectory(&small.u0.values, None).pop().expect("frames");
    let nc = op.control_len();
    let rows = free.len();
    let mut a = DMatrix::<f64>::zeros(rows + nc, nc);
    let mut unit = vec![0.0; nc];
    for j in 0..nc {
        unit[j] = 1.0;
        for (i, v) in op.apply(&unit).into_iter().enumerate() {
            a[(i, j)] = v;
        }
        unit[j] = 0.0;
        a[(rows + j, j)] = (small.epsilon * op.tgrid.dt).sqrt();
    }
    let mut rhs = DVector::<f64>::zeros(rows + nc);
    for i in 0..rows {
        rhs[i] = -free[i];
    }
    let dense = a.svd(true, true).solve(&rhs, 0.0).expect("svd solve");
    let w = op.window.len();
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..op.tgrid.m {
        for j in 0..w {
            let got = sol_small.v.frames[k + 1][j];
            diff = diff.max((got - dense[k * w + j]).abs());
            scale = scale.max(dense[k * w + j].abs());
        }
    }
    let dense_err = diff / scale;
    outcome(
        grad_err <= 1e-5 && ratio <= 1e-4 && dense_err <= 1e-6,
        format!(
            "gradient vs FD {grad_err:.2e} (tol 1e-5), terminal/initial L2 {ratio:.2e} at n=201 (tol 1e-4), dense mismatch {dense_err:.2e} at n=60 (tol 1e-6)"
        ),
    )
}

// 10

fn theorem2(th: &Thresholds) -> Result<Outcome> {
    let g = unit_grid(201);
    let y0 = Field::from_fn(g, |x| (2.0 * PI * x).sin());
    let mut cfg = PipelineConfig::new(400, th.delta_c2, th.delta_v);
    cfg.terminal_factor = 20.0;
    let alphas = [0.05, 0.5];
    let runs = par_map(&alphas, |&a| global_viscous_control(&y0, 0.3, 1.0, alpha(a), &cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ps: Vec<Vec<u64>> = runs.iter().map(|r| r.control_rows().iter().map(|row| row[1].to_bits()).collect()).collect();
    let same_p = ps[0] == ps[1];
    let worst = runs.iter().map(|r| r.report.terminal_sup).fold(0.0, f64::max);
    let tol = runs[0].report.terminal_tolerance;
    let monitors = runs.iter().all(|r| r.report.monitors_ok);
    outcome(
        worst <= tol && same_p,
        format!("terminal sup |y(T) - N| {worst:.2e} (tol {tol:.2e}), p identical across alpha {same_p}, monitors ok {monitors}"),
    )
}

// 11

fn alpha_limit() -> Result<Outcome> {
    let g = unit_grid(201);
    let tg = TimeGrid::new(0.0, 1.0, 400)?;
    let y0 = Field::from_fn(g, |x| (PI * x).sin());
    let t = alpha_limit_study(&y0, &ControlTriple::zeros(tg), &[0.4, 0.2, 0.1, 0.05], 1e-3, &ViscousConfig::default())?;
    let d: Vec<String> = t.rows.iter().map(|r| format!("{:.2e}", r.distance)).collect();
    outcome(
        t.monotone,
        format!("distances to alpha=1e-3 [{}] strictly decreasing {}, fitted rate {:.3}", d.join(", "), t.monotone, t.rate.unwrap_or(f64::NAN)),
    )
}

fn report(id: usize, name: &str, result: Result<Outcome>, secs: f64) -> bool {
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("criterion {id:>2} {:<4} {name}: {detail} [{secs:.1}s]", if pass { "PASS" } else { "FAIL" });
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn main() {
    let (th, secs) = timed(|| -> Result<Thresholds> {
        let mut cal = Calibrator::new();
        Ok(Thresholds {
            delta_c1: cal.threshold(&CalibrationSpec::<f64>::c1(1.0, 1.0, 0.25))?.delta_hat,
            delta_c2: cal.threshold(&CalibrationSpec::<f64>::c2_half_window(1.0, 0.25))?.delta_hat,
            delta_v: viscous_threshold(&mut cal, &ViscousCalibrationSpec::<f64>::coarse(1.0, 0.5, 0.3))?.delta_hat,
        })
    });
    let th = match th {
        Ok(t) => t,
        Err(e) => {
            println!("calibration failed: {e}");
            std::process::exit(1);
        }
    };
    println!(
        "calibrated thresholds: delta_hat = {}, delta_hat_2 = {}, delta_hat_v = {} [{secs:.1}s]",
        th.delta_c1, th.delta_c2, th.delta_v
    );

    let results = std::thread::scope(|s| {
        let th = &th;
        let inviscid = s.spawn(move || {
            let local = timed(|| local_null_runs(th));
            let global = timed(|| global_inviscid_runs(th));
            (local, global)
        });
        let c1 = s.spawn(|| timed(filter_exactness));
        let c2 = s.spawn(|| timed(maximum_principles));
        let c7 = s.spawn(|| timed(smoothing));
        let c8 = s.spawn(move || timed(|| sqrt_tau_law(th)));
        let c9 = s.spawn(|| timed(hum_stage));
        let c10 = s.spawn(move || timed(|| theorem2(th)));
        let c11 = s.spawn(|| timed(alpha_limit));
        let ((local, ls), (global, gs)) = inviscid.join().unwrap();
        let mut out: Vec<(usize, &str, Result<Outcome>, f64)> = Vec::new();
        let (r, t) = c1.join().unwrap();
        out.push((1, "filter exactness", r, t));
        let (r, t) = c2.join().unwrap();
        out.push((2, "maximum principles", r, t));
        match (&local, &global) {
            (Ok(l), Ok(g)) => {
                out.push((3, "inviscid local null control", local_null_control(l), ls));
                out.push((4, "contraction law", contraction(l), ls));
                out.push((5, "global inviscid exact control", global_inviscid(g), gs));
                let (r, t) = timed(|| flow_integrity(l, g));
                out.push((6, "flow integrity", r, t));
            }
            _ => {
                let lm = local.as_ref().err().map_or("dependency failed".to_string(), |e| e.to_string());
                let gm = global.as_ref().err().map_or("dependency failed".to_string(), |e| e.to_string());
                out.push((3, "inviscid local null control", Err(Error::Solver(lm.clone())), ls));
                out.push((4, "contraction law", Err(Error::Solver(lm.clone())), ls));
                out.push((5, "global inviscid exact control", Err(Error::Solver(gm.clone())), gs));
                out.push((6, "flow integrity", Err(Error::Solver(format!("{lm}; {gm}"))), 0.0));
            }
        }
        let (r, t) = c7.join().unwrap();
        out.push((7, "parabolic smoothing", r, t));
        let (r, t) = c8.join().unwrap();
        out.push((8, "sqrt(tau) law", r, t));
        let (r, t) = c9.join().unwrap();
        out.push((9, "HUM stage", r, t));
        let (r, t) = c10.join().unwrap();
        out.push((10, "global viscous control end to end", r, t));
        let (r, t) = c11.join().unwrap();
        out.push((11, "vanishing filter limit", r, t));
        out
    });

    let mut failed = 0;
    for (id, name, r, t) in results {
        if !report(id, name, r, t) {
            failed += 1;
        }
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

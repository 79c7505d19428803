use burgers_alpha::pipeline::loglog_slope;
use burgers_alpha::viscous::*;
use burgers_alpha::*;
use std::f64::consts::PI;

fn forced_error(n: usize, alpha: f64) -> f64 {
    let g = Grid1D::new(0.0, 1.0, n).unwrap();
    let tg = TimeGrid::new(0.0, 0.5, n - 1).unwrap();
    let k = 1.0 + alpha * alpha * PI * PI;
    let exact = |t: f64, x: f64| (-t).exp() * (PI * x).sin();
    let forcing = move |t: f64, x: f64| {
        let e = (-t).exp();
        e * (PI * x).sin() * (PI * PI - 1.0) + e * e * PI * (PI * x).sin() * (PI * x).cos() / k
    };
    let run = simulate_viscous_forced(
        &Field::from_fn(g, |x| exact(0.0, x)),
        &ControlTriple::zeros(tg),
        AlphaParam::new(alpha).unwrap(),
        &forcing,
        &ViscousConfig::default(),
    )
    .unwrap();
    let last = run.y.last_frame();
    (0..n).map(|i| (last.values[i] - exact(0.5, g.x(i))).abs()).fold(0.0, f64::max)
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    for alpha in [0.05, 0.5] {
        let ns = [21, 41, 81];
        let errs: Vec<f64> = ns.iter().map(|&n| forced_error(n, alpha)).collect();
        let dx: Vec<f64> = ns.iter().map(|&n| 1.0 / (n - 1) as f64).collect();
        let slope = loglog_slope(&dx, &errs).unwrap();
        assert!(slope > 1.8, "alpha {alpha}: {errs:?} slope {slope}");
    }
}

#[test]
fn free_runs_obey_sup_and_energy_bounds() {
    let g = Grid1D::new(0.0, 1.0, 101).unwrap();
    let tg = TimeGrid::new(0.0, 1.0, 200).unwrap();
    for alpha in [0.01, 0.1, 1.0, 5.0] {
        for y0 in [
            Field::from_fn(g, |x| (2.0 * PI * x).sin()),
            Field::from_fn(g, |x| 3.0 * x * (1.0 - x) * (9.0 * x).cos()),
        ] {
            let run = simulate_viscous(&y0, &ControlTriple::zeros(tg), AlphaParam::new(alpha).unwrap(), &ViscousConfig::default()).unwrap();
            assert!(run.report.max_sup <= y0.sup() + 1e-8);
            assert_eq!(run.report.energy_ok, Some(true), "alpha {alpha}");
            assert!(run.report.filter_ok);
            assert!(run.z.sup() <= run.report.m_t + 1e-8);
        }
    }
}

#[test]
fn boundary_controls_enter_the_bound() {
    let g = Grid1D::new(0.0, 1.0, 81).unwrap();
    let tg = TimeGrid::new(0.0, 0.5, 100).unwrap();
    let times = tg.times();
    let c = ControlTriple::new(
        tg,
        times.iter().map(|t: &f64| (3.0 * t).cos()).collect(),
        times.iter().map(|t: &f64| 0.5 * (1.0 + t)).collect(),
        times.iter().map(|t: &f64| -(2.0 * t).sin()).collect(),
    )
    .unwrap();
    let y0 = Field::from_fn(g, |x| 0.5 * (1.0 - x));
    let run = simulate_viscous(&y0, &c, AlphaParam::new(0.2).unwrap(), &ViscousConfig::default()).unwrap();
    assert!(run.report.max_principle_ok);
    assert_eq!(run.report.energy_ok, None);
    assert!(run.y.node_series(0).iter().zip(&c.v_l).all(|(a, b)| a == b));
}

#[test]
fn smoothing_times_are_ordered_and_scale_with_amplitude() {
    let g = Grid1D::new(0.0, 1.0, 101).unwrap();
    let cfg = ViscousConfig::default();
    let a = AlphaParam::new(0.1).unwrap();
    let big = smoothing_monitor(&Field::from_fn(g, |x| (PI * x).sin()), a, 1.0, 200, &cfg).unwrap();
    let small = smoothing_monitor(&Field::from_fn(g, |x| 0.1 * (PI * x).sin()), a, 1.0, 200, &cfg).unwrap();
    assert!(big.t1 <= big.t2 && big.t2 <= big.t_star);
    assert!(small.c2_at_tstar < big.c2_at_tstar);
}

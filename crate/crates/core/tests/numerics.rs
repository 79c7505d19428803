use burgers_alpha::filter::{apply_cutoff, extend_even_c2, extend_odd_c1, make_cutoff};
use burgers_alpha::grid::norms;
use burgers_alpha::tridiag::Tridiagonal;
use burgers_alpha::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn values(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    n.prop_flat_map(|n| prop::collection::vec(-10.0..10.0f64, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn filter_respects_min_and_max(y in values(3..80), a in -3.0..1.0f64, vl in -12.0..12.0f64, vr in -12.0..12.0f64) {
        let g = Grid1D::new(0.0, 1.0, y.len()).unwrap();
        let y = Field::new(g, y).unwrap();
        let z = FilterSolver::new(g, AlphaParam::new(10f64.powf(a)).unwrap()).solve(&y, vl, vr).unwrap();
        let lo = y.values.iter().chain([&vl, &vr]).cloned().fold(f64::INFINITY, f64::min);
        let hi = y.values.iter().chain([&vl, &vr]).cloned().fold(f64::NEG_INFINITY, f64::max);
        for v in &z.values {
            prop_assert!(*v >= lo - 1e-10 && *v <= hi + 1e-10);
        }
        prop_assert_eq!(z.first(), vl);
        prop_assert_eq!(z.last(), vr);
    }

    #[test]
    fn filter_matches_dense_solve(y in values(3..40), a in -2.0..0.5f64) {
        let n = y.len();
        let g = Grid1D::new(0.0, 2.0, n).unwrap();
        let alpha = 10f64.powf(a);
        let z = FilterSolver::new(g, AlphaParam::new(alpha).unwrap()).solve(&Field::new(g, y.clone()).unwrap(), 0.5, -0.25).unwrap();
        let c = alpha * alpha / (g.dx * g.dx);
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::from_vec(y);
        m[(0, 0)] = 1.0;
        m[(n - 1, n - 1)] = 1.0;
        rhs[0] = 0.5;
        rhs[n - 1] = -0.25;
        for i in 1..n - 1 {
            m[(i, i - 1)] = -c;
            m[(i, i)] = 1.0 + 2.0 * c;
            m[(i, i + 1)] = -c;
        }
        let dense = m.lu().solve(&rhs).unwrap();
        for i in 0..n {
            prop_assert!((z.values[i] - dense[i]).abs() <= 1e-11 * (1.0 + dense[i].abs()));
        }
    }

    #[test]
    fn thomas_solve_matches_dense(
        diag in prop::collection::vec(3.0..6.0f64, 2..60),
        off in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -5.0..5.0f64), 60),
    ) {
        let n = diag.len();
        let mut a = Tridiagonal::zeros(n);
        a.diag.copy_from_slice(&diag);
        for i in 0..n {
            if i > 0 { a.lower[i] = off[i].0; }
            if i + 1 < n { a.upper[i] = off[i].1; }
        }
        let rhs: Vec<f64> = (0..n).map(|i| off[i].2).collect();
        let x = a.solve(&rhs).unwrap();
        let back = a.apply(&x);
        for i in 0..n {
            prop_assert!((back[i] - rhs[i]).abs() < 1e-11);
        }
        let xt = a.solve_transpose(&rhs).unwrap();
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = a.diag[i];
            if i > 0 { dense[(i, i - 1)] = a.lower[i]; }
            if i + 1 < n { dense[(i, i + 1)] = a.upper[i]; }
        }
        let oracle = dense.transpose().lu().solve(&DVector::from_vec(rhs)).unwrap();
        for i in 0..n {
            prop_assert!((xt[i] - oracle[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn norms_are_ordered(y in values(3..60)) {
        let g = Grid1D::new(-1.0, 1.0, y.len()).unwrap();
        let r = norms(&Field::new(g, y).unwrap());
        prop_assert!(r.c0 <= r.c1 && r.c1 <= r.c2);
        prop_assert!(r.l2 <= r.h1 && r.h1 <= r.h2);
        prop_assert!(r.l2 <= r.c0 * 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn extension_and_cutoff_restrict_to_identity(y in values(21..60), eta in 0.05..0.3f64) {
        let g = Grid1D::new(0.0, 1.0, y.len()).unwrap();
        let f = Field::new(g, y).unwrap();
        let ext = ExtendedGrid::new(g, eta).unwrap();
        let chi = make_cutoff(&ext);
        for e in [extend_even_c2(&f, &ext).unwrap(), extend_odd_c1(&f, &ext).unwrap()] {
            let cut = apply_cutoff(&e, &chi).unwrap();
            prop_assert_eq!(ext.restrict_field(&cut).unwrap().values, f.values.clone());
        }
    }
}

#[test]
fn generic_core_runs_in_single_precision() {
    let g = Grid1D::<f32>::new(0.0, 1.0, 33).unwrap();
    let y = Field::from_fn(g, |x| (std::f32::consts::PI * x).sin());
    let z = FilterSolver::new(g, AlphaParam::new(0.1f32).unwrap()).solve(&y, 0.0, 0.0).unwrap();
    assert!(z.values.iter().zip(&y.values).all(|(a, b)| a.abs() <= b.abs() + 1e-6));
}

#[test]
fn configuration_errors() {
    assert!(Grid1D::new(0.0, 1.0, 2).is_err());
    assert!(Grid1D::new(1.0, 0.0, 10).is_err());
    assert!(AlphaParam::new(0.0).is_ok());
    assert!(AlphaParam::new(-1.0).is_err());
    assert!(AlphaParam::new(f64::NAN).is_err());
    assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
    let g = Grid1D::new(0.0, 1.0, 11).unwrap();
    assert!(ExtendedGrid::new(g, 0.5).is_err());
    let other = Grid1D::new(0.0, 2.0, 11).unwrap();
    assert!(Field::zeros(g).sub(&Field::zeros(other)).is_err());
}

//! Parameter studies: the vanishing-filter limit and alpha-uniformity of
//! control norms.

use crate::controls::{ControlNorms, ControlTriple};
use crate::error::{Error, Result};
use crate::filter::AlphaParam;
use crate::grid::{l2_slice, Field, SpaceTimeField};
use crate::scalar::Real;
use crate::viscous::{simulate_viscous, ViscousConfig, ViscousRun};
use serde::Serialize;

/// Least-squares slope of `log y` against `log x`. Pairs with a
/// non-positive coordinate are skipped; `None` if fewer than two remain.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Runs `job` on every item on its own scoped thread, preserving order.
pub fn par_map<T: Sync, R: Send>(items: &[T], job: impl Fn(&T) -> R + Sync) -> Vec<R> {
    std::thread::scope(|s| {
        let handles: Vec<_> = items.iter().map(|it| s.spawn(|| job(it))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("study worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaLimitRow {
    pub alpha: f64,
    /// `sup_t ||y^alpha(t) - y^ref(t)||_{L^2}`.
    pub distance: f64,
    pub monitors_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaLimitTable {
    pub reference_alpha: f64,
    pub rows: Vec<AlphaLimitRow>,
    /// Fitted exponent of `distance ~ alpha^rate`.
    pub rate: Option<f64>,
    /// Distances strictly decrease as alpha decreases.
    pub monotone: bool,
}

fn linf_l2<S: Real>(a: &SpaceTimeField<S>, b: &SpaceTimeField<S>) -> f64 {
    a.frames
        .iter()
        .zip(&b.frames)
        .map(|(u, v)| {
            let d: Vec<S> = u.iter().zip(v).map(|(x, y)| *x - *y).collect();
            l2_slice(&d, &a.grid).as_f64()
        })
        .fold(0.0, f64::max)
}

/// Simulates `y0` under fixed `controls` for each alpha and for
/// `reference`, and tabulates the `L^inf(L^2)` distances to the reference.
pub fn alpha_limit_study<S: Real>(
    y0: &Field<S>,
    controls: &ControlTriple<S>,
    alphas: &[S],
    reference: S,
    config: &ViscousConfig<S>,
) -> Result<AlphaLimitTable> {
    let mut all = vec![reference];
    all.extend_from_slice(alphas);
    let runs: Vec<Result<ViscousRun<S>>> =
        par_map(&all, |&a| simulate_viscous(y0, controls, AlphaParam::new(a)?, config));
    let mut runs = runs.into_iter();
    let base = runs.next().expect("reference run")?;
    let mut rows = Vec::with_capacity(alphas.len());
    for (&a, run) in alphas.iter().zip(runs) {
        let run = run?;
        rows.push(AlphaLimitRow {
            alpha: a.as_f64(),
            distance: linf_l2(&run.y, &base.y),
            monitors_ok: run.report.all_ok(),
        });
    }
    let mut order: Vec<&AlphaLimitRow> = rows.iter().collect();
    order.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
    let monotone = order.windows(2).all(|w| w[1].distance < w[0].distance);
    let xs: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    Ok(AlphaLimitTable {
        reference_alpha: reference.as_f64(),
        rate: loglog_slope(&xs, &ys),
        monotone,
        rows,
    })
}

/// One controlled run entering a uniformity comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityRun {
    pub alpha: f64,
    pub norms: ControlNorms,
    pub terminal_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spreads {
    pub p_c0: f64,
    pub v_l_c0: f64,
    pub v_r_c0: f64,
    pub trace_c1: f64,
    pub total: f64,
    pub terminal_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityReport {
    pub alphas: Vec<f64>,
    pub norms: Vec<ControlNorms>,
    pub terminal_errors: Vec<f64>,
    pub spreads: Spreads,
    pub threshold: f64,
    /// Names of the control-norm spreads above `threshold`.
    pub flagged: Vec<String>,
}

/// `max / min`, with `1` for an all-zero list and infinity when only the
/// minimum vanishes.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if values.is_empty() || max == 0.0 {
        1.0
    } else if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub const UNIFORMITY_THRESHOLD: f64 = 3.0;

pub fn uniformity_report(runs: &[UniformityRun]) -> Result<UniformityReport> {
    if runs.is_empty() {
        return Err(Error::config("uniformity report needs at least one run"));
    }
    let pick = |f: fn(&ControlNorms) -> f64| spread(&runs.iter().map(|r| f(&r.norms)).collect::<Vec<_>>());
    let spreads = Spreads {
        p_c0: pick(|n| n.p_c0),
        v_l_c0: pick(|n| n.v_l_c0),
        v_r_c0: pick(|n| n.v_r_c0),
        trace_c1: pick(|n| n.trace_c1),
        total: pick(|n| n.total()),
        terminal_error: spread(&runs.iter().map(|r| r.terminal_error).collect::<Vec<_>>()),
    };
    let flagged = [
        ("p_c0", spreads.p_c0),
        ("v_l_c0", spreads.v_l_c0),
        ("v_r_c0", spreads.v_r_c0),
        ("trace_c1", spreads.trace_c1),
        ("total", spreads.total),
    ]
    .into_iter()
    .filter(|(_, s)| *s > UNIFORMITY_THRESHOLD)
    .map(|(k, _)| k.to_string())
    .collect();
    Ok(UniformityReport {
        alphas: runs.iter().map(|r| r.alpha).collect(),
        norms: runs.iter().map(|r| r.norms).collect(),
        terminal_errors: runs.iter().map(|r| r.terminal_error).collect(),
        spreads,
        threshold: UNIFORMITY_THRESHOLD,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1D, TimeGrid};

    fn norms(p: f64, v: f64) -> ControlNorms {
        ControlNorms { p_c0: p, v_l_c0: v, v_r_c0: v, trace_c1: v }
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.7)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(loglog_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn single_run_has_unit_spread() {
        let r = uniformity_report(&[UniformityRun { alpha: 0.1, norms: norms(1.0, 2.0), terminal_error: 1e-3 }]).unwrap();
        assert_eq!(r.spreads.total, 1.0);
        assert!(r.flagged.is_empty());
    }

    #[test]
    fn wide_spread_is_flagged() {
        let r = uniformity_report(&[
            UniformityRun { alpha: 0.1, norms: norms(1.0, 1.0), terminal_error: 0.0 },
            UniformityRun { alpha: 1.0, norms: norms(1.0, 5.0), terminal_error: 0.0 },
        ])
        .unwrap();
        assert_eq!(r.spreads.p_c0, 1.0);
        assert_eq!(r.spreads.terminal_error, 1.0);
        assert!(r.flagged.contains(&"v_l_c0".to_string()));
    }

    #[test]
    fn zero_data_has_zero_distances() {
        let g = Grid1D::new(0.0, 1.0, 21).unwrap();
        let c = ControlTriple::zeros(TimeGrid::new(0.0, 0.1, 10).unwrap());
        let t = alpha_limit_study(&Field::zeros(g), &c, &[0.2, 0.1], 1e-3, &ViscousConfig::default()).unwrap();
        assert!(t.rows.iter().all(|r| r.distance == 0.0));
    }
}

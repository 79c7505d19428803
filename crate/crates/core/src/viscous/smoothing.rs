//! Parabolic smoothing diagnostic for the free viscous system.

use super::solver::{simulate_viscous, ViscousConfig};
use crate::controls::ControlTriple;
use crate::error::{Error, Result};
use crate::filter::AlphaParam;
use crate::grid::{diff1_slice, diff2_slice, l2_slice, Field, Grid1D, TimeGrid};
use crate::scalar::{sup_abs, Real};
use serde::Serialize;

/// Times and bounds found by [`smoothing_monitor`]. Only the scalar fields
/// are serialized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingReport {
    pub t1: f64,
    pub t2: f64,
    #[serde(rename = "T_star")]
    pub t_star: f64,
    #[serde(rename = "c2_at_Tstar")]
    pub c2_at_tstar: f64,
    /// Sup of the `H^2` norm over `[t1, T]`.
    pub lambda1: f64,
    /// Sup over `[T*, T]` of a Sobolev-embedding bound for the `C^2` norm.
    pub lambda2: f64,
    pub alpha: f64,
    #[serde(skip)]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub h1_history: Vec<f64>,
    #[serde(skip)]
    pub h2_history: Vec<f64>,
    #[serde(skip)]
    pub h3_history: Vec<f64>,
    #[serde(skip)]
    pub c2_history: Vec<f64>,
}

/// Per-frame derivative norms of a nodal field.
struct FrameNorms {
    h1: f64,
    h2: f64,
    h3: f64,
    c2: f64,
    embed_c2: f64,
}

fn frame_norms<S: Real>(f: &[S], grid: &Grid1D<S>) -> FrameNorms {
    let n = f.len();
    let mut d1 = vec![S::zero(); n];
    let mut d2 = vec![S::zero(); n];
    let mut d3 = vec![S::zero(); n];
    diff1_slice(f, grid.dx, &mut d1);
    diff2_slice(f, grid.dx, &mut d2);
    diff1_slice(&d2, grid.dx, &mut d3);
    let l = [f, &d1[..], &d2[..], &d3[..]].map(|g| l2_slice(g, grid).as_f64());
    let s = [f, &d1[..], &d2[..]].map(|g| sup_abs(g).as_f64());
    let len = grid.length().as_f64();
    let (a, b) = (1.0 / len.sqrt(), len.sqrt());
    let h1 = (l[0] * l[0] + l[1] * l[1]).sqrt();
    let h2 = (h1 * h1 + l[2] * l[2]).sqrt();
    let h3 = (h2 * h2 + l[3] * l[3]).sqrt();
    FrameNorms {
        h1,
        h2,
        h3,
        c2: s.iter().sum(),
        embed_c2: (0..3).map(|j| a * l[j] + b * l[j + 1]).sum(),
    }
}

/// Earliest index in `range` whose value is at most the trapezoid mean of
/// `values` over `range` in time.
fn first_below_mean(values: &[f64], times: &[f64], range: std::ops::Range<usize>) -> Option<usize> {
    let (lo, hi) = (range.start, range.end);
    if hi <= lo + 1 {
        return None;
    }
    let mut area = 0.0;
    for k in lo..hi - 1 {
        area += 0.5 * (values[k] + values[k + 1]) * (times[k + 1] - times[k]);
    }
    let mean = area / (times[hi - 1] - times[lo]);
    (lo + 1..hi).find(|&k| values[k] <= mean)
}

/// Runs the uncontrolled system from `y0` over `[0, horizon]` with `m` steps
/// and locates the smoothing times.
pub fn smoothing_monitor<S: Real>(
    y0: &Field<S>,
    alpha: AlphaParam<S>,
    horizon: S,
    m: usize,
    config: &ViscousConfig<S>,
) -> Result<SmoothingReport> {
    let scale = y0.sup().max(S::one());
    let tol = S::lit(1e-12) * scale;
    if y0.first().abs() > tol || y0.last().abs() > tol {
        return Err(Error::config("smoothing monitor needs data vanishing at both ends"));
    }
    let tg = TimeGrid::new(S::zero(), horizon, m)?;
    let run = simulate_viscous(y0, &ControlTriple::zeros(tg), alpha, config)?;
    let grid = y0.grid;
    let times: Vec<f64> = tg.times().into_iter().map(|t| t.as_f64()).collect();
    let norms: Vec<FrameNorms> = run.y.frames.iter().map(|f| frame_norms(f, &grid)).collect();
    let pick = |g: fn(&FrameNorms) -> f64| norms.iter().map(g).collect::<Vec<f64>>();
    let h1 = pick(|r| r.h1);
    let h2 = pick(|r| r.h2);
    let h3 = pick(|r| r.h3);
    let c2 = pick(|r| r.c2);
    let embed = pick(|r| r.embed_c2);

    let half = horizon.as_f64() / 2.0;
    let end_half = times.iter().position(|&t| t >= half - 1e-12 * half).unwrap_or(times.len());
    let too_short = || Error::config(format!("horizon {horizon} too short to locate the smoothing times before T/2"));
    let k1 = first_below_mean(&h2, &times, 0..end_half).ok_or_else(too_short)?;
    let k2 = first_below_mean(&h3, &times, k1..end_half).ok_or_else(too_short)?;
    let tail_sup = |v: &[f64], from: usize| v[from..].iter().cloned().fold(0.0, f64::max);
    Ok(SmoothingReport {
        t1: times[k1],
        t2: times[k2],
        t_star: times[k2],
        c2_at_tstar: tail_sup(&c2, k2),
        lambda1: tail_sup(&h2, k1),
        lambda2: tail_sup(&embed, k2),
        alpha: alpha.alpha.as_f64(),
        times,
        h1_history: h1,
        h2_history: h2,
        h3_history: h3,
        c2_history: c2,
    })
}

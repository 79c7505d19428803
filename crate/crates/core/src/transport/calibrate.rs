//! Empirical smallness threshold for the fixed-point null controller.

use super::lambda::{LambdaProfile, LambdaWindow};
use super::picard::{picard_null_control, NullControlProblem, PicardConfig, Regularity};
use crate::error::{Error, Result};
use crate::filter::{AlphaParam, ExtendedGrid};
use crate::grid::{norms, Field, Grid1D, TimeGrid};
use crate::scalar::Real;
use serde::Serialize;
use std::collections::HashMap;

/// Problem family over which a threshold is calibrated.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSpec<S> {
    pub length: S,
    /// Horizon of the null-control runs.
    pub horizon: S,
    /// Period of the return profile (equal to `horizon` unless only its
    /// first half is used).
    pub period: S,
    pub eta: S,
    pub margin: S,
    pub window: LambdaWindow,
    pub regularity: Regularity,
    pub n: usize,
    pub m: usize,
    pub alphas: Vec<S>,
    /// Top of the initial amplitude bracket.
    pub upper: S,
    pub bisection_steps: usize,
}

impl<S: Real> CalibrationSpec<S> {
    /// Full-window, first-order family on `[0, L] x [0, T]`, checked at a
    /// 101-node mesh.
    pub fn c1(length: S, horizon: S, eta: S) -> Self {
        Self {
            length,
            horizon,
            period: horizon,
            eta,
            margin: S::lit(0.1),
            window: LambdaWindow::Full,
            regularity: Regularity::C1,
            n: 101,
            m: 100,
            alphas: vec![S::lit(0.05), S::lit(0.5), S::lit(5.0)],
            upper: S::one(),
            bisection_steps: 8,
        }
    }

    /// Half-window, second-order family on the unit-period horizon `[0, 1/2]`.
    pub fn c2_half_window(length: S, eta: S) -> Self {
        Self {
            horizon: S::lit(0.5),
            period: S::one(),
            window: LambdaWindow::FirstHalf,
            regularity: Regularity::C2,
            ..Self::c1(length, S::lit(0.5), eta)
        }
    }

    fn key(&self) -> String {
        format!(
            "{:?}|{:?}|{:?}|{:?}|{:?}|{:?}|{:?}|{}|{}|{:?}|{:?}|{}",
            self.length.as_f64().to_bits(),
            self.horizon.as_f64().to_bits(),
            self.period.as_f64().to_bits(),
            self.eta.as_f64().to_bits(),
            self.margin.as_f64().to_bits(),
            self.window,
            self.regularity,
            self.n,
            self.m,
            self.alphas.iter().map(|a| a.as_f64().to_bits()).collect::<Vec<_>>(),
            self.upper.as_f64().to_bits(),
            self.bisection_steps
        )
    }

    /// Unit-norm reference data: a constant and a half cosine, normalized in
    /// the norm matching the regularity class.
    pub fn reference_shapes(&self, grid: Grid1D<S>) -> Vec<Field<S>> {
        let l = self.length;
        let raw = [
            Field::constant(grid, S::one()),
            Field::from_fn(grid, |x| (S::PI() * x / l).cos()),
        ];
        raw.into_iter()
            .map(|f| {
                let r = norms(&f);
                let nrm = match self.regularity {
                    Regularity::C1 => r.c1,
                    Regularity::C2 => r.c2,
                };
                f.scaled(S::lit(1.0 / nrm))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    /// Largest amplitude (in the class norm) found admissible.
    pub delta_hat: f64,
    pub trials: Vec<(f64, bool)>,
}

/// Caches thresholds per calibration spec.
#[derive(Debug, Default, Clone)]
pub struct Calibrator {
    cache: HashMap<String, Threshold>,
}

impl Calibrator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn threshold<S: Real>(&mut self, spec: &CalibrationSpec<S>) -> Result<Threshold> {
        self.cached(spec.key(), || calibrate(spec))
    }

    /// Looks up `key`, computing and storing the threshold on a miss.
    pub fn cached(&mut self, key: String, compute: impl FnOnce() -> Result<Threshold>) -> Result<Threshold> {
        if let Some(t) = self.cache.get(&key) {
            return Ok(t.clone());
        }
        let t = compute()?;
        self.cache.insert(key, t.clone());
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }
}

/// Whether amplitude `a` times every reference shape converges for every
/// alpha within the iteration budget, with `sup|z*| <= eta/T` and monotone
/// departure maps.
pub fn admissible<S: Real>(spec: &CalibrationSpec<S>, amplitude: S) -> Result<bool> {
    let grid = Grid1D::new(S::zero(), spec.length, spec.n)?;
    let ext = ExtendedGrid::new(grid, spec.eta)?;
    let tgrid = TimeGrid::new(S::zero(), spec.horizon, spec.m)?;
    let lambda = LambdaProfile::new(spec.length, spec.period, ext.eta, spec.margin, spec.window)?;
    let config = PicardConfig {
        regularity: spec.regularity,
        ..PicardConfig::default()
    };
    let speed_cap = ext.eta / spec.horizon;
    for shape in spec.reference_shapes(grid) {
        for &a in &spec.alphas {
            let problem = NullControlProblem {
                y0: shape.scaled(amplitude),
                lambda,
                alpha: AlphaParam::new(a)?,
                ext,
                tgrid,
            };
            match picard_null_control(&problem, &config) {
                Ok(sol) => {
                    let r = &sol.report;
                    if !(r.monotone && r.max_zstar <= speed_cap.as_f64()) {
                        return Ok(false);
                    }
                }
                Err(Error::NonConvergence { .. }) | Err(Error::StepTooCoarse { .. }) => return Ok(false),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(true)
}

fn calibrate<S: Real>(spec: &CalibrationSpec<S>) -> Result<Threshold> {
    if !admissible(spec, S::zero())? {
        return Err(Error::config(
            "calibration mesh cannot resolve the return profile; increase m",
        ));
    }
    bisect_threshold(spec.upper.as_f64(), spec.bisection_steps, |a| admissible(spec, S::lit(a)))
}

/// Largest admissible amplitude in `[0, upper]`, by bisection after testing
/// `upper` itself. Assumes admissibility is monotone in the amplitude.
pub fn bisect_threshold(upper: f64, steps: usize, mut admissible: impl FnMut(f64) -> Result<bool>) -> Result<Threshold> {
    let mut trials = Vec::new();
    let ok = admissible(upper)?;
    trials.push((upper, ok));
    if ok {
        return Ok(Threshold {
            delta_hat: upper,
            trials,
        });
    }
    let (mut lo, mut hi) = (0.0, upper);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        let ok = admissible(mid)?;
        trials.push((mid, ok));
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold { delta_hat: lo, trials })
}

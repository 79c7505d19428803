//! Time samples of the distributed control and the two boundary traces.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::interp::series_at;
use crate::scalar::{sup_abs, Real};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct ControlTriple<S> {
    pub tgrid: TimeGrid<S>,
    pub p: Vec<S>,
    pub v_l: Vec<S>,
    pub v_r: Vec<S>,
}

/// Sup norms of a control triple; `trace_c1` adds sup of the time differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlNorms {
    pub p_c0: f64,
    pub v_l_c0: f64,
    pub v_r_c0: f64,
    pub trace_c1: f64,
}

impl ControlNorms {
    /// `||p||_C0 + ||(v_l, v_r)||_C1`.
    pub fn total(&self) -> f64 {
        self.p_c0 + self.trace_c1
    }
}

impl<S: Real> ControlTriple<S> {
    pub fn new(tgrid: TimeGrid<S>, p: Vec<S>, v_l: Vec<S>, v_r: Vec<S>) -> Result<Self> {
        let want = tgrid.m + 1;
        if p.len() != want || v_l.len() != want || v_r.len() != want {
            return Err(Error::GridMismatch(format!(
                "control samples ({}, {}, {}) do not match {} time nodes",
                p.len(),
                v_l.len(),
                v_r.len(),
                want
            )));
        }
        if p.iter().chain(&v_l).chain(&v_r).any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite control sample".into()));
        }
        Ok(Self { tgrid, p, v_l, v_r })
    }

    pub fn zeros(tgrid: TimeGrid<S>) -> Self {
        let z = vec![S::zero(); tgrid.m + 1];
        Self {
            tgrid,
            p: z.clone(),
            v_l: z.clone(),
            v_r: z,
        }
    }

    pub fn constant_traces(tgrid: TimeGrid<S>, v: S) -> Self {
        let mut c = Self::zeros(tgrid);
        c.v_l.iter_mut().for_each(|x| *x = v);
        c.v_r.iter_mut().for_each(|x| *x = v);
        c
    }

    pub fn p_at(&self, t: S) -> S {
        series_at(&self.p, self.tgrid.t0, self.tgrid.dt, t)
    }

    pub fn v_l_at(&self, t: S) -> S {
        series_at(&self.v_l, self.tgrid.t0, self.tgrid.dt, t)
    }

    pub fn v_r_at(&self, t: S) -> S {
        series_at(&self.v_r, self.tgrid.t0, self.tgrid.dt, t)
    }

    /// Exact integral of the piecewise-linear `p` over `[a, b]`.
    pub fn p_integral(&self, a: S, b: S) -> S {
        if b < a {
            return -self.p_integral(b, a);
        }
        let tg = &self.tgrid;
        let mut acc = S::zero();
        let mut t = a;
        while t < b {
            let k = ((t - tg.t0) / tg.dt).floor().to_usize().unwrap_or(0).min(tg.m - 1);
            let edge = tg.t(k + 1).min(b);
            let edge = if edge <= t { b } else { edge };
            acc += (edge - t) * (self.p_at(t) + self.p_at(edge)) / S::lit(2.0);
            t = edge;
        }
        acc
    }

    pub fn norms(&self) -> ControlNorms {
        let dt = self.tgrid.dt;
        let slope = |v: &[S]| {
            v.windows(2)
                .fold(S::zero(), |m, w| m.max(((w[1] - w[0]) / dt).abs()))
        };
        let v_l_c0 = sup_abs(&self.v_l);
        let v_r_c0 = sup_abs(&self.v_r);
        let trace_c1 = v_l_c0.max(v_r_c0) + slope(&self.v_l).max(slope(&self.v_r));
        ControlNorms {
            p_c0: sup_abs(&self.p).as_f64(),
            v_l_c0: v_l_c0.as_f64(),
            v_r_c0: v_r_c0.as_f64(),
            trace_c1: trace_c1.as_f64(),
        }
    }

    /// `(t, p, v_l, v_r)` rows.
    pub fn rows(&self) -> Vec<[S; 4]> {
        (0..=self.tgrid.m)
            .map(|k| [self.tgrid.t(k), self.p[k], self.v_l[k], self.v_r[k]])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_integral_is_exact_for_linear_samples() {
        let tg = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let p: Vec<f64> = tg.times().iter().map(|t| 2.0 * t + 1.0).collect();
        let c = ControlTriple::new(tg, p, vec![0.0; 11], vec![0.0; 11]).unwrap();
        let got = c.p_integral(0.13, 0.77);
        let exact = (0.77f64 * 0.77 + 0.77) - (0.13 * 0.13 + 0.13);
        assert!((got - exact).abs() < 1e-14);
    }

    #[test]
    fn length_mismatch_rejected() {
        let tg = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert!(ControlTriple::new(tg, vec![0.0; 4], vec![0.0; 5], vec![0.0; 5]).is_err());
    }
}

//! The return-method profile `lambda(t) = A sin^2(pi t / T)`.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::scalar::Real;
use serde::Serialize;

/// Which part of the window must carry the required mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LambdaWindow {
    /// Mass over `(0, T)` exceeds `L + 2 eta`.
    Full,
    /// Mass over `(0, T/2)` exceeds `L + 2 eta`; used when the profile is
    /// split into a forward and a time-reversed half.
    FirstHalf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaProfile<S> {
    pub t0: S,
    pub horizon: S,
    pub amplitude: S,
    /// The mass the profile was sized to exceed.
    pub required_mass: S,
    pub margin: S,
    pub window: LambdaWindow,
}

impl<S: Real> LambdaProfile<S> {
    pub fn new(length: S, horizon: S, eta: S, margin: S, window: LambdaWindow) -> Result<Self> {
        if !(margin > S::zero()) {
            return Err(Error::config(format!("lambda margin must be > 0 (got {margin})")));
        }
        if !(horizon > S::zero()) || !(length > S::zero()) || !(eta >= S::zero()) {
            return Err(Error::config("lambda needs L > 0, T > 0, eta >= 0"));
        }
        let required_mass = length + S::lit(2.0) * eta;
        let factor = match window {
            LambdaWindow::Full => S::lit(2.0),
            LambdaWindow::FirstHalf => S::lit(4.0),
        };
        Ok(Self {
            t0: S::zero(),
            horizon,
            amplitude: factor * required_mass * (S::one() + margin) / horizon,
            required_mass,
            margin,
            window,
        })
    }

    /// A profile with a given amplitude, mainly for tests.
    pub fn with_amplitude(horizon: S, amplitude: S) -> Self {
        Self {
            t0: S::zero(),
            horizon,
            amplitude,
            required_mass: S::zero(),
            margin: S::zero(),
            window: LambdaWindow::Full,
        }
    }

    /// `t -> lambda((t - t0)/tau)/tau` on `[t0, t0 + tau*T]`.
    pub fn rescaled(&self, tau: S) -> Self {
        Self {
            horizon: self.horizon * tau,
            amplitude: self.amplitude / tau,
            ..*self
        }
    }

    pub fn shifted(&self, t0: S) -> Self {
        Self { t0, ..*self }
    }

    fn phase(&self, t: S) -> Option<S> {
        let s = t - self.t0;
        if s < S::zero() || s > self.horizon {
            None
        } else {
            Some(S::PI() * s / self.horizon)
        }
    }

    #[inline]
    pub fn value(&self, t: S) -> S {
        match self.phase(t) {
            Some(th) => {
                let s = th.sin();
                self.amplitude * s * s
            }
            None => S::zero(),
        }
    }

    #[inline]
    pub fn derivative(&self, t: S) -> S {
        match self.phase(t) {
            Some(th) => self.amplitude * S::PI() / self.horizon * (th + th).sin(),
            None => S::zero(),
        }
    }

    /// `int_{t0}^{t} lambda`.
    #[inline]
    pub fn primitive(&self, t: S) -> S {
        let s = (t - self.t0).max(S::zero()).min(self.horizon);
        let th = S::PI() * s / self.horizon;
        self.amplitude * (s / S::lit(2.0) - self.horizon * (th + th).sin() / (S::lit(4.0) * S::PI()))
    }

    pub fn mass(&self) -> S {
        self.amplitude * self.horizon / S::lit(2.0)
    }

    pub fn max_value(&self) -> S {
        self.amplitude
    }

    pub fn samples(&self, tgrid: &TimeGrid<S>) -> Vec<S> {
        tgrid.times().into_iter().map(|t| self.value(t)).collect()
    }

    pub fn derivative_samples(&self, tgrid: &TimeGrid<S>) -> Vec<S> {
        tgrid.times().into_iter().map(|t| self.derivative(t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_amplitude_and_mass() {
        let l = LambdaProfile::<f64>::new(1.0, 1.0, 0.25, 0.1, LambdaWindow::Full).unwrap();
        assert!((l.amplitude - 3.3).abs() < 1e-12);
        assert!((l.mass() - 1.65).abs() < 1e-12);
        assert!((l.primitive(1.0) - 1.65).abs() < 1e-12);
        assert_eq!(l.value(0.0), 0.0);
        assert!(l.value(1.0).abs() < 1e-12 && l.derivative(1.0).abs() < 1e-12);
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            assert!((l.value(t) - l.value(1.0 - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn half_window_mass() {
        let l = LambdaProfile::<f64>::new(1.0, 1.0, 0.25, 0.1, LambdaWindow::FirstHalf).unwrap();
        assert!(l.primitive(0.5) > 1.5);
        let r = l.rescaled(0.1);
        assert!((r.primitive(0.1) - l.primitive(1.0)).abs() < 1e-12);
        assert!((r.value(0.03) - l.value(0.3) / 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_margin_rejected() {
        assert!(LambdaProfile::new(1.0, 1.0, 0.25, 0.0, LambdaWindow::Full).is_err());
    }
}

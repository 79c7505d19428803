//! Fourier-weighted Sobolev surrogate for sampled boundary traces.

use std::f64::consts::PI;

/// Linear interpolation in a nondecreasing `(t, v)` sequence; repeated times
/// take the later sample.
fn sample_at(series: &[(f64, f64)], t: f64) -> f64 {
    let k = series.partition_point(|&(s, _)| s <= t);
    if k == 0 {
        return series[0].1;
    }
    if k == series.len() {
        return series[k - 1].1;
    }
    let (t0, v0) = series[k - 1];
    let (t1, v1) = series[k];
    if t1 <= t0 {
        v1
    } else {
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

/// `H^s` norm surrogate of a time series on `[t_first, t_last]`.
///
/// The series is resampled at `samples` cell midpoints, extended evenly to
/// twice the interval, and weighted by `(1 + omega^2)^(s/2)` over the
/// discrete Fourier coefficients. Constants give `sqrt(T) |c|`.
pub fn sobolev_surrogate(series: &[(f64, f64)], s: f64, samples: usize) -> f64 {
    if series.len() < 2 || samples == 0 {
        return 0.0;
    }
    let a = series[0].0;
    let horizon = series[series.len() - 1].0 - a;
    if horizon <= 0.0 {
        return 0.0;
    }
    let h = horizon / samples as f64;
    let half: Vec<f64> = (0..samples).map(|j| sample_at(series, a + (j as f64 + 0.5) * h)).collect();
    let ext: Vec<f64> = half.iter().chain(half.iter().rev()).copied().collect();
    let big = ext.len();
    let mut acc = 0.0;
    for k in 0..big {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, &v) in ext.iter().enumerate() {
            let phase = -2.0 * PI * ((j * k) % big) as f64 / big as f64;
            re += v * phase.cos();
            im += v * phase.sin();
        }
        let signed = if k <= big / 2 { k as f64 } else { k as f64 - big as f64 };
        let omega = PI * signed / horizon;
        let c2 = (re * re + im * im) / (big * big) as f64;
        acc += (1.0 + omega * omega).powf(0.5 * s) * c2;
    }
    (horizon * acc).sqrt()
}

/// The `H^{3/4}` surrogate with 256 samples.
pub fn h34_surrogate(series: &[(f64, f64)]) -> f64 {
    sobolev_surrogate(series, 0.75, 256)
}

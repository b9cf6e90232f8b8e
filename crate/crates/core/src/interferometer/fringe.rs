//! Fringe frequency read-off: periodogram peak, then a least-squares
//! sinusoid fit over the peak's neighbourhood.

use super::PhaseCalibration;
use crate::error::{Result, SccError};
use nalgebra::{Matrix3, Vector3};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

const MIN_PERIODS: f64 = 4.0;
const MIN_POINTS_PER_PERIOD: f64 = 16.0;
/// Required magnitude ratio between the dominant and the next distinct peak.
const DOMINANCE: f64 = 3.0;

fn invalid(reason: String) -> SccError {
    SccError::InvalidParams {
        op: "estimate_fringe_frequency",
        reason,
    }
}

/// Residual sum of squares of the best fit `a + b cos(ωu) + c sin(ωu)`.
fn sinusoid_rss(u: &[f64], y: &[f64], omega: f64) -> f64 {
    let mut m = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (&ui, &yi) in u.iter().zip(y) {
        let (s, c) = (omega * ui).sin_cos();
        let row = Vector3::new(1.0, c, s);
        m += row * row.transpose();
        rhs += row * yi;
    }
    let Some(coef) = m.lu().solve(&rhs) else {
        return f64::INFINITY;
    };
    u.iter()
        .zip(y)
        .map(|(&ui, &yi)| {
            let (s, c) = (omega * ui).sin_cos();
            let r = yi - (coef[0] + coef[1] * c + coef[2] * s);
            r * r
        })
        .sum()
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-13 * (a.abs() + b.abs()) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Estimates `Ω` from uniformly spaced `(u, <η>)` samples.
///
/// The dominant peak is the largest local maximum of the periodogram
/// magnitude; it must exceed every other local maximum at least two bins away
/// by a factor of 3.
pub fn estimate_fringe_frequency(samples: &[(f64, f64)]) -> Result<PhaseCalibration> {
    let n = samples.len();
    if (n as f64) < MIN_PERIODS * MIN_POINTS_PER_PERIOD {
        return Err(SccError::InsufficientSamples(format!(
            "estimate_fringe_frequency: {n} samples, need at least {}",
            MIN_PERIODS * MIN_POINTS_PER_PERIOD
        )));
    }
    if samples
        .iter()
        .any(|(u, y)| !u.is_finite() || !y.is_finite())
    {
        return Err(invalid("samples must be finite".into()));
    }
    let u0 = samples[0].0;
    let du = (samples[n - 1].0 - u0) / (n - 1) as f64;
    if !(du > 0.0) {
        return Err(invalid("dwell times must increase".into()));
    }
    for (j, (u, _)) in samples.iter().enumerate() {
        if (u - (u0 + j as f64 * du)).abs() > 1e-6 * du {
            return Err(invalid(format!("sample {j} breaks uniform spacing")));
        }
    }

    let u: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / n as f64;
    let y: Vec<f64> = samples.iter().map(|s| s.1 - mean).collect();

    let mut buf: Vec<Complex<f64>> = y.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..=n / 2].iter().map(|z| z.norm()).collect();

    let last = mag.len() - 1;
    let peaks: Vec<usize> = (1..=last)
        .filter(|&j| mag[j] > 0.0 && mag[j] >= mag[j - 1] && (j == last || mag[j] >= mag[j + 1]))
        .collect();
    let Some(&top) = peaks.iter().max_by(|&&a, &&b| mag[a].total_cmp(&mag[b])) else {
        return Err(SccError::NoDominantPeak { ratio: 0.0 });
    };
    let runner_up = peaks
        .iter()
        .filter(|&&j| j.abs_diff(top) >= 2)
        .map(|&j| mag[j])
        .fold(0.0, f64::max);
    let ratio = mag[top] / runner_up;
    if ratio < DOMINANCE {
        return Err(SccError::NoDominantPeak { ratio });
    }

    let bin = 2.0 * std::f64::consts::PI / (n as f64 * du);
    let lo = (top as f64 - 1.0).max(0.5) * bin;
    let hi = (top as f64 + 1.0) * bin;
    let omega = golden_min(|w| sinusoid_rss(&u, &y, w), lo, hi);

    let span = du * (n - 1) as f64;
    let periods = omega * span / (2.0 * std::f64::consts::PI);
    let per_period = 2.0 * std::f64::consts::PI / (omega * du);
    if periods < MIN_PERIODS * 0.99 || per_period < MIN_POINTS_PER_PERIOD * 0.99 {
        return Err(SccError::InsufficientSamples(format!(
            "estimate_fringe_frequency: {periods:.2} periods at {per_period:.1} points per period, \
             need {MIN_PERIODS} at {MIN_POINTS_PER_PERIOD}"
        )));
    }
    PhaseCalibration::new(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn trace(f: impl Fn(f64) -> f64, u_max: f64, steps: usize) -> Vec<(f64, f64)> {
        (0..steps)
            .map(|j| {
                let u = u_max * j as f64 / (steps - 1) as f64;
                (u, f(u))
            })
            .collect()
    }

    #[test]
    fn pure_sinusoid() {
        let s = trace(|u| 3.0 + 2.0 * (2307.0 * u).cos(), 0.03, 1024);
        let cal = estimate_fringe_frequency(&s).unwrap();
        assert_relative_eq!(cal.omega, 2307.0, max_relative = 1e-9);
    }

    #[test]
    fn harmonics_do_not_move_fundamental() {
        let s = trace(
            |u| (1000.0 * u).cos() + 0.2 * (2000.0 * u + 0.3).cos() + 0.01 * u,
            0.05,
            2048,
        );
        let cal = estimate_fringe_frequency(&s).unwrap();
        assert_relative_eq!(cal.omega, 1000.0, max_relative = 1e-3);
    }

    #[test]
    fn two_comparable_tones_rejected() {
        let s = trace(|u| (1000.0 * u).cos() + 0.6 * (1700.0 * u).cos(), 0.1, 4096);
        assert!(matches!(
            estimate_fringe_frequency(&s),
            Err(SccError::NoDominantPeak { .. })
        ));
    }

    #[test]
    fn too_few_periods_or_points() {
        let s = trace(|u| (1000.0 * u).cos(), 0.01, 256);
        assert!(matches!(
            estimate_fringe_frequency(&s),
            Err(SccError::InsufficientSamples(_))
        ));
        let s = trace(|u| (1000.0 * u).cos(), 1.0, 100);
        assert!(estimate_fringe_frequency(&s).is_err());
        assert!(estimate_fringe_frequency(&s[..10]).is_err());
    }

    #[test]
    fn constant_trace_has_no_peak() {
        let s = trace(|_| 1.0, 1.0, 128);
        assert!(matches!(
            estimate_fringe_frequency(&s),
            Err(SccError::NoDominantPeak { .. })
        ));
    }

    #[test]
    fn nonuniform_spacing_rejected() {
        let mut s = trace(|u| (100.0 * u).cos(), 1.0, 256);
        s[7].0 += 1e-3;
        assert!(matches!(
            estimate_fringe_frequency(&s),
            Err(SccError::InvalidParams { .. })
        ));
    }
}

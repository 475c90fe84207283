//! Power spectrum `|d̄(ω)|² = |(1/T) ∫₀ᵀ e^{−iωt} d̄(t) dt|²` of a dipole series
//! and harmonic-order sampling.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::observables::DipoleSeries;

/// Taper applied to the dipole before the transform.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Window {
    #[default]
    None,
    /// Hann taper `sin²(πt/T)`. Not part of the reference definition; for
    /// leakage studies only.
    Hann,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub total_time: f64,
}

/// `ω_j = j ω0 / per_harmonic` for `j = 0 ..= max_order · per_harmonic`.
pub fn harmonic_grid(omega0: f64, max_order: usize, per_harmonic: usize) -> Vec<f64> {
    let steps = max_order * per_harmonic;
    (0..=steps)
        .map(|j| omega0 * j as f64 / per_harmonic as f64)
        .collect()
}

/// Default evaluation grid: `0..=30 ω0` in steps of `ω0 / 20`.
pub fn default_grid(omega0: f64) -> Vec<f64> {
    harmonic_grid(omega0, 30, 20)
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Domain(
            "dipole series needs at least 2 samples".into(),
        ));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::Domain(
            "time grid must be strictly increasing".into(),
        ));
    }
    for (k, &t) in times.iter().enumerate() {
        let want = times[0] + k as f64 * dt;
        if (t - want).abs() > 1e-9 * dt.max(want.abs()) {
            return Err(Error::Domain(format!(
                "time grid is not uniform at sample {k}"
            )));
        }
    }
    Ok(dt)
}

/// Trapezoid-rule evaluation of the finite Fourier integral at each requested
/// frequency.
pub fn power_spectrum(
    series: &DipoleSeries,
    omegas: &[f64],
    window: Window,
) -> Result<PowerSpectrum> {
    let dt = uniform_step(&series.times)?;
    let max_safe = PI / dt;
    for w in omegas.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Domain(
                "frequency grid must be strictly increasing".into(),
            ));
        }
    }
    if let Some(&wmax) = omegas.iter().max_by(|a, b| a.abs().total_cmp(&b.abs())) {
        if wmax.abs() > max_safe * (1.0 + 1e-12) {
            return Err(Error::Aliasing {
                requested: wmax.abs(),
                max_safe,
            });
        }
    }
    let t0 = series.times[0];
    let total = series.times[series.times.len() - 1] - t0;
    let last = series.len() - 1;
    let weighted: Vec<f64> = series
        .values
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            let trap = if k == 0 || k == last { 0.5 } else { 1.0 };
            let taper = match window {
                Window::None => 1.0,
                Window::Hann => (PI * k as f64 / last as f64).sin().powi(2),
            };
            trap * taper * d
        })
        .collect();
    let values = omegas
        .iter()
        .map(|&omega| {
            let (mut re, mut im) = (0.0, 0.0);
            for (&t, &wd) in series.times.iter().zip(&weighted) {
                let (s, c) = (omega * t).sin_cos();
                re += wd * c;
                im -= wd * s;
            }
            let scale = dt / total;
            (re * scale).powi(2) + (im * scale).powi(2)
        })
        .collect();
    Ok(PowerSpectrum {
        omegas: omegas.to_vec(),
        values,
        total_time: total,
    })
}

/// `|d̄(k ω0)|²` for `k = 0 ..= k_max`, read at the grid point nearest `k ω0`.
pub fn harmonic_peaks(
    spec: &PowerSpectrum,
    omega0: f64,
    k_max: usize,
) -> Result<Vec<(usize, f64)>> {
    let max = spec.omegas.last().copied().unwrap_or(0.0);
    let step = if spec.omegas.len() > 1 {
        spec.omegas[1] - spec.omegas[0]
    } else {
        0.0
    };
    (0..=k_max)
        .map(|k| {
            let omega = k as f64 * omega0;
            if omega > max + 0.5 * step || spec.omegas.is_empty() {
                return Err(Error::Coverage {
                    order: k,
                    omega,
                    max,
                });
            }
            let idx = nearest(&spec.omegas, omega);
            Ok((k, spec.values[idx]))
        })
        .collect()
}

fn nearest(grid: &[f64], x: f64) -> usize {
    let pos = grid.partition_point(|&g| g < x);
    if pos == 0 {
        0
    } else if pos == grid.len() {
        grid.len() - 1
    } else if (grid[pos] - x).abs() < (x - grid[pos - 1]).abs() {
        pos
    } else {
        pos - 1
    }
}

/// Indices of grid points that are the largest value within `±half_width`
/// in `ω` (strict local maxima at the resolution of a peak finder).
pub fn dominant_maxima(spec: &PowerSpectrum, lo: f64, hi: f64, half_width: f64) -> Vec<usize> {
    let w = &spec.omegas;
    let v = &spec.values;
    (0..w.len())
        .filter(|&i| w[i] > lo && w[i] < hi)
        .filter(|&i| {
            let left = i > 0 && v[i] > v[i - 1];
            let right = i + 1 < w.len() && v[i] > v[i + 1];
            left && right
        })
        .filter(|&i| {
            (0..w.len())
                .filter(|&j| j != i && (w[j] - w[i]).abs() <= half_width + 1e-12)
                .all(|j| v[j] < v[i])
        })
        .collect()
}

/// Strict local maxima on `(lo, hi)`.
pub fn local_maxima(spec: &PowerSpectrum, lo: f64, hi: f64) -> Vec<usize> {
    let w = &spec.omegas;
    let v = &spec.values;
    (1..w.len().saturating_sub(1))
        .filter(|&i| w[i] > lo && w[i] < hi && v[i] > v[i - 1] && v[i] > v[i + 1])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn series(t_end: f64, samples: usize, f: impl Fn(f64) -> f64) -> DipoleSeries {
        let times: Vec<f64> = (0..samples)
            .map(|k| t_end * k as f64 / (samples - 1) as f64)
            .collect();
        let values = times.iter().map(|&t| f(t)).collect();
        DipoleSeries { times, values }
    }

    #[test]
    fn constant_signal() {
        let t_end = 100.0;
        let s = series(t_end, 2001, |_| -3.0);
        let grid = default_grid(1.0);
        let spec = power_spectrum(&s, &grid, Window::None).unwrap();
        assert!((spec.values[0] - 9.0).abs() < 1e-12);
        for (&w, &p) in spec.omegas.iter().zip(&spec.values).skip(1) {
            // closed form |(e^{−iωT} − 1)/(iωT)|² c²; trapezoid adds O(dt²)
            let exact = 9.0
                * ((Complex64::new(0.0, -w * t_end).exp() - 1.0) / Complex64::new(0.0, w * t_end))
                    .norm_sqr();
            let dt = t_end / 2000.0;
            assert!(
                (p - exact).abs() < 9.0 * (w * dt).powi(2) / 6.0 + 1e-14,
                "w={w}: {p} vs {exact}"
            );
        }
        let peaks = harmonic_peaks(&spec, 1.0, 20).unwrap();
        for &(k, p) in &peaks[1..] {
            assert!(p < 1e-3 * peaks[0].1, "k={k}");
        }
    }

    #[test]
    fn cosine_whole_periods() {
        let t_end = 2.0 * PI * 16.0;
        let s = series(t_end, 4001, |t| t.cos());
        let spec = power_spectrum(&s, &harmonic_grid(1.0, 5, 20), Window::None).unwrap();
        let peaks = harmonic_peaks(&spec, 1.0, 5).unwrap();
        assert!((peaks[1].1 - 0.25).abs() < 1e-6);
        let best = peaks.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(best.0, 1);
    }

    #[test]
    fn aliasing_guard() {
        let s = series(10.0, 11, |t| t);
        // dt = 1 → max safe ω = π
        let err = power_spectrum(&s, &[0.0, 4.0], Window::None).unwrap_err();
        match err {
            Error::Aliasing { max_safe, .. } => assert!((max_safe - PI).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(power_spectrum(&s, &[0.0, 3.0], Window::None).is_ok());
    }

    #[test]
    fn coverage_error() {
        let s = series(10.0, 101, |t| t.cos());
        let spec = power_spectrum(&s, &harmonic_grid(1.0, 3, 10), Window::None).unwrap();
        assert!(matches!(
            harmonic_peaks(&spec, 1.0, 4),
            Err(Error::Coverage { order: 4, .. })
        ));
    }

    #[test]
    fn hann_window_suppresses_leakage() {
        let t_end = 100.0;
        let s = series(t_end, 2001, |_| 1.0);
        let grid = harmonic_grid(1.0, 10, 20);
        let plain = power_spectrum(&s, &grid, Window::None).unwrap();
        let hann = power_spectrum(&s, &grid, Window::Hann).unwrap();
        assert!(hann.values[100] < 1e-3 * plain.values[100]);
    }

    #[test]
    fn maxima_finders() {
        let spec = PowerSpectrum {
            omegas: (0..11).map(|k| k as f64).collect(),
            values: vec![0.0, 5.0, 1.0, 2.0, 1.0, 0.0, 3.0, 0.0, 0.0, 1.0, 0.0],
            total_time: 1.0,
        };
        assert_eq!(local_maxima(&spec, 0.5, 10.0), vec![1, 3, 6, 9]);
        assert_eq!(dominant_maxima(&spec, 0.5, 10.0, 2.0), vec![1, 6, 9]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn quadratic_in_amplitude(alpha in -5.0f64..5.0, phase in 0.0f64..6.0) {
            let s = series(50.0, 1001, |t| (1.3 * t + phase).sin() + 0.2);
            let scaled = DipoleSeries { times: s.times.clone(), values: s.values.iter().map(|v| alpha * v).collect() };
            let grid = harmonic_grid(1.0, 10, 20);
            let a = power_spectrum(&s, &grid, Window::None).unwrap();
            let b = power_spectrum(&scaled, &grid, Window::None).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((alpha * alpha * x - y).abs() <= 1e-12 * y.abs().max(1e-12));
            }
            let neg: Vec<f64> = grid.iter().map(|w| -w).rev().collect();
            let c = power_spectrum(&s, &neg, Window::None).unwrap();
            for (x, y) in a.values.iter().zip(c.values.iter().rev()) {
                prop_assert!((x - y).abs() <= 1e-13 * x.abs().max(1e-12));
            }
        }
    }
}

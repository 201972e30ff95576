//! Axis of symmetry of a wave and the rigid-translation test.
//!
//! A field is symmetric about `a` when `u(x) = u(2a - x)`. On a periodic
//! window, reflections about `a` and `a + L/2` are the same map, so the
//! correlation `C(a) = sum_j u(x_j) u(2a - x_j)` has period `L/2` in `a`.
//! In Fourier variables `C(a) = (1/N) Re sum_k u_k^2 exp(2 i k a)`, which one
//! inverse FFT samples on the half-grid `a_m = m L / (2N)`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::grid::{Field, Grid};

/// Relative tolerance under which two correlation peaks count as equal.
pub const AMBIGUITY_TOL: f64 = 1e-9;
/// Default per-snapshot asymmetry bound.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-6;
/// Default bound on the shift-match error.
pub const DEFAULT_TRAVEL_TOL: f64 = 1e-3;

/// `x -> u(2 axis - x)`, band-limited for off-grid axes.
///
/// The Nyquist mode has no sine partner on the grid, so its reflection keeps
/// only the `cos(2 k_N axis)` part; for fields without Nyquist content the
/// map is an exact involution.
pub fn reflect(u: &Field, axis: f64) -> Field {
    let grid = u.grid();
    let n = grid.n_points();
    let spectrum = grid.forward(u.values());
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); n];
    for (j, z) in spectrum.iter().enumerate() {
        let k = grid.wavenumber(j);
        if grid.is_nyquist(j) {
            out[j] = *z * libm::cos(2.0 * k * axis);
        } else {
            out[(n - j) % n] = *z * Complex64::from_polar(1.0, 2.0 * k * axis);
        }
    }
    Field::from_parts(grid.clone(), grid.inverse(out))
}

/// Band-limited value of the field with spectrum `spectrum` at `x`.
fn evaluate(grid: &Grid, spectrum: &[Complex64], x: f64) -> f64 {
    let sum: f64 = spectrum
        .iter()
        .enumerate()
        .map(|(j, z)| (z * Complex64::from_polar(1.0, grid.wavenumber(j) * x)).re)
        .sum();
    sum / grid.n_points() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxisEstimate {
    /// Reflection center in `[0, L)`.
    pub axis: f64,
    /// `||u - reflect(u, axis)||_2 / ||u - mean(u)||_2`.
    pub asymmetry: f64,
    /// Another, inequivalent axis fits equally well (or the crest/trough
    /// choice between `axis` and `axis + L/2` is a tie).
    pub ambiguous: bool,
}

/// Squared spectrum `u_k^2` of the mean-free field, and the mean-free norm.
struct Correlation<'a> {
    grid: &'a Grid,
    squared: Vec<Complex64>,
}

impl Correlation<'_> {
    /// `(C, C', C'')` at `a`.
    fn derivatives(&self, a: f64) -> (f64, f64, f64) {
        let n = self.grid.n_points() as f64;
        let mut c = [0.0; 3];
        for (j, z) in self.squared.iter().enumerate() {
            let k = self.grid.wavenumber(j);
            let w = z * Complex64::from_polar(1.0, 2.0 * k * a);
            c[0] += w.re;
            // d/da of Re(w) = Re(2 i k w) = -2k Im(w)
            c[1] -= 2.0 * k * w.im;
            c[2] -= 4.0 * k * k * w.re;
        }
        (c[0] / n, c[1] / n, c[2] / n)
    }

    /// Parabolic refinement of sample `m`, then Newton on `C'` within one sample.
    fn refine(&self, samples: &[f64], m: usize) -> (f64, f64) {
        let n = samples.len();
        let step = 0.5 * self.grid.spacing();
        let (ym, y0, yp) = (samples[(m + n - 1) % n], samples[m], samples[(m + 1) % n]);
        let curvature = ym - 2.0 * y0 + yp;
        let offset = if curvature < 0.0 { (0.5 * (ym - yp) / curvature).clamp(-0.5, 0.5) } else { 0.0 };
        let start = (m as f64 + offset) * step;
        let mut a = start;
        for _ in 0..30 {
            let (_, d1, d2) = self.derivatives(a);
            if !(d2 < 0.0) {
                break;
            }
            let next = a - d1 / d2;
            if (next - start).abs() > step {
                break;
            }
            let done = (next - a).abs() <= 1e-15 * self.grid.length();
            a = next;
            if done {
                break;
            }
        }
        (a, self.derivatives(a).0)
    }
}

/// Axis maximizing the reflection correlation, i.e. minimizing
/// `||u - reflect(u, a)||_2`.
pub fn detect_axis(u: &Field) -> Result<AxisEstimate> {
    let grid = u.grid();
    let length = grid.length();
    let mean = u.mean();
    let centered: Vec<f64> = u.values().iter().map(|v| v - mean).collect();
    let spread = libm::sqrt(grid.spacing() * centered.iter().map(|v| v * v).sum::<f64>());
    if !(spread > 1e-12) {
        return Err(Error::UndefinedAxis);
    }
    let spectrum = grid.forward(&centered);
    let corr = Correlation { grid, squared: spectrum.iter().map(|z| z * z).collect() };
    let samples = grid.inverse(corr.squared.clone());
    let n = samples.len();

    let peaks: Vec<usize> = (0..n)
        .filter(|&m| {
            let (l, r) = (samples[(m + n - 1) % n], samples[(m + 1) % n]);
            samples[m] >= l && samples[m] > r || samples[m] > l && samples[m] >= r
        })
        .collect();
    let mut refined: Vec<(f64, f64)> = peaks.iter().map(|&m| corr.refine(&samples, m)).collect();
    refined.sort_by(|x, y| y.1.total_cmp(&x.1));
    let (best, top) = refined[0];
    let scale = top.abs().max(f64::MIN_POSITIVE);
    let half = 0.5 * length;
    let rival = refined[1..].iter().any(|&(a, c)| {
        let gap = (a - best).rem_euclid(half);
        let distinct = gap.min(half - gap) > grid.spacing();
        distinct && (top - c) <= AMBIGUITY_TOL * scale
    });

    // Between the two equivalent centers keep the one at the larger excursion.
    let base = best.rem_euclid(half);
    let first = evaluate(grid, &spectrum, base).abs();
    let second = evaluate(grid, &spectrum, base + half).abs();
    let tie = (first - second).abs() <= AMBIGUITY_TOL * first.max(second);
    let mut axis = if second > first && !tie { base + half } else { base };
    let mut ambiguous = rival || tie;
    if rival {
        // report the smallest of the equally good axes
        let candidates = refined.iter().filter(|&&(_, c)| (top - c) <= AMBIGUITY_TOL * scale);
        for &(a, _) in candidates {
            let a = a.rem_euclid(half);
            let alt = if evaluate(grid, &spectrum, a).abs() >= evaluate(grid, &spectrum, a + half).abs()
                * (1.0 - AMBIGUITY_TOL)
            {
                a
            } else {
                a + half
            };
            axis = axis.min(alt);
        }
        ambiguous = true;
    }
    let axis = axis.rem_euclid(length);
    let residual = u.zip_with(&reflect(u, axis), |a, b| a - b)?;
    Ok(AxisEstimate { axis, asymmetry: residual.l2_norm() / spread, ambiguous })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxisSeries {
    pub times: Vec<f64>,
    /// Unwrapped axes; reduce modulo `L` for positions in the window.
    pub axes: Vec<f64>,
    pub asymmetry: Vec<f64>,
    pub ambiguous: Vec<bool>,
}

impl AxisSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.asymmetry.iter().copied().fold(0.0, f64::max)
    }
}

/// Axis of every snapshot, continued across the periodic boundary by picking
/// the equivalent center `a + m L/2` nearest the previous one.
pub fn track_axis(traj: &Trajectory) -> Result<AxisSeries> {
    let snapshots = traj.snapshots();
    if snapshots.len() < 3 {
        return Err(Error::InsufficientSnapshots { needed: 3, got: snapshots.len() });
    }
    let half = 0.5 * traj.grid().length();
    let mut series =
        AxisSeries { times: Vec::new(), axes: Vec::new(), asymmetry: Vec::new(), ambiguous: Vec::new() };
    for state in snapshots {
        let est = detect_axis(state.u())?;
        let axis = match series.axes.last() {
            Some(&prev) => est.axis + libm::round((prev - est.axis) / half) * half,
            None => est.axis,
        };
        series.times.push(state.time());
        series.axes.push(axis);
        series.asymmetry.push(est.asymmetry);
        series.ambiguous.push(est.ambiguous);
    }
    Ok(series)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    TravelingWaveConsistent,
    SymmetryBroken,
    NotSymmetric,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymmetryReport {
    pub axis_series: AxisSeries,
    pub lambda_dot: f64,
    /// Speed `c` of the profile in `U(x - c t)`; the axis moves with the wave,
    /// so this equals `lambda_dot`.
    pub speed_estimate: f64,
    /// Largest deviation of the unwrapped axes from the fitted line.
    pub fit_residual: f64,
    pub travel_error: f64,
    pub symmetry_tol: f64,
    pub travel_tol: f64,
    pub verdict: Verdict,
}

/// Least-squares line through `(t, y)`: `(intercept, slope)`.
fn fit_line(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let sxx: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (ym - slope * tm, slope)
}

/// Checks whether a symmetric trajectory translates rigidly.
///
/// Any snapshot above `symmetry_tol` makes the verdict `NotSymmetric`. For a
/// symmetric run the axis drift is fitted by least squares and the initial
/// snapshot, shifted at that speed, is compared against every later one.
pub fn verify_theorem(traj: &Trajectory, symmetry_tol: f64, travel_tol: f64) -> Result<SymmetryReport> {
    let series = track_axis(traj)?;
    let (intercept, lambda_dot) = fit_line(&series.times, &series.axes);
    let fit_residual = series
        .times
        .iter()
        .zip(&series.axes)
        .map(|(t, a)| (a - intercept - lambda_dot * t).abs())
        .fold(0.0, f64::max);
    let speed = lambda_dot;
    let initial = traj.initial();
    let norm = initial.u().l2_norm();
    let mut travel_error = 0.0f64;
    for state in traj.snapshots() {
        let moved = initial.u().shifted(speed * (state.time() - initial.time()));
        let diff = state.u().zip_with(&moved, |a, b| a - b)?.l2_norm();
        travel_error = travel_error.max(if norm > 0.0 { diff / norm } else { diff });
    }
    let verdict = if series.max_asymmetry() > symmetry_tol {
        Verdict::NotSymmetric
    } else if travel_error < travel_tol {
        Verdict::TravelingWaveConsistent
    } else {
        Verdict::SymmetryBroken
    };
    Ok(SymmetryReport {
        axis_series: series,
        lambda_dot,
        speed_estimate: speed,
        fit_residual,
        travel_error,
        symmetry_tol,
        travel_tol,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn gaussian(grid: &Grid, center: f64, width: f64) -> Field {
        let l = grid.length();
        Field::from_fn(grid, |x| {
            let d = libm::fmod(x - center + 1.5 * l, l) - 0.5 * l;
            libm::exp(-(d / width) * (d / width))
        })
        .unwrap()
    }

    #[test]
    fn reflection_is_an_involution() {
        let grid = Grid::new(128, 20.0).unwrap();
        let u = gaussian(&grid, 4.3, 1.5);
        for axis in [0.0, 1.234, 7.77, 19.5] {
            let back = reflect(&reflect(&u, axis), axis);
            assert!(back.max_abs_diff(&u).unwrap() < 1e-10);
        }
    }

    #[test]
    fn reflected_bump_moves_to_mirror_center() {
        let grid = Grid::new(256, 20.0).unwrap();
        let u = gaussian(&grid, 4.0, 1.0);
        let v = reflect(&u, 7.1);
        let est = detect_axis(&v).unwrap();
        assert!((est.axis - 10.2).abs() < 1e-6, "{est:?}");
    }

    #[test]
    fn gaussian_axis_is_its_center() {
        let grid = Grid::new(256, 20.0).unwrap();
        let est = detect_axis(&gaussian(&grid, 3.0, 1.2)).unwrap();
        assert!((est.axis - 3.0).abs() < 1e-6);
        assert!(est.asymmetry < 1e-10);
        assert!(!est.ambiguous);
    }

    #[test]
    fn sine_axis_is_quarter_period() {
        let grid = Grid::new(64, 8.0).unwrap();
        let u = Field::from_fn(&grid, |x| libm::sin(2.0 * PI * x / 8.0)).unwrap();
        let est = detect_axis(&u).unwrap();
        assert!((est.axis - 2.0).abs() < 1e-9, "{est:?}");
        assert!(est.asymmetry < 1e-10);
        assert!(est.ambiguous);
    }

    #[test]
    fn constant_has_no_axis() {
        let grid = Grid::new(32, 1.0).unwrap();
        assert!(matches!(detect_axis(&Field::constant(&grid, 0.3).unwrap()), Err(Error::UndefinedAxis)));
    }

    #[test]
    fn line_fit() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (b, m) = fit_line(&t, &y);
        assert!((b - 1.0).abs() < 1e-14 && (m - 2.0).abs() < 1e-14);
    }
}

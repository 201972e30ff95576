//! Uniform periodic grids and the fields sampled on them.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;

/// Uniform periodic discretization of `[0, length)` with `n_points` nodes.
///
/// The FFT plan is built once per grid and shared between clones; it is
/// immutable, so sharing it across threads is transparent to callers.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "GridSpec", into = "GridSpec"))]
pub struct Grid {
    n_points: usize,
    length: f64,
    plan: Arc<FftPlan>,
}

/// Plain description of a grid, used for serialization.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub n_points: usize,
    pub length: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.n_points, spec.length)
    }
}

impl From<Grid> for GridSpec {
    fn from(grid: Grid) -> Self {
        GridSpec { n_points: grid.n_points, length: grid.length }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.length.to_bits() == other.length.to_bits()
    }
}

impl Grid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < Self::MIN_POINTS || !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidGrid { n_points, length });
        }
        Ok(Self { n_points, length, plan: Arc::new(FftPlan::new(n_points)) })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Signed mode index of FFT slot `j`; the Nyquist slot of an even grid maps to `+n/2`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n_points as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        self.n_points % 2 == 0 && j == self.n_points / 2
    }

    /// Angular wavenumber of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * self.mode(j) as f64 / self.length
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.plan.forward(&mut buf);
        buf
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.plan.inverse(&mut spectrum);
        spectrum.into_iter().map(|z| z.re).collect()
    }

    /// Applies a Fourier multiplier `symbol(slot)` to real samples.
    pub fn apply_multiplier<F>(&self, values: &[f64], symbol: F) -> Vec<f64>
    where
        F: Fn(usize) -> Complex64,
    {
        let mut spectrum = self.forward(values);
        for (j, z) in spectrum.iter_mut().enumerate() {
            *z *= symbol(j);
        }
        self.inverse(spectrum)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { n_points: self.n_points, length: self.length }
    }
}

/// Samples of a real function at the nodes of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidConfig(alloc::format!(
                "field has {} samples but grid has {} points",
                values.len(),
                grid.n_points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "field values" });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), values: alloc::vec![0.0; grid.n_points()] }
    }

    pub fn constant(grid: &Grid, value: f64) -> Result<Self> {
        Self::new(grid.clone(), alloc::vec![value; grid.n_points()])
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: &Grid, mut f: F) -> Result<Self> {
        let values = grid.points().map(&mut f).collect();
        Self::new(grid.clone(), values)
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Discrete L2 norm `sqrt(h * sum u_j^2)`.
    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.grid.spacing() * self.values.iter().map(|v| v * v).sum::<f64>())
    }

    /// Trapezoid (periodic) integral over one period.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Field> {
        Field::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Result<Field> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Field::new(self.grid.clone(), values)
    }

    /// `max_j |self_j - other_j|`.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Band-limited translation `x -> u(x - shift)`.
    pub fn shifted(&self, shift: f64) -> Field {
        let grid = &self.grid;
        let values = grid.apply_multiplier(&self.values, |j| {
            if grid.is_nyquist(j) {
                Complex64::new(libm::cos(grid.wavenumber(j) * shift), 0.0)
            } else {
                Complex64::from_polar(1.0, -grid.wavenumber(j) * shift)
            }
        });
        Field::from_parts(grid.clone(), values)
    }
}

/// A time instant paired with the wave profile at that time.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    time: f64,
    u: Field,
}

impl State {
    pub fn new(time: f64, u: Field) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::InvalidConfig(alloc::format!("state time {time} must be finite and >= 0")));
        }
        Ok(Self { time, u })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn u(&self) -> &Field {
        &self.u
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn into_field(self) -> Field {
        self.u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        assert!(Grid::new(16, f64::NAN).is_err());
        let g = Grid::new(64, 10.0).unwrap();
        assert!((g.spacing() * g.n_points() as f64 - g.length()).abs() < 1e-14);
        assert_eq!(g.mode(32), 32);
        assert_eq!(g.mode(33), -31);
    }

    #[test]
    fn field_rejects_non_finite() {
        let g = Grid::new(16, 1.0).unwrap();
        let mut v = alloc::vec![0.0; 16];
        v[3] = f64::INFINITY;
        assert_eq!(Field::new(g.clone(), v), Err(Error::NonFinite { what: "field values" }));
        assert!(Field::new(g, alloc::vec![0.0; 15]).is_err());
    }

    #[test]
    fn state_rejects_negative_time() {
        let g = Grid::new(16, 1.0).unwrap();
        assert!(State::new(-1.0, Field::zeros(&g)).is_err());
    }

    #[test]
    fn shift_moves_a_mode() {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        let u = Field::from_fn(&g, libm::sin).unwrap();
        let s = u.shifted(0.3);
        for (x, v) in g.points().zip(s.values()) {
            assert!((v - libm::sin(x - 0.3)).abs() < 1e-12);
        }
    }
}

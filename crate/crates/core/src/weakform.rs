//! Weak-form residuals against compactly supported test functions.
//!
//! For a trajectory `u` and `phi(t, x) = rho(t) psi(x)` the weak equation is
//!
//! ```text
//! int int u phi_t - (u + 7u^2) phi_x + P(u) phi_x dx dt = 0,   P = (1 - d^2)^{-1} R,
//! ```
//!
//! and a profile `U(x - ct)` satisfies the steady version
//! `int ((c + 1) U + 7 U^2 - P(U)) psi_x dx = 0`. Both are evaluated by the
//! trapezoid rule, which is spectrally accurate here because every integrand
//! is periodic or vanishes with several derivatives at the support ends.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::grid::{Field, Grid};
use crate::nonlocal::{helmholtz_inverse, reaction_term};
use crate::symmetry::reflect;
use crate::traveling_wave::TWProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BumpKind {
    /// `(1 - s^2)^4` with `s = (x - center) / width`.
    PolynomialBump,
    /// `exp(-s^2 / 2)` with `s = 8 (x - center) / width`, cut at `|x - center| = width`.
    GaussianBumpTruncated,
}

/// Gaussian bumps use `sigma = width / GAUSS_WIDTHS`, so the cut-off value is `exp(-32)`.
const GAUSS_WIDTHS: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestFunction {
    pub center: f64,
    /// Half-width of the support.
    pub width: f64,
    pub kind: BumpKind,
}

impl TestFunction {
    pub fn new(kind: BumpKind, center: f64, width: f64) -> Result<Self> {
        if !(center.is_finite() && width.is_finite() && width > 0.0) {
            return Err(Error::Support(format!("test function needs finite center and width > 0, got {center}, {width}")));
        }
        Ok(Self { center, width, kind })
    }

    pub fn polynomial_bump(center: f64, width: f64) -> Result<Self> {
        Self::new(BumpKind::PolynomialBump, center, width)
    }

    pub fn gaussian_bump_truncated(center: f64, width: f64) -> Result<Self> {
        Self::new(BumpKind::GaussianBumpTruncated, center, width)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.width, self.center + self.width)
    }

    /// Mirror image about `axis`; bumps are even, so only the center moves.
    pub fn reflected(&self, axis: f64) -> Self {
        Self { center: 2.0 * axis - self.center, ..*self }
    }

    /// `d^order/dx^order` of the test function at `x`, for `order <= 3`.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        let d = x - self.center;
        if d.abs() >= self.width {
            return 0.0;
        }
        match self.kind {
            BumpKind::PolynomialBump => {
                let w = self.width;
                let s = d / w;
                let p = 1.0 - s * s;
                match order {
                    0 => p * p * p * p,
                    1 => -8.0 * s * p * p * p / w,
                    2 => -8.0 * (p * p * p - 6.0 * s * s * p * p) / (w * w),
                    3 => 48.0 * (3.0 * s * p * p - 4.0 * s * s * s * p) / (w * w * w),
                    _ => f64::NAN,
                }
            }
            BumpKind::GaussianBumpTruncated => {
                let sigma = self.width / GAUSS_WIDTHS;
                let s = d / sigma;
                let g = libm::exp(-0.5 * s * s);
                match order {
                    0 => g,
                    1 => -s * g / sigma,
                    2 => (s * s - 1.0) * g / (sigma * sigma),
                    3 => (3.0 * s - s * s * s) * g / (sigma * sigma * sigma),
                    _ => f64::NAN,
                }
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `int |psi| dx` in closed form.
    pub fn mass(&self) -> f64 {
        match self.kind {
            BumpKind::PolynomialBump => self.width * 256.0 / 315.0,
            BumpKind::GaussianBumpTruncated => {
                let sigma = self.width / GAUSS_WIDTHS;
                sigma * libm::sqrt(2.0 * core::f64::consts::PI) * libm::erf(GAUSS_WIDTHS / core::f64::consts::SQRT_2)
            }
        }
    }

    /// Rejects supports that leave the window `[start, start + length]`.
    pub fn check_inside(&self, start: f64, length: f64) -> Result<()> {
        let (lo, hi) = self.support();
        if lo < start || hi > start + length {
            return Err(Error::Support(format!(
                "support [{lo}, {hi}] exceeds the window [{start}, {}]",
                start + length
            )));
        }
        Ok(())
    }

    /// `d^order psi` at the grid nodes, with the support wrapped periodically.
    pub fn sample(&self, grid: &Grid, order: u32) -> Vec<f64> {
        let l = grid.length();
        grid.points()
            .map(|x| {
                let d = libm::fmod(x - self.center, l);
                let d = if d > 0.5 * l {
                    d - l
                } else if d < -0.5 * l {
                    d + l
                } else {
                    d
                };
                self.derivative(self.center + d, order)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidualEntry {
    pub test_function: TestFunction,
    /// Time factor for unsteady residuals.
    pub time_function: Option<TestFunction>,
    pub residual: f64,
    /// Test-function mass the raw integral was divided by.
    pub normalization: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidualReport {
    pub per_test_function: Vec<ResidualEntry>,
    pub max_abs_residual: f64,
}

impl ResidualReport {
    pub fn new(per_test_function: Vec<ResidualEntry>) -> Self {
        let max_abs_residual = per_test_function.iter().map(|e| e.residual.abs()).fold(0.0, f64::max);
        Self { per_test_function, max_abs_residual }
    }
}

fn trapezoid(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    grid.spacing() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

fn nonlocal_term(u: &Field) -> Result<Field> {
    helmholtz_inverse(&reaction_term(u)?)
}

fn check_resolution(grid: &Grid, psi: &TestFunction) -> Result<()> {
    if grid.spacing() > psi.width / 32.0 {
        return Err(Error::Support(format!(
            "grid spacing {} is coarser than width/32 = {}",
            grid.spacing(),
            psi.width / 32.0
        )));
    }
    Ok(())
}

/// `int ((c + 1) U + 7U^2 - P(U)) psi' / int |psi|` over the profile window.
pub fn steady_weak_residual(profile: &TWProfile, psi: &TestFunction) -> Result<f64> {
    let field = profile.to_field()?;
    let grid = field.grid();
    psi.check_inside(0.0, grid.length())?;
    check_resolution(grid, psi)?;
    let c = profile.params.speed;
    let p = nonlocal_term(&field)?;
    let flux: Vec<f64> =
        field.values().iter().zip(p.values()).map(|(u, p)| (c + 1.0) * u + 7.0 * u * u - p).collect();
    Ok(trapezoid(grid, &flux, &psi.sample(grid, 1)) / psi.mass())
}

/// Normalized space-time residual of the weak equation for `phi(t, x) = rho(t) psi(x)`.
///
/// Space integrals use the periodic trapezoid rule on each snapshot, the time
/// integral the trapezoid rule over the snapshot times.
pub fn unsteady_weak_residual(traj: &Trajectory, psi: &TestFunction, rho: &TestFunction) -> Result<f64> {
    let grid = traj.grid();
    psi.check_inside(0.0, grid.length())?;
    check_resolution(grid, psi)?;
    let times: Vec<f64> = traj.times().collect();
    let (t0, t1) = (times[0], *times.last().expect("non-empty"));
    let (lo, hi) = rho.support();
    if lo <= t0 || hi >= t1 {
        return Err(Error::Support(format!(
            "time support [{lo}, {hi}] must lie strictly inside the run [{t0}, {t1}]"
        )));
    }
    let psi0 = psi.sample(grid, 0);
    let psi1 = psi.sample(grid, 1);
    let integrand: Vec<f64> = traj
        .snapshots()
        .iter()
        .map(|s| -> Result<f64> {
            let t = s.time();
            let (r0, r1) = (rho.derivative(t, 0), rho.derivative(t, 1));
            if r0 == 0.0 && r1 == 0.0 {
                return Ok(0.0);
            }
            let u = s.u();
            let p = nonlocal_term(u)?;
            let flux: Vec<f64> = u.values().iter().zip(p.values()).map(|(u, p)| p - u - 7.0 * u * u).collect();
            Ok(r1 * trapezoid(grid, u.values(), &psi0) + r0 * trapezoid(grid, &flux, &psi1))
        })
        .collect::<Result<_>>()?;
    let total: f64 = times.windows(2).zip(integrand.windows(2)).map(|(t, g)| 0.5 * (t[1] - t[0]) * (g[0] + g[1])).sum();
    Ok(total / (psi.mass() * rho.mass()))
}

/// `(<P(u_lambda), psi>, <P(u), psi_lambda>)` with `f_lambda(x) = f(2 lambda - x)`.
///
/// The change of variables `x -> 2 lambda - x` preserves orientation of the
/// measure, so the two brackets are equal; see
/// [`reflection_bracket_derivative_check`] for the pair that differs by a sign.
pub fn reflection_bracket_check(u: &Field, lambda: f64, psi: &TestFunction) -> Result<(f64, f64)> {
    let grid = u.grid();
    psi.check_inside(0.0, grid.length())?;
    let lhs = trapezoid(grid, nonlocal_term(&reflect(u, lambda))?.values(), &psi.sample(grid, 0));
    let rhs = trapezoid(grid, nonlocal_term(u)?.values(), &psi.reflected(lambda).sample(grid, 0));
    Ok((lhs, rhs))
}

/// `(<P(u_lambda), psi'>, <P(u), (psi_lambda)'>)`; since `(psi_lambda)' = -(psi')_lambda`
/// these satisfy `lhs = -rhs`.
pub fn reflection_bracket_derivative_check(u: &Field, lambda: f64, psi: &TestFunction) -> Result<(f64, f64)> {
    let grid = u.grid();
    psi.check_inside(0.0, grid.length())?;
    let lhs = trapezoid(grid, nonlocal_term(&reflect(u, lambda))?.values(), &psi.sample(grid, 1));
    let rhs = trapezoid(grid, nonlocal_term(u)?.values(), &psi.reflected(lambda).sample(grid, 1));
    Ok((lhs, rhs))
}

/// `count` bumps of half-width `width` with centers evenly spread over
/// `[start + width, start + length - width]`.
pub fn bump_family(kind: BumpKind, start: f64, length: f64, width: f64, count: usize) -> Result<Vec<TestFunction>> {
    let span = length - 2.0 * width;
    if span < 0.0 || count == 0 {
        return Err(Error::Support(format!("cannot place {count} bumps of half-width {width} in length {length}")));
    }
    (0..count)
        .map(|i| {
            let frac = if count == 1 { 0.5 } else { i as f64 / (count - 1) as f64 };
            TestFunction::new(kind, start + width + frac * span, width)
        })
        .collect()
}

/// Steady residuals of `profile` against every test function in `family`.
pub fn steady_report(profile: &TWProfile, family: &[TestFunction]) -> Result<ResidualReport> {
    let entries = family
        .iter()
        .map(|psi| {
            Ok(ResidualEntry {
                test_function: *psi,
                time_function: None,
                residual: steady_weak_residual(profile, psi)?,
                normalization: psi.mass(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::new(entries))
}

//! Spatial operators of the moderate-amplitude equation.
//!
//! The evolution is carried in its nonlocal form
//!
//! ```text
//! u_t = d/dx (u + 7u^2) - d/dx (1 - d^2/dx^2)^{-1} R(u),
//! R(u) = 2u + 10u^2 - 2u^3 + 3u^4 - 7u_x^2,
//! ```
//!
//! with every derivative taken by Fourier collocation on the periodic grid.
//! The local third-order form is kept as a consistency check only.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, State};

fn ensure_finite(u: &Field, what: &'static str) -> Result<()> {
    if u.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}

/// `(i k)^order`, with the Nyquist slot dropped for odd orders.
fn derivative_symbol(grid: &Grid, j: usize, order: u32) -> Complex64 {
    if order % 2 == 1 && grid.is_nyquist(j) {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, grid.wavenumber(j)).powu(order)
}

/// Fourier-collocation derivative of order 1, 2 or 3.
pub fn spectral_derivative(u: &Field, order: u32) -> Result<Field> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    let grid = u.grid();
    let values = grid.apply_multiplier(u.values(), |j| derivative_symbol(grid, j, order));
    Field::new(grid.clone(), values)
}

/// Pointwise `R(u) = 2u + 10u^2 - 2u^3 + 3u^4 - 7u_x^2`.
pub fn reaction_term(u: &Field) -> Result<Field> {
    ensure_finite(u, "reaction_term input")?;
    let ux = spectral_derivative(u, 1)?;
    let values = u
        .values()
        .iter()
        .zip(ux.values())
        .map(|(&v, &d)| reaction_polynomial(v) - 7.0 * d * d)
        .collect();
    Field::new(u.grid().clone(), values)
}

/// The `u_x`-free part of `R`: `2u + 10u^2 - 2u^3 + 3u^4`.
pub(crate) fn reaction_polynomial(v: f64) -> f64 {
    v * (2.0 + v * (10.0 + v * (-2.0 + 3.0 * v)))
}

/// `(1 - d^2/dx^2)^{-1} f` through the multiplier `1 / (1 + k^2)`.
pub fn helmholtz_inverse(f: &Field) -> Result<Field> {
    ensure_finite(f, "helmholtz_inverse input")?;
    let grid = f.grid();
    let values = grid.apply_multiplier(f.values(), |j| {
        let k = grid.wavenumber(j);
        Complex64::new(1.0 / (1.0 + k * k), 0.0)
    });
    Field::new(grid.clone(), values)
}

/// Number of periodic images kept on each side in [`kernel_convolve`].
pub fn kernel_images(length: f64) -> i64 {
    libm::ceil(20.0 / length) as i64 + 1
}

/// Convolution with the periodized kernel `1/2 exp(-|x|)` by direct quadrature.
///
/// Trapezoid rule over one period with the image sum truncated at
/// [`kernel_images`], plus the Euler-Maclaurin corrections for the kink of the
/// kernel at the origin:
///
/// ```text
/// P_i = h sum_j K(x_i - x_j) f_j - h^2/12 f_i + h^4/720 (f_i + 3 f''_i)
/// ```
///
/// with `f''` from fourth-order central differences. No transforms are used,
/// so this is independent of [`helmholtz_inverse`].
pub fn kernel_convolve(f: &Field) -> Result<Field> {
    ensure_finite(f, "kernel_convolve input")?;
    let grid = f.grid();
    let n = grid.n_points();
    let h = grid.spacing();
    let length = grid.length();
    let images = kernel_images(length);
    let table: Vec<f64> = (0..n)
        .map(|d| {
            let x = d as f64 * h;
            (-images..=images).map(|m| 0.5 * libm::exp(-(x + m as f64 * length).abs())).sum()
        })
        .collect();
    let fv = f.values();
    let values = (0..n)
        .map(|i| {
            let trapezoid: f64 = (0..n).map(|j| table[(i + n - j) % n] * fv[j]).sum::<f64>() * h;
            let at = |o: isize| fv[((i as isize + o).rem_euclid(n as isize)) as usize];
            let fxx = (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h);
            trapezoid - h * h / 12.0 * fv[i] + h.powi(4) / 720.0 * (fv[i] + 3.0 * fxx)
        })
        .collect();
    Field::new(grid.clone(), values)
}

/// Keeps modes with `|m| <= n/3` (two-thirds rule).
fn dealias(grid: &Grid, spectrum: &mut [Complex64]) {
    let cutoff = (grid.n_points() / 3) as i64;
    for (j, z) in spectrum.iter_mut().enumerate() {
        if grid.mode(j).abs() > cutoff {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}

/// Value of `u_t` from the nonlocal form, with dealiased nonlinear products.
pub fn evolution_rhs(state: &State) -> Result<Field> {
    let u = state.u();
    ensure_finite(u, "evolution_rhs input")?;
    let values = rhs_values(u.grid(), u.values());
    Field::new(u.grid().clone(), values)
}

/// Right-hand side on raw samples; shared by the integrator stages.
pub(crate) fn rhs_values(grid: &Grid, u: &[f64]) -> Vec<f64> {
    let n = grid.n_points();
    let u_hat = grid.forward(u);

    let mut filtered = u_hat.clone();
    dealias(grid, &mut filtered);
    let mut filtered_x = filtered.clone();
    for (j, z) in filtered_x.iter_mut().enumerate() {
        *z *= derivative_symbol(grid, j, 1);
    }
    let uf = grid.inverse(filtered);
    let ufx = grid.inverse(filtered_x);

    let mut transport = Vec::with_capacity(n);
    let mut reaction = Vec::with_capacity(n);
    for (&v, &d) in uf.iter().zip(&ufx) {
        let v2 = v * v;
        transport.push(7.0 * v2);
        reaction.push(v2 * (10.0 + v * (-2.0 + 3.0 * v)) - 7.0 * d * d);
    }
    let mut transport_hat = grid.forward(&transport);
    let mut reaction_hat = grid.forward(&reaction);
    dealias(grid, &mut transport_hat);
    dealias(grid, &mut reaction_hat);

    let mut out = u_hat;
    for j in 0..n {
        let k = grid.wavenumber(j);
        let flux = out[j] + transport_hat[j] - (2.0 * out[j] + reaction_hat[j]) / (1.0 + k * k);
        out[j] = flux * derivative_symbol(grid, j, 1);
    }
    grid.inverse(out)
}

/// Left side of the local third-order equation evaluated pointwise:
///
/// ```text
/// u_t + u_x + 6uu_x - 6u^2u_x + 12u^3u_x + u_xxx - u_xxt + 14uu_xxx + 28u_xu_xx
/// ```
pub fn local_form_residual(u: &Field, ut: &Field) -> Result<Field> {
    u.ensure_same_grid(ut)?;
    ensure_finite(u, "local_form_residual u")?;
    ensure_finite(ut, "local_form_residual ut")?;
    let ux = spectral_derivative(u, 1)?;
    let uxx = spectral_derivative(u, 2)?;
    let uxxx = spectral_derivative(u, 3)?;
    let utxx = spectral_derivative(ut, 2)?;
    let values = (0..u.len())
        .map(|j| {
            let v = u.values()[j];
            let d1 = ux.values()[j];
            let d2 = uxx.values()[j];
            let d3 = uxxx.values()[j];
            ut.values()[j] + d1 * (1.0 + v * (6.0 + v * (-6.0 + 12.0 * v))) + d3 - utxx.values()[j]
                + 14.0 * v * d3
                + 28.0 * d1 * d2
        })
        .collect();
    Field::new(u.grid().clone(), values)
}

/// `(1 - d^2/dx^2) f`.
pub fn helmholtz_forward(f: &Field) -> Result<Field> {
    let fxx = spectral_derivative(f, 2)?;
    f.zip_with(&fxx, |a, b| a - b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn grid(n: usize, length: f64) -> Grid {
        Grid::new(n, length).unwrap()
    }

    #[test]
    fn reaction_of_constants() {
        let g = grid(32, 10.0);
        let zero = reaction_term(&Field::zeros(&g)).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let one = reaction_term(&Field::constant(&g, 1.0).unwrap()).unwrap();
        assert!(one.values().iter().all(|&v| (v - 13.0).abs() < 1e-12));
    }

    #[test]
    fn derivative_of_modes() {
        let length = 7.0;
        let g = grid(64, length);
        let k = 2.0 * PI / length;
        let u = Field::from_fn(&g, |x| libm::sin(k * x)).unwrap();
        let d1 = spectral_derivative(&u, 1).unwrap();
        let d2 = spectral_derivative(&u, 2).unwrap();
        let d3 = spectral_derivative(&u, 3).unwrap();
        for (j, x) in g.points().enumerate() {
            assert!((d1.values()[j] - k * libm::cos(k * x)).abs() < 1e-12);
            assert!((d2.values()[j] + k * k * libm::sin(k * x)).abs() < 1e-12);
            assert!((d3.values()[j] + k * k * k * libm::cos(k * x)).abs() < 1e-10);
        }
        let c = spectral_derivative(&Field::constant(&g, 3.0).unwrap(), 1).unwrap();
        assert!(c.sup_norm() < 1e-14);
    }

    #[test]
    fn derivative_order_is_checked() {
        let g = grid(16, 1.0);
        assert_eq!(spectral_derivative(&Field::zeros(&g), 0), Err(Error::InvalidOrder(0)));
        assert_eq!(spectral_derivative(&Field::zeros(&g), 4), Err(Error::InvalidOrder(4)));
    }

    #[test]
    fn helmholtz_single_mode() {
        let length = 40.0;
        let g = grid(128, length);
        let k = 2.0 * PI * 3.0 / length;
        let f = Field::from_fn(&g, |x| libm::cos(k * x)).unwrap();
        let p = helmholtz_inverse(&f).unwrap();
        for (j, x) in g.points().enumerate() {
            assert!((p.values()[j] - libm::cos(k * x) / (1.0 + k * k)).abs() < 1e-13);
        }
        let c = helmholtz_inverse(&Field::constant(&g, 2.5).unwrap()).unwrap();
        assert!(c.values().iter().all(|&v| (v - 2.5).abs() < 1e-13));
    }

    #[test]
    fn kernel_of_constants() {
        let g = grid(256, 40.0);
        assert!(kernel_convolve(&Field::zeros(&g)).unwrap().sup_norm() == 0.0);
        let one = kernel_convolve(&Field::constant(&g, 1.0).unwrap()).unwrap();
        assert!(one.values().iter().all(|&v| (v - 1.0).abs() < 1e-8));
    }

    #[test]
    fn kernel_images_cover_decay() {
        for length in [5.0, 20.0, 40.0, 100.0] {
            let m = kernel_images(length) as f64;
            assert!(libm::exp(-length * m) < 1e-8);
        }
    }

    #[test]
    fn rhs_vanishes_on_constants() {
        let g = grid(64, 20.0);
        for c in [0.0, 0.3, -1.2] {
            let s = State::new(0.0, Field::constant(&g, c).unwrap()).unwrap();
            assert!(evolution_rhs(&s).unwrap().sup_norm() < 1e-13);
        }
    }

    #[test]
    fn local_residual_rejects_grid_mismatch() {
        let a = Field::zeros(&grid(16, 1.0));
        let b = Field::zeros(&grid(32, 1.0));
        assert_eq!(local_form_residual(&a, &b), Err(Error::GridMismatch));
    }

    #[test]
    fn local_residual_of_constants() {
        let g = grid(32, 5.0);
        let u = Field::constant(&g, 0.7).unwrap();
        let r = local_form_residual(&u, &Field::zeros(&g)).unwrap();
        assert!(r.sup_norm() < 1e-12);
    }

    #[test]
    fn reaction_preserves_parity() {
        let length = 30.0;
        let g = grid(128, length);
        let axis = g.x(40);
        let u = Field::from_fn(&g, |x| {
            let d = libm::fmod(x - axis + 1.5 * length, length) - 0.5 * length;
            0.3 * libm::exp(-d * d / 4.0) + 0.1 * libm::cos(2.0 * PI * 2.0 * d / length)
        })
        .unwrap();
        let r = reaction_term(&u).unwrap();
        let n = g.n_points();
        for j in 0..n {
            let mirror = (2 * 40 + n - j) % n;
            assert!((r.values()[j] - r.values()[mirror]).abs() < 1e-12);
        }
    }
}

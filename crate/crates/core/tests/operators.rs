use std::f64::consts::PI;

use mase_core::nonlocal::{
    evolution_rhs, helmholtz_forward, helmholtz_inverse, kernel_convolve, local_form_residual, reaction_term,
    spectral_derivative,
};
use mase_core::{Field, Grid, State};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn band_limited(grid: &Grid, rng: &mut StdRng, modes: usize, amplitude: f64) -> Field {
    let coeffs: Vec<(f64, f64)> =
        (1..=modes).map(|m| (rng.gen_range(-1.0..1.0) / m as f64, rng.gen_range(-1.0..1.0) / m as f64)).collect();
    let mean = rng.gen_range(-0.2..0.2);
    let length = grid.length();
    Field::from_fn(grid, |x| {
        mean + amplitude
            * coeffs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let k = 2.0 * PI * (i + 1) as f64 / length;
                    a * (k * x).cos() + b * (k * x).sin()
                })
                .sum::<f64>()
    })
    .unwrap()
}

#[test]
fn helmholtz_round_trip_on_random_fields() {
    let grid = Grid::new(512, 40.0).unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..100 {
        let f = band_limited(&grid, &mut rng, 40, 1.0);
        let p = helmholtz_inverse(&f).unwrap();
        let back = helmholtz_forward(&p).unwrap();
        let err = back.max_abs_diff(&f).unwrap();
        assert!(err < 1e-10 * f.sup_norm().max(1.0), "round trip error {err}");
        // multiplier 1/(1+k^2) <= 1
        assert!(p.sup_norm() <= f.sup_norm() + 1e-12);
    }
}

#[test]
fn kernel_quadrature_matches_multiplier() {
    let grid = Grid::new(512, 40.0).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..5 {
        let f = band_limited(&grid, &mut rng, 12, 1.0);
        let direct = kernel_convolve(&f).unwrap();
        let spectral = helmholtz_inverse(&f).unwrap();
        let err = direct.max_abs_diff(&spectral).unwrap();
        assert!(err < 1e-6, "kernel vs multiplier {err}");
    }
}

#[test]
fn reaction_is_linear_for_tiny_amplitude() {
    let length = 20.0;
    let grid = Grid::new(256, length).unwrap();
    let eps = 1e-6;
    let k = 2.0 * PI / length;
    let u = Field::from_fn(&grid, |x| eps * (k * x).sin()).unwrap();
    let r = reaction_term(&u).unwrap();
    // term-by-term evaluation with the exact slope eps*k*cos(kx)
    for (j, x) in grid.points().enumerate() {
        let v = eps * (k * x).sin();
        let vx = eps * k * (k * x).cos();
        let exact = 2.0 * v + 10.0 * v * v - 2.0 * v.powi(3) + 3.0 * v.powi(4) - 7.0 * vx * vx;
        assert!((r.values()[j] - exact).abs() < 1e-20);
        assert!((r.values()[j] - 2.0 * v).abs() <= 20.0 * eps * eps);
    }
}

#[test]
fn nonlocal_form_reproduces_local_equation() {
    let grid = Grid::new(512, 40.0).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..20 {
        let u = band_limited(&grid, &mut rng, 16, 0.4);
        let ut = band_limited(&grid, &mut rng, 16, 1.0);
        let state = State::new(0.0, u.clone()).unwrap();
        let rhs = evolution_rhs(&state).unwrap();
        let nonlocal_residual = ut.zip_with(&rhs, |a, b| a - b).unwrap();
        let lifted = helmholtz_forward(&nonlocal_residual).unwrap();
        let local = local_form_residual(&u, &ut).unwrap();
        let err = lifted.max_abs_diff(&local).unwrap();
        assert!(err < 1e-6, "equivalence error {err}");
        let consistent = local_form_residual(&u, &rhs).unwrap();
        assert!(consistent.sup_norm() < 1e-6);
    }
}

#[test]
fn rhs_has_zero_mean() {
    let grid = Grid::new(128, 30.0).unwrap();
    let mut rng = StdRng::seed_from_u64(5);
    let u = band_limited(&grid, &mut rng, 10, 0.3);
    let rhs = evolution_rhs(&State::new(0.0, u).unwrap()).unwrap();
    assert!(rhs.mean().abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn helmholtz_smooths(seed in any::<u64>(), amplitude in 0.01f64..10.0) {
        let grid = Grid::new(64, 12.0).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let f = band_limited(&grid, &mut rng, 20, amplitude);
        let p = helmholtz_inverse(&f).unwrap();
        prop_assert!(p.sup_norm() <= f.sup_norm() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn first_derivative_kills_constants(c in -5.0f64..5.0) {
        let grid = Grid::new(32, 3.0).unwrap();
        let d = spectral_derivative(&Field::constant(&grid, c).unwrap(), 1).unwrap();
        prop_assert!(d.sup_norm() < 1e-13);
    }
}

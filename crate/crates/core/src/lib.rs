//! Numerical core for the moderate-amplitude shallow-water wave equation
//!
//! ```text
//! u_t + u_x + 6uu_x - 6u^2u_x + 12u^3u_x + u_xxx - u_xxt + 14uu_xxx + 28u_xu_xx = 0
//! ```
//!
//! The crate is `no_std` (it needs `alloc`) and free of IO. It provides the
//! pseudospectral operators of the nonlocal form, an RK4 integrator with
//! breaking detection, traveling-wave construction from the profile ODE and
//! its first integral, detection of reflection axes along a trajectory, and
//! quadrature of the weak formulations.

#![no_std]
#![warn(rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod evolution;
pub mod fft;
pub mod grid;
pub mod nonlocal;
pub mod poly;
pub mod quadrature;
pub mod symmetry;
pub mod traveling_wave;
pub mod weakform;

pub use error::{Error, Result};
pub use grid::{Field, Grid, GridSpec, State};

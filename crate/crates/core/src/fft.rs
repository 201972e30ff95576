//! Complex discrete Fourier transform.
//!
//! Iterative radix-2 Cooley-Tukey for power-of-two lengths, with a direct
//! O(n^2) transform as the fallback for other lengths. The forward transform
//! is unnormalized; the inverse divides by `n`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

#[derive(Debug)]
pub struct FftPlan {
    n: usize,
    /// `exp(-2 pi i k / n)` for `k in 0..n` (direct) or `0..n/2` (radix-2).
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "transform length must be positive");
        let radix2 = n.is_power_of_two();
        let count = if radix2 { n / 2 } else { n };
        let twiddles = (0..count)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        let bitrev = if radix2 {
            let bits = n.trailing_zeros();
            (0..n)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
                .collect()
        } else {
            Vec::new()
        };
        Self { n, twiddles, bitrev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// Inverse transform including the `1/n` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let scale = 1.0 / self.n as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.n, "buffer length does not match plan");
        if self.n.is_power_of_two() {
            self.radix2(data, inverse);
        } else {
            self.direct(data, inverse);
        }
    }

    fn radix2(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if j > i {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    fn direct(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let input: Vec<Complex64> = data.to_vec();
        for (k, out) in data.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, x) in input.iter().enumerate() {
                let mut w = self.twiddles[(j * k) % n];
                if inverse {
                    w = w.conj();
                }
                acc += x * w;
            }
            *out = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive(data: &[Complex64]) -> Vec<Complex64> {
        let n = data.len();
        (0..n)
            .map(|k| {
                data.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, x)| {
                    let theta = -2.0 * PI * (j * k) as f64 / n as f64;
                    acc + x * Complex64::new(libm::cos(theta), libm::sin(theta))
                })
            })
            .collect()
    }

    #[test]
    fn radix2_matches_naive_dft() {
        for n in [1usize, 2, 8, 64] {
            let data: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new(libm::sin(j as f64 * 0.7), libm::cos(j as f64 * 1.3)))
                .collect();
            let mut fast = data.clone();
            FftPlan::new(n).forward(&mut fast);
            for (a, b) in fast.iter().zip(naive(&data)) {
                assert!((a - b).norm() < 1e-11, "n={n}");
            }
        }
    }

    #[test]
    fn non_power_of_two_round_trip() {
        let plan = FftPlan::new(24);
        let data: Vec<Complex64> = (0..24).map(|j| Complex64::new(j as f64, -(j as f64) * 0.5)).collect();
        let mut buf = data.clone();
        plan.forward(&mut buf);
        for (a, b) in buf.iter().zip(naive(&data)) {
            assert!((a - b).norm() < 1e-10);
        }
        plan.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_transforms_to_ones() {
        let mut buf = vec![Complex64::new(0.0, 0.0); 16];
        buf[0] = Complex64::new(1.0, 0.0);
        FftPlan::new(16).forward(&mut buf);
        assert!(buf.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }
}

//! Iterative radix-2 Cooley-Tukey FFT.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Unnormalized forward DFT, or the inverse scaled by `1/N`. Length must be a power of two.
pub fn fft(x: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let mut data = x.to_vec();
    fft_in_place(&mut data, inverse)?;
    Ok(data)
}

pub fn fft_in_place(data: &mut [Complex64], inverse: bool) -> Result<()> {
    let n = data.len();
    if n == 0 || !n.is_power_of_two() {
        return invalid(format!("FFT length must be a power of two, got {n}"));
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) };
        if j > i {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        // Twiddles for this stage computed directly to avoid drift from repeated products.
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| if k == 0 { Complex64::new(1.0, 0.0) } else { Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / size as f64) })
            .collect();
        for start in (0..n).step_by(size) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half] * twiddles[k];
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        size *= 2;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn direct_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(t, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * t % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn impulse_is_flat() {
        let mut x = vec![Complex64::new(0.0, 0.0); 4];
        x[0] = Complex64::new(1.0, 0.0);
        assert!(fft(&x, false).unwrap().iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn inverse_round_trip() {
        let x = random(256, 1);
        let back = fft(&fft(&x, false).unwrap(), true).unwrap();
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn matches_direct_dft() {
        let x = random(64, 2);
        let fast = fft(&x, false).unwrap();
        let slow = direct_dft(&x);
        let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-9, "{err}");
    }

    #[test]
    fn parseval() {
        for n in [1, 2, 8, 512] {
            let x = random(n, n as u64);
            let big = fft(&x, false).unwrap();
            let time: f64 = x.iter().map(Complex64::norm_sqr).sum();
            let freq: f64 = big.iter().map(Complex64::norm_sqr).sum::<f64>() / n as f64;
            assert!((time - freq).abs() <= 1e-9);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(fft(&random(6, 0), false).is_err());
        assert!(fft(&[], false).is_err());
    }
}

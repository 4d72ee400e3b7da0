use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::fft;
use crate::channel::ChannelTaps;
use crate::error::{invalid, Result};

/// Gains below this magnitude are treated as nulls by zero forcing.
pub const ZF_NULL_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EqualizerKind {
    Zf,
    Mmse { n0: f64 },
}

/// FFT of the impulse response zero-padded to `n` (taps sit at their delay index).
pub fn freq_response(taps: &ChannelTaps, n: usize) -> Result<Vec<Complex64>> {
    if taps.span() > n {
        return invalid(format!("tap delay {} does not fit in {n} subcarriers", taps.span() - 1));
    }
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    h[..taps.span()].copy_from_slice(taps.coeffs());
    fft(&h, false)
}

/// Per-bin ZF (`y / H`, nulls erased to 0) or MMSE (`conj(H) y / (|H|² + N0)`).
pub fn equalize(y: &[Complex64], gains: &[Complex64], kind: EqualizerKind) -> Result<Vec<Complex64>> {
    if y.len() != gains.len() {
        return invalid(format!("{} samples but {} gains", y.len(), gains.len()));
    }
    if let EqualizerKind::Mmse { n0 } = kind {
        if !(n0 >= 0.0) {
            return invalid("MMSE noise variance must be >= 0");
        }
    }
    Ok(y.iter()
        .zip(gains)
        .map(|(&v, &h)| match kind {
            EqualizerKind::Zf if h.norm() < ZF_NULL_THRESHOLD => Complex64::new(0.0, 0.0),
            EqualizerKind::Zf => v / h,
            EqualizerKind::Mmse { n0 } => {
                let d = h.norm_sqr() + n0;
                if d < ZF_NULL_THRESHOLD * ZF_NULL_THRESHOLD {
                    Complex64::new(0.0, 0.0)
                } else {
                    h.conj() * v / d
                }
            }
        })
        .collect())
}

/// Time-domain block equalizer: FFT, per-bin equalization, inverse FFT.
pub fn equalize_block(y: &[Complex64], gains: &[Complex64], kind: EqualizerKind) -> Result<Vec<Complex64>> {
    let spectrum = fft(y, false)?;
    let eq = equalize(&spectrum, gains, kind)?;
    fft(&eq, true)
}

/// Per-bin equalizer coefficient `w_i`, so that the equalized bin is `w_i · y_i`.
pub fn equalizer_weights(gains: &[Complex64], kind: EqualizerKind) -> Result<Vec<Complex64>> {
    equalize(&vec![Complex64::new(1.0, 0.0); gains.len()], gains, kind)
}

/// Second-order description of a block equalizer output `x̂ = β·x + d`.
///
/// Assumes i.i.d. unit-energy symbols and white noise of variance `n0` per complex sample.
/// `distortion` is the variance of `d` (residual interference plus filtered noise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStats {
    pub bias: Complex64,
    pub distortion: f64,
}

impl BlockStats {
    /// Distortion variance after dividing out the bias.
    pub fn unbiased_noise(&self) -> f64 {
        self.distortion / self.bias.norm_sqr()
    }
}

pub fn block_stats(gains: &[Complex64], kind: EqualizerKind, n0: f64) -> Result<BlockStats> {
    let w = equalizer_weights(gains, kind)?;
    let n = gains.len() as f64;
    let g: Vec<Complex64> = w.iter().zip(gains).map(|(a, h)| a * h).collect();
    let bias = g.iter().sum::<Complex64>() / n;
    let isi = g.iter().map(|v| v.norm_sqr()).sum::<f64>() / n - bias.norm_sqr();
    let noise = n0 * w.iter().map(|v| v.norm_sqr()).sum::<f64>() / n;
    Ok(BlockStats {
        bias,
        distortion: isi.max(0.0) + noise,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    use super::*;
    use crate::baselines::QamSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_tap_is_flat() {
        let h = freq_response(&ChannelTaps::identity(), 8).unwrap();
        assert!(h.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn two_tap_response() {
        let taps = ChannelTaps::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let h = freq_response(&taps, 4).unwrap();
        let expected = [c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.0), c(1.0, 1.0)];
        for (a, b) in h.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn real_taps_give_symmetric_magnitude() {
        let taps = ChannelTaps::new(vec![c(0.9, 0.0), c(-0.4, 0.0), c(0.2, 0.0)]).unwrap();
        let n = 16;
        let h = freq_response(&taps, n).unwrap();
        for i in 1..n {
            assert!((h[i].norm() - h[n - i].norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn delay_beyond_block_rejected() {
        assert!(freq_response(&ChannelTaps::channel_b(), 4).is_err());
    }

    #[test]
    fn flat_channel_passes_through() {
        let y = vec![c(0.3, -0.2), c(1.0, 0.5)];
        let ones = vec![c(1.0, 0.0); 2];
        assert_eq!(equalize(&y, &ones, EqualizerKind::Zf).unwrap(), y);
        assert_eq!(equalize(&y, &ones, EqualizerKind::Mmse { n0: 0.0 }).unwrap(), y);
    }

    #[test]
    fn mmse_without_noise_equals_zf() {
        let y = vec![c(0.3, -0.2), c(1.0, 0.5), c(-0.7, 0.1)];
        let h = vec![c(0.5, 0.5), c(2.0, -1.0), c(0.0, 0.0)];
        let zf = equalize(&y, &h, EqualizerKind::Zf).unwrap();
        let mmse = equalize(&y, &h, EqualizerKind::Mmse { n0: 0.0 }).unwrap();
        for i in 0..2 {
            assert!((zf[i] - mmse[i]).norm() < 1e-12);
        }
        assert_eq!(zf[2], c(0.0, 0.0));
    }

    #[test]
    fn zf_inverts_flat_fading_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Complex64> = (0..64).map(|_| c(rng.random(), rng.random())).collect();
        let h: Vec<Complex64> = (0..64).map(|_| c(rng.random_range(0.2..2.0), rng.random_range(-1.0..1.0))).collect();
        let y: Vec<Complex64> = x.iter().zip(&h).map(|(a, b)| a * b).collect();
        let back = equalize(&y, &h, EqualizerKind::Zf).unwrap();
        assert!(x.iter().zip(&back).all(|(a, b)| (a - b).norm() <= 1e-10));
    }

    #[test]
    fn cyclic_prefix_block_round_trip() {
        let q = QamSpec::qam64();
        let taps = ChannelTaps::new(vec![c(1.0, 0.0), c(0.5, 0.3), c(-0.2, 0.1)]).unwrap();
        let n = 256;
        let cp = taps.span() - 1;
        let gains = freq_response(&taps, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut errors = 0;
        let mut total = 0;
        while total < 10_000 * q.k() {
            let bits: Vec<u8> = (0..n * q.k()).map(|_| rng.random_range(0..2)).collect();
            let block = q.modulate(&bits).unwrap();
            let mut frame = block[n - cp..].to_vec();
            frame.extend_from_slice(&block);
            // Linear convolution of the prefixed frame.
            let rx: Vec<Complex64> = (0..frame.len())
                .map(|i| (0..taps.span()).filter(|&d| d <= i).map(|d| taps.coeffs()[d] * frame[i - d]).sum())
                .collect();
            let eq = equalize_block(&rx[cp..], &gains, EqualizerKind::Zf).unwrap();
            let out = q.demod_hard(&eq);
            errors += out.iter().zip(&bits).filter(|(a, b)| a != b).count();
            total += bits.len();
        }
        assert_eq!(errors, 0);
    }

    #[test]
    fn block_stats_match_simulation() {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        use rand_distr::{Distribution, StandardNormal};
        let taps = ChannelTaps::channel_b();
        let n = 64;
        let gains = freq_response(&taps, n).unwrap();
        let n0 = 0.05;
        let kind = EqualizerKind::Mmse { n0 };
        let stats = block_stats(&gains, kind, n0).unwrap();
        assert!(stats.bias.im.abs() < 1e-12 && stats.bias.re > 0.0 && stats.bias.re < 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
        let (mut err, mut count) = (0.0, 0usize);
        for _ in 0..400 {
            let x: Vec<Complex64> = (0..n).map(|_| c(g(), g()) * 0.5f64.sqrt()).collect();
            // Circular channel plus noise, built directly in the frequency domain.
            let xf = fft(&x, false).unwrap();
            let yf: Vec<Complex64> = xf.iter().zip(&gains).map(|(a, h)| a * h).collect();
            let mut yt = fft(&yf, true).unwrap();
            let s = (n0 / 2.0).sqrt();
            for v in &mut yt {
                *v += c(g() * s, g() * s);
            }
            let y = equalize_block(&yt, &gains, kind).unwrap();
            for (a, b) in y.iter().zip(&x) {
                err += (a - stats.bias * b).norm_sqr();
                count += 1;
            }
        }
        let measured = err / count as f64;
        assert!((measured / stats.distortion - 1.0).abs() < 0.05, "{measured} vs {}", stats.distortion);
    }

    #[test]
    fn flat_channel_stats_are_trivial() {
        let gains = vec![c(1.0, 0.0); 16];
        let s = block_stats(&gains, EqualizerKind::Mmse { n0: 0.1 }, 0.1).unwrap();
        assert!((s.bias.re - 1.0 / 1.1).abs() < 1e-12);
        assert!((s.unbiased_noise() - 0.1).abs() < 1e-12);
        let z = block_stats(&gains, EqualizerKind::Zf, 0.1).unwrap();
        assert!((z.bias.re - 1.0).abs() < 1e-12 && (z.distortion - 0.1).abs() < 1e-12);
    }

    #[test]
    fn mmse_beats_zf_in_mean_square_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let q = QamSpec::qam64();
        let n0 = 0.05;
        let sigma = (n0 / 2.0f64).sqrt();
        let h: Vec<Complex64> = (0..100_000).map(|i| Complex64::from_polar(0.2 + (i % 10) as f64 * 0.1, i as f64)).collect();
        let bits: Vec<u8> = (0..h.len() * 6).map(|_| rng.random_range(0..2)).collect();
        let x = q.modulate(&bits).unwrap();
        let y: Vec<Complex64> = x
            .iter()
            .zip(&h)
            .map(|(a, g)| {
                let e = c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * sigma;
                a * g + e
            })
            .collect();
        let mse = |est: Vec<Complex64>| est.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / x.len() as f64;
        let zf = mse(equalize(&y, &h, EqualizerKind::Zf).unwrap());
        let mmse = mse(equalize(&y, &h, EqualizerKind::Mmse { n0 }).unwrap());
        assert!(mmse <= zf, "mmse {mmse} zf {zf}");
    }
}

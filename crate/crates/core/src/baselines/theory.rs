use super::qam::QamSpec;
use crate::channel::noise_variance;

/// Gaussian tail probability `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Complementary error function, relative error below 1.2e-7 everywhere.
pub fn erfc(x: f64) -> f64 {
    // Chebyshev fit from Numerical Recipes (erfcc).
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.265_512_23
            + t * (1.000_023_68
                + t * (0.374_091_96
                    + t * (0.096_784_18
                        + t * (-0.186_288_06
                            + t * (0.278_868_07
                                + t * (-1.135_203_98 + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
            .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Nearest-neighbour Gray approximation of uncoded square-QAM BER on AWGN at the given Es/N0.
pub fn qam_awgn_ber_theory(spec: &QamSpec, snr_db: f64) -> f64 {
    let k = spec.k() as f64;
    let m = spec.order() as f64;
    let es_n0 = 1.0 / noise_variance(snr_db);
    let gamma_b = es_n0 / k;
    (4.0 / k) * (1.0 - 1.0 / m.sqrt()) * q_function((3.0 * k * gamma_b / (m - 1.0)).sqrt())
}

/// Es/N0 in dB at which [`qam_awgn_ber_theory`] equals `target` (bisection).
pub fn snr_for_theory_ber(spec: &QamSpec, target: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if qam_awgn_ber_theory(spec, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

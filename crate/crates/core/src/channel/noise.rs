use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::tensor::Tensor3;

/// Per-real-dimension noise standard deviation for a given Es/N0 with `Es = 1`.
pub fn snr_to_noise_sigma(snr_db: f64) -> f64 {
    noise_variance(snr_db).sqrt() / std::f64::consts::SQRT_2
}

/// `N0 = 10^(-snr/10)` for unit symbol energy.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    Awgn,
    Bursty {
        burst_probability: f64,
        burst_sigma_multiplier: f64,
    },
}

impl NoiseKind {
    pub const DEFAULT_BURST_PROBABILITY: f64 = 0.05;
    pub const DEFAULT_BURST_MULTIPLIER: f64 = 5.0;

    pub fn bursty_default() -> Self {
        NoiseKind::Bursty {
            burst_probability: Self::DEFAULT_BURST_PROBABILITY,
            burst_sigma_multiplier: Self::DEFAULT_BURST_MULTIPLIER,
        }
    }
}

/// Noise process; `snr_db = +inf` means noise-free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(flatten)]
    pub kind: NoiseKind,
    #[serde(with = "snr_repr")]
    pub snr_db: f64,
}

/// JSON has no infinity, so a noise-free setting is written as the string `"inf"`.
mod snr_repr {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.trim() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                other => Err(de::Error::custom(format!("invalid snr_db `{other}`"))),
            },
        }
    }
}

impl NoiseModel {
    pub fn awgn(snr_db: f64) -> Self {
        Self {
            kind: NoiseKind::Awgn,
            snr_db,
        }
    }

    pub fn none() -> Self {
        Self::awgn(f64::INFINITY)
    }

    pub fn with_snr(self, snr_db: f64) -> Self {
        Self { snr_db, ..self }
    }

    pub fn sigma(&self) -> f64 {
        snr_to_noise_sigma(self.snr_db)
    }

    pub fn is_silent(&self) -> bool {
        self.sigma() == 0.0
    }

    /// Draws one noise tensor of shape `(batch, len, 2)`.
    pub fn sample(&self, batch: usize, len: usize, rng: &mut dyn RngCore) -> Tensor3 {
        let sigma = self.sigma();
        match self.kind {
            NoiseKind::Awgn => sample_awgn(batch, len, sigma, rng),
            NoiseKind::Bursty {
                burst_probability,
                burst_sigma_multiplier,
            } => sample_bursty(batch, len, sigma, burst_probability, burst_sigma_multiplier, rng),
        }
    }
}

/// I.i.d. `N(0, sigma²)` on every real component of a `(batch, len, 2)` tensor.
pub fn sample_awgn(batch: usize, len: usize, sigma: f64, rng: &mut dyn RngCore) -> Tensor3 {
    let mut t = Tensor3::zeros(batch, len, 2);
    if sigma == 0.0 {
        return t;
    }
    for v in t.data_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = sigma * z;
    }
    t
}

/// Gaussian mixture noise: each complex position is a burst with probability `p`,
/// in which case both components use `rho * sigma` instead of `sigma`.
pub fn sample_bursty(batch: usize, len: usize, sigma: f64, p: f64, rho: f64, rng: &mut dyn RngCore) -> Tensor3 {
    if p <= 0.0 {
        return sample_awgn(batch, len, sigma, rng);
    }
    if p >= 1.0 {
        return sample_awgn(batch, len, rho * sigma, rng);
    }
    let mut t = Tensor3::zeros(batch, len, 2);
    if sigma == 0.0 {
        return t;
    }
    for pair in t.data_mut().chunks_exact_mut(2) {
        let s = if rng.random::<f64>() < p { rho * sigma } else { sigma };
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        pair[0] = s * re;
        pair[1] = s * im;
    }
    t
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn noise_free_survives_json() {
        let text = serde_json::to_string(&NoiseModel::none()).unwrap();
        assert!(text.contains("\"inf\""), "{text}");
        let back: NoiseModel = serde_json::from_str(&text).unwrap();
        assert!(back.is_silent());
        let bursty: NoiseModel = serde_json::from_str(r#"{"kind":"bursty","burst_probability":0.1,"burst_sigma_multiplier":5,"snr_db":7.5}"#).unwrap();
        assert_eq!(bursty.snr_db, 7.5);
    }

    #[test]
    fn sigma_conventions() {
        assert!((snr_to_noise_sigma(0.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((snr_to_noise_sigma(10.0) - 0.05f64.sqrt()).abs() < 1e-15);
        assert!((snr_to_noise_sigma(0.0) / snr_to_noise_sigma(20.0) - 10.0).abs() < 1e-12);
        assert_eq!(snr_to_noise_sigma(f64::INFINITY), 0.0);
    }

    #[test]
    fn zero_sigma_is_silent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_awgn(2, 5, 0.0, &mut rng).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn seeded_draws_repeat() {
        let a = sample_awgn(1, 64, 1.0, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_awgn(1, 64, 1.0, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn awgn_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let t = sample_awgn(1, 500_000, 1.0, &mut rng);
        let n = t.data().len() as f64;
        let mean = t.data().iter().sum::<f64>() / n;
        let var = t.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() <= 0.01, "mean {mean}");
        assert!((0.99..=1.01).contains(&var), "var {var}");
    }

    #[test]
    fn bursty_degenerate_cases() {
        let a = sample_bursty(1, 100, 0.3, 0.0, 5.0, &mut ChaCha8Rng::seed_from_u64(4));
        let b = sample_awgn(1, 100, 0.3, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        let a = sample_bursty(1, 100, 0.3, 1.0, 5.0, &mut ChaCha8Rng::seed_from_u64(4));
        let b = sample_awgn(1, 100, 1.5, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
    }

    #[test]
    fn bursty_mixture_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sigma = 0.5;
        let t = sample_bursty(1, 1_000_000, sigma, 0.1, 5.0, &mut rng);
        let var = t.data().iter().map(|v| v * v).sum::<f64>() / t.data().len() as f64;
        let expected = sigma * sigma * (0.9 + 0.1 * 25.0);
        assert!((var / expected - 1.0).abs() <= 0.02, "var {var} vs {expected}");
    }
}

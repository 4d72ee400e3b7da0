//! Channel layers: power normalization, multipath and per-subcarrier fading, noise.

mod file;
pub mod noise;
pub mod power;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use file::ChannelFile;
pub use noise::{noise_variance, sample_awgn, sample_bursty, snr_to_noise_sigma, NoiseKind, NoiseModel};

use crate::error::{invalid, Error, Result};
use crate::nn::ChannelStage;
use crate::tensor::Tensor3;

/// Dense causal impulse response `h_0 .. h_{Lh-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, f64, f64)>", into = "Vec<(usize, f64, f64)>")]
pub struct ChannelTaps {
    coeffs: Vec<Complex64>,
}

impl ChannelTaps {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().all(|h| h.norm() == 0.0) {
            return invalid("channel needs at least one nonzero tap");
        }
        if coeffs.iter().any(|h| !h.is_finite()) {
            return invalid("channel taps must be finite");
        }
        Ok(Self { coeffs })
    }

    /// Builds the dense response from `(delay, coefficient)` pairs; unlisted delays are zero.
    pub fn from_delays(taps: &[(usize, Complex64)]) -> Result<Self> {
        let span = taps.iter().map(|(d, _)| d + 1).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); span];
        for &(d, h) in taps {
            coeffs[d] += h;
        }
        Self::new(coeffs)
    }

    pub fn identity() -> Self {
        Self {
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Three-path profile with delays 0, 1, 2.
    pub fn channel_a() -> Self {
        Self::from_delays(&[
            (0, Complex64::new(1.0, 0.0)),
            (1, Complex64::from_polar(0.6, 0.7)),
            (2, Complex64::from_polar(0.3, 2.1)),
        ])
        .expect("static taps")
    }

    /// Four-path profile with delays 0, 2, 3, 5.
    pub fn channel_b() -> Self {
        Self::from_delays(&[
            (0, Complex64::new(1.0, 0.0)),
            (2, Complex64::from_polar(0.5, 1.0)),
            (3, Complex64::from_polar(0.4, 2.5)),
            (5, Complex64::from_polar(0.3, 0.3)),
        ])
        .expect("static taps")
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Number of taps including interior zeros (channel memory + 1).
    pub fn span(&self) -> usize {
        self.coeffs.len()
    }

    /// `Σ |h_n|²`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(Complex64::norm_sqr).sum()
    }

    /// Nonzero taps as `(delay, coefficient)`.
    pub fn delays(&self) -> Vec<(usize, Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, h)| h.norm() != 0.0)
            .map(|(d, &h)| (d, h))
            .collect()
    }
}

impl TryFrom<Vec<(usize, f64, f64)>> for ChannelTaps {
    type Error = Error;

    fn try_from(v: Vec<(usize, f64, f64)>) -> Result<Self> {
        let taps: Vec<_> = v.into_iter().map(|(d, re, im)| (d, Complex64::new(re, im))).collect();
        Self::from_delays(&taps)
    }
}

impl From<ChannelTaps> for Vec<(usize, f64, f64)> {
    fn from(t: ChannelTaps) -> Self {
        t.delays().into_iter().map(|(d, h)| (d, h.re, h.im)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum ChannelResponse {
    /// Causal multipath convolution in the time domain.
    Time { taps: ChannelTaps },
    /// Independent complex gain per subcarrier (cyclic prefix assumed).
    Frequency {
        #[serde(with = "complex_list")]
        gains: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Time,
    Frequency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub response: ChannelResponse,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl ChannelSpec {
    pub fn time(taps: ChannelTaps, noise: NoiseModel) -> Self {
        Self {
            response: ChannelResponse::Time { taps },
            noise,
            seed: 0,
        }
    }

    pub fn frequency(gains: Vec<Complex64>, noise: NoiseModel) -> Self {
        Self {
            response: ChannelResponse::Frequency { gains },
            noise,
            seed: 0,
        }
    }

    pub fn awgn(snr_db: f64) -> Self {
        Self::time(ChannelTaps::identity(), NoiseModel::awgn(snr_db))
    }

    pub fn domain(&self) -> Domain {
        match self.response {
            ChannelResponse::Time { .. } => Domain::Time,
            ChannelResponse::Frequency { .. } => Domain::Frequency,
        }
    }

    pub fn with_snr(&self, snr_db: f64) -> Self {
        Self {
            noise: self.noise.with_snr(snr_db),
            ..self.clone()
        }
    }

    pub fn with_noise(&self, noise: NoiseModel) -> Self {
        Self {
            noise,
            ..self.clone()
        }
    }

    /// Same response, no noise.
    pub fn noiseless(&self) -> Self {
        self.with_noise(NoiseModel::none())
    }

    pub fn taps(&self) -> Option<&ChannelTaps> {
        match &self.response {
            ChannelResponse::Time { taps } => Some(taps),
            ChannelResponse::Frequency { .. } => None,
        }
    }

    pub fn gains(&self) -> Option<&[Complex64]> {
        match &self.response {
            ChannelResponse::Frequency { gains } => Some(gains),
            ChannelResponse::Time { .. } => None,
        }
    }

    /// Forward pass for either domain.
    pub fn apply(&self, x: &Tensor3, rng: &mut dyn RngCore) -> Result<Tensor3> {
        match self.domain() {
            Domain::Time => apply_time_channel(x, self, rng),
            Domain::Frequency => apply_freq_channel(x, self, rng),
        }
    }
}

impl ChannelStage for ChannelSpec {
    fn forward(&self, x: &Tensor3, rng: &mut dyn RngCore) -> Result<Tensor3> {
        self.apply(x, rng)
    }

    fn backward(&self, grad: &Tensor3) -> Result<Tensor3> {
        match &self.response {
            ChannelResponse::Time { taps } => Ok(convolve_backward(grad, taps)),
            ChannelResponse::Frequency { gains } => {
                check_len(grad, gains.len())?;
                Ok(multiply(grad, gains, true))
            }
        }
    }

    fn is_deterministic(&self) -> bool {
        self.noise.is_silent()
    }
}

fn check_complex(x: &Tensor3) -> Result<()> {
    if x.channels() != 2 {
        return invalid(format!("complex signal needs 2 channels, got shape {}", x.shape_string()));
    }
    Ok(())
}

fn check_len(x: &Tensor3, n: usize) -> Result<()> {
    check_complex(x)?;
    if x.len() != n {
        return invalid(format!(
            "signal length {} does not match {} subcarrier gains",
            x.len(),
            n
        ));
    }
    Ok(())
}

fn add_noise(y: &mut Tensor3, noise: &NoiseModel, rng: &mut dyn RngCore) {
    if noise.is_silent() {
        return;
    }
    let n = noise.sample(y.batch(), y.len(), rng);
    for (v, e) in y.data_mut().iter_mut().zip(n.data()) {
        *v += e;
    }
}

/// Causal same-length complex convolution `y_i = Σ h_n x_{i-n}` with `x_j = 0` for `j < 0`.
pub fn convolve(x: &Tensor3, taps: &ChannelTaps) -> Tensor3 {
    let (batch, len, _) = x.shape();
    let mut y = Tensor3::zeros(batch, len, 2);
    let h = taps.coeffs();
    for b in 0..batch {
        let xs = x.item(b);
        let ys = y.item_mut(b);
        for i in 0..len {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, hn) in h.iter().enumerate().take(i + 1) {
                let (xr, xi) = (xs[2 * (i - n)], xs[2 * (i - n) + 1]);
                re += hn.re * xr - hn.im * xi;
                im += hn.re * xi + hn.im * xr;
            }
            ys[2 * i] = re;
            ys[2 * i + 1] = im;
        }
    }
    y
}

/// Adjoint of [`convolve`]: `dx_j = Σ conj(h_n) dy_{j+n}`.
pub fn convolve_backward(grad: &Tensor3, taps: &ChannelTaps) -> Tensor3 {
    let (batch, len, _) = grad.shape();
    let mut dx = Tensor3::zeros(batch, len, 2);
    let h = taps.coeffs();
    for b in 0..batch {
        let gs = grad.item(b);
        let ds = dx.item_mut(b);
        for j in 0..len {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, hn) in h.iter().enumerate().take(len - j) {
                let (gr, gi) = (gs[2 * (j + n)], gs[2 * (j + n) + 1]);
                re += hn.re * gr + hn.im * gi;
                im += hn.re * gi - hn.im * gr;
            }
            ds[2 * j] = re;
            ds[2 * j + 1] = im;
        }
    }
    dx
}

fn multiply(x: &Tensor3, gains: &[Complex64], conjugate: bool) -> Tensor3 {
    let mut y = x.clone();
    for b in 0..x.batch() {
        for (pair, h) in y.item_mut(b).chunks_exact_mut(2).zip(gains) {
            let h = if conjugate { h.conj() } else { *h };
            let z = h * Complex64::new(pair[0], pair[1]);
            pair[0] = z.re;
            pair[1] = z.im;
        }
    }
    y
}

/// Time-domain multipath channel followed by the configured noise.
pub fn apply_time_channel(x: &Tensor3, spec: &ChannelSpec, rng: &mut dyn RngCore) -> Result<Tensor3> {
    let ChannelResponse::Time { taps } = &spec.response else {
        return Err(Error::DomainMismatch("time-domain channel expected".into()));
    };
    check_complex(x)?;
    let mut y = convolve(x, taps);
    add_noise(&mut y, &spec.noise, rng);
    Ok(y)
}

/// Per-subcarrier fading `y_i = H_i x_i` followed by the configured noise.
pub fn apply_freq_channel(x: &Tensor3, spec: &ChannelSpec, rng: &mut dyn RngCore) -> Result<Tensor3> {
    let ChannelResponse::Frequency { gains } = &spec.response else {
        return Err(Error::DomainMismatch("frequency-domain channel expected".into()));
    };
    check_len(x, gains.len())?;
    let mut y = multiply(x, gains, false);
    add_noise(&mut y, &spec.noise, rng);
    Ok(y)
}

/// A channel whose noise realization is fixed in advance.
///
/// The forward pass is deterministic, which makes it usable for gradient checks and for
/// comparing two runs of a model on exactly the same noise.
#[derive(Debug, Clone)]
pub struct FrozenNoise {
    pub spec: ChannelSpec,
    pub noise: Tensor3,
}

impl FrozenNoise {
    pub fn new(spec: &ChannelSpec, noise: Tensor3) -> Self {
        Self {
            spec: spec.noiseless(),
            noise,
        }
    }
}

impl ChannelStage for FrozenNoise {
    fn forward(&self, x: &Tensor3, rng: &mut dyn RngCore) -> Result<Tensor3> {
        if x.shape() != self.noise.shape() {
            return invalid(format!(
                "frozen noise has shape {}, signal has {}",
                self.noise.shape_string(),
                x.shape_string()
            ));
        }
        let mut y = self.spec.apply(x, rng)?;
        for (v, e) in y.data_mut().iter_mut().zip(self.noise.data()) {
            *v += e;
        }
        Ok(y)
    }

    fn backward(&self, grad: &Tensor3) -> Result<Tensor3> {
        self.spec.backward(grad)
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Adds independent `N(0, std²)` to the real and imaginary part of every coefficient.
pub fn perturb_taps(taps: &ChannelTaps, std: f64, rng: &mut dyn RngCore) -> Result<ChannelTaps> {
    if !(std >= 0.0) {
        return invalid(format!("perturbation std must be >= 0, got {std}"));
    }
    if std == 0.0 {
        return Ok(taps.clone());
    }
    let coeffs = taps
        .coeffs()
        .iter()
        .map(|h| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            h + Complex64::new(std * re, std * im)
        })
        .collect();
    ChannelTaps::new(coeffs)
}

mod complex_list {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| (z.re, z.im)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<(f64, f64)>::deserialize(d)?;
        Ok(pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
    }
}

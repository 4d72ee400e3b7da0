//! TOML channel definition files.
//!
//! ```toml
//! domain = "time"            # or "frequency"
//! seed = 7
//! preset = "b"               # optional: "identity", "a", "b"
//! taps = [[0, 1.0, 0.0], [2, 0.27, 0.42]]   # (delay, re, im), overrides preset
//!
//! # frequency domain only: either explicit gains or the FFT of the taps
//! fft_of_taps = true
//! n_subcarriers = 64
//! gains = [[1.0, 0.0], [0.5, -0.2]]
//!
//! [noise]
//! kind = "bursty"            # or "awgn"
//! snr_db = 12.0
//! burst_probability = 0.05
//! burst_sigma_multiplier = 5.0
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ChannelResponse, ChannelSpec, ChannelTaps, Domain, NoiseModel};
use crate::baselines::freq_response;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub domain: Domain,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taps: Option<Vec<(usize, f64, f64)>>,
    #[serde(default)]
    pub fft_of_taps: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_subcarriers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<(f64, f64)>>,
    #[serde(default = "NoiseModel::none")]
    pub noise: NoiseModel,
}

impl ChannelFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e
                .span()
                .map(|s| text[..s.start].matches('\n').count() + 1)
                .unwrap_or(0),
            msg: e.message().to_string(),
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("channel file serializes")
    }

    fn resolve_taps(&self) -> Result<Option<ChannelTaps>> {
        if let Some(t) = &self.taps {
            return ChannelTaps::try_from(t.clone()).map(Some);
        }
        match self.preset.as_deref() {
            None => Ok(None),
            Some("identity") => Ok(Some(ChannelTaps::identity())),
            Some("a") => Ok(Some(ChannelTaps::channel_a())),
            Some("b") => Ok(Some(ChannelTaps::channel_b())),
            Some(other) => invalid(format!("unknown channel preset `{other}`")),
        }
    }

    pub fn into_spec(self) -> Result<ChannelSpec> {
        let response = match self.domain {
            Domain::Time => ChannelResponse::Time {
                taps: self.resolve_taps()?.unwrap_or_else(ChannelTaps::identity),
            },
            Domain::Frequency => {
                let gains = if let Some(g) = &self.gains {
                    g.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
                } else if self.fft_of_taps {
                    let n = self
                        .n_subcarriers
                        .ok_or_else(|| Error::InvalidArgument("fft_of_taps needs n_subcarriers".into()))?;
                    let taps = self
                        .resolve_taps()?
                        .ok_or_else(|| Error::InvalidArgument("fft_of_taps needs taps or a preset".into()))?;
                    freq_response(&taps, n)?
                } else {
                    return invalid("frequency channel needs `gains` or `fft_of_taps = true`");
                };
                if self.n_subcarriers.is_some_and(|n| n != gains.len()) {
                    return invalid("n_subcarriers does not match the number of gains");
                }
                ChannelResponse::Frequency { gains }
            }
        };
        Ok(ChannelSpec {
            response,
            noise: self.noise,
            seed: self.seed,
        })
    }

    /// Lossless description of an in-memory spec.
    pub fn from_spec(spec: &ChannelSpec) -> Self {
        let mut f = ChannelFile {
            domain: spec.domain(),
            seed: spec.seed,
            preset: None,
            taps: None,
            fft_of_taps: false,
            n_subcarriers: None,
            gains: None,
            noise: spec.noise,
        };
        match &spec.response {
            ChannelResponse::Time { taps } => f.taps = Some(taps.clone().into()),
            ChannelResponse::Frequency { gains } => {
                f.n_subcarriers = Some(gains.len());
                f.gains = Some(gains.iter().map(|z| (z.re, z.im)).collect());
            }
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::NoiseKind;

    #[test]
    fn parses_time_channel_with_bursty_noise() {
        let f = ChannelFile::from_toml_str(
            r#"
domain = "time"
seed = 3
taps = [[0, 1.0, 0.0], [2, 0.0, 0.5]]
[noise]
kind = "bursty"
snr_db = 12.0
burst_probability = 0.05
burst_sigma_multiplier = 5.0
"#,
        )
        .unwrap();
        let spec = f.into_spec().unwrap();
        assert_eq!(spec.seed, 3);
        let taps = spec.taps().unwrap();
        assert_eq!(taps.span(), 3);
        assert_eq!(taps.coeffs()[2], Complex64::new(0.0, 0.5));
        assert_eq!(spec.noise.kind, NoiseKind::bursty_default());
        assert_eq!(spec.noise.snr_db, 12.0);
    }

    #[test]
    fn frequency_channel_from_taps() {
        let f = ChannelFile::from_toml_str(
            "domain = \"frequency\"\nfft_of_taps = true\nn_subcarriers = 4\ntaps = [[0, 1.0, 0.0], [1, 1.0, 0.0]]\n",
        )
        .unwrap();
        let spec = f.into_spec().unwrap();
        let g = spec.gains().unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[1] - Complex64::new(1.0, -1.0)).norm() < 1e-12);
        assert!(spec.noise.is_silent());
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = ChannelSpec::time(ChannelTaps::channel_b(), NoiseModel::awgn(9.5));
        let text = ChannelFile::from_spec(&spec).to_toml_string();
        let back = ChannelFile::from_toml_str(&text).unwrap().into_spec().unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn unknown_field_reports_line() {
        let err = ChannelFile::from_toml_str("domain = \"time\"\n\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }
}

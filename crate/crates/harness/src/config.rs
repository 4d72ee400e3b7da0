//! TOML experiment descriptions.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use convphy::autoenc::{ArchConfig, Checkpoint, TrainConfig};
use convphy::baselines::QamSpec;
use convphy::channel::{ChannelFile, ChannelSpec};
use convphy::ldpc::{self, LdpcCode};
use convphy::{Error, Result};

use crate::link::{Equalizer, LearnedLink, Link, QamLink};
use crate::sweep::StoppingRule;

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| text[..s.start].matches('\n').count() + 1).unwrap_or(0),
        msg: e.message().to_string(),
    })
}

fn to_toml<T: Serialize>(v: &T) -> Result<String> {
    toml::to_string(v).map_err(|e| Error::InvalidArgument(format!("cannot serialize config: {e}")))
}

/// Resolves `p` against the directory of the config file that named it.
fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Learned {
        name: String,
        checkpoint: PathBuf,
        /// Symbols per sequence at inference; defaults to the training length.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m_run: Option<usize>,
        #[serde(default = "default_batch")]
        batch: usize,
    },
    Qam {
        name: String,
        bits_per_symbol: u32,
        equalizer: Equalizer,
        #[serde(default = "default_block")]
        block: usize,
        #[serde(default = "default_frame")]
        frame_symbols: usize,
        /// Divide out the MMSE bias before hard slicing.
        #[serde(default)]
        unbiased: bool,
    },
}

fn default_batch() -> usize {
    32
}
fn default_block() -> usize {
    64
}
fn default_frame() -> usize {
    12_800
}

impl SystemConfig {
    pub fn name(&self) -> &str {
        match self {
            SystemConfig::Learned { name, .. } | SystemConfig::Qam { name, .. } => name,
        }
    }

    pub fn build(&self, base: &Path) -> Result<Box<dyn Link>> {
        Ok(match self {
            SystemConfig::Learned {
                checkpoint, m_run, batch, ..
            } => {
                let ckpt = Checkpoint::load(&resolve(base, checkpoint))?;
                let m = m_run.unwrap_or(ckpt.arch.m);
                Box::new(LearnedLink::new(ckpt, m, *batch))
            }
            SystemConfig::Qam { .. } => Box::new(self.build_qam()?),
        })
    }

    pub fn build_qam(&self) -> Result<QamLink> {
        match self {
            SystemConfig::Qam {
                bits_per_symbol,
                equalizer,
                block,
                frame_symbols,
                unbiased,
                ..
            } => {
                let mut link = QamLink::new(QamSpec::new(*bits_per_symbol)?, *equalizer, *block, *frame_symbols);
                link.unbiased = *unbiased;
                Ok(link)
            }
            SystemConfig::Learned { name, .. } => Err(Error::InvalidArgument(format!("system `{name}` is not a QAM baseline"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpcConfig {
    /// Path to an alist file, or `default` for the shipped code.
    #[serde(default = "default_alist")]
    pub alist: String,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub interleaver_seed: u64,
}

fn default_alist() -> String {
    "default".into()
}
fn default_iters() -> usize {
    ldpc::DEFAULT_MAX_ITERS
}

impl LdpcConfig {
    pub fn load(&self, base: &Path) -> Result<LdpcCode> {
        if self.alist == "default" {
            return Ok(ldpc::default_code());
        }
        let path = resolve(base, Path::new(&self.alist));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read alist {}: {e}", path.display())))?;
        LdpcCode::from_alist(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurstyConfig {
    pub p: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessConfig {
    #[serde(default = "default_std")]
    pub perturb_std: f64,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "default_frames")]
    pub frames_per_point: usize,
}

fn default_std() -> f64 {
    0.05
}
fn default_trials() -> usize {
    100
}
fn default_frames() -> usize {
    4
}

/// One experiment: systems × channel × SNR grid, plus optional coding/noise/robustness settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub snr_db: Vec<f64>,
    /// Write measured wall-clock seconds into the CSV instead of 0.
    #[serde(default)]
    pub record_seconds: bool,
    #[serde(default)]
    pub stopping: StoppingRule,
    pub channel: ChannelFile,
    pub system: Vec<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ldpc: Option<LdpcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bursty: Option<BurstyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robustness: Option<RobustnessConfig>,
    /// Information about a previous run; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<toml::Table>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        to_toml(self)
    }

    pub fn channel_spec(&self) -> Result<ChannelSpec> {
        self.channel.clone().into_spec()
    }

    /// Copy with checkpoint and alist paths made absolute, so it can be rerun from anywhere.
    pub fn with_absolute_paths(&self, base: &Path) -> Result<Self> {
        let abs = |p: &Path| std::path::absolute(resolve(base, p));
        let mut cfg = self.clone();
        for s in &mut cfg.system {
            if let SystemConfig::Learned { checkpoint, .. } = s {
                *checkpoint = abs(checkpoint)?;
            }
        }
        if let Some(l) = &mut cfg.ldpc {
            if l.alist != "default" {
                l.alist = abs(Path::new(&l.alist))?.to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }
}

/// Training run: architecture, optimizer settings and channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRunConfig {
    #[serde(default)]
    pub arch: ArchConfig,
    #[serde(default)]
    pub train: TrainConfig,
    pub channel: ChannelFile,
}

impl TrainRunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        to_toml(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "awgn"
seed = 3
snr_db = [10.0, 12.0]

[stopping]
min_bit_errors = 50

[channel]
domain = "time"
preset = "identity"

[channel.noise]
kind = "awgn"
snr_db = 10.0

[[system]]
kind = "qam"
name = "qam64"
bits_per_symbol = 6
equalizer = "mmse"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.stopping.min_bit_errors, 50);
        assert_eq!(cfg.stopping.max_bits, 10_000_000);
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = ExperimentConfig::from_toml_str(&SAMPLE.replace("[stopping]", "bogus = 1\n[stopping]")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err:?}");
    }
}

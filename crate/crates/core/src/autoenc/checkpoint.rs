use std::path::Path;

use serde::{Deserialize, Serialize};

use super::train::EpochRecord;
use super::{ArchConfig, TrainConfig};
use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::nn::{checkpoint, ModelGraph};

/// A trained transceiver together with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub arch: ArchConfig,
    pub train: TrainConfig,
    /// Channel used during training, at the training SNR.
    pub channel: ChannelSpec,
    pub graph: ModelGraph,
    pub history: Vec<EpochRecord>,
    pub initial_val_loss: f64,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    arch: ArchConfig,
    train: TrainConfig,
    channel: ChannelSpec,
    history: Vec<EpochRecord>,
    initial_val_loss: f64,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let meta = Meta {
            arch: self.arch.clone(),
            train: self.train.clone(),
            channel: self.channel.clone(),
            history: self.history.clone(),
            initial_val_loss: self.initial_val_loss,
        };
        let extra = serde_json::to_value(meta).map_err(|e| Error::Checkpoint(e.to_string()))?;
        checkpoint::encode(&self.graph, 1, self.arch.bits_per_sequence(), extra)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (graph, extra) = checkpoint::decode(bytes)?;
        let meta: Meta =
            serde_json::from_value(extra).map_err(|e| Error::Checkpoint(format!("malformed metadata: {e}")))?;
        Ok(Self {
            arch: meta.arch,
            train: meta.train,
            channel: meta.channel,
            graph,
            history: meta.history,
            initial_val_loss: meta.initial_val_loss,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

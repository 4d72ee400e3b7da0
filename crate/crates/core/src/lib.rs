//! Learned and classical physical-layer transceivers.

pub mod baselines;
pub mod autoenc;
pub mod channel;
pub mod error;
pub mod ldpc;
pub mod nn;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor3;

//! Double-precision engine for sequential 1-D convolutional graphs.

pub mod adam;
pub mod checkpoint;
mod gemm;
pub mod gradcheck;
pub mod graph;
pub mod layer;
pub mod loss;

pub use adam::Adam;
pub use gradcheck::{finite_difference_check, finite_difference_check_with, GradCheckReport, Objective};
pub use graph::{ChannelStage, LayerParams, ModelGraph, ParamStore, ParamTensor, Pass, Tape};
pub use layer::{Activation, ConvSpec, LayerSpec};
pub use loss::bce_loss;

//! Experiment driver: BER sweeps, coded pipelines, robustness, bursty noise, timing and plots.

pub mod coded;
pub mod config;
pub mod export;
pub mod link;
pub mod plot;
pub mod run;
pub mod studies;
pub mod sweep;

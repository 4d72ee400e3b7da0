//! Classical transceiver chain used as the comparison baseline.

pub mod equalize;
pub mod fft;
pub mod qam;
pub mod theory;

pub use equalize::{
    block_stats, equalize, equalize_block, equalizer_weights, freq_response, BlockStats, EqualizerKind, ZF_NULL_THRESHOLD,
};
pub use fft::fft;
pub use qam::QamSpec;
pub use theory::{q_function, qam_awgn_ber_theory, snr_for_theory_ber};

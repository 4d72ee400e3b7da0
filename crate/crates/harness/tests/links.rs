use convphy::baselines::QamSpec;
use convphy::channel::{ChannelSpec, ChannelTaps, NoiseModel};
use convphy_harness::link::{Equalizer, Link, QamLink};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn run(link: &QamLink, ch: &ChannelSpec, bits: &[u8]) -> (Vec<u8>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let out = link.run(bits, ch, &mut rng, true).unwrap();
    (out.hard, out.llr)
}

fn links() -> (QamLink, QamLink) {
    let biased = QamLink::new(QamSpec::qam64(), Equalizer::Mmse, 64, 1280);
    let mut unbiased = biased.clone();
    unbiased.unbiased = true;
    (biased, unbiased)
}

#[test]
fn mmse_slicing_variants_share_llrs() {
    let (biased, unbiased) = links();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bits: Vec<u8> = (0..biased.frame_bits()).map(|_| rng.random_range(0..2)).collect();
    let ch = ChannelSpec::time(ChannelTaps::channel_b(), NoiseModel::awgn(14.0));
    let (hb, lb) = run(&biased, &ch, &bits);
    let (hu, lu) = run(&unbiased, &ch, &bits);
    assert_eq!(lb, lu);
    assert_ne!(hb, hu, "the MMSE bias should move some decisions at 14 dB");
    let errs = |h: &[u8]| h.iter().zip(&bits).filter(|(a, b)| a != b).count();
    assert!(errs(&hu) <= errs(&hb) + errs(&hb) / 10);
}

#[test]
fn mmse_variants_are_error_free_at_high_snr() {
    let (biased, unbiased) = links();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let bits: Vec<u8> = (0..biased.frame_bits()).map(|_| rng.random_range(0..2)).collect();
    let ch = ChannelSpec::time(ChannelTaps::channel_b(), NoiseModel::awgn(60.0));
    for link in [&biased, &unbiased] {
        assert_eq!(run(link, &ch, &bits).0, bits);
    }
}

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::Tensor3;

/// Independent ChaCha streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 0,
    Train = 1,
    Validation = 2,
    Test = 3,
    TrainNoise = 4,
    ValidationNoise = 5,
    Eval = 6,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Fills `out` with i.i.d. fair bits as 0.0/1.0.
pub(crate) fn fill_bits(rng: &mut dyn RngCore, out: &mut [f64]) {
    for chunk in out.chunks_mut(64) {
        let mut word = rng.next_u64();
        for v in chunk {
            *v = (word & 1) as f64;
            word >>= 1;
        }
    }
}

/// `n` sequences of `k·M` uniform bits, shaped `(n, k·M, 1)`.
pub fn gen_dataset(n: usize, k: usize, m: usize, seed: u64, stream: Stream) -> Tensor3 {
    let mut rng = stream_rng(seed, stream);
    let mut t = Tensor3::zeros(n, k * m, 1);
    fill_bits(&mut rng, t.data_mut());
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_are_balanced() {
        let t = gen_dataset(100, 10, 1000, 7, Stream::Train);
        let mean = t.data().iter().sum::<f64>() / t.data().len() as f64;
        assert!((0.499..=0.501).contains(&mean), "{mean}");
        assert!(t.data().iter().all(|&b| b == 0.0 || b == 1.0));
    }

    #[test]
    fn seeded_and_stream_separated() {
        let a = gen_dataset(4, 2, 16, 1, Stream::Train);
        assert_eq!(a, gen_dataset(4, 2, 16, 1, Stream::Train));
        assert_ne!(a, gen_dataset(4, 2, 16, 1, Stream::Test));
        assert_ne!(a, gen_dataset(4, 2, 16, 2, Stream::Train));
    }
}

//! Regenerates `data/ldpc_1024_512.alist`.

use convphy::ldpc::{peg, write_alist};

fn main() {
    let (h, seed) = peg::peg_full_rank(1024, 512, 3, peg::DEFAULT_SEED, 64).expect("generation failed");
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ldpc_1024_512.alist");
    std::fs::write(path, write_alist(&h)).expect("write failed");
    println!("wrote {path} (seed {seed})");
}

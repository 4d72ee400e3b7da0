//! Rate-1/2 LDPC coding: alist I/O, systematic encoding, sum-product decoding.

pub mod alist;
pub mod code;
pub mod decode;
pub mod matrix;
pub mod peg;

pub use alist::{load_alist, write_alist};
pub use code::LdpcCode;
pub use decode::{BpDecoder, DecodeOutput, DEFAULT_MAX_ITERS, LLR_CLAMP, MESSAGE_CLAMP};
pub use matrix::{syndrome_check, ParityMatrix};

/// The shipped (n = 1024, k = 512) (3,6)-regular code.
pub const DEFAULT_ALIST: &str = include_str!("../../data/ldpc_1024_512.alist");

/// A small (8,4) code used in tests and examples.
pub const TOY_ALIST: &str = "\
8 4
3 5
2 2 2 2 2 2 3 3
4 5 5 4
1 2
1 3
1 4
2 3
2 4
3 4
1 2 3
2 3 4
1 2 3 7
1 4 5 7 8
2 4 6 7 8
3 5 6 8
";

pub fn default_code() -> LdpcCode {
    LdpcCode::from_alist(DEFAULT_ALIST).expect("shipped alist is valid and full rank")
}

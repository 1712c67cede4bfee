//! Seeded random streams.
//!
//! Every consumer of randomness draws from its own ChaCha stream derived from
//! one user seed, so adding draws in one place never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Init = 1,
    MdaProbe = 2,
    CsTrials = 3,
    CsSensing = 4,
    Baseline = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// A sub-stream of `stream`, e.g. one per Monte-Carlo trial.
pub fn substream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(((index + 1) << 8) | stream as u64);
    rng
}

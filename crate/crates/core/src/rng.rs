//! Deterministic random streams.
//!
//! Every parallelisable loop in the crate draws from a ChaCha8 stream keyed
//! by `(seed, stream)`. Work split across any number of workers therefore
//! reproduces a serial run bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draw a fresh base seed from a caller-owned generator.
pub fn derive_seed<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    rng.next_u64()
}

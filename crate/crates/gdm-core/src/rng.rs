//! Reproducible RNG streams: a master seed plus a stream index selects a
//! ChaCha8 stream, bit-identical on every platform. Concurrent tasks must
//! each own a distinct stream index; streams are never shared.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    master: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream(index);
        RngStream { master, index, rng }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

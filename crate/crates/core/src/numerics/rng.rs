use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// Counter-based generator: ChaCha20 keyed by a 64-bit seed.
///
/// The 256-bit key holds the seed in its first eight bytes (little endian) and
/// zeros elsewhere. Each independent task draws from its own stream, selected
/// by the 64-bit ChaCha nonce, so `(seed, stream, index)` fixes every value no
/// matter which thread consumes the stream or in which order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key
    }

    pub fn stream(&self, stream: u64) -> Stream {
        let mut inner = ChaCha20Rng::from_seed(self.key());
        inner.set_stream(stream);
        Stream { inner }
    }
}

/// One ChaCha20 keystream; a value type that can be moved across threads.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha20Rng,
}

impl Stream {
    /// Builds a stream from a raw key and nonce, for checking published vectors.
    pub fn from_key(key: [u8; 32], stream: u64) -> Self {
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        Stream { inner }
    }

    /// Raw keystream bytes.
    pub fn fill_bytes(&mut self, out: &mut [u8]) {
        self.inner.fill_bytes(out);
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on [0, 1) from the top 53 bits of one word.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [−1, 1).
    pub fn uniform_symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }
}

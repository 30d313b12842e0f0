//! Deterministic counter-based random number generator with stream
//! splitting.
//!
//! Each stream is exactly SplitMix64: output `i` of a stream with key `k`
//! is `mix(k + (i+1) * GAMMA)` where `mix` is the SplitMix64 finalizer and
//! `GAMMA = 0x9E3779B97F4A7C15`. Child streams are derived by
//! `key' = mix(key ^ mix(index + GAMMA))`, so any (seed, stream path)
//! yields the same values on every platform and under any parallel
//! schedule. The generator is not cryptographically secure.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A splittable SplitMix64 stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    /// Root stream for a 64-bit seed.
    pub fn from_seed(seed: u64) -> Self {
        Self { key: mix(seed.wrapping_add(GAMMA)), counter: 0 }
    }

    /// Derives an independent child stream. Deriving the same index from
    /// the same parent always yields the same stream.
    pub fn derive(&self, index: u64) -> Self {
        Self { key: mix(self.key ^ mix(index.wrapping_add(GAMMA))), counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix(self.key.wrapping_add(GAMMA.wrapping_mul(self.counter)))
    }

    /// Uniform in `[0, 1)` with 53 significant bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller. Consumes exactly two draws.
    pub fn normal(&mut self) -> f64 {
        // (k + 0.5) * 2^-53 lies strictly inside (0, 1), keeping ln finite.
        let u1 = ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform direction on the unit sphere. Consumes exactly two draws.
    pub fn unit_sphere(&mut self) -> nalgebra::Vector3<f64> {
        let z = self.uniform(-1.0, 1.0);
        let phi = self.uniform(0.0, std::f64::consts::TAU);
        let r = (1.0 - z * z).max(0.0).sqrt();
        nalgebra::Vector3::new(r * phi.cos(), r * phi.sin(), z)
    }
}

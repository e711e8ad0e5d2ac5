/// Portable seeded generator: xorshift64* seeded through SplitMix64.
///
/// The output sequence is fixed by the constants below and does not depend
/// on platform or on any external crate version:
///
/// ```text
/// seeding   z = seed + 0x9E3779B97F4A7C15
///           z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///           z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///           state = z ^ (z >> 31)            (replaced by 0x9E3779B97F4A7C15 if 0)
/// step      x ^= x >> 12; x ^= x << 25; x ^= x >> 27
///           out = x * 0x2545F4914F6CDD1D     (all arithmetic wrapping mod 2^64)
/// unit      (out >> 11) · 2^-53  ∈ [0, 1)
/// ```
#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub(crate) fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        let state = match splitmix64(seed) {
            0 => GOLDEN,
            s => s,
        };
        Self { state }
    }

    /// Independent sub-stream `stream` of `seed`.
    pub fn derive(seed: u64, stream: u64) -> Self {
        Self::new(splitmix64(seed ^ stream.wrapping_mul(GOLDEN)))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-amplitude, amplitude)`.
    pub fn next_symmetric(&mut self, amplitude: f64) -> f64 {
        amplitude * (2.0 * self.next_unit() - 1.0)
    }
}

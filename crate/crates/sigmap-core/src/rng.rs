//! Deterministic seeded random number generation.
//!
//! The generator is xoshiro256++ seeded through SplitMix64, with Gaussian
//! sampling by the Box-Muller transform (cosine value first, cached sine
//! value second). Both algorithms are fixed and all floating-point math goes
//! through `libm`, so a given seed yields the same sample stream on every
//! platform.

use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Deterministic pseudo-random generator (xoshiro256++).
#[derive(Debug, Clone, PartialEq)]
pub struct Prng {
    state: [u64; 4],
    /// Second Box-Muller value, held for the next Gaussian request.
    spare_normal: Option<f64>,
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Prng {
    /// Seeds the generator. Identical seeds give identical streams.
    pub fn new(seed: u64) -> Self {
        let mut x = seed;
        let state = [
            splitmix64(&mut x),
            splitmix64(&mut x),
            splitmix64(&mut x),
            splitmix64(&mut x),
        ];
        Prng { state, spare_normal: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform sample in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)` without modulo bias.
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Derives an independently seeded child generator.
    ///
    /// Parallel work gives each work item its own child, keeping results
    /// reproducible regardless of scheduling.
    pub fn split(&mut self) -> Prng {
        Prng::new(self.next_u64())
    }

    /// Standard normal sample via Box-Muller. Each transform consumes two
    /// uniforms and yields two values; the sine-branch value is cached and
    /// returned by the following call.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.next_f64();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let (sin, cos) = libm::sincos(TWO_PI * u2);
        self.spare_normal = Some(radius * sin);
        radius * cos
    }

    /// Sample from `N(mean, std^2)`. A zero std returns `mean` exactly.
    pub fn gaussian(&mut self, mean: f64, std: f64) -> Result<f64> {
        if !mean.is_finite() || !std.is_finite() {
            return Err(Error::InvalidParameter("gaussian mean/std must be finite"));
        }
        if std < 0.0 {
            return Err(Error::InvalidParameter("gaussian std must be >= 0"));
        }
        if std == 0.0 {
            return Ok(mean);
        }
        Ok(mean + std * self.standard_normal())
    }
}

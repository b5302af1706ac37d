//! Orthonormal 8x8 type-II discrete cosine transform.
//!
//! Hot loops construct one [`Dct8`] and reuse it; the free functions are
//! convenience wrappers for one-off transforms.

/// Number of pixels along one side of a transform block.
pub const BLOCK: usize = 8;

/// Precomputed orthonormal DCT-II basis.
///
/// `basis[u][x] = alpha(u) * cos((2x + 1) u pi / 16)` with
/// `alpha(0) = sqrt(1/8)`, `alpha(u) = sqrt(2/8)` otherwise. The inverse is
/// the transpose.
#[derive(Debug, Clone)]
pub struct Dct8 {
    basis: [[f64; BLOCK]; BLOCK],
}

impl Dct8 {
    pub fn new() -> Self {
        let mut basis = [[0.0; BLOCK]; BLOCK];
        let n = BLOCK as f64;
        for (u, row) in basis.iter_mut().enumerate() {
            let alpha = if u == 0 {
                libm::sqrt(1.0 / n)
            } else {
                libm::sqrt(2.0 / n)
            };
            for (x, v) in row.iter_mut().enumerate() {
                *v = alpha
                    * libm::cos((2.0 * x as f64 + 1.0) * u as f64 * core::f64::consts::PI / (2.0 * n));
            }
        }
        Dct8 { basis }
    }

    /// Forward 2-D transform: `C = M B M^T`.
    pub fn forward(&self, block: &[f64; BLOCK * BLOCK]) -> [f64; BLOCK * BLOCK] {
        self.apply(block, false)
    }

    /// Inverse 2-D transform: `B = M^T C M`.
    pub fn inverse(&self, coeffs: &[f64; BLOCK * BLOCK]) -> [f64; BLOCK * BLOCK] {
        self.apply(coeffs, true)
    }

    fn apply(&self, input: &[f64; BLOCK * BLOCK], transpose: bool) -> [f64; BLOCK * BLOCK] {
        // rows pass
        let mut tmp = [0.0; BLOCK * BLOCK];
        for y in 0..BLOCK {
            for u in 0..BLOCK {
                let mut acc = 0.0;
                for x in 0..BLOCK {
                    let m = if transpose { self.basis[x][u] } else { self.basis[u][x] };
                    acc += m * input[y * BLOCK + x];
                }
                tmp[y * BLOCK + u] = acc;
            }
        }
        // columns pass
        let mut out = [0.0; BLOCK * BLOCK];
        for v in 0..BLOCK {
            for u in 0..BLOCK {
                let mut acc = 0.0;
                for y in 0..BLOCK {
                    let m = if transpose { self.basis[y][v] } else { self.basis[v][y] };
                    acc += m * tmp[y * BLOCK + u];
                }
                out[v * BLOCK + u] = acc;
            }
        }
        out
    }
}

impl Default for Dct8 {
    fn default() -> Self {
        Self::new()
    }
}

/// One-off forward transform of an 8x8 block.
pub fn dct2_forward(block: &[f64; BLOCK * BLOCK]) -> [f64; BLOCK * BLOCK] {
    Dct8::new().forward(block)
}

/// One-off inverse transform of an 8x8 block.
pub fn dct2_inverse(coeffs: &[f64; BLOCK * BLOCK]) -> [f64; BLOCK * BLOCK] {
    Dct8::new().inverse(coeffs)
}

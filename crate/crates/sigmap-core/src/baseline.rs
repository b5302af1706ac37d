//! Classical local-DCT sigma-map estimation.
//!
//! Per 8x8 block, sigma is estimated as `1.4826 * median(|c|)` over the
//! high-frequency DCT coefficients (index sum >= 8); the per-pixel map
//! averages the estimates of every block covering the pixel. On noise-free
//! textured content the high frequencies carry signal, so the estimate is
//! strongly biased upward there; that failure mode is exactly why learned
//! estimators exist, and the tests document it.

use alloc::vec;
use alloc::vec::Vec;

use crate::dct::{Dct8, BLOCK};
use crate::raster::{Raster, SigmaMap};
use crate::{Error, Result};

/// MAD-to-sigma consistency factor for Gaussian data.
pub const MAD_FACTOR: f64 = 1.4826;

/// Block layout of the local estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct DctBlockSpec {
    /// Stride between block origins (<= 8).
    pub step: usize,
}

impl Default for DctBlockSpec {
    fn default() -> Self {
        DctBlockSpec { step: 4 }
    }
}

impl DctBlockSpec {
    fn validate(&self) -> Result<()> {
        if self.step == 0 || self.step > BLOCK {
            return Err(Error::InvalidParameter("block step must be in 1..=8"));
        }
        Ok(())
    }
}

/// Median of a scratch buffer (even counts average the middle pair).
pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Block origins covering 0..=limit with the given step, always including
/// the flush-right position so every pixel is covered.
fn block_origins(extent: usize, step: usize) -> Vec<usize> {
    let limit = extent - BLOCK;
    let mut origins: Vec<usize> = (0..=limit).step_by(step).collect();
    if *origins.last().unwrap() != limit {
        origins.push(limit);
    }
    origins
}

fn estimate_plane(plane: &Raster, spec: &DctBlockSpec) -> Result<SigmaMap> {
    let (w, h) = (plane.width(), plane.height());
    let dct = Dct8::new();
    let mut acc = vec![0.0f64; w * h];
    let mut weight = vec![0.0f64; w * h];
    let mut coeffs = Vec::with_capacity(64);
    for &y0 in block_origins(h, spec.step).iter() {
        for &x0 in block_origins(w, spec.step).iter() {
            let mut block = [0.0; BLOCK * BLOCK];
            for by in 0..BLOCK {
                for bx in 0..BLOCK {
                    block[by * BLOCK + bx] = plane.get(x0 + bx, y0 + by, 0);
                }
            }
            let c = dct.forward(&block);
            coeffs.clear();
            for u in 0..BLOCK {
                for v in 0..BLOCK {
                    if u + v >= BLOCK {
                        coeffs.push(libm::fabs(c[u * BLOCK + v]));
                    }
                }
            }
            let sigma = MAD_FACTOR * median_in_place(&mut coeffs);
            for by in 0..BLOCK {
                for bx in 0..BLOCK {
                    let idx = (y0 + by) * w + x0 + bx;
                    acc[idx] += sigma;
                    weight[idx] += 1.0;
                }
            }
        }
    }
    let data = acc
        .iter()
        .zip(weight.iter())
        .map(|(a, w)| a / w)
        .collect();
    SigmaMap::from_vec(w, h, data)
}

/// Robust local-DCT sigma-map estimate. Color input is estimated per
/// channel and the three maps averaged.
pub fn local_dct_estimate(image: &Raster, spec: &DctBlockSpec) -> Result<SigmaMap> {
    spec.validate()?;
    if image.width() < BLOCK || image.height() < BLOCK {
        return Err(Error::DegenerateInput("image smaller than one 8x8 block"));
    }
    if image.channels() == 1 {
        return estimate_plane(image, spec);
    }
    let mut sum: Option<Vec<f64>> = None;
    for c in 0..image.channels() {
        let m = estimate_plane(&image.channel(c)?, spec)?;
        match &mut sum {
            None => sum = Some(m.data().to_vec()),
            Some(acc) => {
                for (a, v) in acc.iter_mut().zip(m.data()) {
                    *a += v;
                }
            }
        }
    }
    let n = image.channels() as f64;
    let data = sum.unwrap().into_iter().map(|v| v / n).collect();
    SigmaMap::from_vec(image.width(), image.height(), data)
}

/// Collapses a sigma-map to a single AWGN standard deviation: the median of
/// all map values.
pub fn global_std_from_map(map: &SigmaMap) -> f64 {
    let mut values = map.data().to_vec();
    median_in_place(&mut values)
}

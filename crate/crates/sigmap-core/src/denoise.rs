//! Sliding 8x8 DCT hard-threshold denoiser driven by a sigma-map.
//!
//! Each block position is transformed, non-DC coefficients below
//! `threshold_factor * sigma_local` are zeroed (sigma_local is the mean of
//! the map over the block), and the overlapping reconstructions are averaged
//! with weight `1 / (1 + number of retained non-DC coefficients)` so sparser
//! blocks dominate.

use alloc::vec;

use crate::dct::{Dct8, BLOCK};
use crate::raster::{Raster, SigmaMap};
use crate::{Error, Result};

/// Denoiser parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseSpec {
    /// Stride between block origins; 1 is full sliding, 4 the fast mode.
    pub step: usize,
    /// Hard threshold in units of the local sigma.
    pub threshold_factor: f64,
}

impl Default for DenoiseSpec {
    fn default() -> Self {
        DenoiseSpec { step: 1, threshold_factor: 2.7 }
    }
}

fn block_origins(extent: usize, step: usize) -> alloc::vec::Vec<usize> {
    let limit = extent - BLOCK;
    let mut origins: alloc::vec::Vec<usize> = (0..=limit).step_by(step).collect();
    if *origins.last().unwrap() != limit {
        origins.push(limit);
    }
    origins
}

fn denoise_plane(noisy: &Raster, ch: usize, map: &SigmaMap, spec: &DenoiseSpec, dct: &Dct8) -> alloc::vec::Vec<f64> {
    let (w, h) = (noisy.width(), noisy.height());
    let mut acc = vec![0.0f64; w * h];
    let mut weight = vec![0.0f64; w * h];
    for &y0 in block_origins(h, spec.step).iter() {
        for &x0 in block_origins(w, spec.step).iter() {
            let mut block = [0.0; BLOCK * BLOCK];
            let mut sigma_local = 0.0;
            for by in 0..BLOCK {
                for bx in 0..BLOCK {
                    block[by * BLOCK + bx] = noisy.get(x0 + bx, y0 + by, ch);
                    sigma_local += map.get(x0 + bx, y0 + by);
                }
            }
            sigma_local /= (BLOCK * BLOCK) as f64;
            let threshold = spec.threshold_factor * sigma_local;
            let mut coeffs = dct.forward(&block);
            let mut retained = 0usize;
            for c in coeffs.iter_mut().skip(1) {
                if libm::fabs(*c) < threshold {
                    *c = 0.0;
                } else {
                    retained += 1;
                }
            }
            let rec = dct.inverse(&coeffs);
            let wgt = 1.0 / (1.0 + retained as f64);
            for by in 0..BLOCK {
                for bx in 0..BLOCK {
                    let idx = (y0 + by) * w + x0 + bx;
                    acc[idx] += wgt * rec[by * BLOCK + bx];
                    weight[idx] += wgt;
                }
            }
        }
    }
    acc.iter().zip(weight.iter()).map(|(a, w)| a / w).collect()
}

/// Denoises an image using its sigma-map; color channels are processed
/// independently with the shared map.
pub fn denoise(noisy: &Raster, map: &SigmaMap, spec: &DenoiseSpec) -> Result<Raster> {
    if noisy.width() != map.width() || noisy.height() != map.height() {
        return Err(Error::DimensionMismatch {
            expected: (noisy.width(), noisy.height()),
            got: (map.width(), map.height()),
        });
    }
    if noisy.width() < BLOCK || noisy.height() < BLOCK {
        return Err(Error::DegenerateInput("image smaller than one 8x8 block"));
    }
    if spec.step == 0 || !(spec.threshold_factor > 0.0) {
        return Err(Error::InvalidParameter("step must be >= 1 and threshold_factor > 0"));
    }
    let mut out = noisy.clone();
    let dct = Dct8::new();
    for ch in 0..noisy.channels() {
        let plane = denoise_plane(noisy, ch, map, spec, &dct);
        for y in 0..noisy.height() {
            for x in 0..noisy.width() {
                out.set(x, y, ch, plane[y * noisy.width() + x]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::psnr;
    use crate::noise::{apply_noise, generate_test_map, scale_map_to_target, NoiseSpec, TestMapModel};
    use crate::rng::Prng;

    fn smooth_test_image(size: usize) -> Raster {
        let mut img = Raster::filled(size, size, 1, 0.0).unwrap();
        for y in 0..size {
            for x in 0..size {
                let v = 128.0
                    + 80.0 * libm::sin(x as f64 * 0.07)
                    + 40.0 * libm::cos(y as f64 * 0.05);
                img.set(x, y, 0, v.clamp(0.0, 255.0));
            }
        }
        img
    }

    #[test]
    fn zero_map_is_identity() {
        let mut rng = Prng::new(13);
        let data: Vec<f64> = (0..32 * 32).map(|_| rng.next_f64() * 255.0).collect();
        let img = Raster::from_vec(32, 32, 1, data).unwrap();
        let map = SigmaMap::filled(32, 32, 0.0).unwrap();
        let out = denoise(&img, &map, &DenoiseSpec::default()).unwrap();
        for (a, b) in img.data().iter().zip(out.data()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_awgn_gains_at_least_10_db() {
        let clean = Raster::filled(256, 256, 1, 128.0).unwrap();
        let map = SigmaMap::filled(256, 256, 20.0).unwrap();
        let noisy = apply_noise(&clean, &map, &NoiseSpec::default(), &mut Prng::new(44)).unwrap();
        let out = denoise(&noisy, &map, &DenoiseSpec::default()).unwrap();
        let before = psnr(&clean, &noisy).unwrap();
        let after = psnr(&clean, &out).unwrap();
        assert!(after - before >= 10.0, "gain {:.2} dB", after - before);
    }

    #[test]
    fn nonstationary_noise_gains_at_least_2_db() {
        let clean = smooth_test_image(128);
        let model = TestMapModel::GaussianPeak { center: (0.5, 0.5), rel_width: 0.3 };
        let shape = generate_test_map(&model, 128, 128).unwrap();
        let map = scale_map_to_target(&shape, 20.0).unwrap();
        let noisy = apply_noise(&clean, &map, &NoiseSpec::default(), &mut Prng::new(45)).unwrap();
        let out = denoise(&noisy, &map, &DenoiseSpec::default()).unwrap();
        let before = psnr(&clean, &noisy).unwrap();
        let after = psnr(&clean, &out).unwrap();
        assert!(after - before >= 2.0, "gain {:.2} dB", after - before);
    }

    #[test]
    fn true_map_beats_overestimated_map() {
        let clean = smooth_test_image(128);
        let map = SigmaMap::filled(128, 128, 15.0).unwrap();
        let noisy = apply_noise(&clean, &map, &NoiseSpec::default(), &mut Prng::new(46)).unwrap();
        let with_true = denoise(&noisy, &map, &DenoiseSpec::default()).unwrap();
        let doubled = SigmaMap::filled(128, 128, 30.0).unwrap();
        let with_over = denoise(&noisy, &doubled, &DenoiseSpec::default()).unwrap();
        let p_true = psnr(&clean, &with_true).unwrap();
        let p_over = psnr(&clean, &with_over).unwrap();
        assert!(p_true >= p_over, "true {p_true:.2} vs 2x-over {p_over:.2}");
    }

    #[test]
    fn dimension_and_parameter_checks() {
        let img = Raster::filled(32, 32, 1, 0.0).unwrap();
        let map = SigmaMap::filled(16, 32, 1.0).unwrap();
        assert!(denoise(&img, &map, &DenoiseSpec::default()).is_err());
        let map = SigmaMap::filled(32, 32, 1.0).unwrap();
        assert!(denoise(&img, &map, &DenoiseSpec { step: 0, threshold_factor: 2.7 }).is_err());
        assert!(denoise(&img, &map, &DenoiseSpec { step: 1, threshold_factor: 0.0 }).is_err());
    }

    #[test]
    fn fast_mode_still_gains() {
        let clean = Raster::filled(128, 128, 1, 128.0).unwrap();
        let map = SigmaMap::filled(128, 128, 20.0).unwrap();
        let noisy = apply_noise(&clean, &map, &NoiseSpec::default(), &mut Prng::new(47)).unwrap();
        let spec = DenoiseSpec { step: 4, ..DenoiseSpec::default() };
        let out = denoise(&noisy, &map, &spec).unwrap();
        assert!(psnr(&clean, &out).unwrap() > psnr(&clean, &noisy).unwrap() + 5.0);
    }
}

//! The non-stationary Gaussian noise model.
//!
//! A noisy pixel is an independent draw `y ~ N(x, sigma^2)` with a per-pixel
//! sigma taken from a sigma-map. Training maps are brightness-modulated:
//! `sigma_ij = (sigma_av^2 * B_ij / mean(B))^0.5`, with the mean variance
//! `sigma_av^2 = |N(0, R^2)|` drawn half-normal (R = 40 by default) so that
//! small noise levels dominate. A constant map reproduces i.i.d. AWGN.

use alloc::vec::Vec;

use crate::raster::{Raster, SigmaMap};
use crate::rng::Prng;
use crate::{Error, Result};

/// Parameters of the noise synthesis pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Half-normal scale of the mean-variance draw.
    pub r: f64,
    /// Clamp noisy pixels to [0, 255] after sampling.
    pub clip: bool,
    /// Drive all three color channels with the same map (independent draws
    /// per channel).
    pub color_shared_map: bool,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { r: 40.0, clip: false, color_shared_map: true }
    }
}

/// Draws a mean variance `sigma_av^2 = |N(0, R^2)|`.
///
/// Over many draws the mean is `R * sqrt(2/pi)` and the median `R * 0.6745`.
pub fn sample_mean_variance(rng: &mut Prng, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter("half-normal scale R must be positive and finite"));
    }
    Ok(libm::fabs(r * rng.standard_normal()))
}

/// Builds a brightness-modulated sigma-map with the given mean variance.
///
/// The returned map satisfies `mean(sigma^2) == sigma_av_sq` exactly up to
/// rounding, for any brightness plane.
pub fn sigma_map_from_brightness(brightness: &SigmaMap, sigma_av_sq: f64) -> Result<SigmaMap> {
    if sigma_av_sq < 0.0 || !sigma_av_sq.is_finite() {
        return Err(Error::InvalidParameter("sigma_av_sq must be >= 0 and finite"));
    }
    let b_mean = brightness.mean();
    if b_mean <= 0.0 {
        return Err(Error::DegenerateInput("all-zero brightness plane"));
    }
    let data: Vec<f64> = brightness
        .data()
        .iter()
        .map(|&b| libm::sqrt(sigma_av_sq * b / b_mean))
        .collect();
    SigmaMap::from_vec(brightness.width(), brightness.height(), data)
}

/// Adds per-pixel Gaussian noise driven by a sigma-map.
///
/// Color rasters share the map across channels with independent draws per
/// channel. With `spec.clip` set, outputs are clamped to [0, 255].
pub fn apply_noise(clean: &Raster, map: &SigmaMap, spec: &NoiseSpec, rng: &mut Prng) -> Result<Raster> {
    if clean.width() != map.width() || clean.height() != map.height() {
        return Err(Error::DimensionMismatch {
            expected: (clean.width(), clean.height()),
            got: (map.width(), map.height()),
        });
    }
    let channels = clean.channels();
    let mut noisy = clean.clone();
    for y in 0..clean.height() {
        for x in 0..clean.width() {
            let sigma = map.get(x, y);
            for c in 0..channels {
                let mut v = rng.gaussian(clean.get(x, y, c), sigma)?;
                if spec.clip {
                    v = v.clamp(0.0, 255.0);
                }
                noisy.set(x, y, c, v);
            }
        }
    }
    Ok(noisy)
}

/// Parametric non-stationary test-map shapes.
///
/// Generated maps are smooth, strictly positive (floored at 5% of the peak)
/// and meant to be rescaled to a target mean variance with
/// [`scale_map_to_target`]. Coordinates are relative: (0, 0) is the top-left
/// corner, (1, 1) the bottom-right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestMapModel {
    /// An isotropic Gaussian bump of the given relative center and width.
    GaussianPeak { center: (f64, f64), rel_width: f64 },
    /// A planar ramp along the given direction (relative slope per unit).
    LinearRamp { slope: (f64, f64) },
    /// A raised sinusoid: `offset + amp * sin(2 pi (fx x + fy y) + phase)`,
    /// with offset >= amp so the map never touches zero.
    Sinusoidal { freq: (f64, f64), phase: f64 },
}

impl TestMapModel {
    /// Stable identifier used in file names and CSV reports.
    pub fn id(&self) -> &'static str {
        match self {
            TestMapModel::GaussianPeak { .. } => "gaussian_peak",
            TestMapModel::LinearRamp { .. } => "linear_ramp",
            TestMapModel::Sinusoidal { .. } => "sinusoidal",
        }
    }

    /// Default parameterization for each shape id.
    pub fn from_id(id: &str) -> Option<TestMapModel> {
        match id {
            "gaussian_peak" => Some(TestMapModel::GaussianPeak {
                center: (0.5, 0.5),
                rel_width: 0.25,
            }),
            "linear_ramp" => Some(TestMapModel::LinearRamp { slope: (1.0, 0.5) }),
            "sinusoidal" => Some(TestMapModel::Sinusoidal {
                freq: (1.5, 1.0),
                phase: 0.0,
            }),
            _ => None,
        }
    }
}

/// Generates a smooth strictly-positive sigma-map of the requested shape
/// (unit peak; rescale afterwards).
pub fn generate_test_map(model: &TestMapModel, width: usize, height: usize) -> Result<SigmaMap> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("test map dimensions must be positive"));
    }
    let mut data = Vec::with_capacity(width * height);
    let floor = 0.05;
    for y in 0..height {
        for x in 0..width {
            let u = if width > 1 { x as f64 / (width - 1) as f64 } else { 0.5 };
            let v = if height > 1 { y as f64 / (height - 1) as f64 } else { 0.5 };
            let raw = match *model {
                TestMapModel::GaussianPeak { center, rel_width } => {
                    let dx = u - center.0;
                    let dy = v - center.1;
                    libm::exp(-(dx * dx + dy * dy) / (2.0 * rel_width * rel_width))
                }
                TestMapModel::LinearRamp { slope } => {
                    let norm = libm::fabs(slope.0) + libm::fabs(slope.1);
                    if norm == 0.0 {
                        1.0
                    } else {
                        (slope.0 * u + slope.1 * v - (slope.0.min(0.0) + slope.1.min(0.0))) / norm
                    }
                }
                TestMapModel::Sinusoidal { freq, phase } => {
                    let s = libm::sin(2.0 * core::f64::consts::PI * (freq.0 * u + freq.1 * v) + phase);
                    0.5 + 0.45 * s
                }
            };
            data.push(raw.max(floor));
        }
    }
    SigmaMap::from_vec(width, height, data)
}

/// Rescales a map by the scalar that makes `mean(sigma^2)` equal the square
/// of the target sigma_av.
pub fn scale_map_to_target(map: &SigmaMap, sigma_av_target: f64) -> Result<SigmaMap> {
    if sigma_av_target < 0.0 || !sigma_av_target.is_finite() {
        return Err(Error::InvalidParameter("target sigma_av must be >= 0 and finite"));
    }
    let ms = map.mean_square();
    if ms == 0.0 {
        return Err(Error::DegenerateInput("cannot rescale an all-zero map"));
    }
    let c = sigma_av_target / libm::sqrt(ms);
    let data = map.data().iter().map(|&v| c * v).collect();
    SigmaMap::from_vec(map.width(), map.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_normal_rejects_bad_scale() {
        let mut rng = Prng::new(1);
        assert!(sample_mean_variance(&mut rng, 0.0).is_err());
        assert!(sample_mean_variance(&mut rng, -4.0).is_err());
        assert!(sample_mean_variance(&mut rng, f64::NAN).is_err());
    }

    #[test]
    fn half_normal_mean_and_median() {
        // Closed forms: mean R*sqrt(2/pi) ~ 31.915, median R*0.6745 ~ 26.98
        // for R = 40.
        let mut rng = Prng::new(99);
        let n = 1_000_000usize;
        let mut samples: Vec<f64> = (0..n)
            .map(|_| sample_mean_variance(&mut rng, 40.0).unwrap())
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        assert!(mean > 31.6 && mean < 32.2, "mean {mean}");
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = samples[n / 2];
        let expected = 40.0 * 0.674_489_75;
        assert!(
            (median - expected).abs() / expected < 0.01,
            "median {median} vs {expected}"
        );
    }

    #[test]
    fn tiny_scale_gives_tiny_samples() {
        let mut rng = Prng::new(5);
        for _ in 0..1000 {
            assert!(sample_mean_variance(&mut rng, 1e-12).unwrap() < 1e-10);
        }
    }

    #[test]
    fn brightness_map_constant_case() {
        let b = SigmaMap::filled(8, 8, 100.0).unwrap();
        let m = sigma_map_from_brightness(&b, 100.0).unwrap();
        for &v in m.data() {
            assert!((v - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn brightness_map_double_brightness_pixel() {
        // Pixel at twice the mean brightness gets sigma = sqrt(200).
        let mut b = SigmaMap::filled(2, 1, 1.0).unwrap();
        b.set(0, 0, 2.0 / 3.0);
        b.set(1, 0, 4.0 / 3.0); // mean = 1, so this pixel is 4/3 of mean
        let mut b2 = SigmaMap::filled(3, 1, 0.0).unwrap();
        b2.set(0, 0, 0.5);
        b2.set(1, 0, 0.5);
        b2.set(2, 0, 2.0); // mean = 1, pixel 2 is 2x mean
        let m = sigma_map_from_brightness(&b2, 100.0).unwrap();
        assert!((m.get(2, 0) - libm::sqrt(200.0)).abs() < 1e-9);
        assert!((m.get(2, 0) - 14.1421).abs() < 1e-3);
    }

    #[test]
    fn brightness_map_mean_square_identity() {
        let mut rng = Prng::new(11);
        for _ in 0..100 {
            let data: Vec<f64> = (0..64 * 64).map(|_| rng.next_f64() * 255.0).collect();
            let b = SigmaMap::from_vec(64, 64, data).unwrap();
            let sav2 = 10.0 + rng.next_f64() * 90.0;
            let m = sigma_map_from_brightness(&b, sav2).unwrap();
            assert!((m.mean_square() - sav2).abs() / sav2 < 1e-12);
        }
    }

    #[test]
    fn brightness_map_rejects_zero_plane() {
        let b = SigmaMap::filled(4, 4, 0.0).unwrap();
        assert!(matches!(
            sigma_map_from_brightness(&b, 10.0),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn zero_map_noise_is_identity() {
        let clean = Raster::filled(16, 16, 1, 77.0).unwrap();
        let map = SigmaMap::filled(16, 16, 0.0).unwrap();
        let mut rng = Prng::new(1);
        let noisy = apply_noise(&clean, &map, &NoiseSpec::default(), &mut rng).unwrap();
        assert_eq!(noisy, clean);
    }

    #[test]
    fn noise_dimension_mismatch() {
        let clean = Raster::filled(8, 8, 1, 0.0).unwrap();
        let map = SigmaMap::filled(4, 8, 1.0).unwrap();
        let mut rng = Prng::new(1);
        assert!(apply_noise(&clean, &map, &NoiseSpec::default(), &mut rng).is_err());
    }

    #[test]
    fn noise_empirical_std_on_flat_image() {
        let clean = Raster::filled(256, 256, 1, 128.0).unwrap();
        let map = SigmaMap::filled(256, 256, 20.0).unwrap();
        let mut rng = Prng::new(7);
        let spec = NoiseSpec { clip: false, ..NoiseSpec::default() };
        let noisy = apply_noise(&clean, &map, &spec, &mut rng).unwrap();
        let n = noisy.data().len() as f64;
        let mean = noisy.data().iter().sum::<f64>() / n;
        let var = noisy.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        assert!(std > 19.8 && std < 20.2, "std {std}");
    }

    #[test]
    fn clipping_bounds_and_reduces_dispersion() {
        let clean = Raster::filled(128, 128, 1, 250.0).unwrap();
        let map = SigmaMap::filled(128, 128, 30.0).unwrap();
        let spec = NoiseSpec { clip: true, ..NoiseSpec::default() };
        let mut rng = Prng::new(3);
        let noisy = apply_noise(&clean, &map, &spec, &mut rng).unwrap();
        let n = noisy.data().len() as f64;
        let mean = noisy.data().iter().sum::<f64>() / n;
        let var = noisy.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(noisy.data().iter().all(|&v| (0.0..=255.0).contains(&v)));
        assert!(var.sqrt() < 30.0, "clipped std {}", var.sqrt());
    }

    #[test]
    fn clipping_is_seedwise_monotone() {
        // Same seed, clip on vs off: clipped per-pixel deviations never
        // exceed the non-clipped ones in magnitude.
        let clean = Raster::filled(64, 64, 1, 240.0).unwrap();
        let map = SigmaMap::filled(64, 64, 40.0).unwrap();
        let free = apply_noise(&clean, &map, &NoiseSpec { clip: false, ..NoiseSpec::default() }, &mut Prng::new(9)).unwrap();
        let clip = apply_noise(&clean, &map, &NoiseSpec { clip: true, ..NoiseSpec::default() }, &mut Prng::new(9)).unwrap();
        for (f, c) in free.data().iter().zip(clip.data()) {
            assert!((c - 240.0).abs() <= (f - 240.0).abs() + 1e-12);
        }
    }

    #[test]
    fn color_shared_map_draws_independently_per_channel() {
        let clean = Raster::filled(32, 32, 3, 128.0).unwrap();
        let map = SigmaMap::filled(32, 32, 25.0).unwrap();
        let mut rng = Prng::new(4);
        let noisy = apply_noise(&clean, &map, &NoiseSpec::default(), &mut rng).unwrap();
        let r = noisy.channel(0).unwrap();
        let g = noisy.channel(1).unwrap();
        assert_ne!(r.data(), g.data());
    }

    #[test]
    fn test_map_shapes() {
        let ramp = TestMapModel::LinearRamp { slope: (0.0, 0.0) };
        let m = generate_test_map(&ramp, 16, 16).unwrap();
        assert!(m.data().iter().all(|&v| v == m.get(0, 0)));

        let peak = TestMapModel::GaussianPeak { center: (0.5, 0.5), rel_width: 0.2 };
        let m = generate_test_map(&peak, 33, 33).unwrap();
        let max = m.data().iter().cloned().fold(0.0, f64::max);
        assert_eq!(m.get(16, 16), max);

        let sine = TestMapModel::Sinusoidal { freq: (2.0, 1.0), phase: 0.3 };
        let m = generate_test_map(&sine, 64, 64).unwrap();
        assert!(m.data().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn scale_map_reaches_target() {
        let m = SigmaMap::filled(8, 8, 5.0).unwrap();
        let s = scale_map_to_target(&m, 10.0).unwrap();
        assert!(s.data().iter().all(|&v| (v - 10.0).abs() < 1e-12));

        let m = SigmaMap::from_vec(2, 1, alloc::vec![3.0, 4.0]).unwrap();
        let s = scale_map_to_target(&m, 5.0).unwrap();
        let c = libm::sqrt(2.0);
        assert!((s.get(0, 0) - 3.0 * c).abs() < 1e-12);
        assert!((s.get(1, 0) - 4.0 * c).abs() < 1e-12);
        assert!((s.mean_square() - 25.0).abs() < 1e-12);

        let zero = SigmaMap::filled(4, 4, 0.0).unwrap();
        assert!(scale_map_to_target(&zero, 10.0).is_err());
    }
}

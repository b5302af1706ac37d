//! Estimation and denoising quality metrics: relative sigma-map error,
//! relative AWGN STD error, PSNR and SSIM.

use alloc::vec::Vec;

use crate::raster::{Raster, SigmaMap};
use crate::{Error, Result};

/// How the per-image map errors are aggregated over a test set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapErrorMode {
    /// Mean over images of the per-image ratio `||M_e - M_t|| / ||M_t||`.
    #[default]
    MeanOfRatios,
    /// Single ratio of concatenated norms, divided by the image count.
    ConcatenatedNorm,
}

fn frobenius(data: &[f64]) -> f64 {
    libm::sqrt(data.iter().map(|v| v * v).sum())
}

fn diff_norm(a: &SigmaMap, b: &SigmaMap) -> f64 {
    libm::sqrt(
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| (x - y) * (x - y))
            .sum(),
    )
}

/// Relative sigma-map estimation error over a set of (estimate, truth)
/// pairs. Norms are Frobenius.
pub fn relative_map_error(
    estimates: &[SigmaMap],
    truths: &[SigmaMap],
    mode: MapErrorMode,
) -> Result<f64> {
    if estimates.len() != truths.len() || estimates.is_empty() {
        return Err(Error::DegenerateInput("estimate/truth lists must be equal-length and non-empty"));
    }
    for (e, t) in estimates.iter().zip(truths) {
        if e.width() != t.width() || e.height() != t.height() {
            return Err(Error::DimensionMismatch {
                expected: (t.width(), t.height()),
                got: (e.width(), e.height()),
            });
        }
    }
    let n = estimates.len() as f64;
    match mode {
        MapErrorMode::MeanOfRatios => {
            let mut acc = 0.0;
            for (e, t) in estimates.iter().zip(truths) {
                let tn = frobenius(t.data());
                if tn == 0.0 {
                    return Err(Error::DegenerateInput("zero-norm ground-truth map"));
                }
                acc += diff_norm(e, t) / tn;
            }
            Ok(acc / n)
        }
        MapErrorMode::ConcatenatedNorm => {
            let mut num = 0.0;
            let mut den = 0.0;
            for (e, t) in estimates.iter().zip(truths) {
                let d = diff_norm(e, t);
                num += d * d;
                let tn = frobenius(t.data());
                den += tn * tn;
            }
            if den == 0.0 {
                return Err(Error::DegenerateInput("zero-norm ground-truth maps"));
            }
            Ok(libm::sqrt(num) / (n * libm::sqrt(den)))
        }
    }
}

/// Relative AWGN STD estimation error: Euclidean norm of the deviation
/// vector divided by `n * sigma_true`.
pub fn relative_std_error(estimates: &[f64], sigma_true: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::DegenerateInput("no STD estimates"));
    }
    if !(sigma_true > 0.0) || !sigma_true.is_finite() {
        return Err(Error::InvalidParameter("sigma_true must be positive and finite"));
    }
    let norm = libm::sqrt(
        estimates
            .iter()
            .map(|e| (e - sigma_true) * (e - sigma_true))
            .sum(),
    );
    Ok(norm / (estimates.len() as f64 * sigma_true))
}

/// PSNR in dB against a 255 peak; identical images report `f64::INFINITY`.
pub fn psnr(reference: &Raster, test: &Raster) -> Result<f64> {
    if reference.width() != test.width()
        || reference.height() != test.height()
        || reference.channels() != test.channels()
    {
        return Err(Error::DimensionMismatch {
            expected: (reference.width(), reference.height()),
            got: (test.width(), test.height()),
        });
    }
    let n = reference.data().len() as f64;
    let mse: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * libm::log10(255.0 * 255.0 / mse))
}

/// True iff the relative map error is below the 0.1 usability threshold
/// (strict: exactly 0.1 fails).
pub fn check_threshold(eps_m: f64) -> bool {
    eps_m < 0.1
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const SSIM_L: f64 = 255.0;

fn gaussian_window() -> [f64; SSIM_WINDOW * SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW * SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    let mut sum = 0.0;
    for y in 0..SSIM_WINDOW {
        for x in 0..SSIM_WINDOW {
            let dx = x as f64 - c;
            let dy = y as f64 - c;
            let v = libm::exp(-(dx * dx + dy * dy) / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
            w[y * SSIM_WINDOW + x] = v;
            sum += v;
        }
    }
    for v in w.iter_mut() {
        *v /= sum;
    }
    w
}

fn ssim_plane(a: &Raster, b: &Raster, ch: usize) -> f64 {
    let window = gaussian_window();
    let (w, h) = (a.width(), a.height());
    let c1 = (SSIM_K1 * SSIM_L) * (SSIM_K1 * SSIM_L);
    let c2 = (SSIM_K2 * SSIM_L) * (SSIM_K2 * SSIM_L);
    let mut acc = 0.0;
    let mut count = 0usize;
    for y0 in 0..=h - SSIM_WINDOW {
        for x0 in 0..=w - SSIM_WINDOW {
            let mut mu_a = 0.0;
            let mut mu_b = 0.0;
            for wy in 0..SSIM_WINDOW {
                for wx in 0..SSIM_WINDOW {
                    let g = window[wy * SSIM_WINDOW + wx];
                    mu_a += g * a.get(x0 + wx, y0 + wy, ch);
                    mu_b += g * b.get(x0 + wx, y0 + wy, ch);
                }
            }
            let mut var_a = 0.0;
            let mut var_b = 0.0;
            let mut cov = 0.0;
            for wy in 0..SSIM_WINDOW {
                for wx in 0..SSIM_WINDOW {
                    let g = window[wy * SSIM_WINDOW + wx];
                    let da = a.get(x0 + wx, y0 + wy, ch) - mu_a;
                    let db = b.get(x0 + wx, y0 + wy, ch) - mu_b;
                    var_a += g * da * da;
                    var_b += g * db * db;
                    cov += g * da * db;
                }
            }
            let num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            let den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            acc += num / den;
            count += 1;
        }
    }
    acc / count as f64
}

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, L = 255, averaged over fully-contained window positions.
/// Color images average the per-channel SSIM values.
pub fn ssim(reference: &Raster, test: &Raster) -> Result<f64> {
    if reference.width() != test.width()
        || reference.height() != test.height()
        || reference.channels() != test.channels()
    {
        return Err(Error::DimensionMismatch {
            expected: (reference.width(), reference.height()),
            got: (test.width(), test.height()),
        });
    }
    if reference.width() < SSIM_WINDOW || reference.height() < SSIM_WINDOW {
        return Err(Error::DegenerateInput("image smaller than the SSIM window"));
    }
    let values: Vec<f64> = (0..reference.channels())
        .map(|c| ssim_plane(reference, test, c))
        .collect();
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{apply_noise, NoiseSpec};
    use crate::rng::Prng;
    use alloc::vec;

    #[test]
    fn map_error_oracles() {
        let t = SigmaMap::filled(4, 4, 3.0).unwrap();
        assert_eq!(
            relative_map_error(&[t.clone()], &[t.clone()], MapErrorMode::MeanOfRatios).unwrap(),
            0.0
        );

        // M_e = 2 M_t  =>  eps_m = 1.
        let e = SigmaMap::filled(4, 4, 6.0).unwrap();
        let eps = relative_map_error(&[e], &[t.clone()], MapErrorMode::MeanOfRatios).unwrap();
        assert!((eps - 1.0).abs() < 1e-12);

        // Per-pair ratios 0.2 and 0.4 average to 0.3.
        let t1 = SigmaMap::filled(2, 2, 10.0).unwrap();
        let e1 = SigmaMap::filled(2, 2, 12.0).unwrap();
        let t2 = SigmaMap::filled(2, 2, 10.0).unwrap();
        let e2 = SigmaMap::filled(2, 2, 14.0).unwrap();
        let eps =
            relative_map_error(&[e1, e2], &[t1, t2], MapErrorMode::MeanOfRatios).unwrap();
        assert!((eps - 0.3).abs() < 1e-12);
    }

    #[test]
    fn map_error_rejects_bad_input() {
        let t = SigmaMap::filled(4, 4, 1.0).unwrap();
        let e = SigmaMap::filled(4, 5, 1.0).unwrap();
        assert!(relative_map_error(&[e], &[t.clone()], MapErrorMode::MeanOfRatios).is_err());
        let z = SigmaMap::filled(4, 4, 0.0).unwrap();
        assert!(relative_map_error(&[t.clone()], &[z], MapErrorMode::MeanOfRatios).is_err());
        assert!(relative_map_error(&[], &[], MapErrorMode::MeanOfRatios).is_err());
    }

    #[test]
    fn map_error_scale_invariant() {
        let mut rng = Prng::new(6);
        let t: Vec<f64> = (0..64).map(|_| 1.0 + rng.next_f64() * 20.0).collect();
        let e: Vec<f64> = (0..64).map(|_| 1.0 + rng.next_f64() * 20.0).collect();
        for mode in [MapErrorMode::MeanOfRatios, MapErrorMode::ConcatenatedNorm] {
            let base = relative_map_error(
                &[SigmaMap::from_vec(8, 8, e.clone()).unwrap()],
                &[SigmaMap::from_vec(8, 8, t.clone()).unwrap()],
                mode,
            )
            .unwrap();
            let scaled = relative_map_error(
                &[SigmaMap::from_vec(8, 8, e.iter().map(|v| v * 3.5).collect()).unwrap()],
                &[SigmaMap::from_vec(8, 8, t.iter().map(|v| v * 3.5).collect()).unwrap()],
                mode,
            )
            .unwrap();
            assert!((base - scaled).abs() < 1e-12);
        }
    }

    #[test]
    fn std_error_oracles() {
        assert_eq!(relative_std_error(&[5.0, 5.0], 5.0).unwrap(), 0.0);
        assert!((relative_std_error(&[6.0], 5.0).unwrap() - 0.2).abs() < 1e-12);
        // {6,6,4,4} vs 5: sqrt(4)/(4*5) = 0.1
        let eps = relative_std_error(&[6.0, 6.0, 4.0, 4.0], 5.0).unwrap();
        assert!((eps - 0.1).abs() < 1e-12);
        assert!(relative_std_error(&[1.0], 0.0).is_err());
        assert!(relative_std_error(&[], 5.0).is_err());
    }

    #[test]
    fn psnr_closed_forms() {
        let a = Raster::filled(16, 16, 1, 100.0).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);

        let b = Raster::filled(16, 16, 1, 101.0).unwrap();
        let expected = 10.0 * (255.0f64 * 255.0).log10();
        assert!((psnr(&a, &b).unwrap() - expected).abs() < 1e-6);
        assert!((psnr(&a, &b).unwrap() - 48.1308).abs() < 1e-3);

        let c = Raster::filled(16, 16, 1, 0.0).unwrap();
        let d = Raster::filled(16, 16, 1, 255.0).unwrap();
        assert!(psnr(&c, &d).unwrap().abs() < 1e-6);

        let e = Raster::filled(8, 16, 1, 0.0).unwrap();
        assert!(psnr(&a, &e).is_err());
    }

    #[test]
    fn psnr_monotone_in_error() {
        let reference = Raster::filled(16, 16, 1, 100.0).unwrap();
        let mut last = f64::INFINITY;
        for delta in [1.0, 2.0, 5.0, 20.0, 100.0] {
            let test = Raster::filled(16, 16, 1, 100.0 + delta).unwrap();
            let p = psnr(&reference, &test).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn ssim_identity_symmetry_and_degradation() {
        let mut rng = Prng::new(17);
        let data: Vec<f64> = (0..64 * 64).map(|_| rng.next_f64() * 255.0).collect();
        let a = Raster::from_vec(64, 64, 1, data).unwrap();
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);

        let flat = Raster::filled(64, 64, 1, 128.0).unwrap();
        let map = SigmaMap::filled(64, 64, 100.0).unwrap();
        let noisy = apply_noise(
            &flat,
            &map,
            &NoiseSpec { clip: true, ..NoiseSpec::default() },
            &mut Prng::new(2),
        )
        .unwrap();
        let s_ab = ssim(&flat, &noisy).unwrap();
        let s_ba = ssim(&noisy, &flat).unwrap();
        assert!((s_ab - s_ba).abs() < 1e-12);
        assert!(s_ab < 0.2, "ssim {s_ab}");

        let tiny = Raster::filled(8, 8, 1, 0.0).unwrap();
        assert!(ssim(&tiny, &tiny).is_err());
    }

    #[test]
    fn threshold_is_strict() {
        assert!(check_threshold(0.05));
        assert!(!check_threshold(0.1));
        assert!(!check_threshold(0.21));
    }

    #[test]
    fn ssim_color_averages_channels() {
        let a = Raster::filled(32, 32, 3, 90.0).unwrap();
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn concatenated_mode_single_pair_matches_ratio() {
        let t = SigmaMap::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let e = SigmaMap::from_vec(2, 2, vec![1.5, 2.0, 3.0, 4.0]).unwrap();
        let a = relative_map_error(&[e.clone()], &[t.clone()], MapErrorMode::MeanOfRatios).unwrap();
        let b = relative_map_error(&[e], &[t], MapErrorMode::ConcatenatedNorm).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn errors_are_scale_homogeneous_of_degree_zero(
            e in proptest::collection::vec(0.5f64..50.0, 16),
            t in proptest::collection::vec(0.5f64..50.0, 16),
            scale in 0.01f64..100.0
        ) {
            let em = SigmaMap::from_vec(4, 4, e.clone()).unwrap();
            let tm = SigmaMap::from_vec(4, 4, t.clone()).unwrap();
            let es = SigmaMap::from_vec(4, 4, e.iter().map(|v| v * scale).collect()).unwrap();
            let ts = SigmaMap::from_vec(4, 4, t.iter().map(|v| v * scale).collect()).unwrap();
            for mode in [MapErrorMode::MeanOfRatios, MapErrorMode::ConcatenatedNorm] {
                let base = relative_map_error(&[em.clone()], &[tm.clone()], mode).unwrap();
                let scaled = relative_map_error(&[es.clone()], &[ts.clone()], mode).unwrap();
                proptest::prop_assert!((base - scaled).abs() < 1e-9 * base.max(1.0));
            }
            let base = relative_std_error(&e[..4], t[0]).unwrap();
            let scaled = relative_std_error(
                &e[..4].iter().map(|v| v * scale).collect::<Vec<_>>(),
                t[0] * scale,
            )
            .unwrap();
            proptest::prop_assert!((base - scaled).abs() < 1e-9 * base.max(1.0));
        }
    }
}

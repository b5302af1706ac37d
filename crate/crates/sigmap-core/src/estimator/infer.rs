//! Whole-image inference with overlap-blended tiling.

use alloc::vec;
use alloc::vec::Vec;

use super::train::TrainedEstimator;
use crate::raster::{Raster, SigmaMap};
use crate::{Error, Result};

/// Overlap between adjacent tiles, in pixels.
const OVERLAP: usize = 16;

/// Tile origins along one axis: fixed stride of `tile - OVERLAP`, with the
/// final tile flushed to the right edge.
fn tile_origins(extent: usize, tile: usize) -> Vec<usize> {
    debug_assert!(extent >= tile);
    let step = tile - OVERLAP;
    let mut origins = Vec::new();
    let mut o = 0;
    while o + tile < extent {
        origins.push(o);
        o += step;
    }
    origins.push(extent - tile);
    origins
}

/// Per-pixel blend weight inside a tile: flat 1.0 core with linear ramps
/// over the overlap bands, chosen so that two adjacent ramps sum to 1.
fn tile_weight(local: usize, tile: usize, origin: usize, extent: usize) -> f64 {
    let mut w = 1.0;
    if origin > 0 && local < OVERLAP {
        w *= (local + 1) as f64 / (OVERLAP + 1) as f64;
    }
    if origin + tile < extent && local >= tile - OVERLAP {
        w *= (tile - local) as f64 / (OVERLAP + 1) as f64;
    }
    w
}

fn estimate_plane(est: &TrainedEstimator, image: &Raster, tile: usize) -> Result<SigmaMap> {
    let model = est.model()?;
    let (w, h) = (image.width(), image.height());
    if w <= tile && h <= tile {
        return model.forward_raster(&est.params, image);
    }
    // When only one axis exceeds the tile size, tile along that axis and
    // pass the other through whole (rounded up to a multiple of 8).
    let tw = if w > tile { tile } else { w.div_ceil(8) * 8 };
    let th = if h > tile { tile } else { h.div_ceil(8) * 8 };
    if tw > w || th > h {
        return Err(Error::DegenerateInput("image too small to tile"));
    }
    let mut acc = vec![0.0; w * h];
    let mut weight = vec![0.0; w * h];
    for &oy in &tile_origins(h, th) {
        for &ox in &tile_origins(w, tw) {
            let crop = image.crop(ox, oy, tw, th)?;
            let map = model.forward_raster(&est.params, &crop)?;
            for ly in 0..th {
                let wy = tile_weight(ly, th, oy, h);
                let row = &map.data()[ly * tw..(ly + 1) * tw];
                for lx in 0..tw {
                    let wgt = wy * tile_weight(lx, tw, ox, w);
                    let idx = (oy + ly) * w + ox + lx;
                    acc[idx] += wgt * row[lx];
                    weight[idx] += wgt;
                }
            }
        }
    }
    for (a, &wg) in acc.iter_mut().zip(&weight) {
        debug_assert!(wg > 0.0);
        *a /= wg;
    }
    SigmaMap::from_vec(w, h, acc)
}

/// Estimates the sigma map of `image` with a trained network, processing
/// `tile`-sized windows when the image is larger than one tile.
///
/// A grayscale estimator applied to a color image runs once per channel and
/// averages the three maps. `tile` must be a multiple of 8 and at least 64.
pub fn estimate(est: &TrainedEstimator, image: &Raster, tile: usize) -> Result<SigmaMap> {
    if tile < 64 || tile % 8 != 0 {
        return Err(Error::InvalidParameter("tile must be a multiple of 8 and >= 64"));
    }
    if image.channels() == est.config.input_channels {
        return estimate_plane(est, image, tile);
    }
    if est.config.input_channels == 1 && image.channels() == 3 {
        let mut acc: Option<Vec<f64>> = None;
        for c in 0..3 {
            let map = estimate_plane(est, &image.channel(c)?, tile)?;
            match &mut acc {
                None => acc = Some(map.data().to_vec()),
                Some(a) => {
                    for (x, v) in a.iter_mut().zip(map.data()) {
                        *x += v;
                    }
                }
            }
        }
        let mut data = acc.expect("three channels visited");
        for v in &mut data {
            *v /= 3.0;
        }
        return SigmaMap::from_vec(image.width(), image.height(), data);
    }
    Err(Error::InvalidParameter("image channels incompatible with the estimator config"))
}

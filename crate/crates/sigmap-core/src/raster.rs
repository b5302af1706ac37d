//! Image and sigma-map containers.
//!
//! Pixels are double-precision reals on the [0, 255] scale; quantization to
//! 8 bits happens only at image-file export (in the companion crate). Noisy
//! non-clipped images may carry values outside [0, 255].

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A W x H x C image, row-major, channel-interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Raster {
    /// Constant-valued raster.
    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::from_vec(width, height, channels, vec![value; width * height * channels])
    }

    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("raster dimensions must be positive"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParameter("raster channels must be 1 or 3"));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch {
                expected: (width * height * channels, 1),
                got: (data.len(), 1),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("raster data".into()));
        }
        Ok(Raster { width, height, channels, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Rectangular crop; the window must lie inside the raster.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Raster> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::DegenerateInput("crop window exceeds raster bounds"));
        }
        let c = self.channels;
        let mut data = Vec::with_capacity(w * h * c);
        for y in y0..y0 + h {
            let row = &self.data[(y * self.width + x0) * c..(y * self.width + x0 + w) * c];
            data.extend_from_slice(row);
        }
        Raster::from_vec(w, h, c, data)
    }

    /// Per-pixel brightness plane: the pixel itself for grayscale, the mean
    /// of the three channels for color.
    pub fn brightness(&self) -> SigmaMap {
        let mut data = Vec::with_capacity(self.width * self.height);
        for px in self.data.chunks_exact(self.channels) {
            let mean = px.iter().sum::<f64>() / self.channels as f64;
            // Brightness is nonnegative for in-range pixels; clamp guards
            // non-clipped noisy inputs.
            data.push(mean.max(0.0));
        }
        SigmaMap::from_vec(self.width, self.height, data).expect("brightness plane is valid")
    }

    /// Extracts one channel as a single-channel raster.
    pub fn channel(&self, c: usize) -> Result<Raster> {
        if c >= self.channels {
            return Err(Error::InvalidParameter("channel index out of range"));
        }
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| px[c])
            .collect();
        Raster::from_vec(self.width, self.height, 1, data)
    }
}

/// A W x H matrix of nonnegative reals, row-major. Holds per-pixel noise
/// standard deviations; also reused for brightness planes.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl SigmaMap {
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::from_vec(width, height, vec![value; width * height])
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("sigma-map dimensions must be positive"));
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                got: (data.len(), 1),
            });
        }
        if !data.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::NonFinite("sigma-map data (must be finite and >= 0)".into()));
        }
        Ok(SigmaMap { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Mean of the squared values (the mean variance of the map).
    pub fn mean_square(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_validates_shape_and_channels() {
        assert!(Raster::from_vec(2, 2, 1, vec![0.0; 4]).is_ok());
        assert!(Raster::from_vec(2, 2, 2, vec![0.0; 8]).is_err());
        assert!(Raster::from_vec(2, 2, 1, vec![0.0; 5]).is_err());
        assert!(Raster::from_vec(0, 2, 1, vec![]).is_err());
        assert!(Raster::from_vec(1, 1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn crop_and_brightness() {
        let mut r = Raster::filled(4, 4, 3, 0.0).unwrap();
        r.set(2, 1, 0, 30.0);
        r.set(2, 1, 1, 60.0);
        r.set(2, 1, 2, 90.0);
        let c = r.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.get(1, 0, 1), 60.0);
        let b = r.brightness();
        assert_eq!(b.get(2, 1), 60.0);
        assert!(r.crop(3, 3, 2, 2).is_err());
    }

    #[test]
    fn sigma_map_rejects_negative() {
        assert!(SigmaMap::from_vec(2, 1, vec![1.0, -0.5]).is_err());
        let m = SigmaMap::from_vec(2, 1, vec![3.0, 4.0]).unwrap();
        assert_eq!(m.mean_square(), 12.5);
    }
}

//! Pixel-wise non-stationary Gaussian noise simulation and blind sigma-map
//! estimation.
//!
//! A *sigma-map* assigns every pixel of an image its own noise standard
//! deviation. This crate provides the building blocks for working with such
//! noise on the [0, 255] pixel scale:
//!
//! - deterministic seeded sampling ([`Prng`]) and the noise model itself
//!   ([`noise`]): brightness-modulated sigma-maps, half-normal mean-variance
//!   draws, clipped and non-clipped noising, parametric test maps;
//! - a training-patch pipeline ([`patch`]): detail-preferring fragment
//!   selection, dihedral augmentation, minibatch assembly;
//! - a compact multiscale convolutional estimator with hand-rolled
//!   backpropagation and Adam ([`estimator`]);
//! - a classical local-DCT baseline estimator and the AWGN median extractor
//!   ([`baseline`]);
//! - relative-error, PSNR and SSIM metrics ([`metrics`]);
//! - a sliding 8x8 DCT hard-threshold denoiser driven by a sigma-map
//!   ([`denoise`]).
//!
//! The crate is `no_std` + `alloc`; all transcendental math goes through
//! `libm` so sample streams and trained weights are bit-identical across
//! platforms. File formats and the CLI live in the companion `sigmap-cli`
//! crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

mod error;
pub mod rng;
pub mod raster;
pub mod noise;
pub mod patch;
pub mod dct;
pub mod baseline;
pub mod metrics;
pub mod denoise;
pub mod estimator;

pub use error::Error;
pub use raster::{Raster, SigmaMap};
pub use rng::Prng;

pub type Result<T> = core::result::Result<T, Error>;

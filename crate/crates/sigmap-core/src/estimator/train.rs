//! MSE training loop with the two-stage learning-rate schedule.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "rayon")]
use rayon::prelude::*;

use super::adam::{adam_step, AdamHyper, AdamState};
use super::model::{EstimatorConfig, Model};
use super::tensor::Tensor;
use crate::noise::NoiseSpec;
use crate::patch::{make_minibatch, TrainingSample};
use crate::raster::Raster;
use crate::rng::Prng;
use crate::{Error, Result};

/// Iteration budget, learning rates and batch geometry.
///
/// Defaults follow the full-scale recipe: 150000 iterations, minibatch 32,
/// patch 128, learning rate 1e-5 dropping to 5e-6 after two thirds of the
/// run. Desk-scale runs shrink every field.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSchedule {
    pub total_iterations: usize,
    pub lr_stage1: f64,
    pub lr_stage2: f64,
    /// Fraction of the run spent at `lr_stage1`.
    pub stage1_fraction: f64,
    pub batch: usize,
    pub patch: usize,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule {
            total_iterations: 150_000,
            lr_stage1: 1e-5,
            lr_stage2: 5e-6,
            stage1_fraction: 2.0 / 3.0,
            batch: 32,
            patch: 128,
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.total_iterations == 0 {
            return Err(Error::InvalidParameter("total_iterations must be >= 1"));
        }
        if !(self.lr_stage1 > 0.0 && self.lr_stage2 > 0.0) {
            return Err(Error::InvalidParameter("learning rates must be positive"));
        }
        if self.lr_stage2 >= self.lr_stage1 {
            return Err(Error::InvalidParameter("lr_stage2 must be smaller than lr_stage1"));
        }
        if !(self.stage1_fraction > 0.0 && self.stage1_fraction <= 1.0) {
            return Err(Error::InvalidParameter("stage1_fraction must be in (0, 1]"));
        }
        if self.batch < 2 || self.batch % 2 != 0 {
            return Err(Error::InvalidParameter("batch must be even and >= 2"));
        }
        if self.patch == 0 || self.patch % 8 != 0 {
            return Err(Error::InvalidParameter("patch size must be a positive multiple of 8"));
        }
        Ok(())
    }

    pub fn lr_at(&self, iteration: usize) -> f64 {
        let boundary = (self.total_iterations as f64 * self.stage1_fraction) as usize;
        if iteration < boundary {
            self.lr_stage1
        } else {
            self.lr_stage2
        }
    }
}

/// Weights plus optimizer state; the unit of checkpointing.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedEstimator {
    pub config: EstimatorConfig,
    pub params: Vec<f64>,
    pub adam: AdamState,
    pub iteration: u64,
}

impl TrainedEstimator {
    /// Freshly initialized estimator (iteration 0, zero moments).
    pub fn init(config: EstimatorConfig, rng: &mut Prng) -> Result<Self> {
        let model = Model::new(config.clone())?;
        let params = model.init_params(rng);
        let adam = AdamState::new(model.n_params(), AdamHyper::default());
        Ok(TrainedEstimator { config, params, adam, iteration: 0 })
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(self.config.clone())
    }
}

/// Progress callbacks emitted by [`train`].
pub enum TrainEvent<'a> {
    Loss { iteration: u64, loss: f64, lr: f64 },
    Checkpoint { estimator: &'a TrainedEstimator },
}

fn sample_gradient(
    model: &Model,
    params: &[f64],
    sample: &TrainingSample,
    scale: f64,
    grads: &mut [f64],
) -> Result<f64> {
    let input = Tensor::from_raster_scaled(&sample.patch);
    let (out, mut trace) = model.forward_trace(params, &input)?;
    let npix = out.data.len() as f64;
    let mut grad_map = Tensor::zeros(1, out.height, out.width);
    let mut loss = 0.0;
    for (i, (&p, &t)) in out.data.iter().zip(sample.target.data()).enumerate() {
        let d = p - t;
        loss += d * d;
        grad_map.data[i] = 2.0 * d / npix * scale;
    }
    model.backward(params, &mut trace, &grad_map, grads)?;
    Ok(loss / npix)
}

/// Mean MSE loss and its gradient over a batch, with respect to every
/// parameter.
pub fn batch_gradient(
    model: &Model,
    params: &[f64],
    batch: &[TrainingSample],
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::DegenerateInput("empty training batch"));
    }
    let scale = 1.0 / batch.len() as f64;

    #[cfg(feature = "rayon")]
    let partials: Vec<Result<(f64, Vec<f64>)>> = batch
        .par_iter()
        .map(|sample| {
            let mut grads = vec![0.0; params.len()];
            let loss = sample_gradient(model, params, sample, scale, &mut grads)?;
            Ok((loss, grads))
        })
        .collect();

    #[cfg(not(feature = "rayon"))]
    let partials: Vec<Result<(f64, Vec<f64>)>> = batch
        .iter()
        .map(|sample| {
            let mut grads = vec![0.0; params.len()];
            let loss = sample_gradient(model, params, sample, scale, &mut grads)?;
            Ok((loss, grads))
        })
        .collect();

    // Deterministic reduction in sample order.
    let mut total_loss = 0.0;
    let mut grads = vec![0.0; params.len()];
    for p in partials {
        let (loss, g) = p?;
        total_loss += loss * scale;
        for (acc, v) in grads.iter_mut().zip(&g) {
            *acc += v;
        }
    }
    Ok((total_loss, grads))
}

/// Forward-only batch loss (used by gradient verification).
pub fn batch_loss(model: &Model, params: &[f64], batch: &[TrainingSample]) -> Result<f64> {
    let mut total = 0.0;
    for sample in batch {
        let input = Tensor::from_raster_scaled(&sample.patch);
        let out = model.forward_tensor(params, &input)?;
        let npix = out.data.len() as f64;
        let loss: f64 = out
            .data
            .iter()
            .zip(sample.target.data())
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            / npix;
        total += loss;
    }
    Ok(total / batch.len() as f64)
}

/// Runs the training loop and returns the final estimator.
///
/// `checkpoint_every` of 0 disables periodic checkpoint events; a final
/// checkpoint event is always emitted.
pub fn train(
    corpus: &[Raster],
    config: EstimatorConfig,
    schedule: &TrainSchedule,
    spec: &NoiseSpec,
    rng: &mut Prng,
    checkpoint_every: usize,
    sink: &mut dyn FnMut(TrainEvent<'_>),
) -> Result<TrainedEstimator> {
    schedule.validate()?;
    if corpus.is_empty() {
        return Err(Error::DegenerateInput("empty corpus"));
    }
    if corpus.iter().any(|r| r.channels() != config.input_channels) {
        return Err(Error::InvalidParameter("corpus channel count does not match the config"));
    }
    let model = Model::new(config.clone())?;
    let mut est = TrainedEstimator::init(config, rng)?;
    for iteration in 0..schedule.total_iterations {
        let lr = schedule.lr_at(iteration);
        let batch = make_minibatch(corpus, schedule.batch, schedule.patch, spec, rng)?;
        let (loss, grads) = batch_gradient(&model, &est.params, &batch)?;
        adam_step(&mut est.params, &mut est.adam, &grads, lr)?;
        est.iteration += 1;
        sink(TrainEvent::Loss { iteration: est.iteration, loss, lr });
        if checkpoint_every > 0 && est.iteration % checkpoint_every as u64 == 0 {
            sink(TrainEvent::Checkpoint { estimator: &est });
        }
    }
    sink(TrainEvent::Checkpoint { estimator: &est });
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::sigma_map_from_brightness;
    use crate::raster::SigmaMap;

    fn tiny_model() -> Model {
        Model::new(EstimatorConfig {
            channels: [2, 3, 4],
            blocks_per_level: 1,
            input_channels: 1,
        })
        .unwrap()
    }

    fn random_patch(rng: &mut Prng, n: usize) -> Raster {
        let data: Vec<f64> = (0..n * n).map(|_| rng.next_f64() * 255.0).collect();
        Raster::from_vec(n, n, 1, data).unwrap()
    }

    fn sample_with_target(model: &Model, params: &[f64], patch: Raster, target: Option<SigmaMap>) -> TrainingSample {
        let target = target.unwrap_or_else(|| {
            // Target = current prediction, so the gradient vanishes.
            model.forward_raster(params, &patch).unwrap()
        });
        TrainingSample { patch, target, clipped: false, sigma_av_sq: 0.0 }
    }

    #[test]
    fn gradient_vanishes_when_prediction_matches_target() {
        let model = tiny_model();
        let mut rng = Prng::new(31);
        let params = model.init_params(&mut rng);
        let patch = random_patch(&mut rng, 16);
        let sample = sample_with_target(&model, &params, patch, None);
        let (loss, grads) = batch_gradient(&model, &params, &[sample]).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn duplicated_sample_gradient_equals_single() {
        let model = tiny_model();
        let mut rng = Prng::new(32);
        let params = model.init_params(&mut rng);
        let patch = random_patch(&mut rng, 16);
        let target = SigmaMap::filled(16, 16, 12.0).unwrap();
        let s = TrainingSample { patch, target, clipped: false, sigma_av_sq: 144.0 };
        let (l1, g1) = batch_gradient(&model, &params, &[s.clone()]).unwrap();
        let (l2, g2) = batch_gradient(&model, &params, &[s.clone(), s]).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_spot_check_against_finite_differences() {
        // The acceptance suite sweeps every parameter; here a random subset
        // keeps the unit test fast.
        let model = tiny_model();
        let mut rng = Prng::new(33);
        let params = model.init_params(&mut rng);
        let patch = random_patch(&mut rng, 16);
        let brightness = patch.brightness();
        let target = sigma_map_from_brightness(&brightness, 50.0).unwrap();
        let sample = TrainingSample { patch, target, clipped: false, sigma_av_sq: 50.0 };
        let batch = [sample];
        let (_, grads) = batch_gradient(&model, &params, &batch).unwrap();

        let step = 1e-4;
        let mut p = params.clone();
        for _ in 0..60 {
            let i = rng.next_index(params.len());
            p[i] = params[i] + step;
            let lp = batch_loss(&model, &p, &batch).unwrap();
            p[i] = params[i] - step;
            let lm = batch_loss(&model, &p, &batch).unwrap();
            p[i] = params[i];
            let fd = (lp - lm) / (2.0 * step);
            let rel = (fd - grads[i]).abs() / grads[i].abs().max(1e-6);
            assert!(rel < 1e-4, "param {i}: fd {fd} vs analytic {}", grads[i]);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let config = EstimatorConfig { channels: [2, 2, 2], blocks_per_level: 1, input_channels: 1 };
        let schedule = TrainSchedule {
            total_iterations: 3,
            lr_stage1: 1e-3,
            lr_stage2: 5e-4,
            stage1_fraction: 2.0 / 3.0,
            batch: 4,
            patch: 16,
        };
        let mut rng = Prng::new(40);
        let corpus = vec![random_patch(&mut rng, 48)];
        let run = |seed: u64| {
            let mut losses = Vec::new();
            let est = train(
                &corpus,
                config.clone(),
                &schedule,
                &NoiseSpec::default(),
                &mut Prng::new(seed),
                0,
                &mut |e| {
                    if let TrainEvent::Loss { loss, .. } = e {
                        losses.push(loss);
                    }
                },
            )
            .unwrap();
            (est, losses)
        };
        let (a, la) = run(7);
        let (b, lb) = run(7);
        assert_eq!(a.params, b.params);
        assert_eq!(la, lb);
        assert_eq!(a.iteration, 3);
        let (c, _) = run(8);
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn schedule_validation_and_lr_stages() {
        let mut s = TrainSchedule::default();
        assert!(s.validate().is_ok());
        assert_eq!(s.lr_at(0), 1e-5);
        assert_eq!(s.lr_at(99_999), 1e-5);
        assert_eq!(s.lr_at(100_000), 5e-6);
        s.lr_stage2 = 2e-5;
        assert!(s.validate().is_err());
        s = TrainSchedule { patch: 65, ..TrainSchedule::default() };
        assert!(s.validate().is_err());
        s = TrainSchedule { batch: 5, ..TrainSchedule::default() };
        assert!(s.validate().is_err());
    }
}

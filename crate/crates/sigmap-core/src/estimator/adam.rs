//! Adam optimizer over the flat parameter vector.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Adam moment-decay and stabilization constants (standard defaults).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First/second moment accumulators plus the iteration counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(n_params: usize, hyper: AdamHyper) -> Self {
        AdamState { m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0, hyper }
    }
}

/// One bias-corrected Adam update in place; increments the counter.
pub fn adam_step(params: &mut [f64], state: &mut AdamState, grads: &[f64], lr: f64) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::DimensionMismatch {
            expected: (params.len(), 1),
            got: (grads.len(), 1),
        });
    }
    if !(lr > 0.0) || !lr.is_finite() {
        return Err(Error::InvalidParameter("learning rate must be positive and finite"));
    }
    if !grads.iter().all(|g| g.is_finite()) {
        return Err(Error::NonFinite("gradient vector".into()));
    }
    let AdamHyper { beta1, beta2, epsilon } = state.hyper;
    state.t += 1;
    let bc1 = 1.0 - libm::pow(beta1, state.t as f64);
    let bc2 = 1.0 - libm::pow(beta2, state.t as f64);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (libm::sqrt(v_hat) + epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_untouched() {
        let mut params = vec![1.0, -2.0, 0.5];
        let mut state = AdamState::new(3, AdamHyper::default());
        adam_step(&mut params, &mut state, &[0.0; 3], 1e-3).unwrap();
        assert_eq!(params, vec![1.0, -2.0, 0.5]);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn first_step_magnitude_is_about_lr() {
        // Bias-corrected first step: delta = lr * g / (|g| + eps) ~ lr * sign(g).
        let lr = 1e-3;
        for g in [5.0, -0.2, 1e3] {
            let mut params = vec![0.0];
            let mut state = AdamState::new(1, AdamHyper::default());
            adam_step(&mut params, &mut state, &[g], lr).unwrap();
            let delta = params[0];
            assert!((delta.abs() - lr).abs() <= 0.01 * lr, "g={g} delta={delta}");
            assert_eq!(delta.is_sign_negative(), g > 0.0);
        }
    }

    #[test]
    fn identical_gradients_give_identical_updates() {
        let mut params = vec![0.3, 0.3, 7.0, 7.0];
        let mut state = AdamState::new(4, AdamHyper::default());
        for _ in 0..10 {
            adam_step(&mut params, &mut state, &[0.7, 0.7, -0.1, -0.1], 1e-2).unwrap();
            assert_eq!(params[0], params[1]);
            assert_eq!(params[2], params[3]);
        }
    }

    #[test]
    fn rejects_non_finite_gradients_and_bad_lr() {
        let mut params = vec![0.0];
        let mut state = AdamState::new(1, AdamHyper::default());
        assert!(adam_step(&mut params, &mut state, &[f64::NAN], 1e-3).is_err());
        assert!(adam_step(&mut params, &mut state, &[1.0], 0.0).is_err());
        assert!(adam_step(&mut params, &mut state, &[1.0, 2.0], 1e-3).is_err());
    }
}

//! Network topology, parameter layout, forward pass and backpropagation.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ops;
use super::tensor::Tensor;
use crate::raster::{Raster, SigmaMap};
use crate::rng::Prng;
use crate::{Error, Result};

/// Structural hyperparameters. The three stride-2 stages are fixed; widths
/// and residual depth are configurable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimatorConfig {
    /// Feature widths of the three resolution levels.
    pub channels: [usize; 3],
    /// Residual blocks per cascade.
    pub blocks_per_level: usize,
    /// 1 for grayscale, 3 for color input.
    pub input_channels: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { channels: [16, 32, 64], blocks_per_level: 2, input_channels: 1 }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.channels.iter().any(|&c| c == 0) {
            return Err(Error::InvalidParameter("channel widths must be positive"));
        }
        if self.blocks_per_level == 0 {
            return Err(Error::InvalidParameter("need at least one residual block per level"));
        }
        if self.input_channels != 1 && self.input_channels != 3 {
            return Err(Error::InvalidParameter("input channels must be 1 or 3"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OpKind {
    Conv1 { ci: usize, co: usize },
    Conv3 { ci: usize, co: usize },
    SConv3 { ci: usize, co: usize },
    TConv2 { ci: usize, co: usize },
}

impl OpKind {
    fn w_len(&self) -> usize {
        match *self {
            OpKind::Conv1 { ci, co } => ci * co,
            OpKind::Conv3 { ci, co } | OpKind::SConv3 { ci, co } => ci * co * 9,
            // Tied taps: one weight per channel pair.
            OpKind::TConv2 { ci, co } => ci * co,
        }
    }

    fn b_len(&self) -> usize {
        match *self {
            OpKind::Conv1 { co, .. }
            | OpKind::Conv3 { co, .. }
            | OpKind::SConv3 { co, .. }
            | OpKind::TConv2 { co, .. } => co,
        }
    }

    fn fan_in(&self) -> usize {
        match *self {
            OpKind::Conv1 { ci, .. } => ci,
            OpKind::Conv3 { ci, .. } | OpKind::SConv3 { ci, .. } => ci * 9,
            // Each output pixel of a 2x2 stride-2 transposed convolution
            // receives exactly one tap per input channel.
            OpKind::TConv2 { ci, .. } => ci,
        }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    name: String,
    kind: OpKind,
    w_off: usize,
    b_off: usize,
}

/// The estimator network: a parameter layout plus forward/backward passes
/// over a flat `Vec<f64>` parameter vector.
#[derive(Debug, Clone)]
pub struct Model {
    config: EstimatorConfig,
    entries: Vec<Entry>,
    n_params: usize,
}

/// Activations recorded by the forward pass, consumed by backprop.
pub struct Trace {
    tape: Vec<Tensor>,
    pre_final: Tensor,
    input: Tensor,
}

impl Model {
    pub fn new(config: EstimatorConfig) -> Result<Model> {
        config.validate()?;
        let [c0, c1, c2] = config.channels;
        let nb = config.blocks_per_level;
        let cin = config.input_channels;

        struct Layout {
            entries: Vec<Entry>,
            offset: usize,
        }
        impl Layout {
            fn push(&mut self, name: String, kind: OpKind) {
                let w_off = self.offset;
                let b_off = w_off + kind.w_len();
                self.offset = b_off + kind.b_len();
                self.entries.push(Entry { name, kind, w_off, b_off });
            }
            fn push_res(&mut self, prefix: &str, nb: usize, ch: usize) {
                for b in 0..nb {
                    self.push(format!("{prefix}.res{b}.conv1"), OpKind::Conv3 { ci: ch, co: ch });
                    self.push(format!("{prefix}.res{b}.conv2"), OpKind::Conv3 { ci: ch, co: ch });
                }
            }
        }
        let mut l = Layout { entries: Vec::new(), offset: 0 };

        l.push("conv_in".into(), OpKind::Conv3 { ci: cin, co: c0 });
        l.push_res("enc0", nb, c0);
        l.push("down0".into(), OpKind::SConv3 { ci: c0, co: c1 });
        l.push_res("enc1", nb, c1);
        l.push("down1".into(), OpKind::SConv3 { ci: c1, co: c2 });
        l.push_res("enc2", nb, c2);
        l.push("down2".into(), OpKind::SConv3 { ci: c2, co: c2 });
        l.push_res("mid", nb, c2);
        l.push("up2".into(), OpKind::TConv2 { ci: c2, co: c2 });
        l.push_res("dec2", nb, c2);
        l.push("up1".into(), OpKind::TConv2 { ci: c2, co: c1 });
        l.push_res("dec1", nb, c1);
        l.push("up0".into(), OpKind::TConv2 { ci: c1, co: c0 });
        l.push_res("dec0", nb, c0);
        l.push("conv_out".into(), OpKind::Conv3 { ci: c0, co: 1 });
        l.push("skip_in".into(), OpKind::Conv1 { ci: cin, co: 1 });

        let Layout { entries, offset: n_params } = l;
        Ok(Model { config, entries, n_params })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Names and (weight length, bias length) of every layer, in parameter
    /// order. Used by checkpoint serialization.
    pub fn layer_layout(&self) -> Vec<(String, usize, usize)> {
        self.entries
            .iter()
            .map(|e| (e.name.clone(), e.kind.w_len(), e.kind.b_len()))
            .collect()
    }

    /// Fan-in-scaled uniform initialization, biases zero.
    pub fn init_params(&self, rng: &mut Prng) -> Vec<f64> {
        let mut params = vec![0.0; self.n_params];
        for e in &self.entries {
            let s = libm::sqrt(1.0 / e.kind.fan_in() as f64);
            for i in 0..e.kind.w_len() {
                params[e.w_off + i] = (rng.next_f64() * 2.0 - 1.0) * s;
            }
        }
        params
    }

    fn apply(&self, params: &[f64], idx: usize, x: &Tensor) -> Result<Tensor> {
        let e = &self.entries[idx];
        let w = &params[e.w_off..e.w_off + e.kind.w_len()];
        let b = &params[e.b_off..e.b_off + e.kind.b_len()];
        let out = match e.kind {
            OpKind::Conv1 { ci, co } => {
                debug_assert_eq!(ci, x.channels);
                let mut out = Tensor::zeros(co, x.height, x.width);
                for oc in 0..co {
                    for row in 0..x.height {
                        out.row_mut(oc, row).fill(b[oc]);
                    }
                    for ic in 0..ci {
                        let wv = w[oc * ci + ic];
                        for row in 0..x.height {
                            let src = x.row(ic, row);
                            for (o, s) in out.row_mut(oc, row).iter_mut().zip(src) {
                                *o += wv * s;
                            }
                        }
                    }
                }
                out
            }
            OpKind::Conv3 { co, .. } => ops::conv3_forward(x, w, b, co),
            OpKind::SConv3 { co, .. } => ops::sconv3_forward(x, w, b, co),
            OpKind::TConv2 { co, .. } => ops::tconv2_forward(x, w, b, co),
        };
        if !out.is_finite() {
            return Err(Error::NonFinite(e.name.clone()));
        }
        Ok(out)
    }

    /// Backward through entry `idx`; accumulates parameter gradients and
    /// returns the input gradient.
    fn apply_backward(
        &self,
        params: &[f64],
        idx: usize,
        input: &Tensor,
        grad_out: &Tensor,
        grads: &mut [f64],
    ) -> Tensor {
        let e = &self.entries[idx];
        let w = &params[e.w_off..e.w_off + e.kind.w_len()];
        let (grad_in, gw, gb) = match e.kind {
            OpKind::Conv1 { ci, co } => {
                let mut grad_in = Tensor::zeros(ci, input.height, input.width);
                let mut gw = vec![0.0; ci * co];
                let mut gb = vec![0.0; co];
                for oc in 0..co {
                    for row in 0..input.height {
                        gb[oc] += grad_out.row(oc, row).iter().sum::<f64>();
                    }
                    for ic in 0..ci {
                        let wv = w[oc * ci + ic];
                        let mut acc = 0.0;
                        for row in 0..input.height {
                            let go = grad_out.row(oc, row);
                            let src = input.row(ic, row);
                            for (g, s) in go.iter().zip(src) {
                                acc += g * s;
                            }
                            let gi = grad_in.row_mut(ic, row);
                            for (gi_v, g) in gi.iter_mut().zip(go) {
                                *gi_v += wv * g;
                            }
                        }
                        gw[oc * ci + ic] = acc;
                    }
                }
                (grad_in, gw, gb)
            }
            OpKind::Conv3 { co, .. } => ops::conv3_backward(input, w, co, grad_out),
            OpKind::SConv3 { co, .. } => ops::sconv3_backward(input, w, co, grad_out),
            OpKind::TConv2 { co, .. } => ops::tconv2_backward(input, w, co, grad_out),
        };
        for (i, g) in gw.iter().enumerate() {
            grads[e.w_off + i] += g;
        }
        for (i, g) in gb.iter().enumerate() {
            grads[e.b_off + i] += g;
        }
        grad_in
    }

    /// Residual block forward: `x + conv2(relu(conv1(x)))`.
    /// Saves conv1 input, conv1 pre-activation and conv2 input on the tape.
    fn res_forward(
        &self,
        params: &[f64],
        idx: usize,
        tape: &mut Vec<Tensor>,
        x: Tensor,
    ) -> Result<Tensor> {
        let pre = self.apply(params, idx, &x)?;
        let r = ops::relu_forward(&pre);
        let body = self.apply(params, idx + 1, &r)?;
        let mut out = x.clone();
        for (o, b) in out.data.iter_mut().zip(&body.data) {
            *o += b;
        }
        tape.push(x);
        tape.push(pre);
        tape.push(r);
        Ok(out)
    }

    fn res_backward(
        &self,
        params: &[f64],
        idx: usize,
        tape: &mut Vec<Tensor>,
        grad_out: &Tensor,
        grads: &mut [f64],
    ) -> Tensor {
        let r = tape.pop().expect("tape: conv2 input");
        let pre = tape.pop().expect("tape: conv1 pre-activation");
        let x = tape.pop().expect("tape: conv1 input");
        let g_r = self.apply_backward(params, idx + 1, &r, grad_out, grads);
        let g_pre = ops::relu_backward(&pre, &g_r);
        let g_x = self.apply_backward(params, idx, &x, &g_pre, grads);
        let mut grad_in = grad_out.clone();
        for (g, gx) in grad_in.data.iter_mut().zip(&g_x.data) {
            *g += gx;
        }
        grad_in
    }

    /// Forward pass on a prepared tensor (spatial dims divisible by 8,
    /// values pre-scaled by 1/255). Returns the sigma-map tensor (1 channel)
    /// and the trace needed for backprop.
    pub fn forward_trace(&self, params: &[f64], input: &Tensor) -> Result<(Tensor, Trace)> {
        if input.channels != self.config.input_channels {
            return Err(Error::InvalidParameter("input channel count does not match the config"));
        }
        if input.height % 8 != 0 || input.width % 8 != 0 {
            return Err(Error::InvalidParameter("input spatial dims must be divisible by 8"));
        }
        debug_assert_eq!(params.len(), self.n_params);
        let nb = self.config.blocks_per_level;
        let mut tape: Vec<Tensor> = Vec::new();
        let mut ei = 0usize;

        // encoder
        tape.push(input.clone());
        let mut x = self.apply(params, ei, input)?;
        ei += 1;
        let mut skips: Vec<Tensor> = Vec::with_capacity(3);
        for _level in 0..3 {
            for _ in 0..nb {
                x = self.res_forward(params, ei, &mut tape, x)?;
                ei += 2;
            }
            skips.push(x.clone());
            tape.push(x.clone());
            x = self.apply(params, ei, &x)?;
            ei += 1;
        }
        for _ in 0..nb {
            x = self.res_forward(params, ei, &mut tape, x)?;
            ei += 2;
        }

        // decoder
        for level in (0..3).rev() {
            tape.push(x.clone());
            x = self.apply(params, ei, &x)?;
            ei += 1;
            let skip = &skips[level];
            for (o, s) in x.data.iter_mut().zip(&skip.data) {
                *o += s;
            }
            for _ in 0..nb {
                x = self.res_forward(params, ei, &mut tape, x)?;
                ei += 2;
            }
        }

        // head: conv_out + input skip, then softplus
        tape.push(x.clone());
        let mut pre = self.apply(params, ei, &x)?;
        ei += 1;
        let skip = self.apply(params, ei, input)?;
        ei += 1;
        debug_assert_eq!(ei, self.entries.len());
        for (p, s) in pre.data.iter_mut().zip(&skip.data) {
            *p += s;
        }
        let mut out = pre.clone();
        for v in out.data.iter_mut() {
            *v = ops::softplus(*v);
        }
        Ok((out, Trace { tape, pre_final: pre, input: input.clone() }))
    }

    /// Inference-only forward pass.
    pub fn forward_tensor(&self, params: &[f64], input: &Tensor) -> Result<Tensor> {
        Ok(self.forward_trace(params, input)?.0)
    }

    /// Backward pass: gradient of a scalar loss with respect to every
    /// parameter, given the loss gradient with respect to the output map.
    pub fn backward(
        &self,
        params: &[f64],
        trace: &mut Trace,
        grad_out_map: &Tensor,
        grads: &mut [f64],
    ) -> Result<()> {
        if !grad_out_map.is_finite() {
            return Err(Error::NonFinite("output gradient".into()));
        }
        let nb = self.config.blocks_per_level;
        let n_entries = self.entries.len();
        let mut g = grad_out_map.clone();
        for (gv, &p) in g.data.iter_mut().zip(&trace.pre_final.data) {
            *gv *= ops::softplus_grad(p);
        }

        // head (reverse): skip_in, then conv_out
        let mut ei = n_entries - 1;
        let _ = self.apply_backward(params, ei, &trace.input, &g, grads);
        ei -= 1;
        let u0 = trace.tape.pop().expect("tape: conv_out input");
        let mut g = self.apply_backward(params, ei, &u0, &g, grads);

        // decoder (reverse): levels 0, 1, 2
        let mut skip_grads: Vec<Option<Tensor>> = vec![None, None, None];
        for level in 0..3 {
            for _ in 0..nb {
                ei -= 2;
                g = self.res_backward(params, ei, &mut trace.tape, &g, grads);
            }
            // additive skip: gradient branches to the encoder side
            skip_grads[level] = Some(g.clone());
            ei -= 1;
            let up_in = trace.tape.pop().expect("tape: upsample input");
            g = self.apply_backward(params, ei, &up_in, &g, grads);
        }

        // mid cascade
        for _ in 0..nb {
            ei -= 2;
            g = self.res_backward(params, ei, &mut trace.tape, &g, grads);
        }

        // encoder (reverse): levels 2, 1, 0
        for level in (0..3).rev() {
            ei -= 1;
            let down_in = trace.tape.pop().expect("tape: downsample input");
            g = self.apply_backward(params, ei, &down_in, &g, grads);
            let sg = skip_grads[level].take().expect("skip gradient");
            for (gv, s) in g.data.iter_mut().zip(&sg.data) {
                *gv += s;
            }
            for _ in 0..nb {
                ei -= 2;
                g = self.res_backward(params, ei, &mut trace.tape, &g, grads);
            }
        }

        // stem
        ei -= 1;
        debug_assert_eq!(ei, 0);
        let stem_in = trace.tape.pop().expect("tape: conv_in input");
        let _ = self.apply_backward(params, ei, &stem_in, &g, grads);
        debug_assert!(trace.tape.is_empty());
        Ok(())
    }

    /// Full-image forward: reflect-pads the raster so both dims are
    /// divisible by 8, runs the network, and crops back.
    pub fn forward_raster(&self, params: &[f64], image: &Raster) -> Result<SigmaMap> {
        if image.channels() != self.config.input_channels {
            return Err(Error::InvalidParameter("raster channels do not match the config"));
        }
        let (w, h) = (image.width(), image.height());
        let pw = w.div_ceil(8) * 8;
        let ph = h.div_ceil(8) * 8;
        if pw - w >= w || ph - h >= h {
            return Err(Error::DegenerateInput("image too small to reflect-pad to a multiple of 8"));
        }
        let mut t = Tensor::zeros(self.config.input_channels, ph, pw);
        for y in 0..ph {
            let sy = if y < h { y } else { 2 * h - 2 - y };
            for x in 0..pw {
                let sx = if x < w { x } else { 2 * w - 2 - x };
                for c in 0..self.config.input_channels {
                    t.set(c, y, x, image.get(sx, sy, c) / 255.0);
                }
            }
        }
        let out = self.forward_tensor(params, &t)?;
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            data.extend_from_slice(&out.row(0, y)[..w]);
        }
        SigmaMap::from_vec(w, h, data)
    }
}

/// Mean squared error between two equally-shaped maps.
pub fn loss_mse(pred: &SigmaMap, target: &SigmaMap) -> Result<f64> {
    if pred.width() != target.width() || pred.height() != target.height() {
        return Err(Error::DimensionMismatch {
            expected: (target.width(), target.height()),
            got: (pred.width(), pred.height()),
        });
    }
    let n = pred.data().len() as f64;
    Ok(pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

//! Primitive layer operations with matching analytic backward passes.
//!
//! Convolution weights are flat slices shaped `[co][ci][kh][kw]` (transposed
//! convolutions `[ci][co][kh][kw]`). All convolutions here are the exact
//! variants the model needs: 3x3 stride-1 "same" with zero padding, 3x3
//! stride-2 downsampling, and 2x2 stride-2 transposed upsampling.

use super::tensor::Tensor;

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reflect-101 boundary handling: index -1 maps to 1, index n to n - 2.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    if i < 0 {
        (-i) as usize
    } else if i as usize >= n {
        2 * n - 2 - i as usize
    } else {
        i as usize
    }
}

/// 3x3 stride-1 convolution with reflective padding 1 ("same" output).
///
/// Reflective padding keeps constant inputs constant through the layer,
/// which avoids border bias in the estimated sigma-map.
pub fn conv3_forward(input: &Tensor, w: &[f64], b: &[f64], co: usize) -> Tensor {
    let (ci, h, wd) = (input.channels, input.height, input.width);
    debug_assert_eq!(w.len(), co * ci * 9);
    debug_assert!(h >= 2 && wd >= 2);
    let mut out = Tensor::zeros(co, h, wd);
    for oc in 0..co {
        for y in 0..h {
            out.row_mut(oc, y).fill(b[oc]);
        }
        for ic in 0..ci {
            for ky in 0..3usize {
                for kx in 0..3usize {
                    let wv = w[((oc * ci + ic) * 3 + ky) * 3 + kx];
                    if wv == 0.0 {
                        continue;
                    }
                    let dy = ky as isize - 1;
                    let dx = kx as isize - 1;
                    for y in 0..h {
                        let iy = reflect(y as isize + dy, h);
                        let in_row = input.row(ic, iy);
                        let out_row = out.row_mut(oc, y);
                        match dx {
                            -1 => {
                                out_row[0] += wv * in_row[1];
                                axpy(wv, &in_row[..wd - 1], &mut out_row[1..]);
                            }
                            0 => axpy(wv, in_row, out_row),
                            _ => {
                                axpy(wv, &in_row[1..], &mut out_row[..wd - 1]);
                                out_row[wd - 1] += wv * in_row[wd - 2];
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Backward pass of [`conv3_forward`]; returns (grad_input, grad_w, grad_b).
pub fn conv3_backward(
    input: &Tensor,
    w: &[f64],
    co: usize,
    grad_out: &Tensor,
) -> (Tensor, alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let (ci, h, wd) = (input.channels, input.height, input.width);
    let mut grad_in = Tensor::zeros(ci, h, wd);
    let mut grad_w = alloc::vec![0.0; w.len()];
    let mut grad_b = alloc::vec![0.0; co];
    for oc in 0..co {
        for y in 0..h {
            grad_b[oc] += grad_out.row(oc, y).iter().sum::<f64>();
        }
        for ic in 0..ci {
            for ky in 0..3usize {
                for kx in 0..3usize {
                    let widx = ((oc * ci + ic) * 3 + ky) * 3 + kx;
                    let wv = w[widx];
                    let dy = ky as isize - 1;
                    let dx = kx as isize - 1;
                    let mut gw = 0.0;
                    for y in 0..h {
                        let iy = reflect(y as isize + dy, h);
                        let in_row = input.row(ic, iy);
                        let go_row = grad_out.row(oc, y);
                        match dx {
                            -1 => {
                                gw += go_row[0] * in_row[1];
                                gw += dot(&go_row[1..], &in_row[..wd - 1]);
                            }
                            0 => gw += dot(go_row, in_row),
                            _ => {
                                gw += dot(&go_row[..wd - 1], &in_row[1..]);
                                gw += go_row[wd - 1] * in_row[wd - 2];
                            }
                        }
                        if wv != 0.0 {
                            let gi_row = grad_in.row_mut(ic, iy);
                            match dx {
                                -1 => {
                                    gi_row[1] += wv * go_row[0];
                                    axpy(wv, &go_row[1..], &mut gi_row[..wd - 1]);
                                }
                                0 => axpy(wv, go_row, gi_row),
                                _ => {
                                    axpy(wv, &go_row[..wd - 1], &mut gi_row[1..]);
                                    gi_row[wd - 2] += wv * go_row[wd - 1];
                                }
                            }
                        }
                    }
                    grad_w[widx] += gw;
                }
            }
        }
    }
    (grad_in, grad_w, grad_b)
}

/// 3x3 stride-2 convolution with reflective padding 1; halves even spatial
/// dims.
pub fn sconv3_forward(input: &Tensor, w: &[f64], b: &[f64], co: usize) -> Tensor {
    let (ci, h, wd) = (input.channels, input.height, input.width);
    let (oh, ow) = (h.div_ceil(2), wd.div_ceil(2));
    let mut out = Tensor::zeros(co, oh, ow);
    for oc in 0..co {
        for y in 0..oh {
            for x in 0..ow {
                let mut acc = b[oc];
                for ic in 0..ci {
                    for ky in 0..3usize {
                        let iy = reflect((2 * y + ky) as isize - 1, h);
                        let in_row = input.row(ic, iy);
                        for kx in 0..3usize {
                            let ix = reflect((2 * x + kx) as isize - 1, wd);
                            acc += w[((oc * ci + ic) * 3 + ky) * 3 + kx] * in_row[ix];
                        }
                    }
                }
                out.set(oc, y, x, acc);
            }
        }
    }
    out
}

/// Backward pass of [`sconv3_forward`].
pub fn sconv3_backward(
    input: &Tensor,
    w: &[f64],
    co: usize,
    grad_out: &Tensor,
) -> (Tensor, alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let (ci, h, wd) = (input.channels, input.height, input.width);
    let (oh, ow) = (grad_out.height, grad_out.width);
    let mut grad_in = Tensor::zeros(ci, h, wd);
    let mut grad_w = alloc::vec![0.0; w.len()];
    let mut grad_b = alloc::vec![0.0; co];
    for oc in 0..co {
        for y in 0..oh {
            for x in 0..ow {
                let go = grad_out.get(oc, y, x);
                grad_b[oc] += go;
                for ic in 0..ci {
                    for ky in 0..3usize {
                        let iy = reflect((2 * y + ky) as isize - 1, h);
                        for kx in 0..3usize {
                            let ix = reflect((2 * x + kx) as isize - 1, wd);
                            let widx = ((oc * ci + ic) * 3 + ky) * 3 + kx;
                            grad_w[widx] += go * input.get(ic, iy, ix);
                            grad_in.data[(ic * h + iy) * wd + ix] += go * w[widx];
                        }
                    }
                }
            }
        }
    }
    (grad_in, grad_w, grad_b)
}

/// 2x2 stride-2 transposed convolution with tied taps; doubles spatial
/// dims. All four taps of each (input, output) channel pair share one
/// weight (`[ci][co]` layout), which makes the upsampling checkerboard-free:
/// a constant input always produces a constant output.
pub fn tconv2_forward(input: &Tensor, w: &[f64], b: &[f64], co: usize) -> Tensor {
    let (ci, h, wd) = (input.channels, input.height, input.width);
    let mut out = Tensor::zeros(co, 2 * h, 2 * wd);
    let mut line = alloc::vec![0.0; 2 * wd];
    for oc in 0..co {
        for y in 0..h {
            line.fill(b[oc]);
            for ic in 0..ci {
                let wv = w[ic * co + oc];
                if wv == 0.0 {
                    continue;
                }
                let in_row = input.row(ic, y);
                for x in 0..wd {
                    let v = wv * in_row[x];
                    line[2 * x] += v;
                    line[2 * x + 1] += v;
                }
            }
            out.row_mut(oc, 2 * y).copy_from_slice(&line);
            out.row_mut(oc, 2 * y + 1).copy_from_slice(&line);
        }
    }
    out
}

/// Backward pass of [`tconv2_forward`].
pub fn tconv2_backward(
    input: &Tensor,
    w: &[f64],
    co: usize,
    grad_out: &Tensor,
) -> (Tensor, alloc::vec::Vec<f64>, alloc::vec::Vec<f64>) {
    let (ci, h, wd) = (input.channels, input.height, input.width);
    let mut grad_in = Tensor::zeros(ci, h, wd);
    let mut grad_w = alloc::vec![0.0; w.len()];
    let mut grad_b = alloc::vec![0.0; co];
    // Pool the output gradient over each 2x2 cell once per output channel.
    let mut pooled = Tensor::zeros(co, h, wd);
    for oc in 0..co {
        grad_b[oc] = grad_out.data[oc * 4 * h * wd..(oc + 1) * 4 * h * wd].iter().sum();
        for y in 0..h {
            let top = grad_out.row(oc, 2 * y);
            let bot = grad_out.row(oc, 2 * y + 1);
            let dst = pooled.row_mut(oc, y);
            for x in 0..wd {
                dst[x] = top[2 * x] + top[2 * x + 1] + bot[2 * x] + bot[2 * x + 1];
            }
        }
    }
    for ic in 0..ci {
        for oc in 0..co {
            let wv = w[ic * co + oc];
            let mut gw = 0.0;
            for y in 0..h {
                let pr = pooled.row(oc, y);
                let in_row = input.row(ic, y);
                let gi_row = grad_in.row_mut(ic, y);
                for x in 0..wd {
                    gw += pr[x] * in_row[x];
                    gi_row[x] += wv * pr[x];
                }
            }
            grad_w[ic * co + oc] = gw;
        }
    }
    (grad_in, grad_w, grad_b)
}

pub fn relu_forward(input: &Tensor) -> Tensor {
    let mut out = input.clone();
    for v in out.data.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    out
}

pub fn relu_backward(input: &Tensor, grad_out: &Tensor) -> Tensor {
    let mut grad_in = grad_out.clone();
    for (g, &x) in grad_in.data.iter_mut().zip(&input.data) {
        if x <= 0.0 {
            *g = 0.0;
        }
    }
    grad_in
}

/// Numerically stable softplus `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        libm::exp(x)
    } else {
        libm::log(1.0 + libm::exp(x))
    }
}

/// Derivative of softplus: the logistic sigmoid.
pub fn softplus_grad(x: f64) -> f64 {
    if x > 30.0 {
        1.0
    } else if x < -30.0 {
        libm::exp(x)
    } else {
        1.0 / (1.0 + libm::exp(-x))
    }
}

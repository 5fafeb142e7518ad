//! Forward and reverse-mode passes over an [`Architecture`] for one example.

use super::arch::{Architecture, Layer};

/// Inputs to every layer, kept for the backward pass.
pub(crate) struct Trace {
    inputs: Vec<Vec<f64>>,
    pub(crate) logits: Vec<f64>,
}

pub(crate) fn forward(arch: &Architecture, weights: &[f64], x: &[f64]) -> Vec<f64> {
    let mut act = x.to_vec();
    for (layer, offset) in arch.layer_offsets() {
        act = apply(layer, &weights[offset..offset + layer.param_count()], &act);
    }
    act
}

pub(crate) fn forward_trace(arch: &Architecture, weights: &[f64], x: &[f64]) -> Trace {
    let offsets = arch.layer_offsets();
    let mut inputs = Vec::with_capacity(offsets.len());
    let mut act = x.to_vec();
    for (layer, offset) in offsets {
        let next = apply(layer, &weights[offset..offset + layer.param_count()], &act);
        inputs.push(act);
        act = next;
    }
    Trace {
        inputs,
        logits: act,
    }
}

/// Accumulates `d loss / d weights` into `grad` given `d loss / d logits`.
pub(crate) fn backward(
    arch: &Architecture,
    weights: &[f64],
    trace: &Trace,
    dlogits: &[f64],
    grad: &mut [f64],
) {
    let offsets = arch.layer_offsets();
    let mut upstream = dlogits.to_vec();
    for (i, (layer, offset)) in offsets.iter().enumerate().rev() {
        let n = layer.param_count();
        let params = &weights[*offset..offset + n];
        let g = &mut grad[*offset..offset + n];
        // The first layer's input gradient is never used.
        let need_input_grad = i > 0;
        upstream = back(
            layer,
            params,
            &trace.inputs[i],
            &upstream,
            g,
            need_input_grad,
        );
    }
}

fn apply(layer: &Layer, params: &[f64], x: &[f64]) -> Vec<f64> {
    match *layer {
        Layer::Dense { inputs, outputs } => {
            let (w, b) = params.split_at(inputs * outputs);
            (0..outputs)
                .map(|o| {
                    let row = &w[o * inputs..(o + 1) * inputs];
                    b[o] + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
                })
                .collect()
        }
        Layer::Relu => x.iter().map(|&v| v.max(0.0)).collect(),
        Layer::Conv2d {
            in_channels,
            out_channels,
            height,
            width,
            kernel,
        } => {
            let (w, b) = params.split_at(layer.weight_count());
            let pad = kernel / 2;
            let mut out = vec![0.0; out_channels * height * width];
            for oc in 0..out_channels {
                for y in 0..height {
                    for xx in 0..width {
                        let mut acc = b[oc];
                        for ic in 0..in_channels {
                            for ky in 0..kernel {
                                let Some(iy) = (y + ky).checked_sub(pad).filter(|&v| v < height)
                                else {
                                    continue;
                                };
                                for kx in 0..kernel {
                                    let Some(ix) =
                                        (xx + kx).checked_sub(pad).filter(|&v| v < width)
                                    else {
                                        continue;
                                    };
                                    acc += w[((oc * in_channels + ic) * kernel + ky) * kernel + kx]
                                        * x[(ic * height + iy) * width + ix];
                                }
                            }
                        }
                        out[(oc * height + y) * width + xx] = acc;
                    }
                }
            }
            out
        }
        Layer::AvgPool2 {
            channels,
            height,
            width,
        } => {
            let (oh, ow) = (height / 2, width / 2);
            let mut out = vec![0.0; channels * oh * ow];
            for c in 0..channels {
                for y in 0..oh {
                    for xx in 0..ow {
                        let at = |dy: usize, dx: usize| {
                            x[(c * height + 2 * y + dy) * width + 2 * xx + dx]
                        };
                        out[(c * oh + y) * ow + xx] =
                            0.25 * (at(0, 0) + at(0, 1) + at(1, 0) + at(1, 1));
                    }
                }
            }
            out
        }
    }
}

fn back(
    layer: &Layer,
    params: &[f64],
    x: &[f64],
    dy: &[f64],
    grad: &mut [f64],
    need_input_grad: bool,
) -> Vec<f64> {
    match *layer {
        Layer::Dense { inputs, outputs } => {
            let (w, _) = params.split_at(inputs * outputs);
            let (gw, gb) = grad.split_at_mut(inputs * outputs);
            let mut dx = if need_input_grad {
                vec![0.0; inputs]
            } else {
                Vec::new()
            };
            for o in 0..outputs {
                let d = dy[o];
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                let row = &mut gw[o * inputs..(o + 1) * inputs];
                for (g, v) in row.iter_mut().zip(x) {
                    *g += d * v;
                }
                if need_input_grad {
                    for (acc, a) in dx.iter_mut().zip(&w[o * inputs..(o + 1) * inputs]) {
                        *acc += a * d;
                    }
                }
            }
            dx
        }
        Layer::Relu => x
            .iter()
            .zip(dy)
            .map(|(&v, &d)| if v > 0.0 { d } else { 0.0 })
            .collect(),
        Layer::Conv2d {
            in_channels,
            out_channels,
            height,
            width,
            kernel,
        } => {
            let wc = layer.weight_count();
            let w = &params[..wc];
            let (gw, gb) = grad.split_at_mut(wc);
            let pad = kernel / 2;
            let mut dx = vec![0.0; if need_input_grad { x.len() } else { 0 }];
            for oc in 0..out_channels {
                for y in 0..height {
                    for xx in 0..width {
                        let d = dy[(oc * height + y) * width + xx];
                        if d == 0.0 {
                            continue;
                        }
                        gb[oc] += d;
                        for ic in 0..in_channels {
                            for ky in 0..kernel {
                                let Some(iy) = (y + ky).checked_sub(pad).filter(|&v| v < height)
                                else {
                                    continue;
                                };
                                for kx in 0..kernel {
                                    let Some(ix) =
                                        (xx + kx).checked_sub(pad).filter(|&v| v < width)
                                    else {
                                        continue;
                                    };
                                    let wi = ((oc * in_channels + ic) * kernel + ky) * kernel + kx;
                                    let xi = (ic * height + iy) * width + ix;
                                    gw[wi] += d * x[xi];
                                    if need_input_grad {
                                        dx[xi] += d * w[wi];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            dx
        }
        Layer::AvgPool2 {
            channels,
            height,
            width,
        } => {
            let (oh, ow) = (height / 2, width / 2);
            let mut dx = vec![0.0; channels * height * width];
            for c in 0..channels {
                for y in 0..oh {
                    for xx in 0..ow {
                        let d = 0.25 * dy[(c * oh + y) * ow + xx];
                        for dy_ in 0..2 {
                            for dx_ in 0..2 {
                                dx[(c * height + 2 * y + dy_) * width + 2 * xx + dx_] = d;
                            }
                        }
                    }
                }
            }
            dx
        }
    }
}

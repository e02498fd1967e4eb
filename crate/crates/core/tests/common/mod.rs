#![allow(dead_code)]

use tdiv_core::rng::SplitMix64;
use tdiv_core::tcn::{ConvLayer, TcnModel, TemporalPadding};
use tdiv_core::{Frame, FrameSequence};

pub fn random_frame(rng: &mut SplitMix64, h: usize, w: usize, c: usize) -> Frame {
    let data = (0..h * w * c).map(|_| rng.next_f64() as f32).collect();
    Frame::new(h, w, c, data).unwrap()
}

pub fn random_sequence(
    rng: &mut SplitMix64,
    n: usize,
    h: usize,
    w: usize,
    c: usize,
) -> FrameSequence {
    FrameSequence::new((0..n).map(|_| random_frame(rng, h, w, c)).collect()).unwrap()
}

/// Naive reference forward: explicit zero-padded input, loops in
/// `(f, c, k_t, k_h, k_w)` order, `[c][t][h][w]` layout.
pub fn reference_forward(model: &TcnModel, seq: &FrameSequence) -> (Vec<f64>, Vec<f64>) {
    let (h, w, c) = seq.shape();
    let k = seq.len();
    // [c][t][h][w]
    let mut x: Vec<Vec<Vec<Vec<f64>>>> = (0..c)
        .map(|ch| {
            (0..k)
                .map(|t| {
                    (0..h)
                        .map(|y| {
                            (0..w)
                                .map(|xx| seq.frame(t).get(y, xx, ch) as f64)
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let symmetric = model.temporal_padding() == TemporalPadding::Symmetric;
    let slope = model.config().leaky_slope;
    for layer in model.trunk() {
        x = reference_layer(layer, &x, symmetric, slope);
    }
    let head = |layer: &ConvLayer| -> Vec<f64> {
        let out = reference_layer(layer, &x, symmetric, slope);
        (0..k)
            .map(|t| {
                let map = &out[0][t];
                let n = (map.len() * map[0].len()) as f64;
                map.iter().flatten().sum::<f64>() / n
            })
            .collect()
    };
    (head(model.reward_head()), head(model.q_head()))
}

fn reference_layer(
    layer: &ConvLayer,
    x: &[Vec<Vec<Vec<f64>>>],
    symmetric: bool,
    slope: f64,
) -> Vec<Vec<Vec<Vec<f64>>>> {
    let cfg = layer.config();
    let [f_n, c_n, kt_n, kh_n, kw_n] = layer.weight_shape();
    let (k, h, w) = (x[0].len(), x[0][0].len(), x[0][0][0].len());
    let d = cfg.temporal_dilation;
    let total = (kt_n - 1) * d;
    let left = if symmetric { total / 2 } else { total };
    let [ph, pw] = cfg.spatial_padding;
    let [sh, sw] = cfg.spatial_stride;
    let (hp, wp) = (h + 2 * ph, w + 2 * pw);
    let tp = k + total;
    // Explicitly padded copy.
    let mut padded = vec![vec![vec![vec![0.0; wp]; hp]; tp]; c_n];
    for ch in 0..c_n {
        for t in 0..k {
            for y in 0..h {
                for xx in 0..w {
                    padded[ch][t + left][y + ph][xx + pw] = x[ch][t][y][xx];
                }
            }
        }
    }
    let oh_n = (hp - kh_n) / sh + 1;
    let ow_n = (wp - kw_n) / sw + 1;
    let wt = layer.weight();
    let mut out = vec![vec![vec![vec![0.0; ow_n]; oh_n]; k]; f_n];
    for f in 0..f_n {
        for t in 0..k {
            for oh in 0..oh_n {
                for ow in 0..ow_n {
                    let mut acc = layer.bias()[f];
                    for ch in 0..c_n {
                        for kt in 0..kt_n {
                            for kh in 0..kh_n {
                                for kw in 0..kw_n {
                                    let wi = (((f * c_n + ch) * kt_n + kt) * kh_n + kh) * kw_n + kw;
                                    acc +=
                                        wt[wi] * padded[ch][t + kt * d][oh * sh + kh][ow * sw + kw];
                                }
                            }
                        }
                    }
                    if let Some(bn) = layer.batchnorm() {
                        acc = (acc - bn.running_mean[f]) / (bn.running_var[f] + bn.eps).sqrt()
                            * bn.scale[f]
                            + bn.shift[f];
                    }
                    if cfg.activation && acc < 0.0 {
                        acc *= slope;
                    }
                    out[f][t][oh][ow] = acc;
                }
            }
        }
    }
    out
}

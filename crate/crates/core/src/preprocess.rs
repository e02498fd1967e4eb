//! Classifier input preparation: bicubic resize, per-channel normalization
//! and center crop, assembled into the two common 64 -> 112 pipelines.
//!
//! * `A`: resize to 128, normalize, center-crop 112.
//! * `B`: resize to 112, normalize.
//!
//! The two are not equivalent; their outputs differ on any non-constant
//! input because the sampling grids differ.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameSequence};
use crate::par::map_range;

/// Catmull-Rom cubic convolution parameter.
pub const CUBIC_A: f64 = -0.5;

/// Cubic convolution kernel with `a = -0.5`.
#[inline]
pub fn cubic_kernel(x: f64) -> f64 {
    let a = CUBIC_A;
    let x = libm::fabs(x);
    if x <= 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    } else {
        0.0
    }
}

/// Source taps and weights for one output coordinate along one axis.
#[derive(Debug, Clone, Copy)]
struct Taps {
    index: [usize; 4],
    weight: [f64; 4],
}

/// Half-pixel-centre mapping `src = (dst + 0.5) * in/out - 0.5`, edges
/// clamped.
fn axis_taps(in_len: usize, out_len: usize) -> Vec<Taps> {
    let scale = in_len as f64 / out_len as f64;
    let last = in_len as isize - 1;
    (0..out_len)
        .map(|dst| {
            let src = (dst as f64 + 0.5) * scale - 0.5;
            let base = libm::floor(src);
            let frac = src - base;
            let base = base as isize;
            let mut t = Taps {
                index: [0; 4],
                weight: [0.0; 4],
            };
            for k in 0..4 {
                let offset = k as isize - 1;
                t.index[k] = (base + offset).clamp(0, last) as usize;
                t.weight[k] = cubic_kernel(frac - offset as f64);
            }
            t
        })
        .collect()
}

/// Separable bicubic resample; output clamped to `[0, 1]`.
pub fn bicubic_resize(frame: &Frame, out_h: usize, out_w: usize) -> Result<Frame> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::InvalidParameter("output dimensions must be >= 1"));
    }
    let (h, w, c) = frame.shape();
    let xs = axis_taps(w, out_w);
    let ys = axis_taps(h, out_h);
    let src = frame.data();

    let mut rows = alloc::vec![0.0f64; h * out_w * c];
    for y in 0..h {
        for (x, t) in xs.iter().enumerate() {
            for ch in 0..c {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += t.weight[k] * src[(y * w + t.index[k]) * c + ch] as f64;
                }
                rows[(y * out_w + x) * c + ch] = acc;
            }
        }
    }
    let mut out = Vec::with_capacity(out_h * out_w * c);
    for t in &ys {
        for x in 0..out_w {
            for ch in 0..c {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += t.weight[k] * rows[(t.index[k] * out_w + x) * c + ch];
                }
                out.push((acc as f32).clamp(0.0, 1.0));
            }
        }
    }
    Ok(Frame::from_clamped(out_h, out_w, c, out))
}

/// Top-left offset of a centered `size x size` window.
pub fn center_crop_offset(height: usize, width: usize, size: usize) -> Result<(usize, usize)> {
    if size == 0 || size > height || size > width {
        return Err(Error::CropTooLarge {
            size,
            height,
            width,
        });
    }
    Ok(((height - size) / 2, (width - size) / 2))
}

fn crop_plane<T: Copy>(
    data: &[T],
    width: usize,
    channels: usize,
    off: (usize, usize),
    size: usize,
) -> Vec<T> {
    let mut out = Vec::with_capacity(size * size * channels);
    for y in off.0..off.0 + size {
        let start = (y * width + off.1) * channels;
        out.extend_from_slice(&data[start..start + size * channels]);
    }
    out
}

pub fn center_crop(frame: &Frame, size: usize) -> Result<Frame> {
    let (h, w, c) = frame.shape();
    let off = center_crop_offset(h, w, size)?;
    Ok(Frame::from_clamped(
        size,
        size,
        c,
        crop_plane(frame.data(), w, c, off, size),
    ))
}

/// Per-channel normalization constants of the downstream classifier.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormStats {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl NormStats {
    pub fn new(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() || mean.is_empty() {
            return Err(Error::LengthMismatch {
                left: mean.len(),
                right: std.len(),
            });
        }
        if std.iter().any(|s| !(*s > 0.0) || !s.is_finite()) || mean.iter().any(|m| !m.is_finite())
        {
            return Err(Error::InvalidParameter(
                "std must be positive and all stats finite",
            ));
        }
        Ok(Self { mean, std })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }
}

/// A `(K, H, W, C)` tensor with unbounded values, channel-interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSequence {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl NormalizedSequence {
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.frames, self.height, self.width, self.channels)
    }

    pub fn frame_data(&self, k: usize) -> &[f64] {
        let n = self.height * self.width * self.channels;
        &self.data[k * n..(k + 1) * n]
    }

    /// Center crop of every frame.
    pub fn center_crop(&self, size: usize) -> Result<NormalizedSequence> {
        let off = center_crop_offset(self.height, self.width, size)?;
        let mut data = Vec::with_capacity(self.frames * size * size * self.channels);
        for k in 0..self.frames {
            data.extend(crop_plane(
                self.frame_data(k),
                self.width,
                self.channels,
                off,
                size,
            ));
        }
        Ok(NormalizedSequence {
            frames: self.frames,
            height: size,
            width: size,
            channels: self.channels,
            data,
        })
    }
}

/// `(x - mean_c) / std_c` per channel.
pub fn normalize(seq: &FrameSequence, stats: &NormStats) -> Result<NormalizedSequence> {
    let (h, w, c) = seq.shape();
    if c != stats.channels() {
        return Err(Error::LengthMismatch {
            left: c,
            right: stats.channels(),
        });
    }
    let mut data = Vec::with_capacity(seq.len() * h * w * c);
    for f in seq.frames() {
        data.extend(
            f.data()
                .iter()
                .enumerate()
                .map(|(i, &v)| (v as f64 - stats.mean[i % c]) / stats.std[i % c]),
        );
    }
    Ok(NormalizedSequence {
        frames: seq.len(),
        height: h,
        width: w,
        channels: c,
        data,
    })
}

/// Inverse of [`normalize`].
pub fn denormalize(t: &NormalizedSequence, stats: &NormStats) -> Result<Vec<f64>> {
    if t.channels != stats.channels() {
        return Err(Error::LengthMismatch {
            left: t.channels,
            right: stats.channels(),
        });
    }
    let c = t.channels;
    Ok(t.data
        .iter()
        .enumerate()
        .map(|(i, &v)| v * stats.std[i % c] + stats.mean[i % c])
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PreprocessAlgo {
    /// Resize to 128, normalize, center-crop 112.
    A,
    /// Resize to 112, normalize.
    B,
}

pub const CLASSIFIER_SIZE: usize = 112;
pub const ALGO_A_RESIZE: usize = 128;
pub const NATIVE_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub tensor: NormalizedSequence,
    pub crop_offset: Option<(usize, usize)>,
    /// Input was not the 64x64 size the pipelines were designed for.
    pub nonstandard_input: bool,
}

pub fn run_pipeline(
    seq: &FrameSequence,
    algo: PreprocessAlgo,
    stats: &NormStats,
) -> Result<PipelineOutput> {
    let (h, w, _) = seq.shape();
    let resize_to = match algo {
        PreprocessAlgo::A => ALGO_A_RESIZE,
        PreprocessAlgo::B => CLASSIFIER_SIZE,
    };
    let resized = map_range(seq.len(), |i| {
        bicubic_resize(seq.frame(i), resize_to, resize_to)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let normalized = normalize(&FrameSequence::new(resized)?, stats)?;
    let (tensor, crop_offset) = match algo {
        PreprocessAlgo::A => (
            normalized.center_crop(CLASSIFIER_SIZE)?,
            Some(center_crop_offset(resize_to, resize_to, CLASSIFIER_SIZE)?),
        ),
        PreprocessAlgo::B => (normalized, None),
    };
    Ok(PipelineOutput {
        tensor,
        crop_offset,
        nonstandard_input: h != NATIVE_SIZE || w != NATIVE_SIZE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn kernel_values() {
        assert_eq!(cubic_kernel(0.0), 1.0);
        assert_eq!(cubic_kernel(1.0), 0.0);
        assert_eq!(cubic_kernel(2.0), 0.0);
        assert_eq!(cubic_kernel(-0.5), 0.5625);
        assert_eq!(cubic_kernel(1.5), -0.0625);
    }

    #[test]
    fn crop_offsets() {
        assert_eq!(center_crop_offset(128, 128, 112).unwrap(), (8, 8));
        assert_eq!(center_crop_offset(5, 7, 4).unwrap(), (0, 1));
        assert!(matches!(
            center_crop_offset(4, 4, 5),
            Err(Error::CropTooLarge { .. })
        ));
    }

    #[test]
    fn crop_full_size_is_identity() {
        let f = Frame::new(2, 2, 1, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(center_crop(&f, 2).unwrap(), f);
        assert_eq!(center_crop(&f, 1).unwrap().data(), &[0.1]);
    }

    #[test]
    fn resize_identity_and_constant() {
        let data: Vec<f32> = (0..48).map(|i| (i as f32) / 47.0).collect();
        let f = Frame::new(4, 4, 3, data).unwrap();
        assert_eq!(bicubic_resize(&f, 4, 4).unwrap(), f);
        let c = Frame::filled(5, 3, 1, 0.37).unwrap();
        let r = bicubic_resize(&c, 11, 8).unwrap();
        assert!(r.data().iter().all(|&v| (v - 0.37).abs() < 1e-6));
        assert!(bicubic_resize(&c, 0, 3).is_err());
    }

    #[test]
    fn stats_validation() {
        assert!(NormStats::new(vec![0.5], vec![0.0]).is_err());
        assert!(NormStats::new(vec![0.5, 0.5], vec![1.0]).is_err());
        let s = NormStats::new(vec![0.5], vec![0.25]).unwrap();
        let seq = FrameSequence::new(vec![Frame::filled(2, 2, 3, 0.5).unwrap()]).unwrap();
        assert!(normalize(&seq, &s).is_err());
    }
}

//! Pairwise frame comparison kernels: MSE, PSNR, SSIM/DSSIM and mean L1.
//!
//! All kernels accumulate in `f64` in a fixed order. SSIM uses a separable
//! Gaussian window applied in "valid" mode (no boundary padding), and is
//! computed per channel then averaged; callers that want luma-only SSIM
//! convert with [`crate::to_grayscale`] first.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Window and stabilizer constants for SSIM on unit-range images.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SsimParams {
    pub window_size: usize,
    pub window_sigma: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for SsimParams {
    /// 11-tap window, sigma 1.5, `c1 = 0.01²`, `c2 = 0.03²`.
    fn default() -> Self {
        Self {
            window_size: 11,
            window_sigma: 1.5,
            c1: 0.01 * 0.01,
            c2: 0.03 * 0.03,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<()> {
        if self.window_size < 3 || self.window_size.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "SSIM window size must be odd and >= 3",
            ));
        }
        if !(self.window_sigma > 0.0) || !self.window_sigma.is_finite() {
            return Err(Error::InvalidParameter(
                "SSIM window sigma must be positive",
            ));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::InvalidParameter(
                "SSIM constants c1, c2 must be positive",
            ));
        }
        Ok(())
    }

    /// Normalized 1D Gaussian taps; the 2D window is their outer product.
    pub fn window(&self) -> Vec<f64> {
        let r = (self.window_size / 2) as f64;
        let denom = 2.0 * self.window_sigma * self.window_sigma;
        let raw: Vec<f64> = (0..self.window_size)
            .map(|i| {
                let d = i as f64 - r;
                libm::exp(-d * d / denom)
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    }
}

/// How multi-channel frames are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ColorMode {
    /// RGB is converted to BT.601 luma before comparison.
    #[default]
    Luma,
    /// Every channel is compared; SSIM is averaged over channels.
    PerChannel,
}

pub fn mse(a: &Frame, b: &Frame) -> Result<f64> {
    a.check_same_shape(b)?;
    let n = a.data().len();
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / n as f64)
}

/// PSNR in dB with peak value 1. Identical frames give `+inf`.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * libm::log10(1.0 / mse)
    }
}

pub fn l1_mean(a: &Frame, b: &Frame) -> Result<f64> {
    a.check_same_shape(b)?;
    let n = a.data().len();
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| libm::fabs(x as f64 - y as f64))
        .sum();
    Ok(sum / n as f64)
}

pub fn ssim(a: &Frame, b: &Frame, p: &SsimParams) -> Result<f64> {
    a.check_same_shape(b)?;
    let sa = SsimStats::new(a, p)?;
    let sb = SsimStats::new(b, p)?;
    Ok(sa.ssim_with(&sb, p))
}

/// `(1 - ssim) / 2`
pub fn dssim(a: &Frame, b: &Frame, p: &SsimParams) -> Result<f64> {
    Ok(dssim_from_ssim(ssim(a, b, p)?))
}

#[inline]
pub fn dssim_from_ssim(s: f64) -> f64 {
    0.5 * (1.0 - s)
}

/// Per-frame SSIM statistics: the local means and local second moments of
/// every channel. Computing them once per frame turns an all-pairs SSIM sweep
/// into one windowed product per pair.
#[derive(Debug, Clone)]
pub struct SsimStats {
    height: usize,
    width: usize,
    window: Vec<f64>,
    planes: Vec<PlaneStats>,
}

#[derive(Debug, Clone)]
struct PlaneStats {
    pixels: Vec<f64>,
    mean: Vec<f64>,
    second_moment: Vec<f64>,
}

impl SsimStats {
    pub fn new(frame: &Frame, p: &SsimParams) -> Result<Self> {
        p.validate()?;
        let (h, w, c) = frame.shape();
        if h < p.window_size || w < p.window_size {
            return Err(Error::FrameTooSmall {
                height: h,
                width: w,
                window: p.window_size,
            });
        }
        let window = p.window();
        let planes = (0..c)
            .map(|ch| {
                let pixels = frame.plane(ch);
                let sq: Vec<f64> = pixels.iter().map(|&v| v * v).collect();
                PlaneStats {
                    mean: blur_valid(&pixels, h, w, &window),
                    second_moment: blur_valid(&sq, h, w, &window),
                    pixels,
                }
            })
            .collect();
        Ok(Self {
            height: h,
            width: w,
            window,
            planes,
        })
    }

    /// SSIM against another frame's statistics (same shape and params).
    pub fn ssim_with(&self, other: &SsimStats, p: &SsimParams) -> f64 {
        debug_assert_eq!(self.planes.len(), other.planes.len());
        let (h, w) = (self.height, self.width);
        let mut total = 0.0;
        let mut cross = Vec::with_capacity(h * w);
        for (pa, pb) in self.planes.iter().zip(&other.planes) {
            cross.clear();
            cross.extend(pa.pixels.iter().zip(&pb.pixels).map(|(x, y)| x * y));
            let cross_moment = blur_valid(&cross, h, w, &self.window);
            let mut acc = 0.0;
            for i in 0..cross_moment.len() {
                let (ma, mb) = (pa.mean[i], pb.mean[i]);
                let va = pa.second_moment[i] - ma * ma;
                let vb = pb.second_moment[i] - mb * mb;
                let cov = cross_moment[i] - ma * mb;
                let num = (2.0 * ma * mb + p.c1) * (2.0 * cov + p.c2);
                let den = (ma * ma + mb * mb + p.c1) * (va + vb + p.c2);
                acc += num / den;
            }
            total += acc / cross_moment.len() as f64;
        }
        (total / self.planes.len() as f64).clamp(-1.0, 1.0)
    }
}

/// Separable windowed sum over every fully-contained window position.
/// Output is `(h - k + 1) x (w - k + 1)`, row-major.
fn blur_valid(img: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut rows = alloc::vec![0.0; h * ow];
    for y in 0..h {
        let src = &img[y * w..(y + 1) * w];
        let dst = &mut rows[y * ow..(y + 1) * ow];
        for (x, out) in dst.iter_mut().enumerate() {
            *out = taps.iter().zip(&src[x..x + k]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = alloc::vec![0.0; oh * ow];
    for y in 0..oh {
        let dst = &mut out[y * ow..(y + 1) * ow];
        for (i, &t) in taps.iter().enumerate() {
            let src = &rows[(y + i) * ow..(y + i + 1) * ow];
            for (o, &v) in dst.iter_mut().zip(src) {
                *o += t * v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ramp(h: usize, w: usize) -> Frame {
        let data = (0..h * w).map(|i| (i % 7) as f32 / 7.0).collect();
        Frame::new(h, w, 1, data).unwrap()
    }

    #[test]
    fn mse_and_psnr_constant_offset() {
        let a = Frame::filled(4, 4, 1, 0.25).unwrap();
        let b = Frame::filled(4, 4, 1, 0.75).unwrap();
        assert_eq!(mse(&a, &b).unwrap(), 0.25);
        assert!((psnr(&a, &b).unwrap() - 6.020599913279624).abs() < 1e-9);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        assert_eq!(l1_mean(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn psnr_at_one_percent_mse() {
        assert!((psnr_from_mse(0.01) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = Frame::filled(4, 4, 1, 0.0).unwrap();
        let b = Frame::filled(4, 5, 1, 0.0).unwrap();
        assert!(matches!(mse(&a, &b), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(l1_mean(&a, &b), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(
            ssim(&a, &b, &SsimParams::default()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn ssim_rejects_small_frames_and_bad_params() {
        let a = Frame::filled(8, 8, 1, 0.0).unwrap();
        assert!(matches!(
            ssim(&a, &a, &SsimParams::default()),
            Err(Error::FrameTooSmall { window: 11, .. })
        ));
        let even = SsimParams {
            window_size: 4,
            ..SsimParams::default()
        };
        assert!(ssim(&a, &a, &even).is_err());
    }

    #[test]
    fn ssim_identity_is_exactly_one() {
        let a = ramp(16, 16);
        assert_eq!(ssim(&a, &a, &SsimParams::default()).unwrap(), 1.0);
        assert_eq!(dssim(&a, &a, &SsimParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn ssim_constant_closed_form() {
        let p = SsimParams::default();
        let a = Frame::filled(16, 16, 1, 0.0).unwrap();
        let b = Frame::filled(16, 16, 1, 1.0).unwrap();
        let expected = p.c1 / (1.0 + p.c1);
        assert!((ssim(&a, &b, &p).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn window_is_normalized_and_symmetric() {
        let w = SsimParams::default().window();
        assert_eq!(w.len(), 11);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..5 {
            assert_eq!(w[i], w[10 - i]);
        }
    }

    #[test]
    fn blur_matches_direct_2d_sum() {
        let (h, w) = (13, 12);
        let img: Vec<f64> = (0..h * w).map(|i| ((i * 37) % 11) as f64 / 11.0).collect();
        let taps = vec![0.25, 0.5, 0.25];
        let out = blur_valid(&img, h, w, &taps);
        for y in 0..h - 2 {
            for x in 0..w - 2 {
                let mut direct = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        direct += taps[i] * taps[j] * img[(y + i) * w + x + j];
                    }
                }
                assert!((out[y * (w - 2) + x] - direct).abs() < 1e-14);
            }
        }
    }
}

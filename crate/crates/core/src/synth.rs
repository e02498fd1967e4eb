//! Synthetic temporal artifacts for metric validation: looping, freezing and
//! additive Gaussian noise.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameSequence};
use crate::par::map_range;
use crate::rng::{position_key, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ArtifactMode {
    /// `base ++ base`
    LoopingFwd,
    /// `base ++ reverse(base)`; the boundary frame appears twice.
    LoopingBwd,
    /// `base ++ [last; N]`
    Freezing,
}

/// Doubles `base` by appending its artifact counterpart.
pub fn synthesize(base: &FrameSequence, mode: ArtifactMode) -> Result<FrameSequence> {
    let frames = base.frames();
    let last = frames.last().ok_or(Error::EmptySequence)?;
    let mut out = Vec::with_capacity(2 * frames.len());
    out.extend_from_slice(frames);
    match mode {
        ArtifactMode::LoopingFwd => out.extend_from_slice(frames),
        ArtifactMode::LoopingBwd => out.extend(frames.iter().rev().cloned()),
        ArtifactMode::Freezing => out.extend(core::iter::repeat_n(last, frames.len()).cloned()),
    }
    Ok(FrameSequence::new(out)?.with_frame_rate(base.frame_rate()))
}

/// Per-pixel additive noise `N(mean, variance)`, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseSpec {
    pub mean: f64,
    pub variance: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.variance >= 0.0) || !self.variance.is_finite() || !self.mean.is_finite() {
            return Err(Error::InvalidParameter(
                "noise variance must be finite and >= 0",
            ));
        }
        Ok(())
    }

    /// Unclamped noise value for element `index` of frame `frame`.
    pub fn sample(&self, frame: usize, index: usize) -> f64 {
        let mut rng = SplitMix64::new(position_key(self.seed, frame, index));
        self.mean + libm::sqrt(self.variance) * rng.next_gaussian()
    }
}

/// Adds seeded noise to every pixel and channel. Each element draws from its
/// own position-keyed SplitMix64 stream, so output is independent of
/// scheduling and bitwise reproducible.
pub fn add_noise(seq: &FrameSequence, spec: &NoiseSpec) -> Result<FrameSequence> {
    spec.validate()?;
    let frames = map_range(seq.len(), |f| {
        let src = seq.frame(f);
        let (h, w, c) = src.shape();
        let data = src
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| ((v as f64 + spec.sample(f, i)) as f32).clamp(0.0, 1.0))
            .collect();
        Frame::from_clamped(h, w, c, data)
    });
    Ok(FrameSequence::new(frames)?.with_frame_rate(seq.frame_rate()))
}

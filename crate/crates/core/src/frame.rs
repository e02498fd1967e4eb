//! Frames and frame sequences.
//!
//! Pixel data is stored row-major and channel-interleaved as `f32` in the
//! unit range. Every constructor validates the range, so downstream metrics
//! never need to clamp.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Frame {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::UnsupportedChannels(channels));
        }
        if data.len() != height * width * channels {
            return Err(Error::DataLength {
                height,
                width,
                channels,
                got: data.len(),
            });
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::PixelOutOfRange { index, value });
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            alloc::vec![value; height * width * channels],
        )
    }

    /// Builds a frame from values that are already known to be valid, e.g.
    /// results of clamping. Debug builds still check.
    pub(crate) fn from_clamped(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f32>,
    ) -> Self {
        debug_assert_eq!(data.len(), height * width * channels);
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Self {
            height,
            width,
            channels,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `(height, width, channels)`
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// One channel as a contiguous `f64` plane.
    pub fn plane(&self, c: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .map(|&v| v as f64)
            .collect()
    }

    pub(crate) fn check_same_shape(&self, other: &Frame) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                got: other.shape(),
            });
        }
        Ok(())
    }

    /// BT.601 luma for RGB frames; gray frames are returned unchanged.
    pub fn to_grayscale(&self) -> Frame {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|px| {
                let y = LUMA_WEIGHTS[0] * px[0] as f64
                    + LUMA_WEIGHTS[1] * px[1] as f64
                    + LUMA_WEIGHTS[2] * px[2] as f64;
                (y as f32).clamp(0.0, 1.0)
            })
            .collect();
        Frame::from_clamped(self.height, self.width, 1, data)
    }
}

/// An ordered, non-empty list of same-shaped frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    frame_rate: Option<f64>,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>) -> Result<Self> {
        let first = frames.first().ok_or(Error::EmptySequence)?.shape();
        if let Some((index, f)) = frames.iter().enumerate().find(|(_, f)| f.shape() != first) {
            return Err(Error::FrameShape {
                index,
                expected: first,
                got: f.shape(),
            });
        }
        Ok(Self {
            frames,
            frame_rate: None,
        })
    }

    pub fn with_frame_rate(mut self, fps: Option<f64>) -> Self {
        self.frame_rate = fps;
        self
    }

    pub fn frame_rate(&self) -> Option<f64> {
        self.frame_rate
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn frame(&self, i: usize) -> &Frame {
        &self.frames[i]
    }

    /// `(height, width, channels)` shared by every frame.
    pub fn shape(&self) -> (usize, usize, usize) {
        self.frames[0].shape()
    }
}

/// Converts every frame to BT.601 luma. Idempotent.
pub fn to_grayscale(seq: &FrameSequence) -> FrameSequence {
    FrameSequence {
        frames: seq.frames.iter().map(Frame::to_grayscale).collect(),
        frame_rate: seq.frame_rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_pixels() {
        let err = Frame::new(1, 2, 1, alloc::vec![0.5, 1.5]).unwrap_err();
        assert_eq!(
            err,
            Error::PixelOutOfRange {
                index: 1,
                value: 1.5
            }
        );
        assert!(Frame::new(1, 1, 1, alloc::vec![f32::NAN]).is_err());
    }

    #[test]
    fn rejects_bad_lengths_and_channels() {
        assert!(matches!(
            Frame::new(2, 2, 1, alloc::vec![0.0; 3]),
            Err(Error::DataLength { .. })
        ));
        assert_eq!(
            Frame::new(1, 1, 2, alloc::vec![0.0; 2]).unwrap_err(),
            Error::UnsupportedChannels(2)
        );
    }

    #[test]
    fn sequence_requires_uniform_shape() {
        let a = Frame::filled(4, 4, 1, 0.0).unwrap();
        let b = Frame::filled(4, 5, 1, 0.0).unwrap();
        let err = FrameSequence::new(alloc::vec![a.clone(), a, b]).unwrap_err();
        assert!(matches!(err, Error::FrameShape { index: 2, .. }));
        assert_eq!(
            FrameSequence::new(Vec::new()).unwrap_err(),
            Error::EmptySequence
        );
    }

    #[test]
    fn grayscale_of_primaries() {
        let red = Frame::new(1, 1, 3, alloc::vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(red.to_grayscale().data(), &[0.299f32]);
        let white = Frame::filled(2, 2, 3, 1.0).unwrap();
        assert!(white.to_grayscale().data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn grayscale_is_identity_on_gray() {
        let g = Frame::new(1, 3, 1, alloc::vec![0.1, 0.2, 0.3]).unwrap();
        assert_eq!(g.to_grayscale(), g);
        let seq = FrameSequence::new(alloc::vec![g]).unwrap();
        assert_eq!(to_grayscale(&seq), seq);
    }
}

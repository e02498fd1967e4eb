//! On-disk frame sequence formats.
//!
//! * `png_dir`: a directory of 8-bit PNGs named `frame_00001.png`,
//!   `frame_00002.png`, ... with no gaps. Values map to `v / 255`.
//! * `raw_fvr`: the magic `FVR1`, then `N, H, W, C` as little-endian `u32`,
//!   then `N*H*W*C` little-endian `f32`, frame-major, row-major,
//!   channel-interleaved.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use tdiv_core::{Frame, FrameSequence};

use crate::error::{Error, Result};

pub const FVR_MAGIC: &[u8; 4] = b"FVR1";
/// Magic plus the four dimension words.
pub const FVR_HEADER_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SequenceFormat {
    PngDir,
    RawFvr,
}

impl SequenceFormat {
    /// Directories are PNG sequences, `*.fvr` files are raw.
    pub fn infer(path: &Path) -> Result<Self> {
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("fvr"))
        {
            Ok(SequenceFormat::RawFvr)
        } else if path.is_dir() || path.extension().is_none() {
            Ok(SequenceFormat::PngDir)
        } else {
            Err(Error::UnknownFormat(path.to_path_buf()))
        }
    }
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.png")
}

fn parse_frame_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".png")?;
    (digits.len() == 5 && digits.bytes().all(|b| b.is_ascii_digit()))
        .then(|| digits.parse().ok())?
}

pub fn load_sequence(path: &Path, format: SequenceFormat) -> Result<FrameSequence> {
    if !path.exists() {
        return Err(Error::Missing(path.to_path_buf()));
    }
    match format {
        SequenceFormat::PngDir => load_png_dir(path),
        SequenceFormat::RawFvr => {
            let t = read_fvr(path, RangePolicy::Unit)?;
            t.into_sequence(path)
        }
    }
}

pub fn save_sequence(seq: &FrameSequence, path: &Path, format: SequenceFormat) -> Result<()> {
    match format {
        SequenceFormat::PngDir => save_png_dir(seq, path),
        SequenceFormat::RawFvr => {
            let (h, w, c) = seq.shape();
            let data: Vec<f32> = seq
                .frames()
                .iter()
                .flat_map(|f| f.data().iter().copied())
                .collect();
            write_fvr(path, [seq.len(), h, w, c], &data)
        }
    }
}

fn load_png_dir(dir: &Path) -> Result<FrameSequence> {
    let mut indices: Vec<usize> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok())
        .filter_map(|entry| parse_frame_index(&entry.file_name().to_string_lossy()))
        .collect();
    if indices.is_empty() {
        return Err(Error::EmptyDirectory(dir.to_path_buf()));
    }
    indices.sort_unstable();
    for (expected, &found) in (1..).zip(&indices) {
        if found != expected {
            return Err(Error::Gap {
                dir: dir.to_path_buf(),
                index: expected,
            });
        }
    }
    let frames = indices
        .iter()
        .map(|&i| load_png(&dir.join(frame_file_name(i)), i))
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames).map_err(|e| match e {
        tdiv_core::Error::FrameShape { index, .. } => Error::Frame {
            path: dir.to_path_buf(),
            index: index + 1,
            source: e,
        },
        other => other.into(),
    })
}

fn load_png(path: &Path, index: usize) -> Result<Frame> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        index,
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, bytes) = match img {
        DynamicImage::ImageLuma8(b) => (1, b.into_raw()),
        DynamicImage::ImageLumaA8(_) => (1, img.to_luma8().into_raw()),
        DynamicImage::ImageRgb8(b) => (3, b.into_raw()),
        DynamicImage::ImageRgba8(_) => (3, img.to_rgb8().into_raw()),
        other => {
            return Err(Error::UnsupportedPng {
                path: path.to_path_buf(),
                index,
                color: format!("{:?}", other.color()),
            })
        }
    };
    let data = bytes.into_iter().map(|b| b as f32 / 255.0).collect();
    Frame::new(h, w, channels, data).map_err(|source| Error::Frame {
        path: path.to_path_buf(),
        index,
        source,
    })
}

fn quantize(v: f32) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

fn save_png_dir(seq: &FrameSequence, dir: &Path) -> Result<()> {
    if !dir.exists() {
        fs::create_dir(dir).map_err(|e| Error::io(dir, e))?;
    }
    for (i, frame) in seq.frames().iter().enumerate() {
        let path = dir.join(frame_file_name(i + 1));
        let (h, w, c) = frame.shape();
        let bytes: Vec<u8> = frame.data().iter().map(|&v| quantize(v)).collect();
        let result = match c {
            1 => ImageBuffer::<Luma<u8>, _>::from_raw(w as u32, h as u32, bytes)
                .map(|b| b.save(&path)),
            3 => ImageBuffer::<Rgb<u8>, _>::from_raw(w as u32, h as u32, bytes)
                .map(|b| b.save(&path)),
            other => return Err(tdiv_core::Error::UnsupportedChannels(other).into()),
        };
        result
            .expect("buffer length matches frame shape")
            .map_err(|source| Error::Image {
                path: path.clone(),
                index: i + 1,
                source,
            })?;
    }
    Ok(())
}

/// Whether raw values must lie in the unit range. Normalized classifier
/// inputs use `Relaxed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangePolicy {
    Unit,
    Relaxed,
}

/// Raw contents of a `.fvr` file.
#[derive(Debug, Clone, PartialEq)]
pub struct FvrTensor {
    /// `[N, H, W, C]`
    pub dims: [usize; 4],
    pub data: Vec<f32>,
}

impl FvrTensor {
    pub fn into_sequence(self, path: &Path) -> Result<FrameSequence> {
        let [n, h, w, c] = self.dims;
        let per = h * w * c;
        let frames = (0..n)
            .map(|i| {
                Frame::new(h, w, c, self.data[i * per..(i + 1) * per].to_vec()).map_err(|source| {
                    Error::Frame {
                        path: path.to_path_buf(),
                        index: i,
                        source,
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FrameSequence::new(frames)?)
    }
}

pub fn write_fvr(path: &Path, dims: [usize; 4], data: &[f32]) -> Result<()> {
    assert_eq!(dims.iter().product::<usize>(), data.len(), "tensor size");
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        out.write_all(FVR_MAGIC)?;
        for d in dims {
            let d = u32::try_from(d).map_err(|_| std::io::Error::other("dimension exceeds u32"))?;
            out.write_all(&d.to_le_bytes())?;
        }
        for v in data {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn read_fvr(path: &Path, policy: RangePolicy) -> Result<FvrTensor> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let corrupt = |offset: usize, reason: &str| Error::CorruptHeader {
        path: path.to_path_buf(),
        offset,
        reason: reason.to_string(),
    };
    if bytes.len() < FVR_HEADER_LEN {
        return Err(corrupt(bytes.len(), "file shorter than the 20-byte header"));
    }
    if &bytes[..4] != FVR_MAGIC {
        return Err(corrupt(0, "bad magic, expected FVR1"));
    }
    let mut dims = [0usize; 4];
    for (i, d) in dims.iter_mut().enumerate() {
        let off = 4 + 4 * i;
        *d = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
        if *d == 0 {
            return Err(corrupt(off, "zero dimension"));
        }
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| corrupt(4, "dimensions overflow"))?;
    let expected = count
        .checked_mul(4)
        .and_then(|b| b.checked_add(FVR_HEADER_LEN))
        .ok_or_else(|| corrupt(4, "dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(corrupt(
            4,
            &format!(
                "payload holds {} bytes, header implies {}",
                bytes.len() - FVR_HEADER_LEN,
                expected - FVR_HEADER_LEN
            ),
        ));
    }
    let mut data = Vec::with_capacity(count);
    for (i, chunk) in bytes[FVR_HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        let ok = match policy {
            RangePolicy::Unit => (0.0..=1.0).contains(&v),
            RangePolicy::Relaxed => v.is_finite(),
        };
        if !ok {
            return Err(Error::ValueOutOfRange {
                path: path.to_path_buf(),
                offset: FVR_HEADER_LEN + 4 * i,
                value: v,
            });
        }
        data.push(v);
    }
    Ok(FvrTensor { dims, data })
}

/// Resolves `path` relative to `base`'s directory unless already absolute.
pub(crate) fn sibling(base: &Path, name: &str) -> PathBuf {
    base.parent().unwrap_or_else(|| Path::new("")).join(name)
}

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tdiv::io::{save_sequence, SequenceFormat};
use tdiv_core::rng::SplitMix64;
use tdiv_core::{Frame, FrameSequence};

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_tdiv"))
}

/// Runs the CLI with `TDIV_THREADS` cleared.
pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("TDIV_THREADS")
        .output()
        .expect("spawn tdiv")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "tdiv {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub fn random_frame(rng: &mut SplitMix64, h: usize, w: usize, c: usize) -> Frame {
    Frame::new(
        h,
        w,
        c,
        (0..h * w * c).map(|_| rng.next_f64() as f32).collect(),
    )
    .unwrap()
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

pub fn constant_sequence(n: usize, h: usize, w: usize, c: usize, v: f32) -> FrameSequence {
    FrameSequence::new((0..n).map(|_| Frame::filled(h, w, c, v).unwrap()).collect()).unwrap()
}

/// `n` RGB frames of a bright square and a disc drifting across a dim
/// gradient background.
pub fn moving_shapes(n: usize, size: usize) -> FrameSequence {
    let frames = (0..n)
        .map(|k| {
            let mut data = Vec::with_capacity(size * size * 3);
            let (sx, sy) = (4 + 5 * k, 10 + 2 * k);
            let (cx, cy) = (size as f64 - 12.0 - 3.0 * k as f64, 20.0 + 4.0 * k as f64);
            for y in 0..size {
                for x in 0..size {
                    let bg = 0.1 + 0.2 * (x + y) as f32 / (2 * size) as f32;
                    let mut px = [bg, bg * 0.8, bg * 1.2];
                    if (sx..sx + 12).contains(&x) && (sy..sy + 12).contains(&y) {
                        px = [0.9, 0.2, 0.2];
                    }
                    let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                    if dx * dx + dy * dy <= 49.0 {
                        px = [0.2, 0.8, 0.95];
                    }
                    data.extend(px.iter().map(|v| v.clamp(0.0, 1.0)));
                }
            }
            Frame::new(size, size, 3, data).unwrap()
        })
        .collect();
    FrameSequence::new(frames).unwrap()
}

pub fn write_png_dir(seq: &FrameSequence, dir: &Path) {
    save_sequence(seq, dir, SequenceFormat::PngDir).unwrap();
}

pub fn write_fvr_seq(seq: &FrameSequence, path: &Path) {
    save_sequence(seq, path, SequenceFormat::RawFvr).unwrap();
}

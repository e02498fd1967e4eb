//! Temporal diversity of a frame sequence.
//!
//! For each frame `x_i` (`i >= 2`, 1-based) the most similar preceding frame
//! is located and its distance (or similarity) recorded. The aggregate is
//!
//! ```text
//! t-d = (1/N) * sum_{i=2..N} min_{j<i} d(x_i, x_j)
//! ```
//!
//! Note the `1/N` normalization over `N - 1` terms. The similarity dual
//! swaps `min` for `max`; with PSNR any exact repeat gives `+inf`.
//!
//! Ties pick the smallest `j`. The outer index may run in parallel; the final
//! sum is always taken in ascending index order.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameSequence};
use crate::metrics::{dssim_from_ssim, psnr, ColorMode, SsimParams, SsimStats};
use crate::par::map_range;

/// One summand: frame `t` matched best with earlier frame `best_match`.
/// Both indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMatch {
    pub t: usize,
    pub best_match: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityReport {
    pub metric: String,
    pub aggregate: f64,
    /// Exactly `N - 1` entries, ordered by `t`.
    pub per_frame: Vec<FrameMatch>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reduce {
    Min,
    Max,
}

fn sweep<F>(n: usize, metric: &str, reduce: Reduce, pair: F) -> Result<DiversityReport>
where
    F: Fn(usize, usize) -> Result<f64> + Sync + Send,
{
    if n < 2 {
        return Err(Error::TooFewFrames { needed: 2, got: n });
    }
    let rows = map_range(n - 1, |k| {
        let i = k + 1;
        let mut best_j = 0;
        let mut best = pair(i, 0)?;
        for j in 1..i {
            let v = pair(i, j)?;
            let better = match reduce {
                Reduce::Min => v < best,
                Reduce::Max => v > best,
            };
            if better {
                best = v;
                best_j = j;
            }
        }
        Ok(FrameMatch {
            t: i + 1,
            best_match: best_j + 1,
            value: best,
        })
    });
    let per_frame = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let aggregate = if reduce == Reduce::Max && per_frame.iter().any(|m| m.value == f64::INFINITY) {
        f64::INFINITY
    } else {
        let mut sum = 0.0;
        for m in &per_frame {
            sum += m.value;
        }
        sum / n as f64
    };
    Ok(DiversityReport {
        metric: metric.to_string(),
        aggregate,
        per_frame,
    })
}

/// Min-over-predecessors form with an arbitrary frame distance.
pub fn t_distance<D>(seq: &FrameSequence, d: D) -> Result<DiversityReport>
where
    D: Fn(&Frame, &Frame) -> Result<f64> + Sync + Send,
{
    let frames = seq.frames();
    sweep(seq.len(), "t-distance", Reduce::Min, |i, j| {
        d(&frames[i], &frames[j])
    })
}

/// Max-over-predecessors form with an arbitrary frame similarity.
pub fn t_similarity<S>(seq: &FrameSequence, s: S) -> Result<DiversityReport>
where
    S: Fn(&Frame, &Frame) -> Result<f64> + Sync + Send,
{
    let frames = seq.frames();
    sweep(seq.len(), "t-similarity", Reduce::Max, |i, j| {
        s(&frames[i], &frames[j])
    })
}

fn prepare(seq: &FrameSequence, color: ColorMode) -> FrameSequence {
    match color {
        ColorMode::Luma => crate::frame::to_grayscale(seq),
        ColorMode::PerChannel => seq.clone(),
    }
}

/// t-DSSIM: higher means more diverse.
pub fn t_dssim(
    seq: &FrameSequence,
    params: &SsimParams,
    color: ColorMode,
) -> Result<DiversityReport> {
    if seq.len() < 2 {
        return Err(Error::TooFewFrames {
            needed: 2,
            got: seq.len(),
        });
    }
    let seq = prepare(seq, color);
    let stats = map_range(seq.len(), |i| SsimStats::new(seq.frame(i), params))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    sweep(seq.len(), "t-dssim", Reduce::Min, |i, j| {
        Ok(dssim_from_ssim(stats[i].ssim_with(&stats[j], params)))
    })
}

/// t-PSNR: lower means more diverse; `+inf` whenever any frame repeats.
pub fn t_psnr(seq: &FrameSequence, color: ColorMode) -> Result<DiversityReport> {
    let seq = prepare(seq, color);
    let frames = seq.frames();
    sweep(seq.len(), "t-psnr", Reduce::Max, |i, j| {
        psnr(&frames[i], &frames[j])
    })
}

/// `(t, value)` pairs of the per-frame summands, ordered by `t`.
pub fn per_timestep_curve(report: &DiversityReport) -> Vec<(usize, f64)> {
    report.per_frame.iter().map(|m| (m.t, m.value)).collect()
}

/// Symmetric pairwise distance table with an implicit zero diagonal. Only
/// the strictly lower triangle is stored. Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)`; symmetric, zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "index out of range");
        match i.cmp(&j) {
            core::cmp::Ordering::Equal => 0.0,
            core::cmp::Ordering::Greater => self.values[i * (i - 1) / 2 + j],
            core::cmp::Ordering::Less => self.values[j * (j - 1) / 2 + i],
        }
    }

    /// Strictly-lower-triangular entries, row by row.
    pub fn lower_triangle(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Pairwise distances between all frames, e.g. with [`crate::l1_mean`].
pub fn distance_matrix<D>(seq: &FrameSequence, d: D) -> Result<DistanceMatrix>
where
    D: Fn(&Frame, &Frame) -> Result<f64> + Sync + Send,
{
    let n = seq.len();
    let frames = seq.frames();
    let rows = map_range(n, |i| {
        (0..i)
            .map(|j| {
                let v = d(&frames[i], &frames[j])?;
                if v.is_nan() || v < 0.0 {
                    return Err(Error::InvalidParameter("distance must be non-negative"));
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()
    });
    let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for row in rows {
        values.extend(row?);
    }
    Ok(DistanceMatrix { n, values })
}

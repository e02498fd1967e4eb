//! JSON, CSV and PGM renderings of computed results.

use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use tdiv_core::{DistanceMatrix, DiversityReport};

/// An `f64` that serializes non-finite values as the strings `"inf"`,
/// `"-inf"` and `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtF64(pub f64);

impl Serialize for ExtF64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtF64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtF64(v)),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(ExtF64(f64::INFINITY)),
                "-inf" => Ok(ExtF64(f64::NEG_INFINITY)),
                "nan" => Ok(ExtF64(f64::NAN)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, \"inf\", \"-inf\" or \"nan\", got {other:?}"
                ))),
            },
        }
    }
}

pub fn ext_vec(values: &[f64]) -> Vec<ExtF64> {
    values.iter().copied().map(ExtF64).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameMatchJson {
    pub t: usize,
    pub best_match: usize,
    pub value: ExtF64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReportJson {
    pub metric: String,
    pub aggregate: ExtF64,
    pub per_frame: Vec<FrameMatchJson>,
}

impl From<&DiversityReport> for MetricReportJson {
    fn from(r: &DiversityReport) -> Self {
        Self {
            metric: r.metric.clone(),
            aggregate: ExtF64(r.aggregate),
            per_frame: r
                .per_frame
                .iter()
                .map(|m| FrameMatchJson {
                    t: m.t,
                    best_match: m.best_match,
                    value: ExtF64(m.value),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsOutput {
    pub frames: usize,
    pub reports: Vec<MetricReportJson>,
}

/// Serializes with a trailing newline.
pub fn to_json<T: Serialize>(value: &T, pretty: bool) -> String {
    let mut s = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("report types serialize infallibly");
    s.push('\n');
    s
}

fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        // Shortest round-trip representation.
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// `t,value` rows, one per frame `t = 2..N`.
pub fn curve_csv(report: &DiversityReport) -> String {
    let mut out = String::from("t,value\n");
    for (t, v) in tdiv_core::per_timestep_curve(report) {
        let _ = writeln!(out, "{t},{}", fmt_value(v));
    }
    out
}

/// Full symmetric `N x N` matrix, no header.
pub fn matrix_csv(m: &DistanceMatrix) -> String {
    let n = m.n();
    let mut out = String::new();
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_value(m.get(i, j)));
        }
        out.push('\n');
    }
    out
}

/// Binary PGM (`P5`) of size `N x N`. The lower triangle and diagonal hold
/// `round(255 * d / max)`; the unused upper triangle is white.
pub fn matrix_pgm(m: &DistanceMatrix) -> Vec<u8> {
    let n = m.n();
    let max = m.max();
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for i in 0..n {
        for j in 0..n {
            let px = if j > i {
                255
            } else if max > 0.0 {
                (255.0 * m.get(i, j) / max).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            out.push(px);
        }
    }
    out
}

//! Versioned JSON model files.
//!
//! Weights are stored either inline as nested arrays shaped
//! `[filters][in_channels][k_t][k_h][k_w]`, or as `{"offset", "len"}`
//! references (in elements) into a sidecar of little-endian `f64` named in
//! the top-level `sidecar` field, resolved next to the JSON file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tdiv_core::tcn::{BatchNorm, ConvLayer, TcnConfig, TcnModel, TemporalPadding};

use crate::error::{Error, Result};
use crate::io::sibling;

pub const MODEL_FORMAT: &str = "tdiv-tcn";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub temporal_padding: TemporalPadding,
    pub config: TcnConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<String>,
    pub layers: LayersJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayersJson {
    pub trunk: Vec<LayerJson>,
    pub reward_head: LayerJson,
    pub q_head: LayerJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerJson {
    /// `[filters, in_channels, k_t, k_h, k_w]`
    pub shape: [usize; 5],
    pub weight: WeightJson,
    pub bias: Vec<f64>,
    pub batchnorm: Option<BatchNormJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightJson {
    External { offset: usize, len: usize },
    Inline(Value),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchNormJson {
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub eps: f64,
}

fn nest(data: &[f64], dims: &[usize]) -> Value {
    match dims {
        [] => unreachable!("weight tensors have rank 5"),
        [_] => Value::Array(data.iter().map(|&v| Value::from(v)).collect()),
        [n, rest @ ..] => {
            let stride = data.len() / n;
            Value::Array(data.chunks(stride).map(|c| nest(c, rest)).collect())
        }
    }
}

fn flatten(value: &Value, dims: &[usize], out: &mut Vec<f64>) -> std::result::Result<(), String> {
    let arr = value.as_array().ok_or("expected a nested array")?;
    let Some((&n, rest)) = dims.split_first() else {
        unreachable!()
    };
    if arr.len() != n {
        return Err(format!("expected {n} entries, found {}", arr.len()));
    }
    for v in arr {
        if rest.is_empty() {
            out.push(v.as_f64().ok_or("weights must be numbers")?);
        } else {
            flatten(v, rest, out)?;
        }
    }
    Ok(())
}

struct SidecarWriter {
    bytes: Vec<u8>,
    elements: usize,
}

fn layer_to_json(layer: &ConvLayer, sidecar: Option<&mut SidecarWriter>) -> LayerJson {
    let shape = layer.weight_shape();
    let weight = match sidecar {
        Some(w) => {
            let offset = w.elements;
            for v in layer.weight() {
                w.bytes.extend_from_slice(&v.to_le_bytes());
            }
            w.elements += layer.weight().len();
            WeightJson::External {
                offset,
                len: layer.weight().len(),
            }
        }
        None => WeightJson::Inline(nest(layer.weight(), &shape)),
    };
    LayerJson {
        shape,
        weight,
        bias: layer.bias().to_vec(),
        batchnorm: layer.batchnorm().map(|bn| BatchNormJson {
            scale: bn.scale.clone(),
            shift: bn.shift.clone(),
            running_mean: bn.running_mean.clone(),
            running_var: bn.running_var.clone(),
            eps: bn.eps,
        }),
    }
}

/// Writes `path` and, unless `inline`, a `<stem>.weights.bin` sidecar next
/// to it.
pub fn save_model(model: &TcnModel, path: &Path, inline: bool, pretty: bool) -> Result<()> {
    let sidecar_name = (!inline).then(|| {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into());
        format!("{stem}.weights.bin")
    });
    let mut writer = SidecarWriter {
        bytes: Vec::new(),
        elements: 0,
    };
    let mut conv = |l: &ConvLayer| layer_to_json(l, sidecar_name.as_ref().map(|_| &mut writer));
    let layers = LayersJson {
        trunk: model.trunk().iter().map(&mut conv).collect(),
        reward_head: conv(model.reward_head()),
        q_head: conv(model.q_head()),
    };
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        temporal_padding: model.temporal_padding(),
        config: model.config().clone(),
        sidecar: sidecar_name.clone(),
        layers,
    };
    if let Some(name) = &sidecar_name {
        let p = sibling(path, name);
        fs::write(&p, &writer.bytes).map_err(|e| Error::io(p, e))?;
    }
    let text = crate::report::to_json(&file, pretty);
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TcnModel> {
    if !path.exists() {
        return Err(Error::Missing(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let schema = |reason: String| Error::Schema {
        path: path.to_path_buf(),
        reason,
    };
    if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
        return Err(schema(format!(
            "unsupported model format {:?} version {}",
            file.format, file.version
        )));
    }
    let sidecar: Option<Vec<f64>> = match &file.sidecar {
        Some(name) => {
            let p = sibling(path, name);
            let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
            if bytes.len() % 8 != 0 {
                return Err(schema(format!(
                    "sidecar {name} length {} is not a multiple of 8",
                    bytes.len()
                )));
            }
            Some(
                bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            )
        }
        None => None,
    };
    let mut channels = file.config.in_channels;
    let build = |name: &str,
                 l: &LayerJson,
                 cfg: &tdiv_core::tcn::TcnLayerConfig,
                 in_ch: usize|
     -> Result<ConvLayer> {
        let expected = [
            cfg.filters,
            in_ch,
            cfg.kernel[0],
            cfg.kernel[1],
            cfg.kernel[2],
        ];
        if l.shape != expected {
            return Err(schema(format!(
                "{name}: shape {:?} does not match config {:?}",
                l.shape, expected
            )));
        }
        let n: usize = expected.iter().product();
        let weight = match &l.weight {
            WeightJson::Inline(v) => {
                let mut out = Vec::with_capacity(n);
                flatten(v, &l.shape, &mut out)
                    .map_err(|e| schema(format!("{name}: weight: {e}")))?;
                out
            }
            WeightJson::External { offset, len } => {
                let data = sidecar
                    .as_ref()
                    .ok_or_else(|| schema(format!("{name}: external weights but no sidecar")))?;
                if *len != n {
                    return Err(schema(format!("{name}: weight length {len}, expected {n}")));
                }
                data.get(*offset..offset + len)
                    .ok_or_else(|| {
                        schema(format!(
                            "{name}: weight range {offset}+{len} outside sidecar"
                        ))
                    })?
                    .to_vec()
            }
        };
        let bn = l.batchnorm.as_ref().map(|b| BatchNorm {
            scale: b.scale.clone(),
            shift: b.shift.clone(),
            running_mean: b.running_mean.clone(),
            running_var: b.running_var.clone(),
            eps: b.eps,
        });
        ConvLayer::new(*cfg, in_ch, weight, l.bias.clone(), bn)
            .map_err(|e| schema(format!("{name}: {e}")))
    };
    if file.layers.trunk.len() != file.config.trunk.len() {
        return Err(schema(format!(
            "{} trunk layers, config lists {}",
            file.layers.trunk.len(),
            file.config.trunk.len()
        )));
    }
    let mut trunk = Vec::with_capacity(file.layers.trunk.len());
    for (i, (l, cfg)) in file.layers.trunk.iter().zip(&file.config.trunk).enumerate() {
        trunk.push(build(&format!("trunk[{i}]"), l, cfg, channels)?);
        channels = cfg.filters;
    }
    let reward = build(
        "reward_head",
        &file.layers.reward_head,
        &file.config.head,
        channels,
    )?;
    let q = build("q_head", &file.layers.q_head, &file.config.head, channels)?;
    let model = TcnModel::new(file.config, trunk, reward, q).map_err(|e| schema(e.to_string()))?;
    Ok(model.with_temporal_padding(file.temporal_padding))
}

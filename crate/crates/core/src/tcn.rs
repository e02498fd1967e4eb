//! Forward-only causal temporal convolutional video discriminator.
//!
//! A trunk of dilated 3D convolutions (batch norm in inference mode, leaky
//! ReLU) is followed by two parallel single-filter heads producing one
//! reward and one Q-value per timestep. Temporal convolutions are causal:
//! each layer left-pads `(k_t - 1) * d_t` zero frames and never pads on the
//! right, so the output at `t` only reads frames `<= t` and the temporal
//! length `K` is preserved at every depth.
//!
//! Activations are laid out `[t][h][w][c]`. Every output element is
//! accumulated in the fixed order `(k_t, k_h, k_w, c_in)`, so results are
//! bitwise identical regardless of thread count, and the incremental
//! forward used by [`check_causality`] reproduces a full forward exactly.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frame::FrameSequence;
use crate::par::map_range;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TcnLayerConfig {
    pub filters: usize,
    /// `[k_t, k_h, k_w]`
    pub kernel: [usize; 3],
    /// `[s_h, s_w]`; the temporal stride is always 1.
    pub spatial_stride: [usize; 2],
    pub temporal_dilation: usize,
    /// `[p_h, p_w]`
    pub spatial_padding: [usize; 2],
    pub batchnorm: bool,
    pub activation: bool,
}

impl TcnLayerConfig {
    /// Total temporal padding `(k_t - 1) * d_t`.
    pub fn temporal_padding(&self) -> usize {
        (self.kernel[0] - 1) * self.temporal_dilation
    }

    fn validate(&self) -> Result<()> {
        if self.filters == 0
            || self.kernel.contains(&0)
            || self.spatial_stride.contains(&0)
            || self.temporal_dilation == 0
        {
            return Err(Error::InvalidParameter(
                "filters, kernel sizes, strides and dilation must be >= 1",
            ));
        }
        Ok(())
    }

    /// Output spatial size for an `h x w` input.
    pub fn output_size(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        let dim = |n: usize, k: usize, s: usize, p: usize| {
            (n + 2 * p)
                .checked_sub(k)
                .map(|v| v / s + 1)
                .ok_or(Error::InvalidParameter("spatial input smaller than kernel"))
        };
        Ok((
            dim(
                h,
                self.kernel[1],
                self.spatial_stride[0],
                self.spatial_padding[0],
            )?,
            dim(
                w,
                self.kernel[2],
                self.spatial_stride[1],
                self.spatial_padding[1],
            )?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TcnConfig {
    pub in_channels: usize,
    /// `[height, width]` of input frames.
    pub input_size: [usize; 2],
    pub leaky_slope: f64,
    pub trunk: Vec<TcnLayerConfig>,
    /// Shape shared by the reward head and the Q head.
    pub head: TcnLayerConfig,
}

impl TcnConfig {
    /// Trunk rows followed by the head row.
    pub fn layers(&self) -> Vec<TcnLayerConfig> {
        let mut v = self.trunk.clone();
        v.push(self.head);
        v
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 {
            return Err(Error::InvalidParameter("input channels must be >= 1"));
        }
        if self.head.filters != 1 {
            return Err(Error::InvalidParameter(
                "heads must have exactly one filter",
            ));
        }
        if !self.leaky_slope.is_finite() {
            return Err(Error::NonFinite("leaky slope"));
        }
        for l in self.layers() {
            l.validate()?;
        }
        self.spatial_trace().map(|_| ())
    }

    /// Spatial size after each layer, starting with the input size.
    pub fn spatial_trace(&self) -> Result<Vec<(usize, usize)>> {
        let mut size = (self.input_size[0], self.input_size[1]);
        let mut out = alloc::vec![size];
        for l in self.layers() {
            size = l.output_size(size.0, size.1)?;
            out.push(size);
        }
        Ok(out)
    }
}

/// The 64/128/256 trunk with temporal dilations 1, 2, 4 and a `(1, 4, 4)`
/// head, for 64x64 RGB input.
pub fn default_config() -> TcnConfig {
    let trunk = |filters, dilation| TcnLayerConfig {
        filters,
        kernel: [3, 4, 4],
        spatial_stride: [2, 2],
        temporal_dilation: dilation,
        spatial_padding: [1, 1],
        batchnorm: true,
        activation: true,
    };
    TcnConfig {
        in_channels: 3,
        input_size: [64, 64],
        leaky_slope: 0.2,
        trunk: alloc::vec![trunk(64, 1), trunk(128, 2), trunk(256, 4)],
        head: TcnLayerConfig {
            filters: 1,
            kernel: [1, 4, 4],
            spatial_stride: [2, 2],
            temporal_dilation: 1,
            spatial_padding: [1, 1],
            batchnorm: false,
            activation: false,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceptiveFieldReport {
    /// Cumulative temporal receptive field after each layer (trunk, then head).
    pub per_layer: Vec<usize>,
    pub total_frames: usize,
}

/// `1 + sum (k_t - 1) * d_t` over all layers.
pub fn receptive_field(config: &TcnConfig) -> ReceptiveFieldReport {
    let mut rf = 1;
    let per_layer = config
        .layers()
        .iter()
        .map(|l| {
            rf += l.temporal_padding();
            rf
        })
        .collect();
    ReceptiveFieldReport {
        per_layer,
        total_frames: rf,
    }
}

/// How the temporal padding of each layer is split between the past and
/// the future. Only `Causal` is a valid discriminator; `Symmetric` exists
/// as a negative control for [`check_causality`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TemporalPadding {
    #[default]
    Causal,
    Symmetric,
}

impl TemporalPadding {
    /// `(left, right)` zero frames for a layer.
    fn split(self, layer: &TcnLayerConfig) -> (usize, usize) {
        let total = layer.temporal_padding();
        match self {
            TemporalPadding::Causal => (total, 0),
            TemporalPadding::Symmetric => (total / 2, total - total / 2),
        }
    }
}

/// Inference-mode batch normalization parameters, one entry per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub eps: f64,
}

impl BatchNorm {
    pub fn identity(channels: usize) -> Self {
        Self {
            scale: alloc::vec![1.0; channels],
            shift: alloc::vec![0.0; channels],
            running_mean: alloc::vec![0.0; channels],
            running_var: alloc::vec![1.0; channels],
            eps: 1e-5,
        }
    }

    fn validate(&self, channels: usize) -> Result<()> {
        let lens = [
            self.scale.len(),
            self.shift.len(),
            self.running_mean.len(),
            self.running_var.len(),
        ];
        if let Some(&bad) = lens.iter().find(|&&l| l != channels) {
            return Err(Error::LengthMismatch {
                left: bad,
                right: channels,
            });
        }
        if self.running_var.iter().any(|v| !(v + self.eps > 0.0)) {
            return Err(Error::InvalidParameter(
                "batchnorm variance + eps must be positive",
            ));
        }
        Ok(())
    }
}

/// One 3D convolution with its optional batch norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    config: TcnLayerConfig,
    in_channels: usize,
    /// `[f][c][k_t][k_h][k_w]`
    weight: Vec<f64>,
    bias: Vec<f64>,
    batchnorm: Option<BatchNorm>,
    /// `[k_t][k_h][k_w][c][f]`, the layout the kernel reads.
    packed: Vec<f64>,
    /// Per-channel `(1 / sqrt(var + eps), mean, scale, shift)`.
    bn_coeffs: Vec<[f64; 4]>,
}

impl ConvLayer {
    pub fn new(
        config: TcnLayerConfig,
        in_channels: usize,
        weight: Vec<f64>,
        bias: Vec<f64>,
        batchnorm: Option<BatchNorm>,
    ) -> Result<Self> {
        config.validate()?;
        let shape = Self::shape_of(&config, in_channels);
        let expected: usize = shape.iter().product();
        if weight.len() != expected {
            return Err(Error::TensorShape {
                expected: shape,
                got: [weight.len(), 1, 1, 1, 1],
            });
        }
        if bias.len() != config.filters {
            return Err(Error::LengthMismatch {
                left: bias.len(),
                right: config.filters,
            });
        }
        if config.batchnorm != batchnorm.is_some() {
            return Err(Error::InvalidParameter(
                "batchnorm parameters do not match the layer flag",
            ));
        }
        if let Some(bn) = &batchnorm {
            bn.validate(config.filters)?;
        }
        if weight.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("layer weights"));
        }
        let [f_n, c_n, kt_n, kh_n, kw_n] = shape;
        let mut packed = alloc::vec![0.0; expected];
        for f in 0..f_n {
            for c in 0..c_n {
                for kt in 0..kt_n {
                    for kh in 0..kh_n {
                        for kw in 0..kw_n {
                            let src = (((f * c_n + c) * kt_n + kt) * kh_n + kh) * kw_n + kw;
                            let dst = (((kt * kh_n + kh) * kw_n + kw) * c_n + c) * f_n + f;
                            packed[dst] = weight[src];
                        }
                    }
                }
            }
        }
        let bn_coeffs = batchnorm
            .as_ref()
            .map(|bn| {
                (0..f_n)
                    .map(|f| {
                        [
                            1.0 / libm::sqrt(bn.running_var[f] + bn.eps),
                            bn.running_mean[f],
                            bn.scale[f],
                            bn.shift[f],
                        ]
                    })
                    .collect()
            })
            .unwrap_or_default();
        Ok(Self {
            config,
            in_channels,
            weight,
            bias,
            batchnorm,
            packed,
            bn_coeffs,
        })
    }

    fn shape_of(config: &TcnLayerConfig, in_channels: usize) -> [usize; 5] {
        [
            config.filters,
            in_channels,
            config.kernel[0],
            config.kernel[1],
            config.kernel[2],
        ]
    }

    /// `(filters_out, filters_in, k_t, k_h, k_w)`
    pub fn weight_shape(&self) -> [usize; 5] {
        Self::shape_of(&self.config, self.in_channels)
    }

    pub fn config(&self) -> &TcnLayerConfig {
        &self.config
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn batchnorm(&self) -> Option<&BatchNorm> {
        self.batchnorm.as_ref()
    }

    /// Calls `f(kt, kh, kw, input_position)` for every tap of output
    /// position `(t, oh, ow)` that lands inside the input; taps landing in
    /// padding are skipped. This is the single source of truth for which
    /// input positions an output reads.
    #[inline(always)]
    fn for_each_tap(
        &self,
        input: (usize, usize, usize),
        left_pad: usize,
        (t, oh, ow): (usize, usize, usize),
        mut f: impl FnMut(usize, usize, usize, usize),
    ) {
        let (it_n, ih_n, iw_n) = input;
        let [kt_n, kh_n, kw_n] = self.config.kernel;
        let [sh, sw] = self.config.spatial_stride;
        let [ph, pw] = self.config.spatial_padding;
        let d = self.config.temporal_dilation;
        for kt in 0..kt_n {
            let it = (t + kt * d).wrapping_sub(left_pad);
            if it >= it_n {
                continue;
            }
            for kh in 0..kh_n {
                let ih = (oh * sh + kh).wrapping_sub(ph);
                if ih >= ih_n {
                    continue;
                }
                for kw in 0..kw_n {
                    let iw = (ow * sw + kw).wrapping_sub(pw);
                    if iw >= iw_n {
                        continue;
                    }
                    f(kt, kh, kw, (it * ih_n + ih) * iw_n + iw);
                }
            }
        }
    }

    /// All `filters` outputs at one position, after batch norm and
    /// activation.
    fn compute_position(
        &self,
        input: &Activation,
        left_pad: usize,
        pos: (usize, usize, usize),
        slope: f64,
        out: &mut [f64],
    ) {
        let f_n = self.config.filters;
        let c_n = self.in_channels;
        let [_, kh_n, kw_n] = self.config.kernel;
        out.copy_from_slice(&self.bias);
        self.for_each_tap(input.dims(), left_pad, pos, |kt, kh, kw, p| {
            let x = &input.data[p * c_n..(p + 1) * c_n];
            let base = ((kt * kh_n + kh) * kw_n + kw) * c_n * f_n;
            for (c, &xv) in x.iter().enumerate() {
                let w = &self.packed[base + c * f_n..base + (c + 1) * f_n];
                for (acc, &wv) in out.iter_mut().zip(w) {
                    *acc += wv * xv;
                }
            }
        });
        if self.config.batchnorm {
            for (v, &[inv_std, mean, scale, shift]) in out.iter_mut().zip(&self.bn_coeffs) {
                *v = (*v - mean) * inv_std * scale + shift;
            }
        }
        if self.config.activation {
            for v in out.iter_mut() {
                if *v < 0.0 {
                    *v *= slope;
                }
            }
        }
    }

    fn reads_any(
        &self,
        dirty: &[bool],
        input: (usize, usize, usize),
        left_pad: usize,
        pos: (usize, usize, usize),
    ) -> bool {
        let mut hit = false;
        self.for_each_tap(input, left_pad, pos, |_, _, _, p| hit |= dirty[p]);
        hit
    }

    fn forward(&self, input: &Activation, left_pad: usize, slope: f64) -> Activation {
        let (oh_n, ow_n) = self
            .config
            .output_size(input.h, input.w)
            .expect("validated at model construction");
        let f_n = self.config.filters;
        let rows = map_range(input.t * oh_n, |row| {
            let (t, oh) = (row / oh_n, row % oh_n);
            let mut out = alloc::vec![0.0; ow_n * f_n];
            for (ow, chunk) in out.chunks_exact_mut(f_n).enumerate() {
                self.compute_position(input, left_pad, (t, oh, ow), slope, chunk);
            }
            out
        });
        Activation {
            t: input.t,
            h: oh_n,
            w: ow_n,
            c: f_n,
            data: rows.concat(),
        }
    }

    /// Maximum input time read by outputs at times `<= t`.
    fn max_input_time(&self, input_t: usize, left_pad: usize, t: usize) -> usize {
        let reach = t + (self.config.kernel[0] - 1) * self.config.temporal_dilation;
        reach.saturating_sub(left_pad).min(input_t - 1)
    }
}

/// A `[t][h][w][c]` activation tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Activation {
    pub t: usize,
    pub h: usize,
    pub w: usize,
    pub c: usize,
    pub data: Vec<f64>,
}

impl Activation {
    pub fn from_sequence(seq: &FrameSequence) -> Self {
        let (h, w, c) = seq.shape();
        let data = seq
            .frames()
            .iter()
            .flat_map(|f| f.data().iter().map(|&v| v as f64))
            .collect();
        Self {
            t: seq.len(),
            h,
            w,
            c,
            data,
        }
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.t, self.h, self.w)
    }

    fn positions(&self) -> usize {
        self.t * self.h * self.w
    }

    /// Positions `(t, h, w)` where any channel differs bitwise from `other`.
    fn diff_mask(&self, other: &Activation) -> Vec<bool> {
        self.data
            .chunks_exact(self.c)
            .zip(other.data.chunks_exact(other.c))
            .map(|(a, b)| a.iter().zip(b).any(|(x, y)| x.to_bits() != y.to_bits()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcnModel {
    config: TcnConfig,
    trunk: Vec<ConvLayer>,
    reward_head: ConvLayer,
    q_head: ConvLayer,
    temporal_padding: TemporalPadding,
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub input: Activation,
    pub trunk: Vec<Activation>,
    pub rewards: Vec<f64>,
    pub q: Vec<f64>,
}

impl TcnModel {
    pub fn new(
        config: TcnConfig,
        trunk: Vec<ConvLayer>,
        reward_head: ConvLayer,
        q_head: ConvLayer,
    ) -> Result<Self> {
        config.validate()?;
        if trunk.len() != config.trunk.len() {
            return Err(Error::LengthMismatch {
                left: trunk.len(),
                right: config.trunk.len(),
            });
        }
        let mut channels = config.in_channels;
        for (layer, cfg) in trunk.iter().zip(&config.trunk) {
            Self::check_layer(layer, cfg, channels)?;
            channels = cfg.filters;
        }
        Self::check_layer(&reward_head, &config.head, channels)?;
        Self::check_layer(&q_head, &config.head, channels)?;
        Ok(Self {
            config,
            trunk,
            reward_head,
            q_head,
            temporal_padding: TemporalPadding::Causal,
        })
    }

    fn check_layer(layer: &ConvLayer, cfg: &TcnLayerConfig, in_channels: usize) -> Result<()> {
        let expected = ConvLayer::shape_of(cfg, in_channels);
        if layer.config != *cfg || layer.weight_shape() != expected {
            return Err(Error::TensorShape {
                expected,
                got: layer.weight_shape(),
            });
        }
        Ok(())
    }

    pub fn with_temporal_padding(mut self, padding: TemporalPadding) -> Self {
        self.temporal_padding = padding;
        self
    }

    pub fn temporal_padding(&self) -> TemporalPadding {
        self.temporal_padding
    }

    pub fn config(&self) -> &TcnConfig {
        &self.config
    }

    pub fn trunk(&self) -> &[ConvLayer] {
        &self.trunk
    }

    pub fn reward_head(&self) -> &ConvLayer {
        &self.reward_head
    }

    pub fn q_head(&self) -> &ConvLayer {
        &self.q_head
    }

    fn check_input(&self, seq: &FrameSequence) -> Result<()> {
        let expected = (
            self.config.input_size[0],
            self.config.input_size[1],
            self.config.in_channels,
        );
        if seq.shape() != expected {
            return Err(Error::ModelInput {
                expected,
                got: seq.shape(),
            });
        }
        Ok(())
    }

    fn left_pad(&self, layer: &ConvLayer) -> usize {
        self.temporal_padding.split(&layer.config).0
    }

    /// Per-timestep rewards and Q-values, each of length `K`.
    pub fn forward(
        &self,
        seq: &FrameSequence,
    ) -> Result<(crate::mdp::RewardTrace, crate::mdp::QTrace)> {
        let trace = self.forward_trace(seq)?;
        Ok((
            crate::mdp::RewardTrace::new(trace.rewards)?,
            crate::mdp::QTrace::new(trace.q)?,
        ))
    }

    pub fn forward_trace(&self, seq: &FrameSequence) -> Result<ForwardTrace> {
        self.check_input(seq)?;
        Ok(self.trace_from_input(Activation::from_sequence(seq)))
    }

    fn trace_from_input(&self, input: Activation) -> ForwardTrace {
        let slope = self.config.leaky_slope;
        let mut trunk: Vec<Activation> = Vec::with_capacity(self.trunk.len());
        for layer in &self.trunk {
            let src = trunk.last().unwrap_or(&input);
            let out = layer.forward(src, self.left_pad(layer), slope);
            trunk.push(out);
        }
        let features = trunk.last().unwrap_or(&input);
        let rewards = self.head_series(&self.reward_head, features, input.t);
        let q = self.head_series(&self.q_head, features, input.t);
        ForwardTrace {
            input,
            trunk,
            rewards,
            q,
        }
    }

    fn head_series(&self, head: &ConvLayer, features: &Activation, upto: usize) -> Vec<f64> {
        (0..upto)
            .map(|t| self.head_value(head, features, t))
            .collect()
    }

    /// Spatial mean of the single-filter head map at time `t`.
    fn head_value(&self, head: &ConvLayer, features: &Activation, t: usize) -> f64 {
        let (oh_n, ow_n) = head
            .config
            .output_size(features.h, features.w)
            .expect("validated at model construction");
        let left = self.left_pad(head);
        let mut v = [0.0];
        let mut sum = 0.0;
        for oh in 0..oh_n {
            for ow in 0..ow_n {
                head.compute_position(features, left, (t, oh, ow), self.config.leaky_slope, &mut v);
                sum += v[0];
            }
        }
        sum / (oh_n * ow_n) as f64
    }

    /// Rewards and Q-values at times `0..=upto` for a modified input,
    /// recomputing only positions whose inputs differ bitwise from `base`.
    /// The result is bitwise identical to a full forward of `seq`.
    pub fn forward_incremental(
        &self,
        base: &ForwardTrace,
        seq: &FrameSequence,
        upto: usize,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_input(seq)?;
        if seq.len() != base.input.t {
            return Err(Error::LengthMismatch {
                left: seq.len(),
                right: base.input.t,
            });
        }
        if upto >= seq.len() {
            return Err(Error::InvalidParameter("upto must be a valid timestep"));
        }
        Ok(self.incremental_from_input(base, &Activation::from_sequence(seq), upto))
    }

    fn incremental_from_input(
        &self,
        base: &ForwardTrace,
        input: &Activation,
        upto: usize,
    ) -> (Vec<f64>, Vec<f64>) {
        let slope = self.config.leaky_slope;
        let k = input.t;

        // Latest time each trunk layer must be current for, walking back from
        // the heads.
        let mut needed = alloc::vec![0usize; self.trunk.len()];
        let mut need = 0;
        for head in [&self.reward_head, &self.q_head] {
            need = need.max(head.max_input_time(k, self.left_pad(head), upto));
        }
        for (i, layer) in self.trunk.iter().enumerate().rev() {
            needed[i] = need;
            need = layer.max_input_time(k, self.left_pad(layer), need);
        }

        let mut dirty = input.diff_mask(&base.input);
        let mut current: Vec<Activation> = Vec::with_capacity(self.trunk.len());
        for (i, layer) in self.trunk.iter().enumerate() {
            let src = current.last().unwrap_or(input);
            let left = self.left_pad(layer);
            let mut out = base.trunk[i].clone();
            let mut out_dirty = alloc::vec![false; out.positions()];
            let f_n = layer.config.filters;
            let mut buf = alloc::vec![0.0; f_n];
            for t in 0..=needed[i] {
                for oh in 0..out.h {
                    for ow in 0..out.w {
                        let pos = (t, oh, ow);
                        if !layer.reads_any(&dirty, src.dims(), left, pos) {
                            continue;
                        }
                        layer.compute_position(src, left, pos, slope, &mut buf);
                        let p = (t * out.h + oh) * out.w + ow;
                        let slot = &mut out.data[p * f_n..(p + 1) * f_n];
                        if slot
                            .iter()
                            .zip(&buf)
                            .any(|(a, b)| a.to_bits() != b.to_bits())
                        {
                            slot.copy_from_slice(&buf);
                            out_dirty[p] = true;
                        }
                    }
                }
            }
            dirty = out_dirty;
            current.push(out);
        }

        let features = current.last().unwrap_or(input);
        let head_out = |head: &ConvLayer, baseline: &[f64]| -> Vec<f64> {
            let left = self.left_pad(head);
            let (oh_n, ow_n) = head
                .config
                .output_size(features.h, features.w)
                .expect("validated");
            (0..=upto)
                .map(|t| {
                    let touched = (0..oh_n).any(|oh| {
                        (0..ow_n)
                            .any(|ow| head.reads_any(&dirty, features.dims(), left, (t, oh, ow)))
                    });
                    if touched {
                        self.head_value(head, features, t)
                    } else {
                        baseline[t]
                    }
                })
                .collect()
        };
        (
            head_out(&self.reward_head, &base.rewards),
            head_out(&self.q_head, &base.q),
        )
    }
}

/// Random model: weights `N(0, 2 / fan_in)` drawn from one SplitMix64
/// stream in layer order (trunk, reward head, Q head) and canonical weight
/// order; biases zero; batch norm at identity.
pub fn init_model(config: &TcnConfig, seed: u64) -> Result<TcnModel> {
    config.validate()?;
    let mut rng = SplitMix64::new(seed);
    let mut make = |cfg: &TcnLayerConfig, in_channels: usize| {
        let shape = ConvLayer::shape_of(cfg, in_channels);
        let fan_in = (shape[1] * shape[2] * shape[3] * shape[4]) as f64;
        let std = libm::sqrt(2.0 / fan_in);
        let n: usize = shape.iter().product();
        let weight = (0..n).map(|_| std * rng.next_gaussian()).collect();
        let bn = cfg.batchnorm.then(|| BatchNorm::identity(cfg.filters));
        ConvLayer::new(*cfg, in_channels, weight, alloc::vec![0.0; cfg.filters], bn)
    };
    let mut channels = config.in_channels;
    let mut trunk = Vec::with_capacity(config.trunk.len());
    for cfg in &config.trunk {
        trunk.push(make(cfg, channels)?);
        channels = cfg.filters;
    }
    let reward_head = make(&config.head, channels)?;
    let q_head = make(&config.head, channels)?;
    TcnModel::new(config.clone(), trunk, reward_head, q_head)
}

/// A prefix output that changed after perturbing a later frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub trial: usize,
    /// Last timestep that must be unaffected.
    pub t: usize,
    pub perturbed_frame: usize,
    pub output_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalityReport {
    pub trials: usize,
    pub violations: Vec<Violation>,
    /// Trials where the output at the perturbed frame itself changed.
    pub sensitive_trials: usize,
}

/// Randomized causality check. Each trial picks `t < K - 1`, perturbs one
/// pixel of a frame `p > t`, reruns the network and requires rewards and
/// Q-values at indices `<= t` to be bitwise unchanged. Outputs are computed
/// through index `p`, so the report also counts how often the output at
/// `p` reacted to the perturbation.
pub fn check_causality(
    model: &TcnModel,
    seq: &FrameSequence,
    trials: usize,
    seed: u64,
) -> Result<CausalityReport> {
    let k = seq.len();
    if k < 2 {
        return Err(Error::TooFewFrames { needed: 2, got: k });
    }
    let base = model.forward_trace(seq)?;
    let mut rng = SplitMix64::new(seed);
    let (h, w, c) = seq.shape();
    let mut violations = Vec::new();
    let mut sensitive_trials = 0;
    let mut input = base.input.clone();
    for trial in 0..trials {
        let t = rng.below(k - 1);
        let p = t + 1 + rng.below(k - 1 - t);
        let (y, x, ch) = (rng.below(h), rng.below(w), rng.below(c));
        let idx = ((p * h + y) * w + x) * c + ch;
        let old = input.data[idx];
        input.data[idx] = if old < 0.5 { old + 0.5 } else { old - 0.5 };

        let (rewards, q) = model.incremental_from_input(&base, &input, p);
        for i in 0..=t {
            let same = rewards[i].to_bits() == base.rewards[i].to_bits()
                && q[i].to_bits() == base.q[i].to_bits();
            if !same {
                violations.push(Violation {
                    trial,
                    t,
                    perturbed_frame: p,
                    output_index: i,
                });
            }
        }
        if rewards[p].to_bits() != base.rewards[p].to_bits()
            || q[p].to_bits() != base.q[p].to_bits()
        {
            sensitive_trials += 1;
        }
        input.data[idx] = old;
    }
    Ok(CausalityReport {
        trials,
        violations,
        sensitive_trials,
    })
}

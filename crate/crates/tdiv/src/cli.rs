//! The `tdiv` command-line surface.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use tdiv_core::mdp::{self, QTrace, RewardTrace};
use tdiv_core::preprocess::{run_pipeline, NormStats, PreprocessAlgo};
use tdiv_core::rng::SplitMix64;
use tdiv_core::synth::{add_noise, synthesize, ArtifactMode, NoiseSpec};
use tdiv_core::tcn::{
    check_causality, default_config, init_model, receptive_field, TcnConfig, TcnModel,
    TemporalPadding,
};
use tdiv_core::{
    distance_matrix, dssim, l1_mean, mse, t_dssim, t_psnr, ColorMode, Frame, FrameSequence,
    SsimParams,
};

use crate::error::Error;
use crate::io::{load_sequence, save_sequence, write_fvr, SequenceFormat};
use crate::model_file::{load_model, save_model};
use crate::report::{
    curve_csv, ext_vec, matrix_csv, matrix_pgm, to_json, ExtF64, MetricReportJson, MetricsOutput,
};

/// Failure of a command, split by who is at fault.
#[derive(thiserror::Error, Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input. Exit code 2.
    #[error("{0}")]
    Input(String),
    /// Anything else, including failure to write outputs. Exit code 1.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        CliError::Internal(e.to_string())
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "tdiv",
    version,
    about = "Temporal diversity metrics, artifact synthesis, MDP rewards and a causal TCN"
)]
pub struct Cli {
    /// Worker threads; output is identical for any value.
    #[arg(long, global = true, env = "TDIV_THREADS")]
    pub threads: Option<usize>,
    /// Indent JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Temporal diversity report (t-PSNR, t-DSSIM).
    Metrics(MetricsArgs),
    /// Build an artifact sequence from a base clip.
    Synth(SynthArgs),
    /// Pairwise frame distance matrix as CSV and optional PGM.
    Heatmap(HeatmapArgs),
    /// Q-targets, losses and Bellman residuals.
    #[command(subcommand)]
    Mdp(MdpCommand),
    /// Causal temporal-convolutional discriminator.
    #[command(subcommand)]
    Tcn(TcnCommand),
    /// Classifier preprocessing into a normalized raw tensor.
    Preprocess(PreprocessArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// A directory of frame_%05d.png files or a .fvr file.
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; inferred from the path when omitted.
    #[arg(long)]
    pub format: Option<SequenceFormat>,
}

impl InputArgs {
    fn load(&self) -> CliResult<FrameSequence> {
        let format = match self.format {
            Some(f) => f,
            None => SequenceFormat::infer(&self.input).map_err(CliError::input)?,
        };
        load_sequence(&self.input, format).map_err(CliError::input)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum MetricName {
    TPsnr,
    TDssim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorArg {
    Luma,
    PerChannel,
}

impl From<ColorArg> for ColorMode {
    fn from(c: ColorArg) -> Self {
        match c {
            ColorArg::Luma => ColorMode::Luma,
            ColorArg::PerChannel => ColorMode::PerChannel,
        }
    }
}

#[derive(Args, Debug)]
pub struct SsimArgs {
    #[arg(long, default_value_t = 11)]
    pub ssim_window: usize,
    #[arg(long, default_value_t = 1.5)]
    pub ssim_sigma: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub ssim_c1: f64,
    #[arg(long, default_value_t = 9e-4)]
    pub ssim_c2: f64,
}

impl SsimArgs {
    fn params(&self) -> CliResult<SsimParams> {
        let p = SsimParams {
            window_size: self.ssim_window,
            window_sigma: self.ssim_sigma,
            c1: self.ssim_c1,
            c2: self.ssim_c2,
        };
        p.validate().map_err(CliError::input)?;
        Ok(p)
    }
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Metrics to compute; repeatable. Defaults to both.
    #[arg(long = "metric")]
    pub metrics: Vec<MetricName>,
    #[arg(long, value_enum, default_value_t = ColorArg::Luma)]
    pub color: ColorArg,
    #[command(flatten)]
    pub ssim: SsimArgs,
    /// Per-timestep `t,value` CSV. With several metrics the metric name is
    /// inserted before the extension.
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthMode {
    LoopingFwd,
    LoopingBwd,
    Freezing,
    Noise,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub mode: SynthMode,
    /// Output directory or .fvr file.
    #[arg(long)]
    pub out: PathBuf,
    /// Output format; inferred from the path when omitted.
    #[arg(long)]
    pub out_format: Option<SequenceFormat>,
    /// Noise mean.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mean: f64,
    /// Noise variance.
    #[arg(long, default_value_t = 0.03)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceName {
    L1,
    Mse,
    Dssim,
}

#[derive(Args, Debug)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Binary PGM rendering of the lower triangle.
    #[arg(long)]
    pub out_image: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DistanceName::L1)]
    pub distance: DistanceName,
}

#[derive(Subcommand, Debug)]
pub enum MdpCommand {
    /// Averaged discounted forward sums of a reward trace.
    QTargets {
        /// JSON file `{"rewards": [...]}`.
        #[arg(long)]
        rewards: PathBuf,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Q supervision, generator discount term and assembled objectives.
    Losses(LossesArgs),
    /// One-step Bellman residuals (diagnostic).
    Bellman {
        #[arg(long)]
        rewards: PathBuf,
        /// JSON file `{"q": [...]}`.
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct LossesArgs {
    /// Real-sample rewards.
    #[arg(long)]
    pub rewards: PathBuf,
    /// Real-sample Q-values.
    #[arg(long)]
    pub q: PathBuf,
    /// Generated-sample rewards; enables the assembled objectives.
    #[arg(long, requires = "fake_q")]
    pub fake_rewards: Option<PathBuf>,
    /// Generated-sample Q-values.
    #[arg(long, requires = "fake_rewards")]
    pub fake_q: Option<PathBuf>,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub beta: f64,
    /// Image discriminator loss.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub l_i: f64,
    /// Video discriminator loss.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub l_v: f64,
    /// Generator-side image loss.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub l_i_fake: f64,
    /// Generator-side video loss.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub l_v_fake: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ArchArgs {
    /// Input frame size (square).
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// Trunk filter counts.
    #[arg(long, value_delimiter = ',', default_values_t = [64usize, 128, 256])]
    pub filters: Vec<usize>,
}

impl ArchArgs {
    fn config(&self) -> CliResult<TcnConfig> {
        let mut cfg = default_config();
        if self.filters.len() != cfg.trunk.len() {
            return Err(CliError::Input(format!(
                "--filters needs {} values, got {}",
                cfg.trunk.len(),
                self.filters.len()
            )));
        }
        cfg.input_size = [self.size, self.size];
        for (l, &f) in cfg.trunk.iter_mut().zip(&self.filters) {
            l.filters = f;
        }
        cfg.validate().map_err(CliError::input)?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
pub enum TcnCommand {
    /// Write a seeded random model.
    Init {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Keep weights in the JSON instead of a sidecar.
        #[arg(long)]
        inline: bool,
        #[command(flatten)]
        arch: ArchArgs,
    },
    /// Per-timestep rewards and Q-values.
    Forward {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized perturbation test of output causality.
    CheckCausality(CausalityArgs),
    /// Temporal receptive field of a model or the default architecture.
    ReceptiveField {
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct CausalityArgs {
    /// Model file; otherwise a random model from --seed.
    #[arg(long, conflicts_with = "seed")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub arch: ArchArgs,
    /// Input clip; otherwise uniform noise frames.
    #[arg(long, conflicts_with = "frames")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<SequenceFormat>,
    /// Window length K for generated input.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Seed of the generated input and the trial sampler.
    #[arg(long, default_value_t = 0)]
    pub trial_seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Replace causal padding with symmetric padding (negative control).
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    /// Per-channel means, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    pub mean: Vec<f64>,
    /// Per-channel standard deviations, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub std: Vec<f64>,
    #[command(flatten)]
    pub input: InputArgs,
    /// Output .fvr file.
    #[arg(long)]
    pub out: PathBuf,
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| CliError::Internal(format!("{}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(CliError::internal)
        }
    }
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult {
    fs::write(path, bytes).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn curve_path(base: &Path, metric: &str, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.{metric}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{metric}"),
    };
    base.with_file_name(name)
}

fn cmd_metrics(a: &MetricsArgs, pretty: bool) -> CliResult {
    let seq = a.input.load()?;
    let params = a.ssim.params()?;
    let color: ColorMode = a.color.into();
    let mut metrics = Vec::new();
    for m in &a.metrics {
        if !metrics.contains(m) {
            metrics.push(*m);
        }
    }
    if metrics.is_empty() {
        metrics = vec![MetricName::TPsnr, MetricName::TDssim];
    }
    let mut reports = Vec::with_capacity(metrics.len());
    for m in &metrics {
        let r = match m {
            MetricName::TPsnr => t_psnr(&seq, color),
            MetricName::TDssim => t_dssim(&seq, &params, color),
        }
        .map_err(CliError::input)?;
        reports.push(r);
    }
    if let Some(base) = &a.curve_out {
        for r in &reports {
            write_file(
                &curve_path(base, &r.metric, reports.len() > 1),
                curve_csv(r),
            )?;
        }
    }
    let out = MetricsOutput {
        frames: seq.len(),
        reports: reports.iter().map(MetricReportJson::from).collect(),
    };
    emit(a.out.as_deref(), &to_json(&out, pretty))
}

#[derive(Serialize)]
struct SynthSummary {
    mode: String,
    input_frames: usize,
    output_frames: usize,
}

fn cmd_synth(a: &SynthArgs, pretty: bool) -> CliResult {
    let seq = a.input.load()?;
    let out = match a.mode {
        SynthMode::LoopingFwd => synthesize(&seq, ArtifactMode::LoopingFwd),
        SynthMode::LoopingBwd => synthesize(&seq, ArtifactMode::LoopingBwd),
        SynthMode::Freezing => synthesize(&seq, ArtifactMode::Freezing),
        SynthMode::Noise => add_noise(
            &seq,
            &NoiseSpec {
                mean: a.mean,
                variance: a.sigma2,
                seed: a.seed,
            },
        ),
    }
    .map_err(CliError::input)?;
    let format = match a.out_format {
        Some(f) => f,
        None => SequenceFormat::infer(&a.out).map_err(CliError::input)?,
    };
    save_sequence(&out, &a.out, format).map_err(CliError::internal)?;
    let mode = a
        .mode
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    let summary = SynthSummary {
        mode,
        input_frames: seq.len(),
        output_frames: out.len(),
    };
    emit(None, &to_json(&summary, pretty))
}

#[derive(Serialize)]
struct HeatmapSummary {
    frames: usize,
    distance: String,
    max: ExtF64,
}

fn cmd_heatmap(a: &HeatmapArgs, pretty: bool) -> CliResult {
    let seq = a.input.load()?;
    let params = SsimParams::default();
    let m = match a.distance {
        DistanceName::L1 => distance_matrix(&seq, l1_mean),
        DistanceName::Mse => distance_matrix(&seq, mse),
        DistanceName::Dssim => distance_matrix(&seq, |x: &Frame, y: &Frame| dssim(x, y, &params)),
    }
    .map_err(CliError::input)?;
    write_file(&a.out_csv, matrix_csv(&m))?;
    if let Some(p) = &a.out_image {
        write_file(p, matrix_pgm(&m))?;
    }
    let distance = a
        .distance
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    emit(
        None,
        &to_json(
            &HeatmapSummary {
                frames: m.n(),
                distance,
                max: ExtF64(m.max()),
            },
            pretty,
        ),
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RewardsFile {
    rewards: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QFile {
    q: Vec<f64>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    if !path.exists() {
        return Err(CliError::input(Error::Missing(path.to_path_buf())));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::input(Error::io(path, e)))?;
    serde_json::from_str(&text).map_err(|source| {
        CliError::input(Error::Json {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn read_rewards(path: &Path) -> CliResult<RewardTrace> {
    let f: RewardsFile = read_json(path)?;
    RewardTrace::new(f.rewards).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_q(path: &Path) -> CliResult<QTrace> {
    let f: QFile = read_json(path)?;
    QTrace::new(f.q).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct QTargetsOut {
    gamma: f64,
    targets: Vec<ExtF64>,
}

#[derive(Serialize)]
struct QLossOut {
    per_step: Vec<ExtF64>,
    mean: ExtF64,
}

impl From<mdp::QLoss> for QLossOut {
    fn from(l: mdp::QLoss) -> Self {
        Self {
            per_step: ext_vec(&l.per_step),
            mean: ExtF64(l.mean),
        }
    }
}

#[derive(Serialize)]
struct LossesOut {
    gamma: f64,
    beta: f64,
    l_q_real: QLossOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    l_q_fake: Option<QLossOut>,
    /// Computed on the generated Q-values when given, else on the real ones.
    l_t: ExtF64,
    #[serde(skip_serializing_if = "Option::is_none")]
    discriminator_loss: Option<ExtF64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generator_loss: Option<ExtF64>,
}

#[derive(Serialize)]
struct BellmanOut {
    gamma: f64,
    residuals: Vec<ExtF64>,
}

fn cmd_mdp(c: &MdpCommand, pretty: bool) -> CliResult {
    match c {
        MdpCommand::QTargets {
            rewards,
            gamma,
            out,
        } => {
            let r = read_rewards(rewards)?;
            let t = mdp::q_targets(&r, *gamma).map_err(CliError::input)?;
            let o = QTargetsOut {
                gamma: *gamma,
                targets: ext_vec(t.values()),
            };
            emit(out.as_deref(), &to_json(&o, pretty))
        }
        MdpCommand::Losses(a) => {
            let r = read_rewards(&a.rewards)?;
            let q = read_q(&a.q)?;
            mdp::validate_beta(a.beta).map_err(CliError::input)?;
            let lq_real = mdp::l_q(&q, &r, a.gamma).map_err(CliError::input)?;
            let mut out = LossesOut {
                gamma: a.gamma,
                beta: a.beta,
                l_q_real: QLossOut::from(lq_real.clone()),
                l_q_fake: None,
                l_t: ExtF64(mdp::l_t(&q, a.beta).map_err(CliError::input)?),
                discriminator_loss: None,
                generator_loss: None,
            };
            if let (Some(fr), Some(fq)) = (&a.fake_rewards, &a.fake_q) {
                let fr = read_rewards(fr)?;
                let fq = read_q(fq)?;
                let lq_fake = mdp::l_q(&fq, &fr, a.gamma).map_err(CliError::input)?;
                let d = mdp::assemble_discriminator_loss(a.l_i, a.l_v, lq_real.mean, lq_fake.mean)
                    .map_err(CliError::input)?;
                let g = mdp::assemble_generator_loss(a.l_i_fake, a.l_v_fake, &fq, a.beta)
                    .map_err(CliError::input)?;
                out.l_t = ExtF64(mdp::l_t(&fq, a.beta).map_err(CliError::input)?);
                out.l_q_fake = Some(lq_fake.into());
                out.discriminator_loss = Some(ExtF64(d));
                out.generator_loss = Some(ExtF64(g));
            }
            emit(a.out.as_deref(), &to_json(&out, pretty))
        }
        MdpCommand::Bellman {
            rewards,
            q,
            gamma,
            out,
        } => {
            let r = read_rewards(rewards)?;
            let q = read_q(q)?;
            let res = mdp::bellman_residual(&q, &r, *gamma).map_err(CliError::input)?;
            let o = BellmanOut {
                gamma: *gamma,
                residuals: ext_vec(&res),
            };
            emit(out.as_deref(), &to_json(&o, pretty))
        }
    }
}

/// `k` frames of uniform noise at the model's input shape.
pub fn noise_sequence(config: &TcnConfig, k: usize, seed: u64) -> tdiv_core::Result<FrameSequence> {
    let [h, w] = config.input_size;
    let c = config.in_channels;
    let mut rng = SplitMix64::new(seed);
    let frames = (0..k)
        .map(|_| {
            Frame::new(
                h,
                w,
                c,
                (0..h * w * c).map(|_| rng.next_f64() as f32).collect(),
            )
        })
        .collect::<tdiv_core::Result<Vec<_>>>()?;
    FrameSequence::new(frames)
}

#[derive(Serialize)]
struct InitOut {
    seed: u64,
    parameters: usize,
    receptive_field: usize,
}

#[derive(Serialize)]
struct ForwardOut {
    rewards: Vec<ExtF64>,
    q: Vec<ExtF64>,
}

#[derive(Serialize)]
struct ViolationOut {
    trial: usize,
    t: usize,
    perturbed_frame: usize,
    output_index: usize,
}

#[derive(Serialize)]
struct CausalityOut {
    temporal_padding: TemporalPadding,
    frames: usize,
    trials: usize,
    violations: usize,
    sensitive_trials: usize,
    violation_details: Vec<ViolationOut>,
}

#[derive(Serialize)]
struct ReceptiveFieldOut {
    total_frames: usize,
    per_layer: Vec<usize>,
}

fn parameter_count(m: &TcnModel) -> usize {
    let layer = |l: &tdiv_core::tcn::ConvLayer| {
        l.weight().len() + l.bias().len() + l.batchnorm().map_or(0, |b| 4 * b.scale.len())
    };
    m.trunk().iter().map(layer).sum::<usize>() + layer(m.reward_head()) + layer(m.q_head())
}

fn cmd_tcn(c: &TcnCommand, pretty: bool) -> CliResult {
    match c {
        TcnCommand::Init {
            seed,
            out,
            inline,
            arch,
        } => {
            let cfg = arch.config()?;
            let model = init_model(&cfg, *seed).map_err(CliError::input)?;
            save_model(&model, out, *inline, pretty).map_err(CliError::internal)?;
            let o = InitOut {
                seed: *seed,
                parameters: parameter_count(&model),
                receptive_field: receptive_field(&cfg).total_frames,
            };
            emit(None, &to_json(&o, pretty))
        }
        TcnCommand::Forward { model, input, out } => {
            let m = load_model(model).map_err(CliError::input)?;
            let seq = input.load()?;
            let (r, q) = m.forward(&seq).map_err(CliError::input)?;
            let o = ForwardOut {
                rewards: ext_vec(r.values()),
                q: ext_vec(q.values()),
            };
            emit(out.as_deref(), &to_json(&o, pretty))
        }
        TcnCommand::CheckCausality(a) => {
            let model = match (&a.model, a.seed) {
                (Some(p), _) => load_model(p).map_err(CliError::input)?,
                (None, Some(seed)) => {
                    init_model(&a.arch.config()?, seed).map_err(CliError::input)?
                }
                (None, None) => {
                    return Err(CliError::Input(
                        "either --model or --seed is required".into(),
                    ))
                }
            };
            let model = if a.symmetric {
                model.with_temporal_padding(TemporalPadding::Symmetric)
            } else {
                model
            };
            let seq = match (&a.input, a.frames) {
                (Some(p), _) => InputArgs {
                    input: p.clone(),
                    format: a.format,
                }
                .load()?,
                (None, k) => noise_sequence(model.config(), k.unwrap_or(16), a.trial_seed)
                    .map_err(CliError::input)?,
            };
            let report =
                check_causality(&model, &seq, a.trials, a.trial_seed).map_err(CliError::input)?;
            let o = CausalityOut {
                temporal_padding: model.temporal_padding(),
                frames: seq.len(),
                trials: report.trials,
                violations: report.violations.len(),
                sensitive_trials: report.sensitive_trials,
                violation_details: report
                    .violations
                    .iter()
                    .map(|v| ViolationOut {
                        trial: v.trial,
                        t: v.t,
                        perturbed_frame: v.perturbed_frame,
                        output_index: v.output_index,
                    })
                    .collect(),
            };
            emit(a.out.as_deref(), &to_json(&o, pretty))
        }
        TcnCommand::ReceptiveField { model } => {
            let cfg = match model {
                Some(p) => load_model(p).map_err(CliError::input)?.config().clone(),
                None => default_config(),
            };
            let rf = receptive_field(&cfg);
            let o = ReceptiveFieldOut {
                total_frames: rf.total_frames,
                per_layer: rf.per_layer,
            };
            emit(None, &to_json(&o, pretty))
        }
    }
}

#[derive(Serialize)]
struct PreprocessOut {
    algo: String,
    shape: [usize; 4],
    crop_offset: Option<[usize; 2]>,
    nonstandard_input: bool,
}

fn cmd_preprocess(a: &PreprocessArgs, pretty: bool) -> CliResult {
    let seq = a.input.load()?;
    let stats = NormStats::new(a.mean.clone(), a.std.clone()).map_err(CliError::input)?;
    let algo = match a.algo {
        AlgoArg::A => PreprocessAlgo::A,
        AlgoArg::B => PreprocessAlgo::B,
    };
    let out = run_pipeline(&seq, algo, &stats).map_err(CliError::input)?;
    if out.nonstandard_input {
        let (h, w, _) = seq.shape();
        eprintln!("warning: input frames are {h}x{w}; the pipelines are defined for 64x64");
    }
    let (n, h, w, c) = out.tensor.shape();
    let data: Vec<f32> = out.tensor.data.iter().map(|&v| v as f32).collect();
    write_fvr(&a.out, [n, h, w, c], &data).map_err(CliError::internal)?;
    let o = PreprocessOut {
        algo: format!("{:?}", a.algo),
        shape: [n, h, w, c],
        crop_offset: out.crop_offset.map(|(y, x)| [y, x]),
        nonstandard_input: out.nonstandard_input,
    };
    emit(None, &to_json(&o, pretty))
}

pub fn run(cli: &Cli) -> CliResult {
    let pretty = cli.pretty;
    match &cli.command {
        Command::Metrics(a) => cmd_metrics(a, pretty),
        Command::Synth(a) => cmd_synth(a, pretty),
        Command::Heatmap(a) => cmd_heatmap(a, pretty),
        Command::Mdp(c) => cmd_mdp(c, pretty),
        Command::Tcn(c) => cmd_tcn(c, pretty),
        Command::Preprocess(a) => cmd_preprocess(a, pretty),
    }
}

/// Parses `std::env::args`, runs the command and maps failures to exit
/// codes 2 (usage or input) and 1 (internal).
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

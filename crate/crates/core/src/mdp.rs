//! Reward arithmetic for a per-timestep video discriminator.
//!
//! Rewards `r_t` and Q-values `Q_t` are indexed by timestep only. The loss
//! terms follow the MDP formulation of a video GAN:
//!
//! * Q-target: `(1/(K-t+1)) * sum_{i=t..K} gamma^(i-t) r_i`
//! * `L_Q,t = (target_t - Q_t)^2`, averaged over `t` for the discriminator
//! * `L_T = sum_{t=1..K} beta^t Q_t` for the generator (exponent starts at 1,
//!   so `beta = 0` switches Q supervision off)
//!
//! All inputs are caller-supplied scores; no network is evaluated here.

use alloc::vec::Vec;

use crate::error::{Error, Result};

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "trace must contain at least one value",
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

/// Immediate rewards `r_1..r_K`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RewardTrace(Vec<f64>);

impl RewardTrace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite(&values, "reward trace")?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Q-values `Q_1..Q_K`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QTrace(Vec<f64>);

impl QTrace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_finite(&values, "Q trace")?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MdpConfig {
    /// Q-target discount, `[0, 1)`. `0` is the no-lookahead ablation.
    pub gamma: f64,
    /// Generator-side discount, `[0, 1]`.
    pub beta: f64,
    /// Window length `K >= 1`.
    pub k: usize,
}

impl MdpConfig {
    pub fn new(gamma: f64, beta: f64, k: usize) -> Result<Self> {
        validate_gamma(gamma)?;
        validate_beta(beta)?;
        if k == 0 {
            return Err(Error::InvalidParameter("window length K must be >= 1"));
        }
        Ok(Self { gamma, beta, k })
    }
}

pub fn validate_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter("gamma must lie in [0, 1)"));
    }
    Ok(())
}

pub fn validate_beta(beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter("beta must lie in [0, 1]"));
    }
    Ok(())
}

/// `sum_{t=0..K-1} gamma^t r_{t+1}`
pub fn discounted_return(r: &RewardTrace, gamma: f64) -> Result<f64> {
    validate_gamma(gamma)?;
    // Horner from the back keeps a single multiply per step.
    Ok(r.values().iter().rev().fold(0.0, |acc, &x| x + gamma * acc))
}

/// Averaged discounted forward sums; `target_K = r_K`.
pub fn q_targets(r: &RewardTrace, gamma: f64) -> Result<QTrace> {
    validate_gamma(gamma)?;
    let k = r.len();
    let mut out = alloc::vec![0.0; k];
    let mut tail = 0.0;
    for t in (0..k).rev() {
        tail = r.values()[t] + gamma * tail;
        out[t] = tail / (k - t) as f64;
    }
    Ok(QTrace(out))
}

/// Per-timestep squared errors against [`q_targets`] and their mean.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QLoss {
    pub per_step: Vec<f64>,
    pub mean: f64,
}

pub fn l_q(q: &QTrace, r: &RewardTrace, gamma: f64) -> Result<QLoss> {
    if q.len() != r.len() {
        return Err(Error::LengthMismatch {
            left: q.len(),
            right: r.len(),
        });
    }
    let targets = q_targets(r, gamma)?;
    let per_step: Vec<f64> = targets
        .values()
        .iter()
        .zip(q.values())
        .map(|(t, q)| (t - q) * (t - q))
        .collect();
    let mean = per_step.iter().sum::<f64>() / per_step.len() as f64;
    Ok(QLoss { per_step, mean })
}

/// `sum_{t=1..K} beta^t Q_t`
pub fn l_t(q: &QTrace, beta: f64) -> Result<f64> {
    validate_beta(beta)?;
    let mut weight = 1.0;
    let mut sum = 0.0;
    for &v in q.values() {
        weight *= beta;
        sum += weight * v;
    }
    Ok(sum)
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Discriminator objective: `L_I + L_V + mean L_Q(real) + mean L_Q(fake)`.
pub fn assemble_discriminator_loss(l_i: f64, l_v: f64, lq_real: f64, lq_fake: f64) -> Result<f64> {
    Ok(finite(l_i, "L_I")?
        + finite(l_v, "L_V")?
        + finite(lq_real, "L_Q real")?
        + finite(lq_fake, "L_Q fake")?)
}

/// Generator objective: `L_I(fake) + L_V(fake) + L_T`.
pub fn assemble_generator_loss(
    l_i_fake: f64,
    l_v_fake: f64,
    q_fake: &QTrace,
    beta: f64,
) -> Result<f64> {
    let lt = l_t(q_fake, beta)?;
    Ok(finite(l_i_fake, "L_I fake")? + finite(l_v_fake, "L_V fake")? + lt)
}

/// One-step Bellman residuals `Q_t - (r_t + gamma Q_{t+1})`, with
/// `Q_K - r_K` at the end of the window. A diagnostic only: the averaged
/// Q-targets are not a Bellman fixed point.
pub fn bellman_residual(q: &QTrace, r: &RewardTrace, gamma: f64) -> Result<Vec<f64>> {
    if q.len() != r.len() {
        return Err(Error::LengthMismatch {
            left: q.len(),
            right: r.len(),
        });
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter("gamma must lie in [0, 1]"));
    }
    let (q, r) = (q.values(), r.values());
    let k = q.len();
    Ok((0..k)
        .map(|t| {
            let next = if t + 1 < k { gamma * q[t + 1] } else { 0.0 };
            q[t] - (r[t] + next)
        })
        .collect())
}

#![cfg_attr(not(feature = "std"), no_std)]

//! Temporal diversity metrics for frame sequences, synthesis of looping and
//! freezing artifacts, MDP reward arithmetic for video GAN discriminators and
//! a forward-only causal dilated 3D-convolution discriminator.
//!
//! The crate is `no_std` + `alloc`. The `std` feature enables `std` error
//! impls; `parallel` spreads the O(N²) pair sweeps and convolution channels
//! over a rayon pool without changing any result bit.

extern crate alloc;

pub mod error;
pub mod frame;
pub mod mdp;
pub mod metrics;
pub mod preprocess;
pub mod rng;
pub mod synth;
pub mod tcn;
pub mod temporal;

mod par;

pub use error::{Error, Result};
pub use frame::{to_grayscale, Frame, FrameSequence};
pub use metrics::{dssim, l1_mean, mse, psnr, ssim, ColorMode, SsimParams};
pub use temporal::{
    distance_matrix, per_timestep_curve, t_distance, t_dssim, t_psnr, t_similarity, DistanceMatrix,
    DiversityReport, FrameMatch,
};

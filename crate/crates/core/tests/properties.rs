mod common;

use proptest::prelude::*;
use tdiv_core::mdp::{
    bellman_residual, discounted_return, l_q, l_t, q_targets, QTrace, RewardTrace,
};
use tdiv_core::preprocess::{
    bicubic_resize, denormalize, normalize, run_pipeline, NormStats, PreprocessAlgo,
};
use tdiv_core::rng::SplitMix64;
use tdiv_core::synth::{add_noise, synthesize, ArtifactMode, NoiseSpec};
use tdiv_core::{
    distance_matrix, dssim, l1_mean, mse, psnr, ssim, t_distance, t_dssim, t_psnr, to_grayscale,
    ColorMode, Frame, FrameSequence, SsimParams,
};

fn frame(h: usize, w: usize, c: usize) -> impl Strategy<Value = Frame> {
    prop::collection::vec(0.0f32..=1.0, h * w * c)
        .prop_map(move |d| Frame::new(h, w, c, d).unwrap())
}

fn trace(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pair_kernels_are_symmetric(a in frame(12, 12, 1), b in frame(12, 12, 1)) {
        prop_assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
        prop_assert_eq!(l1_mean(&a, &b).unwrap(), l1_mean(&b, &a).unwrap());
        let p = SsimParams::default();
        let s = ssim(&a, &b, &p).unwrap();
        prop_assert!((s - ssim(&b, &a, &p).unwrap()).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&s));
        prop_assert!((dssim(&a, &b, &p).unwrap() - (1.0 - s) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn l1_triangle_inequality(a in frame(6, 6, 3), b in frame(6, 6, 3), c in frame(6, 6, 3)) {
        let ab = l1_mean(&a, &b).unwrap();
        let bc = l1_mean(&b, &c).unwrap();
        prop_assert!(l1_mean(&a, &c).unwrap() <= ab + bc + 1e-12);
    }

    #[test]
    fn ssim_luminance_shift(a in frame(16, 16, 1), b in frame(16, 16, 1)) {
        // Squash into [0.05, 0.9] so a 0.05 shift never clips.
        let squash = |f: &Frame, d: f32| {
            Frame::new(16, 16, 1, f.data().iter().map(|v| 0.05 + v * 0.85 + d).collect()).unwrap()
        };
        let p = SsimParams::default();
        let s0 = ssim(&squash(&a, 0.0), &squash(&b, 0.0), &p).unwrap();
        let s1 = ssim(&squash(&a, 0.05), &squash(&b, 0.05), &p).unwrap();
        prop_assert!((s0 - s1).abs() <= 1e-3, "{} vs {}", s0, s1);
    }

    #[test]
    fn psnr_decreases_with_mse(a in frame(4, 4, 1), d1 in 0.01f32..0.4, d2 in 0.01f32..0.4) {
        let shift = |d: f32| Frame::new(4, 4, 1, a.data().iter().map(|v| if *v > 0.5 { v - d } else { v + d }).collect()).unwrap();
        let (f1, f2) = (shift(d1), shift(d2));
        let (m1, m2) = (mse(&a, &f1).unwrap(), mse(&a, &f2).unwrap());
        if m1 < m2 {
            prop_assert!(psnr(&a, &f1).unwrap() > psnr(&a, &f2).unwrap());
        }
    }

    #[test]
    fn grayscale_idempotent(f in frame(3, 5, 3)) {
        let seq = FrameSequence::new(vec![f]).unwrap();
        let once = to_grayscale(&seq);
        prop_assert_eq!(to_grayscale(&once), once);
    }

    #[test]
    fn repeated_frame_contributes_zero(frames in prop::collection::vec(frame(4, 4, 1), 2..8), pick in 0usize..8) {
        let mut v = frames.clone();
        v.push(frames[pick % frames.len()].clone());
        let seq = FrameSequence::new(v).unwrap();
        let r = t_distance(&seq, l1_mean).unwrap();
        prop_assert_eq!(r.per_frame.last().unwrap().value, 0.0);
        prop_assert_eq!(t_psnr(&seq, ColorMode::Luma).unwrap().aggregate, f64::INFINITY);
    }

    #[test]
    fn dssim_aggregate_bounded(frames in prop::collection::vec(frame(12, 12, 1), 2..6)) {
        let seq = FrameSequence::new(frames).unwrap();
        let r = t_dssim(&seq, &SsimParams::default(), ColorMode::Luma).unwrap();
        prop_assert!((0.0..=0.5).contains(&r.aggregate));
        let m = distance_matrix(&seq, l1_mean).unwrap();
        let d = t_distance(&seq, l1_mean).unwrap();
        prop_assert!(d.aggregate >= 0.0 && d.aggregate <= m.max());
    }

    #[test]
    fn two_frame_reversal_invariant(a in frame(12, 12, 1), b in frame(12, 12, 1)) {
        let p = SsimParams::default();
        let fwd = FrameSequence::new(vec![a.clone(), b.clone()]).unwrap();
        let rev = FrameSequence::new(vec![b, a]).unwrap();
        let (x, y) = (t_dssim(&fwd, &p, ColorMode::Luma).unwrap(), t_dssim(&rev, &p, ColorMode::Luma).unwrap());
        prop_assert!((x.aggregate - y.aggregate).abs() < 1e-12);
        prop_assert_eq!(t_psnr(&fwd, ColorMode::Luma).unwrap().aggregate, t_psnr(&rev, ColorMode::Luma).unwrap().aggregate);
    }

    #[test]
    fn synth_doubles_and_reduces_diversity(frames in prop::collection::vec(frame(12, 12, 1), 2..6)) {
        let base = FrameSequence::new(frames).unwrap();
        let p = SsimParams::default();
        let base_d = t_dssim(&base, &p, ColorMode::Luma).unwrap().aggregate;
        for mode in [ArtifactMode::LoopingFwd, ArtifactMode::LoopingBwd, ArtifactMode::Freezing] {
            let out = synthesize(&base, mode).unwrap();
            prop_assert_eq!(out.len(), 2 * base.len());
            prop_assert_eq!(t_psnr(&out, ColorMode::Luma).unwrap().aggregate, f64::INFINITY);
            // Random frames are distinct, so the base has positive diversity.
            prop_assert!(t_dssim(&out, &p, ColorMode::Luma).unwrap().aggregate < base_d);
        }
    }

    #[test]
    fn q_targets_linear(r1 in trace(8), seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = SplitMix64::new(seed);
        let r2: Vec<f64> = r1.iter().map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        let mix: Vec<f64> = r1.iter().zip(&r2).map(|(x, y)| a * x + b * y).collect();
        for gamma in [0.0, 0.5, 0.9] {
            let t1 = q_targets(&RewardTrace::new(r1.clone()).unwrap(), gamma).unwrap();
            let t2 = q_targets(&RewardTrace::new(r2.clone()).unwrap(), gamma).unwrap();
            let tm = q_targets(&RewardTrace::new(mix.clone()).unwrap(), gamma).unwrap();
            for i in 0..r1.len() {
                prop_assert!((tm.values()[i] - (a * t1.values()[i] + b * t2.values()[i])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mdp_invariants(r in trace(16), gamma in 0.0f64..0.99) {
        let rt = RewardTrace::new(r.clone()).unwrap();
        let targets = q_targets(&rt, gamma).unwrap();
        prop_assert_eq!(*targets.values().last().unwrap(), *r.last().unwrap());
        let loss = l_q(&targets, &rt, gamma).unwrap();
        prop_assert!(loss.per_step.iter().all(|&v| v == 0.0));
        prop_assert_eq!(loss.mean, 0.0);
        let direct: f64 = r.iter().enumerate().map(|(t, x)| gamma.powi(t as i32) * x).sum();
        prop_assert!((discounted_return(&rt, gamma).unwrap() - direct).abs() < 1e-12);
        if r.len() == 1 {
            prop_assert_eq!(discounted_return(&rt, gamma).unwrap(), targets.values()[0]);
        }
        prop_assert_eq!(bellman_residual(&targets, &rt, gamma).unwrap().len(), r.len());
    }

    #[test]
    fn l_q_nonnegative(r in trace(8), seed in any::<u64>(), gamma in 0.0f64..0.99) {
        let mut rng = SplitMix64::new(seed);
        let q: Vec<f64> = r.iter().map(|_| rng.next_f64() * 4.0 - 2.0).collect();
        let loss = l_q(&QTrace::new(q).unwrap(), &RewardTrace::new(r).unwrap(), gamma).unwrap();
        prop_assert!(loss.per_step.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn l_t_boundaries_and_monotone(q in trace(16), beta in 0.01f64..=1.0, idx in 0usize..16, bump in 0.0f64..2.0) {
        let qt = QTrace::new(q.clone()).unwrap();
        prop_assert_eq!(l_t(&qt, 0.0).unwrap(), 0.0);
        prop_assert!((l_t(&qt, 1.0).unwrap() - q.iter().sum::<f64>()).abs() < 1e-12);
        let mut q2 = q.clone();
        q2[idx % q.len()] += bump;
        prop_assert!(l_t(&QTrace::new(q2).unwrap(), beta).unwrap() >= l_t(&qt, beta).unwrap());
    }

    #[test]
    fn normalize_roundtrip(f in frame(5, 4, 3), m in prop::collection::vec(-1.0f64..1.0, 3), s in prop::collection::vec(0.05f64..3.0, 3)) {
        let stats = NormStats::new(m, s).unwrap();
        let seq = FrameSequence::new(vec![f.clone()]).unwrap();
        let back = denormalize(&normalize(&seq, &stats).unwrap(), &stats).unwrap();
        for (x, y) in back.iter().zip(f.data()) {
            prop_assert!((x - *y as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn bicubic_translation_equivariant(f in frame(12, 12, 1)) {
        // Shift by one source pixel = shift by two output pixels at 2x.
        let shifted = Frame::new(12, 12, 1, (0..144).map(|i| {
            let (y, x) = (i / 12, i % 12);
            f.get(y, (x + 11) % 12, 0)
        }).collect()).unwrap();
        let a = bicubic_resize(&f, 24, 24).unwrap();
        let b = bicubic_resize(&shifted, 24, 24).unwrap();
        for y in 0..24 {
            for x in 6..18 {
                prop_assert!((b.get(y, x + 2, 0) - a.get(y, x, 0)).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn distance_matrix_probes() {
    let mut rng = SplitMix64::new(4);
    let seq = common::random_sequence(&mut rng, 20, 8, 8, 1);
    let m = distance_matrix(&seq, l1_mean).unwrap();
    for _ in 0..100 {
        let (i, j) = (rng.below(20), rng.below(20));
        let want = if i == j {
            0.0
        } else {
            l1_mean(seq.frame(i), seq.frame(j)).unwrap()
        };
        assert_eq!(m.get(i, j), want);
        assert_eq!(m.get(i, j), m.get(j, i));
    }
}

#[test]
fn looping_curve_and_matrix_show_the_period() {
    let mut rng = SplitMix64::new(5);
    let base = common::random_sequence(&mut rng, 8, 12, 12, 1);
    let looped = synthesize(&base, ArtifactMode::LoopingFwd).unwrap();
    let r = t_dssim(&looped, &SsimParams::default(), ColorMode::Luma).unwrap();
    let curve = tdiv_core::per_timestep_curve(&r);
    assert_eq!(curve.len(), 15);
    for &(t, v) in &curve {
        if t >= 9 {
            assert_eq!(v, 0.0, "t = {t}");
        } else {
            assert!(v > 0.0);
        }
    }
    let m = distance_matrix(&looped, l1_mean).unwrap();
    for i in 8..16 {
        assert_eq!(m.get(i, i - 8), 0.0);
    }
}

#[test]
fn noise_variance_law_of_large_numbers() {
    let frames: Vec<Frame> = (0..16)
        .map(|_| Frame::filled(256, 256, 1, 0.5).unwrap())
        .collect();
    let seq = FrameSequence::new(frames).unwrap();
    let spec = NoiseSpec {
        mean: 0.0,
        variance: 0.03,
        seed: 77,
    };
    // Raw draws, before any clamping.
    let n = seq.len() * 256 * 256;
    let (mut s, mut s2) = (0.0, 0.0);
    for f in 0..seq.len() {
        for i in 0..256 * 256 {
            let z = spec.sample(f, i);
            s += z;
            s2 += z * z;
        }
    }
    let mean = s / n as f64;
    let var = s2 / n as f64 - mean * mean;
    assert!(n >= 1_000_000);
    assert!((var - 0.03).abs() <= 0.05 * 0.03, "raw variance {var}");
    // Clamped output on mid-gray stays close as well.
    let noisy = add_noise(&seq, &spec).unwrap();
    let vals: Vec<f64> = noisy
        .frames()
        .iter()
        .flat_map(|f| f.data().iter().map(|&v| v as f64))
        .collect();
    let m = vals.iter().sum::<f64>() / vals.len() as f64;
    let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / vals.len() as f64;
    assert!((v - 0.03).abs() <= 0.05 * 0.03, "clamped variance {v}");
}

#[test]
fn pipelines_shape_and_constant_fixed_point() {
    let stats = NormStats::new(vec![0.4, 0.5, 0.6], vec![0.2, 0.25, 0.3]).unwrap();
    let c = FrameSequence::new(vec![Frame::filled(64, 64, 3, 0.3).unwrap(); 2]).unwrap();
    let a = run_pipeline(&c, PreprocessAlgo::A, &stats).unwrap();
    let b = run_pipeline(&c, PreprocessAlgo::B, &stats).unwrap();
    assert_eq!(a.tensor.shape(), (2, 112, 112, 3));
    assert_eq!(b.tensor.shape(), (2, 112, 112, 3));
    assert_eq!(a.crop_offset, Some((8, 8)));
    assert_eq!(b.crop_offset, None);
    assert!(!a.nonstandard_input);
    for (x, y) in a.tensor.data.iter().zip(&b.tensor.data) {
        assert!((x - y).abs() < 1e-6);
    }
}

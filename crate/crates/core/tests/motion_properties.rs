mod common;

use proptest::prelude::*;
use qis_core::motion::{make_patch_triplet, sample_global_trajectory, MotionModel};
use qis_core::synthetic::textured_scene;
use qis_core::{make_triplet, warp_sequence, MotionTrajectory, SceneImage, SensorConfig};

#[test]
fn sampled_magnitudes_stay_in_range() {
    for model in [MotionModel::Linear, MotionModel::SmoothRandom] {
        for seed in 0..10_000u64 {
            let t = sample_global_trajectory(seed, (7.0, 35.0), 8, model).unwrap();
            let m = t.total_magnitude();
            assert!((7.0 - 1e-9..=35.0 + 1e-9).contains(&m), "seed {seed}: {m}");
            assert_eq!(t.get(0), (0.0, 0.0));
            assert_eq!(t.len(), 8);
        }
    }
}

#[test]
fn composed_integer_shifts_equal_single_shift() {
    let s = textured_scene(40, 30, 3).unwrap();
    let a = MotionTrajectory::new(vec![(0.0, 0.0), (2.0, 1.0)]).unwrap();
    let b = MotionTrajectory::new(vec![(0.0, 0.0), (3.0, -2.0)]).unwrap();
    let ab = MotionTrajectory::new(vec![(0.0, 0.0), (5.0, -1.0)]).unwrap();
    let once = warp_sequence(&s, &a, None).unwrap().remove(1);
    let twice = warp_sequence(&once, &b, None).unwrap().remove(1);
    let direct = warp_sequence(&s, &ab, None).unwrap().remove(1);
    for y in 8..22 {
        for x in 8..32 {
            assert_eq!(twice.get(x, y), direct.get(x, y));
        }
    }
}

#[test]
fn triplet_members_share_dimensions_and_config() {
    let s = textured_scene(48, 40, 1).unwrap();
    let c = SensorConfig::default().with_gain(2.0);
    let traj = MotionTrajectory::linear((6.0, 2.0), 8).unwrap();
    let t = make_triplet(&s, &c, 9, &traj, None).unwrap();
    assert_eq!(t.x_true, s);
    assert_eq!(t.x_motion[0], t.x_true);
    assert!(t.x_motion.iter().all(|f| f.dims() == s.dims()));
    assert_eq!((t.x_qis.width(), t.x_qis.height()), (48, 40));
    assert_eq!((t.x_noise.width(), t.x_noise.height()), (48, 40));
    assert_eq!(t.x_noise.frame_count(), 1);
    assert_eq!(t.x_qis.frame_count(), 8);
    assert_eq!(t.x_noise.config().gain_alpha, t.x_qis.config().gain_alpha);
    assert_eq!(t.x_noise.config().adc_bits, t.x_qis.config().adc_bits);
    assert_ne!(t.x_noise.seed(), t.x_qis.seed());
}

#[test]
fn clean_view_does_not_depend_on_noise_seed() {
    let s = textured_scene(48, 48, 2).unwrap();
    let c = SensorConfig::default().with_gain(2.0);
    let traj = MotionTrajectory::linear((9.5, -3.25), 8).unwrap();
    let a = make_triplet(&s, &c, 1, &traj, None).unwrap();
    let b = make_triplet(&s, &c, 2, &traj, None).unwrap();
    assert_eq!(a.x_motion, b.x_motion);
    assert_ne!(a.x_qis.data(), b.x_qis.data());
}

#[test]
fn static_triplet_noise_views_share_a_distribution() {
    // 10^5 pixels: compare the mean of x_qis frame values with x_noise
    let s = SceneImage::filled(400, 250, 0.5).unwrap();
    let c = SensorConfig::default().with_gain(4.0);
    let t = make_triplet(&s, &c, 77, &MotionTrajectory::zero(8), None).unwrap();
    let noise: Vec<f64> = t.x_noise.frame(0).iter().map(|&v| f64::from(v)).collect();
    let qis: Vec<f64> = t.x_qis.frame(3).iter().map(|&v| f64::from(v)).collect();
    let (m1, v1) = common::mean_var(&noise);
    let (m2, v2) = common::mean_var(&qis);
    let n = noise.len() as f64;
    let z = (m1 - m2) / (v1 / n + v2 / n).sqrt();
    assert!(z.abs() < 4.0, "two-sample z = {z}");
    assert!((v1 / v2 - 1.0).abs() < 0.05);
}

#[test]
fn patch_triplet_never_pads() {
    // a scene whose border is 1.0 and interior 0.25: any padding would leak 1.0
    let s = SceneImage::from_fn(140, 140, |x, y| {
        if x < 2 || y < 2 || x > 137 || y > 137 {
            1.0
        } else {
            0.25
        }
    })
    .unwrap();
    let c = SensorConfig::default().with_gain(4.0);
    for seed in 0..20 {
        let traj =
            sample_global_trajectory(seed, (7.0, 35.0), 8, MotionModel::SmoothRandom).unwrap();
        if traj.max_excursion() > 35.0 {
            continue;
        }
        let t = make_patch_triplet(&s, 64, 35, &c, seed, &traj, None).unwrap();
        assert!(t
            .x_motion
            .iter()
            .all(|f| f.data().iter().all(|&v| v == 0.25)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bilinear_warp_stays_within_scene_range(seed in 0u64..1000, dx in -20.0f64..20.0, dy in -20.0f64..20.0) {
        let s = textured_scene(32, 24, seed).unwrap();
        let (lo, hi) = s.min_max();
        let traj = MotionTrajectory::new(vec![(0.0, 0.0), (dx, dy)]).unwrap();
        let f = warp_sequence(&s, &traj, None).unwrap();
        prop_assert!(f[1].data().iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
        prop_assert_eq!(&f[0], &s);
    }

    #[test]
    fn trajectory_magnitude_law(seed: u64, lo in 0.0f64..20.0, span in 0.0f64..30.0) {
        let t = sample_global_trajectory(seed, (lo, lo + span), 8, MotionModel::Linear).unwrap();
        let m = t.total_magnitude();
        prop_assert!(m >= lo - 1e-9 && m <= lo + span + 1e-9);
    }
}

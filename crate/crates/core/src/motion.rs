//! Synthetic motion: trajectories, frame warping, patch cropping and
//! training-triplet assembly.
//!
//! Frame 0 is the reference pose. Frame `t` shows the scene moved by the
//! displacement `d_t`, i.e. it samples the source at `p - d_t`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{QisError, Result};
use crate::rng::{derive_seed, CounterRng};
use crate::sensor::{simulate_burst, simulate_static_burst};
use crate::types::{
    LocalMotionSpec, MotionTrajectory, RigidTransform, SceneImage, SensorConfig, Triplet,
    MAX_ROTATION_DEG,
};

pub const DEFAULT_MAGNITUDE_RANGE: (f64, f64) = (7.0, 35.0);
pub const DEFAULT_PATCH_SIZE: usize = 64;
/// Standard deviation of the per-frame jitter of the smooth-random model, in pixels.
pub const JITTER_SIGMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotionModel {
    Linear,
    SmoothRandom,
}

impl std::str::FromStr for MotionModel {
    type Err = QisError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "smooth-random" => Ok(Self::SmoothRandom),
            other => Err(QisError::InvalidArgument(format!(
                "unknown motion model `{other}` (expected linear or smooth-random)"
            ))),
        }
    }
}

/// Random global camera motion. The endpoint has Euclidean length drawn
/// uniformly from `magnitude_range` and a uniformly random direction.
pub fn sample_global_trajectory(
    seed: u64,
    magnitude_range: (f64, f64),
    frames: usize,
    model: MotionModel,
) -> Result<MotionTrajectory> {
    let (lo, hi) = magnitude_range;
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
        return Err(QisError::InvalidMotion(format!(
            "magnitude range [{lo}, {hi}] must satisfy 0 <= lo <= hi"
        )));
    }
    if frames < 2 {
        return Err(QisError::InvalidMotion(format!(
            "need at least 2 frames, got {frames}"
        )));
    }
    let mut rng = CounterRng::from_key(derive_seed(seed, "global-trajectory", 0));
    let magnitude = (lo + rng.uniform_open() * (hi - lo)).clamp(lo, hi);
    let theta = std::f64::consts::TAU * rng.uniform_open();
    let total = (magnitude * theta.cos(), magnitude * theta.sin());
    let linear = MotionTrajectory::linear(total, frames)?;
    match model {
        MotionModel::Linear => Ok(linear),
        MotionModel::SmoothRandom => {
            let mut d = linear.displacements().to_vec();
            // endpoints stay fixed so t=0 is anchored and the magnitude is preserved
            for p in d.iter_mut().take(frames - 1).skip(1) {
                let jx: f64 = StandardNormal.sample(&mut rng);
                let jy: f64 = StandardNormal.sample(&mut rng);
                p.0 += JITTER_SIGMA * jx;
                p.1 += JITTER_SIGMA * jy;
            }
            MotionTrajectory::new(d)
        }
    }
}

/// Per-frame foreground transforms: translation follows `trajectory`,
/// rotation grows linearly from 0 to `final_angle_deg`.
pub fn local_transforms(
    trajectory: &MotionTrajectory,
    final_angle_deg: f64,
) -> Result<Vec<RigidTransform>> {
    if !(0.0..=MAX_ROTATION_DEG).contains(&final_angle_deg) {
        return Err(QisError::InvalidMotion(format!(
            "rotation {final_angle_deg} outside [0, {MAX_ROTATION_DEG}]"
        )));
    }
    let n = trajectory.len();
    Ok(trajectory
        .displacements()
        .iter()
        .enumerate()
        .map(|(t, &(dx, dy))| RigidTransform {
            dx,
            dy,
            angle_deg: if n > 1 {
                final_angle_deg * t as f64 / (n - 1) as f64
            } else {
                0.0
            },
        })
        .collect())
}

/// Bilinear sample with clamp-to-edge addressing; pixel centers sit on
/// integer coordinates.
#[inline]
pub fn sample_bilinear(img: &SceneImage, x: f64, y: f64) -> f64 {
    let (w, h) = (img.width(), img.height());
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    if fx == 0.0 && fy == 0.0 {
        return img.get(x0, y0);
    }
    let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
    let bottom = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
    top * (1.0 - fy) + bottom * fy
}

fn translate(scene: &SceneImage, (dx, dy): (f64, f64)) -> Result<SceneImage> {
    if dx == 0.0 && dy == 0.0 {
        return Ok(scene.clone());
    }
    SceneImage::from_clamped(
        scene.width(),
        scene.height(),
        (0..scene.height())
            .flat_map(|y| {
                (0..scene.width())
                    .map(move |x| sample_bilinear(scene, x as f64 - dx, y as f64 - dy))
            })
            .collect(),
    )
}

/// Composites the rigidly moved foreground over the fixed background.
fn move_foreground(
    scene: &SceneImage,
    spec: &LocalMotionSpec,
    tr: &RigidTransform,
) -> Result<SceneImage> {
    if *tr == RigidTransform::IDENTITY {
        return Ok(scene.clone());
    }
    let (w, h) = (scene.width(), scene.height());
    let (cx, cy) = spec.centroid();
    let (sin, cos) = tr.angle_deg.to_radians().sin_cos();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            // inverse map: undo translation, then rotate back about the centroid
            let ux = x as f64 - tr.dx - cx;
            let uy = y as f64 - tr.dy - cy;
            let sx = cos * ux + sin * uy + cx;
            let sy = -sin * ux + cos * uy + cy;
            let nx = sx.round();
            let ny = sy.round();
            let covered = nx >= 0.0
                && ny >= 0.0
                && (nx as usize) < w
                && (ny as usize) < h
                && spec.is_foreground(nx as usize, ny as usize);
            let v = if covered {
                sample_bilinear(scene, sx, sy)
            } else if spec.is_foreground(x, y) {
                // disoccluded: reveal the background plate
                spec.background().map_or(scene.get(x, y), |bg| bg.get(x, y))
            } else {
                scene.get(x, y)
            };
            out.push(v);
        }
    }
    SceneImage::from_clamped(w, h, out)
}

/// Renders one clean frame per trajectory entry. With a local spec the
/// foreground moves over a fixed background and the trajectory is applied
/// on top as camera motion.
pub fn warp_sequence(
    scene: &SceneImage,
    trajectory: &MotionTrajectory,
    local_spec: Option<&LocalMotionSpec>,
) -> Result<Vec<SceneImage>> {
    if let Some(spec) = local_spec {
        if spec.width() != scene.width() || spec.height() != scene.height() {
            return Err(QisError::DimensionMismatch(format!(
                "mask is {}x{}, scene is {}x{}",
                spec.width(),
                spec.height(),
                scene.width(),
                scene.height()
            )));
        }
        if spec.transforms().len() != trajectory.len() {
            return Err(QisError::FrameCountMismatch {
                expected: trajectory.len(),
                actual: spec.transforms().len(),
            });
        }
    }
    (0..trajectory.len())
        .map(|t| {
            let layered = match local_spec {
                Some(spec) => move_foreground(scene, spec, &spec.transforms()[t])?,
                None => scene.clone(),
            };
            translate(&layered, trajectory.get(t))
        })
        .collect()
}

/// Top-left corner of a random `size`×`size` window that keeps `margin`
/// pixels of source on every side.
pub fn crop_origin(
    width: usize,
    height: usize,
    size: usize,
    margin: usize,
    seed: u64,
) -> Result<(usize, usize)> {
    let need = size + 2 * margin;
    if size == 0 || width < need || height < need {
        return Err(QisError::InvalidArgument(format!(
            "source {width}x{height} too small for patch {size} with margin {margin}"
        )));
    }
    let mut rng = CounterRng::from_key(derive_seed(seed, "crop", 0));
    let span_x = (width - need + 1) as f64;
    let span_y = (height - need + 1) as f64;
    let ox = ((rng.uniform_open() * span_x) as usize).min(width - need);
    let oy = ((rng.uniform_open() * span_y) as usize).min(height - need);
    Ok((ox + margin, oy + margin))
}

pub fn crop_patch(scene: &SceneImage, size: usize, margin: usize, seed: u64) -> Result<SceneImage> {
    let (x0, y0) = crop_origin(scene.width(), scene.height(), size, margin, seed)?;
    scene.crop(x0, y0, size, size)
}

fn noise_seeds(seed: u64) -> (u64, u64) {
    (
        derive_seed(seed, "x_noise", 0),
        derive_seed(seed, "x_qis", 0),
    )
}

fn assemble(
    x_true: SceneImage,
    x_motion: Vec<SceneImage>,
    config: &SensorConfig,
    seed: u64,
    trajectory: &MotionTrajectory,
    local_spec: Option<LocalMotionSpec>,
) -> Result<Triplet> {
    let (noise_seed, qis_seed) = noise_seeds(seed);
    let x_noise = simulate_static_burst(&x_true, &config.with_frames(1), noise_seed)?;
    let x_qis =
        simulate_burst(&x_motion, config, qis_seed)?.with_trajectory(Some(trajectory.clone()));
    Ok(Triplet {
        x_true,
        x_motion,
        x_noise,
        x_qis,
        trajectory: trajectory.clone(),
        local_spec,
    })
}

fn check_triplet_inputs(config: &SensorConfig, trajectory: &MotionTrajectory) -> Result<()> {
    config.validate()?;
    if trajectory.len() != config.frames_per_burst {
        return Err(QisError::FrameCountMismatch {
            expected: config.frames_per_burst,
            actual: trajectory.len(),
        });
    }
    Ok(())
}

/// Clean dynamic, noisy static and noisy dynamic views of one scene.
/// The two noisy views draw from disjoint counter keys.
pub fn make_triplet(
    scene: &SceneImage,
    config: &SensorConfig,
    seed: u64,
    trajectory: &MotionTrajectory,
    local_spec: Option<&LocalMotionSpec>,
) -> Result<Triplet> {
    check_triplet_inputs(config, trajectory)?;
    let x_motion = warp_sequence(scene, trajectory, local_spec)?;
    assemble(
        scene.clone(),
        x_motion,
        config,
        seed,
        trajectory,
        local_spec.cloned(),
    )
}

/// Like [`make_triplet`] but crops a `size`×`size` patch from a larger source
/// and warps with `margin` pixels of real context around it, so no padding
/// enters the patch. The global excursion must not exceed `margin`.
#[allow(clippy::too_many_arguments)]
pub fn make_patch_triplet(
    source: &SceneImage,
    size: usize,
    margin: usize,
    config: &SensorConfig,
    seed: u64,
    trajectory: &MotionTrajectory,
    local_spec: Option<&LocalMotionSpec>,
) -> Result<Triplet> {
    check_triplet_inputs(config, trajectory)?;
    if trajectory.max_excursion() > margin as f64 {
        return Err(QisError::InvalidMotion(format!(
            "trajectory travels {:.2} px but the crop margin is only {margin}",
            trajectory.max_excursion()
        )));
    }
    let (x0, y0) = crop_origin(source.width(), source.height(), size, margin, seed)?;
    let (wx, wy, wn) = (x0 - margin, y0 - margin, size + 2 * margin);
    let window = source.crop(wx, wy, wn, wn)?;
    let local_window = local_spec.map(|s| s.crop(wx, wy, wn, wn)).transpose()?;
    let frames = warp_sequence(&window, trajectory, local_window.as_ref())?;
    let x_motion = frames
        .iter()
        .map(|f| f.crop(margin, margin, size, size))
        .collect::<Result<Vec<_>>>()?;
    let x_true = source.crop(x0, y0, size, size)?;
    // a patch that shows no foreground carries no local spec
    let local_patch = local_window.and_then(|s| s.crop(margin, margin, size, size).ok());
    assemble(x_true, x_motion, config, seed, trajectory, local_patch)
}

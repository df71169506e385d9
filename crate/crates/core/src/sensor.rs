//! Photon-counting forward model.
//!
//! Per pixel and frame: `lambda = alpha * (x + dark_rate * t_int)`,
//! `c ~ Poisson(lambda)`, `r ~ N(0, sigma_r^2)`, output `ADC(c + r)`.
//! Every draw is keyed on `(seed, frame, y, x, kind)`, so results do not
//! depend on how the work is scheduled across threads.

use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{QisError, Result};
use crate::rng::{CounterRng, DrawKind};
use crate::types::{Burst, SceneImage, SensorConfig};

/// Above this mean the sampler switches from single-uniform inversion to
/// rejection sampling. Inversion keeps counts monotone in `lambda` for a
/// fixed key.
const INVERSION_LIMIT: f64 = 64.0;

/// Gain that makes the scene's mean photon count per pixel equal `target_ppp`.
pub fn calibrate_gain(scene: &SceneImage, target_ppp: f64) -> Result<f64> {
    if !(target_ppp.is_finite() && target_ppp > 0.0) {
        return Err(QisError::InvalidArgument(format!(
            "target ppp must be positive, got {target_ppp}"
        )));
    }
    let mean = scene.mean();
    if mean <= 0.0 {
        return Err(QisError::CalibrationImpossible);
    }
    Ok(target_ppp / mean)
}

#[inline]
fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

/// Analog-to-digital conversion of one analog electron count.
pub fn adc_quantize(analog_value: f64, config: &SensorConfig) -> u8 {
    let r = round_half_up(analog_value);
    if config.adc_bits == 1 {
        u8::from(r >= f64::from(config.single_bit_threshold))
    } else {
        r.clamp(0.0, f64::from(config.max_code())) as u8
    }
}

/// Exact Poisson draw. Uses inversion of the CDF with a single uniform for
/// small means.
pub fn sample_poisson(lambda: f64, rng: &mut CounterRng) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda > INVERSION_LIMIT {
        let dist = Poisson::new(lambda).expect("finite positive mean");
        return dist.sample(rng) as u64;
    }
    let u = rng.uniform_open();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while cdf < u {
        k += 1;
        p *= lambda / k as f64;
        let next = cdf + p;
        if next == cdf {
            // remaining tail mass is below double precision
            break;
        }
        cdf = next;
    }
    k
}

/// Photon mean for one pixel.
#[inline]
pub fn pixel_mean(x: f64, config: &SensorConfig) -> f64 {
    config.gain_alpha * (x + config.dark_level())
}

#[inline]
fn simulate_pixel(x: f64, config: &SensorConfig, seed: u64, t: u64, px: u64, py: u64) -> u8 {
    let lambda = pixel_mean(x, config);
    let mut photon_rng = CounterRng::for_pixel(seed, t, py, px, DrawKind::Photon);
    let count = sample_poisson(lambda, &mut photon_rng) as f64;
    let read = if config.read_noise_sigma > 0.0 {
        let mut noise_rng = CounterRng::for_pixel(seed, t, py, px, DrawKind::ReadNoise);
        let z: f64 = StandardNormal.sample(&mut noise_rng);
        config.read_noise_sigma * z
    } else {
        0.0
    };
    adc_quantize(count + read, config)
}

fn check_frame_index(config: &SensorConfig, frame_index: usize) -> Result<()> {
    if frame_index >= config.frames_per_burst {
        return Err(QisError::InvalidArgument(format!(
            "frame index {frame_index} outside [0, {})",
            config.frames_per_burst
        )));
    }
    Ok(())
}

fn render_frame(scene: &SceneImage, config: &SensorConfig, seed: u64, t: usize, out: &mut [u8]) {
    let w = scene.width();
    out.par_chunks_mut(w)
        .zip(scene.data().par_chunks(w))
        .enumerate()
        .for_each(|(y, (row_out, row_in))| {
            for (x, (o, &v)) in row_out.iter_mut().zip(row_in).enumerate() {
                *o = simulate_pixel(v, config, seed, t as u64, x as u64, y as u64);
            }
        });
}

/// One quantized frame, row-major `H`×`W`.
pub fn simulate_frame(
    scene: &SceneImage,
    config: &SensorConfig,
    seed: u64,
    frame_index: usize,
) -> Result<Vec<u8>> {
    config.validate()?;
    check_frame_index(config, frame_index)?;
    let mut out = vec![0u8; scene.width() * scene.height()];
    render_frame(scene, config, seed, frame_index, &mut out);
    Ok(out)
}

/// Conventional-sensor frame. The pipeline is identical; the caller picks a
/// large read noise and a deep ADC.
pub fn simulate_cis_frame(
    scene: &SceneImage,
    cis_config: &SensorConfig,
    seed: u64,
    frame_index: usize,
) -> Result<Vec<u8>> {
    simulate_frame(scene, cis_config, seed, frame_index)
}

/// Simulates a burst from one clean frame per output frame.
pub fn simulate_burst(frames: &[SceneImage], config: &SensorConfig, seed: u64) -> Result<Burst> {
    config.validate()?;
    if frames.len() != config.frames_per_burst {
        return Err(QisError::FrameCountMismatch {
            expected: config.frames_per_burst,
            actual: frames.len(),
        });
    }
    let (w, h) = (frames[0].width(), frames[0].height());
    if let Some(f) = frames.iter().find(|f| f.width() != w || f.height() != h) {
        return Err(QisError::DimensionMismatch(format!(
            "frame is {}x{}, expected {w}x{h}",
            f.width(),
            f.height()
        )));
    }
    let n = w * h;
    let mut data = vec![0u8; n * frames.len()];
    data.par_chunks_mut(n)
        .zip(frames.par_iter())
        .enumerate()
        .for_each(|(t, (out, scene))| render_frame(scene, config, seed, t, out));
    Burst::new(w, h, frames.len(), data, *config, seed)
}

/// Simulates a burst of a scene that does not move.
pub fn simulate_static_burst(
    scene: &SceneImage,
    config: &SensorConfig,
    seed: u64,
) -> Result<Burst> {
    let frames = vec![scene.clone(); config.frames_per_burst];
    simulate_burst(&frames, config, seed)
}

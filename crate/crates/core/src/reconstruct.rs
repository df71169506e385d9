//! Training-free reconstruction baselines and the kernel-merge primitive.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QisError, Result};
use crate::types::{Burst, KernelField, SceneImage};

/// Reconstruction strategies that work directly on a burst.
#[derive(Debug, Clone, PartialEq)]
pub enum ReconstructionMethod {
    BurstAverage,
    AverageThenDenoise,
    AnscombeDenoise,
    MleBinary,
    KernelMerge(KernelField),
}

impl ReconstructionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BurstAverage => "burst-average",
            Self::AverageThenDenoise => "average-then-denoise",
            Self::AnscombeDenoise => "anscombe-denoise",
            Self::MleBinary => "mle-binary",
            Self::KernelMerge(_) => "kernel-merge",
        }
    }

    /// Parses a method that needs no attached data.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "burst-average" => Ok(Self::BurstAverage),
            "average-then-denoise" => Ok(Self::AverageThenDenoise),
            "anscombe-denoise" => Ok(Self::AnscombeDenoise),
            "mle-binary" => Ok(Self::MleBinary),
            "kernel-merge" => Err(QisError::InvalidArgument(
                "kernel-merge needs a kernel field".into(),
            )),
            other => Err(QisError::InvalidArgument(format!(
                "unknown reconstruction method `{other}`"
            ))),
        }
    }
}

/// Non-local means settings. `filter_strength` is the `h` in
/// `w = exp(-d^2 / h^2)`, with `d^2` the mean squared patch difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlmParams {
    pub patch_radius: usize,
    pub search_radius: usize,
    pub filter_strength: f64,
}

/// Knobs for the denoising pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub patch_radius: usize,
    pub search_radius: usize,
    /// Filter strength as a multiple of the estimated noise standard deviation.
    pub strength_per_sigma: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            patch_radius: 2,
            search_radius: 7,
            strength_per_sigma: 2.0,
        }
    }
}

impl PipelineOptions {
    fn nlm(&self, sigma: f64) -> NlmParams {
        NlmParams {
            patch_radius: self.patch_radius,
            search_radius: self.search_radius,
            filter_strength: self.strength_per_sigma * sigma,
        }
    }
}

/// Per-pixel mean photon count divided by the gain, minus the mean dark level.
pub fn average_burst(burst: &Burst) -> SceneImage {
    let c = burst.config();
    let scale = 1.0 / (burst.frame_count() as f64 * c.gain_alpha);
    let dark = c.dark_level();
    let data = burst
        .summed()
        .into_iter()
        .map(|s| (f64::from(s) * scale - dark).clamp(0.0, 1.0))
        .collect();
    SceneImage::new(burst.width(), burst.height(), data).expect("clamped to [0, 1]")
}

/// Variance-stabilizing transform for binomial counts `S` out of `T` trials.
pub fn anscombe_binomial(summed: &[u32], frames: u32) -> Result<Vec<f64>> {
    if frames == 0 {
        return Err(QisError::InvalidArgument(
            "frame count must be positive".into(),
        ));
    }
    if let Some(&s) = summed.iter().find(|&&s| s > frames) {
        return Err(QisError::InvalidArgument(format!(
            "sum {s} exceeds frame count {frames}"
        )));
    }
    Ok(summed
        .iter()
        .map(|&s| anscombe_binomial_value(f64::from(s), f64::from(frames)))
        .collect())
}

#[inline]
pub fn anscombe_binomial_value(s: f64, t: f64) -> f64 {
    2.0 * (t + 0.5).sqrt() * ((s + 0.375) / (t + 0.75)).sqrt().asin()
}

/// Algebraic inverse of [`anscombe_binomial_value`], clamped to `[0, T]`.
#[inline]
pub fn inverse_anscombe_binomial(z: f64, t: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let angle = (z / (2.0 * (t + 0.5).sqrt())).clamp(0.0, half_pi);
    ((t + 0.75) * angle.sin().powi(2) - 0.375).clamp(0.0, t)
}

/// Poisson mean implied by a detection probability, with the continuity
/// clamp `p <= 1 - 1/(2T)`.
#[inline]
pub fn binary_rate_to_flux(p: f64, frames: usize) -> f64 {
    let eps = 1.0 / (2.0 * frames as f64);
    let p = p.clamp(0.0, 1.0 - eps);
    -(-p).ln_1p()
}

fn require_binary(burst: &Burst, method: &str) -> Result<()> {
    if burst.adc_bits() != 1 {
        return Err(QisError::IncompatibleMethod {
            method: method.into(),
            reason: format!("requires a 1-bit burst, got {}-bit", burst.adc_bits()),
        });
    }
    if burst.config().single_bit_threshold != 1 {
        return Err(QisError::IncompatibleMethod {
            method: method.into(),
            reason: "requires threshold q = 1".into(),
        });
    }
    Ok(())
}

/// Unclamped per-pixel photon mean estimate from a 1-bit burst.
pub fn mle_flux_binary(burst: &Burst) -> Result<Vec<f64>> {
    require_binary(burst, "mle-binary")?;
    let t = burst.frame_count();
    Ok(burst
        .summed()
        .into_iter()
        .map(|s| binary_rate_to_flux(f64::from(s) / t as f64, t))
        .collect())
}

/// Maximum-likelihood radiance from a 1-bit burst, normalized by the gain.
pub fn mle_invert_binary(burst: &Burst) -> Result<SceneImage> {
    let alpha = burst.config().gain_alpha;
    let data = mle_flux_binary(burst)?
        .into_iter()
        .map(|l| l / alpha)
        .collect();
    SceneImage::from_clamped(burst.width(), burst.height(), data)
}

/// Non-local means on a raw grid. Patch comparisons use clamp-to-edge
/// addressing; each output pixel is computed independently.
pub fn nlm_filter(
    data: &[f64],
    width: usize,
    height: usize,
    params: &NlmParams,
) -> Result<Vec<f64>> {
    if params.patch_radius == 0 || params.search_radius == 0 {
        return Err(QisError::InvalidArgument(
            "patch and search radii must be positive".into(),
        ));
    }
    if !(params.filter_strength.is_finite() && params.filter_strength >= 0.0) {
        return Err(QisError::InvalidArgument(format!(
            "filter strength must be >= 0, got {}",
            params.filter_strength
        )));
    }
    if data.len() != width * height {
        return Err(QisError::DimensionMismatch(format!(
            "grid has {} samples, expected {}",
            data.len(),
            width * height
        )));
    }
    if params.filter_strength == 0.0 {
        return Ok(data.to_vec());
    }
    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let pr = params.patch_radius as isize;
    let sr = params.search_radius as isize;
    let inv_h2 = 1.0 / (params.filter_strength * params.filter_strength);
    let patch_n = ((2 * pr + 1) * (2 * pr + 1)) as f64;
    let (w, h) = (width as isize, height as isize);
    let at = |x: isize, y: isize| data[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];

    let mut out = vec![0.0; data.len()];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        let y = y as isize;
        for (x, o) in row.iter_mut().enumerate() {
            let x = x as isize;
            let mut acc = 0.0;
            let mut norm = 0.0;
            for qy in (y - sr).max(0)..=(y + sr).min(h - 1) {
                for qx in (x - sr).max(0)..=(x + sr).min(w - 1) {
                    let mut d2 = 0.0;
                    for oy in -pr..=pr {
                        for ox in -pr..=pr {
                            let diff = at(x + ox, y + oy) - at(qx + ox, qy + oy);
                            d2 += diff * diff;
                        }
                    }
                    let wgt = (-(d2 / patch_n) * inv_h2).exp();
                    acc += wgt * at(qx, qy);
                    norm += wgt;
                }
            }
            *o = (acc / norm).clamp(lo, hi);
        }
    });
    Ok(out)
}

pub fn denoise_nlm(image: &SceneImage, params: &NlmParams) -> Result<SceneImage> {
    let out = nlm_filter(image.data(), image.width(), image.height(), params)?;
    SceneImage::from_clamped(image.width(), image.height(), out)
}

/// Kernel merge on raw grids: `out(p) = sum_t sum_o w[p,t,o] * frame_t(p + o)`
/// with zero padding outside the frame.
pub fn merge_kernel_field(
    frames: &[&[f64]],
    width: usize,
    height: usize,
    field: &KernelField,
) -> Result<Vec<f64>> {
    if field.width() != width || field.height() != height || field.frames() != frames.len() {
        return Err(QisError::DimensionMismatch(format!(
            "kernel field is {}x{}x{}, frames are {width}x{height}x{}",
            field.width(),
            field.height(),
            field.frames(),
            frames.len()
        )));
    }
    if let Some(f) = frames.iter().find(|f| f.len() != width * height) {
        return Err(QisError::DimensionMismatch(format!(
            "frame has {} samples, expected {}",
            f.len(),
            width * height
        )));
    }
    let k = field.kernel_size();
    let r = (k / 2) as isize;
    let per_pixel = field.taps_per_pixel();
    let weights = field.effective_weights();
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            let base = (y * width + x) * per_pixel;
            let mut acc = 0.0;
            for (t, frame) in frames.iter().enumerate() {
                for ky in 0..k {
                    let sy = y as isize + ky as isize - r;
                    if sy < 0 || sy >= height as isize {
                        continue;
                    }
                    for kx in 0..k {
                        let sx = x as isize + kx as isize - r;
                        if sx < 0 || sx >= width as isize {
                            continue;
                        }
                        let wgt = weights[base + (t * k + ky) * k + kx];
                        acc += wgt * frame[sy as usize * width + sx as usize];
                    }
                }
            }
            *o = acc;
        }
    });
    Ok(out)
}

pub fn apply_kernel_field(frames: &[SceneImage], field: &KernelField) -> Result<SceneImage> {
    let (w, h) = match frames.first() {
        Some(f) => (f.width(), f.height()),
        None => return Err(QisError::InvalidArgument("no frames".into())),
    };
    let raw: Vec<&[f64]> = frames.iter().map(|f| f.data()).collect();
    SceneImage::from_clamped(w, h, merge_kernel_field(&raw, w, h, field)?)
}

/// Burst frames as unclamped radiance estimates `y / alpha - dark`.
pub fn normalized_frames(burst: &Burst) -> Vec<Vec<f64>> {
    let c = burst.config();
    let dark = c.dark_level();
    burst
        .frames()
        .map(|f| {
            f.iter()
                .map(|&v| f64::from(v) / c.gain_alpha - dark)
                .collect()
        })
        .collect()
}

pub fn reconstruct_pipeline(burst: &Burst, method: &ReconstructionMethod) -> Result<SceneImage> {
    reconstruct_pipeline_with(burst, method, &PipelineOptions::default())
}

pub fn reconstruct_pipeline_with(
    burst: &Burst,
    method: &ReconstructionMethod,
    options: &PipelineOptions,
) -> Result<SceneImage> {
    match method {
        ReconstructionMethod::BurstAverage => Ok(average_burst(burst)),
        ReconstructionMethod::AverageThenDenoise => {
            let avg = average_burst(burst);
            let c = burst.config();
            let t = burst.frame_count() as f64;
            // shot plus read noise of the temporal mean, at the mean signal level
            let sigma = (avg.mean() / (c.gain_alpha * t)
                + (c.read_noise_sigma / c.gain_alpha).powi(2) / t)
                .sqrt();
            if sigma == 0.0 {
                return Ok(avg);
            }
            denoise_nlm(&avg, &options.nlm(sigma))
        }
        ReconstructionMethod::AnscombeDenoise => {
            require_binary(burst, method.name())?;
            let t = burst.frame_count();
            let tf = t as f64;
            let stabilized = anscombe_binomial(&burst.summed(), t as u32)?;
            // the transform has unit noise variance
            let denoised = nlm_filter(
                &stabilized,
                burst.width(),
                burst.height(),
                &options.nlm(1.0),
            )?;
            let alpha = burst.config().gain_alpha;
            let data = denoised
                .into_iter()
                .map(|z| binary_rate_to_flux(inverse_anscombe_binomial(z, tf) / tf, t) / alpha)
                .collect();
            SceneImage::from_clamped(burst.width(), burst.height(), data)
        }
        ReconstructionMethod::MleBinary => mle_invert_binary(burst),
        ReconstructionMethod::KernelMerge(field) => {
            let frames = normalized_frames(burst);
            let refs: Vec<&[f64]> = frames.iter().map(Vec::as_slice).collect();
            let merged = merge_kernel_field(&refs, burst.width(), burst.height(), field)?;
            SceneImage::from_clamped(burst.width(), burst.height(), merged)
        }
    }
}

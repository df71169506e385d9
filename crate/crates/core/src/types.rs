//! Domain types shared by every stage of the pipeline.
//!
//! All types validate their invariants on construction and are immutable
//! afterwards, so they can be shared freely between threads.

use serde::{Deserialize, Serialize};

use crate::error::{QisError, Result};

/// Physical constants of the photon-counting forward model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Expected photoelectrons per unit of normalized radiance per frame.
    pub gain_alpha: f64,
    /// Electrons per pixel per second.
    pub dark_current_rate: f64,
    /// Electrons RMS.
    pub read_noise_sigma: f64,
    pub adc_bits: u8,
    /// Electron threshold for single-bit readout.
    pub single_bit_threshold: u32,
    /// Seconds.
    pub integration_time: f64,
    pub frames_per_burst: usize,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            gain_alpha: 1.0,
            dark_current_rate: 0.0068,
            read_noise_sigma: 0.25,
            adc_bits: 3,
            single_bit_threshold: 1,
            integration_time: 75e-6,
            frames_per_burst: 8,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QisError::InvalidConfig(msg));
        if !(self.gain_alpha.is_finite() && self.gain_alpha > 0.0) {
            return bad(format!("gain_alpha must be > 0, got {}", self.gain_alpha));
        }
        if !(self.dark_current_rate.is_finite() && self.dark_current_rate >= 0.0) {
            return bad(format!(
                "dark_current_rate must be >= 0, got {}",
                self.dark_current_rate
            ));
        }
        if !(self.read_noise_sigma.is_finite() && self.read_noise_sigma >= 0.0) {
            return bad(format!(
                "read_noise_sigma must be >= 0, got {}",
                self.read_noise_sigma
            ));
        }
        if !(self.integration_time.is_finite() && self.integration_time > 0.0) {
            return bad(format!(
                "integration_time must be > 0, got {}",
                self.integration_time
            ));
        }
        if !(1..=8).contains(&self.adc_bits) {
            return bad(format!("adc_bits must be in [1, 8], got {}", self.adc_bits));
        }
        if self.single_bit_threshold < 1 {
            return bad("single_bit_threshold must be >= 1".into());
        }
        if self.adc_bits == 1 && self.single_bit_threshold > u32::from(self.max_code()) {
            return bad(format!(
                "single_bit_threshold must be <= {} for 1-bit readout, got {}",
                self.max_code(),
                self.single_bit_threshold
            ));
        }
        if self.frames_per_burst < 1 {
            return bad("frames_per_burst must be >= 1".into());
        }
        Ok(())
    }

    /// Largest ADC output code, `2^B - 1`.
    pub fn max_code(&self) -> u8 {
        max_code(self.adc_bits)
    }

    /// Mean dark electrons per frame, before gain.
    pub fn dark_level(&self) -> f64 {
        self.dark_current_rate * self.integration_time
    }

    pub fn with_gain(mut self, gain_alpha: f64) -> Self {
        self.gain_alpha = gain_alpha;
        self
    }

    pub fn with_frames(mut self, frames: usize) -> Self {
        self.frames_per_burst = frames;
        self
    }

    pub fn with_bits(mut self, bits: u8) -> Self {
        self.adc_bits = bits;
        self
    }

    pub fn with_read_noise(mut self, sigma: f64) -> Self {
        self.read_noise_sigma = sigma;
        self
    }

    pub fn with_dark_current(mut self, rate: f64) -> Self {
        self.dark_current_rate = rate;
        self
    }
}

pub(crate) fn max_code(bits: u8) -> u8 {
    ((1u16 << bits) - 1) as u8
}

/// Normalized radiance grid, row-major, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl SceneImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(QisError::InvalidScene(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(QisError::InvalidScene(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some((i, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && (0.0..=1.0).contains(*v)))
        {
            return Err(QisError::InvalidScene(format!(
                "sample {i} = {v} is outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by clamping arbitrary finite values into `[0, 1]`.
    /// Non-finite values become 0.
    pub fn from_clamped(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let data = data
            .into_iter()
            .map(|v| {
                if v.is_finite() {
                    v.clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(width, height, data)
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Copies the `w`×`h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(QisError::DimensionMismatch(format!(
                "crop {w}x{h}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x0 + w]);
        }
        Self::new(w, h, data)
    }
}

/// A stack of quantized photon-count frames, frame-major then row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    width: usize,
    height: usize,
    frame_count: usize,
    adc_bits: u8,
    data: Vec<u8>,
    config: SensorConfig,
    seed: u64,
    trajectory: Option<MotionTrajectory>,
}

impl Burst {
    pub fn new(
        width: usize,
        height: usize,
        frame_count: usize,
        data: Vec<u8>,
        config: SensorConfig,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if width == 0 || height == 0 || frame_count == 0 {
            return Err(QisError::InvalidBurst(format!(
                "dimensions must be positive, got {width}x{height}x{frame_count}"
            )));
        }
        let expected = width * height * frame_count;
        if data.len() != expected {
            return Err(QisError::InvalidBurst(format!(
                "expected {expected} samples, got {}",
                data.len()
            )));
        }
        let max = config.max_code();
        if let Some((offset, &value)) = data.iter().enumerate().find(|(_, &v)| v > max) {
            return Err(QisError::PayloadOutOfRange {
                offset,
                value,
                max,
                bits: config.adc_bits,
            });
        }
        Ok(Self {
            width,
            height,
            frame_count,
            adc_bits: config.adc_bits,
            data,
            config,
            seed,
            trajectory: None,
        })
    }

    pub fn with_trajectory(mut self, trajectory: Option<MotionTrajectory>) -> Self {
        self.trajectory = trajectory;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn adc_bits(&self) -> u8 {
        self.adc_bits
    }

    pub fn config(&self) -> &SensorConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trajectory(&self) -> Option<&MotionTrajectory> {
        self.trajectory.as_ref()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn frame_len(&self) -> usize {
        self.width * self.height
    }

    pub fn frame(&self, t: usize) -> &[u8] {
        let n = self.frame_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[u8]> {
        self.data.chunks_exact(self.frame_len())
    }

    /// Per-pixel sum over all frames.
    pub fn summed(&self) -> Vec<u32> {
        let mut sum = vec![0u32; self.frame_len()];
        for frame in self.frames() {
            for (s, &v) in sum.iter_mut().zip(frame) {
                *s += u32::from(v);
            }
        }
        sum
    }
}

/// Per-frame global displacement relative to the reference frame 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionTrajectory {
    displacements: Vec<(f64, f64)>,
}

impl MotionTrajectory {
    pub fn new(mut displacements: Vec<(f64, f64)>) -> Result<Self> {
        if displacements.is_empty() {
            return Err(QisError::InvalidMotion("trajectory is empty".into()));
        }
        if displacements[0] != (0.0, 0.0) {
            return Err(QisError::InvalidMotion(format!(
                "displacement at t=0 must be (0, 0), got {:?}",
                displacements[0]
            )));
        }
        if displacements
            .iter()
            .any(|(dx, dy)| !dx.is_finite() || !dy.is_finite())
        {
            return Err(QisError::InvalidMotion(
                "displacements must be finite".into(),
            ));
        }
        // canonical zero sign keeps serialized output stable
        displacements[0] = (0.0, 0.0);
        Ok(Self { displacements })
    }

    pub fn zero(frames: usize) -> Self {
        Self {
            displacements: vec![(0.0, 0.0); frames.max(1)],
        }
    }

    /// Evenly spaced displacements from the origin to `total` over `frames` frames.
    pub fn linear(total: (f64, f64), frames: usize) -> Result<Self> {
        if frames < 2 {
            return Self::new(vec![(0.0, 0.0); frames.max(1)]);
        }
        let last = (frames - 1) as f64;
        Self::new(
            (0..frames)
                .map(|t| {
                    let s = t as f64 / last;
                    (s * total.0, s * total.1)
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.displacements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.displacements.is_empty()
    }

    pub fn displacements(&self) -> &[(f64, f64)] {
        &self.displacements
    }

    pub fn get(&self, t: usize) -> (f64, f64) {
        self.displacements[t]
    }

    /// Euclidean length of the final displacement.
    pub fn total_magnitude(&self) -> f64 {
        let (dx, dy) = *self.displacements.last().expect("non-empty");
        dx.hypot(dy)
    }

    /// Largest per-axis excursion over all frames, in pixels.
    pub fn max_excursion(&self) -> f64 {
        self.displacements
            .iter()
            .map(|(dx, dy)| dx.abs().max(dy.abs()))
            .fold(0.0, f64::max)
    }
}

/// Rigid transform of the foreground layer for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub dx: f64,
    pub dy: f64,
    /// Degrees, counter-clockwise in image coordinates about the mask centroid.
    pub angle_deg: f64,
}

impl RigidTransform {
    pub const IDENTITY: Self = Self {
        dx: 0.0,
        dy: 0.0,
        angle_deg: 0.0,
    };
}

pub const MAX_ROTATION_DEG: f64 = 15.0;

/// Foreground mask plus a per-frame rigid motion for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMotionSpec {
    width: usize,
    height: usize,
    mask: Vec<bool>,
    transforms: Vec<RigidTransform>,
    /// Background plate revealed where the foreground moves away.
    /// When absent the source scene itself is used.
    background: Option<SceneImage>,
}

impl LocalMotionSpec {
    pub fn new(
        width: usize,
        height: usize,
        mask: Vec<bool>,
        transforms: Vec<RigidTransform>,
    ) -> Result<Self> {
        if mask.len() != width * height {
            return Err(QisError::InvalidMotion(format!(
                "mask has {} entries, expected {}",
                mask.len(),
                width * height
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(QisError::InvalidMotion(
                "mask has no foreground pixels".into(),
            ));
        }
        if transforms.is_empty() {
            return Err(QisError::InvalidMotion("no transforms given".into()));
        }
        if transforms[0] != RigidTransform::IDENTITY {
            return Err(QisError::InvalidMotion(
                "transform at t=0 must be the identity".into(),
            ));
        }
        for (t, tr) in transforms.iter().enumerate() {
            if !(tr.dx.is_finite() && tr.dy.is_finite()) {
                return Err(QisError::InvalidMotion(format!(
                    "translation at t={t} is not finite"
                )));
            }
            if !(0.0..=MAX_ROTATION_DEG).contains(&tr.angle_deg) {
                return Err(QisError::InvalidMotion(format!(
                    "rotation at t={t} is {} deg, must be in [0, {MAX_ROTATION_DEG}]",
                    tr.angle_deg
                )));
            }
        }
        Ok(Self {
            width,
            height,
            mask,
            transforms,
            background: None,
        })
    }

    pub fn with_background(mut self, background: SceneImage) -> Result<Self> {
        if background.width() != self.width || background.height() != self.height {
            return Err(QisError::DimensionMismatch(
                "background plate does not match mask dimensions".into(),
            ));
        }
        self.background = Some(background);
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn transforms(&self) -> &[RigidTransform] {
        &self.transforms
    }

    pub fn background(&self) -> Option<&SceneImage> {
        self.background.as_ref()
    }

    /// Centroid of the foreground in pixel-center coordinates.
    pub fn centroid(&self) -> (f64, f64) {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.mask[y * self.width + x] {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1;
                }
            }
        }
        (sx / n as f64, sy / n as f64)
    }

    pub fn is_foreground(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    /// Window of this spec matching `SceneImage::crop`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(QisError::DimensionMismatch(
                "mask crop out of bounds".into(),
            ));
        }
        let mut mask = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            mask.extend_from_slice(&self.mask[y * self.width + x0..y * self.width + x0 + w]);
        }
        let mut out = Self::new(w, h, mask, self.transforms.clone())?;
        if let Some(bg) = &self.background {
            out = out.with_background(bg.crop(x0, y0, w, h)?)?;
        }
        Ok(out)
    }
}

/// The three aligned training views plus ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplet {
    pub x_true: SceneImage,
    pub x_motion: Vec<SceneImage>,
    pub x_noise: Burst,
    pub x_qis: Burst,
    pub trajectory: MotionTrajectory,
    pub local_spec: Option<LocalMotionSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizeMode {
    None,
    SumToOne,
    Softmax,
}

/// Per-pixel `K`×`K`×`T` merge weights, laid out as `[y][x][t][ky][kx]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelField {
    width: usize,
    height: usize,
    frames: usize,
    kernel_size: usize,
    weights: Vec<f64>,
    normalize_mode: NormalizeMode,
}

impl KernelField {
    pub fn new(
        width: usize,
        height: usize,
        frames: usize,
        kernel_size: usize,
        weights: Vec<f64>,
        normalize_mode: NormalizeMode,
    ) -> Result<Self> {
        if kernel_size == 0 || kernel_size.is_multiple_of(2) {
            return Err(QisError::InvalidKernel(format!(
                "kernel size must be odd and >= 1, got {kernel_size}"
            )));
        }
        if width == 0 || height == 0 || frames == 0 {
            return Err(QisError::InvalidKernel(
                "dimensions must be positive".into(),
            ));
        }
        let per_pixel = frames * kernel_size * kernel_size;
        if weights.len() != width * height * per_pixel {
            return Err(QisError::InvalidKernel(format!(
                "expected {} weights, got {}",
                width * height * per_pixel,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(QisError::InvalidKernel("weights must be finite".into()));
        }
        if normalize_mode == NormalizeMode::SumToOne {
            if let Some(p) = weights
                .chunks_exact(per_pixel)
                .position(|c| c.iter().sum::<f64>().abs() < 1e-12)
            {
                return Err(QisError::InvalidKernel(format!(
                    "pixel {p} has zero weight sum and cannot be normalized"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            frames,
            kernel_size,
            weights,
            normalize_mode,
        })
    }

    /// Same weight everywhere: every tap of every frame gets `1`.
    pub fn uniform(
        width: usize,
        height: usize,
        frames: usize,
        kernel_size: usize,
        normalize_mode: NormalizeMode,
    ) -> Result<Self> {
        let n = width * height * frames * kernel_size * kernel_size;
        Self::new(
            width,
            height,
            frames,
            kernel_size,
            vec![1.0; n],
            normalize_mode,
        )
    }

    /// Weight 1 on the center tap of `frame`, zero elsewhere.
    pub fn delta(
        width: usize,
        height: usize,
        frames: usize,
        kernel_size: usize,
        frame: usize,
    ) -> Result<Self> {
        let per_pixel = frames * kernel_size * kernel_size;
        let mut weights = vec![0.0; width * height * per_pixel];
        let center = kernel_size / 2;
        let tap = frame * kernel_size * kernel_size + center * kernel_size + center;
        for px in weights.chunks_exact_mut(per_pixel) {
            px[tap] = 1.0;
        }
        Self::new(
            width,
            height,
            frames,
            kernel_size,
            weights,
            NormalizeMode::None,
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel_size
    }

    pub fn normalize_mode(&self) -> NormalizeMode {
        self.normalize_mode
    }

    pub fn raw_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn taps_per_pixel(&self) -> usize {
        self.frames * self.kernel_size * self.kernel_size
    }

    /// Weights after applying the normalize mode, same layout as the raw field.
    pub fn effective_weights(&self) -> Vec<f64> {
        let per_pixel = self.taps_per_pixel();
        let mut out = self.weights.clone();
        match self.normalize_mode {
            NormalizeMode::None => {}
            NormalizeMode::SumToOne => {
                for px in out.chunks_exact_mut(per_pixel) {
                    let s: f64 = px.iter().sum();
                    px.iter_mut().for_each(|w| *w /= s);
                }
            }
            NormalizeMode::Softmax => {
                for px in out.chunks_exact_mut(per_pixel) {
                    let m = px.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    px.iter_mut().for_each(|w| *w = (*w - m).exp());
                    let s: f64 = px.iter().sum();
                    px.iter_mut().for_each(|w| *w /= s);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_matches_sensor_constants() {
        let c = SensorConfig::default();
        assert_eq!(c.dark_current_rate, 0.0068);
        assert_eq!(c.read_noise_sigma, 0.25);
        assert_eq!(c.adc_bits, 3);
        assert_eq!(c.integration_time, 75e-6);
        assert_eq!(c.frames_per_burst, 8);
        c.validate().unwrap();
    }

    #[test]
    fn config_rejects_out_of_range_bits() {
        assert!(SensorConfig::default().with_bits(9).validate().is_err());
        assert!(SensorConfig::default().with_bits(0).validate().is_err());
        assert!(SensorConfig::default().with_bits(8).validate().is_ok());
    }

    #[test]
    fn config_rejects_bad_constants() {
        assert!(SensorConfig::default().with_gain(0.0).validate().is_err());
        assert!(SensorConfig::default()
            .with_read_noise(-0.1)
            .validate()
            .is_err());
        assert!(SensorConfig::default()
            .with_dark_current(-1.0)
            .validate()
            .is_err());
        assert!(SensorConfig::default().with_frames(0).validate().is_err());
        let mut c = SensorConfig::default().with_bits(1);
        c.single_bit_threshold = 2;
        assert!(c.validate().is_err());
        c.single_bit_threshold = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn scene_rejects_out_of_range_values() {
        assert!(SceneImage::new(2, 1, vec![0.0, 1.5]).is_err());
        assert!(SceneImage::new(2, 1, vec![0.0, f64::NAN]).is_err());
        assert!(SceneImage::new(0, 1, vec![]).is_err());
        assert!(SceneImage::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn burst_rejects_values_above_max_code() {
        let c = SensorConfig::default();
        let err = Burst::new(2, 1, 1, vec![7, 8], c, 0).unwrap_err();
        assert!(matches!(err, QisError::PayloadOutOfRange { value: 8, .. }));
    }

    #[test]
    fn trajectory_must_start_at_origin() {
        assert!(MotionTrajectory::new(vec![(1.0, 0.0)]).is_err());
        let t = MotionTrajectory::linear((28.0, 0.0), 8).unwrap();
        assert_eq!(t.get(0), (0.0, 0.0));
        assert_eq!(t.total_magnitude(), 28.0);
    }

    #[test]
    fn local_spec_rejects_large_rotation_and_empty_mask() {
        let id = RigidTransform::IDENTITY;
        let rot = |a| RigidTransform { angle_deg: a, ..id };
        assert!(LocalMotionSpec::new(2, 1, vec![true, false], vec![id, rot(15.0)]).is_ok());
        assert!(LocalMotionSpec::new(2, 1, vec![true, false], vec![id, rot(15.5)]).is_err());
        assert!(LocalMotionSpec::new(2, 1, vec![false, false], vec![id]).is_err());
        assert!(LocalMotionSpec::new(2, 1, vec![true, false], vec![rot(1.0)]).is_err());
    }

    #[test]
    fn kernel_field_sum_to_one_normalizes() {
        let f = KernelField::new(1, 1, 2, 1, vec![1.0, 3.0], NormalizeMode::SumToOne).unwrap();
        let w = f.effective_weights();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(w, vec![0.25, 0.75]);
        assert!(KernelField::uniform(1, 1, 1, 2, NormalizeMode::None).is_err());
        assert!(KernelField::new(1, 1, 1, 1, vec![0.0], NormalizeMode::SumToOne).is_err());
    }

    #[test]
    fn softmax_weights_sum_to_one() {
        let f = KernelField::new(
            1,
            1,
            1,
            3,
            (0..9).map(f64::from).collect(),
            NormalizeMode::Softmax,
        )
        .unwrap();
        let s: f64 = f.effective_weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

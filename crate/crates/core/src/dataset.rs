//! Triplet dataset synthesis over a directory of source images, and the
//! JSON manifest that indexes the result.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{QisError, Result};
use crate::format::write_burst;
use crate::motion::{local_transforms, make_patch_triplet, sample_global_trajectory, MotionModel};
use crate::pgm::{read_pgm, write_pgm, PgmDepth};
use crate::rng::{derive_seed, CounterRng};
use crate::sensor::calibrate_gain;
use crate::types::{
    LocalMotionSpec, MotionTrajectory, RigidTransform, SceneImage, SensorConfig, Triplet,
    MAX_ROTATION_DEG,
};

pub const MANIFEST_FORMAT: &str = "qis-triplet-manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMotionEntry {
    /// 8-bit PGM, nonzero = foreground.
    pub mask: String,
    pub transforms: Vec<RigidTransform>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub source: String,
    pub seed: u64,
    pub ppp: f64,
    pub x_true: String,
    pub x_motion: Vec<String>,
    pub x_noise: String,
    pub x_qis: String,
    pub trajectory: MotionTrajectory,
    pub local_spec: Option<LocalMotionEntry>,
    pub sensor: SensorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(seed: u64) -> Self {
        Self {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            seed,
            entries: Vec::new(),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| QisError::Metadata(e.to_string()))?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let m: Self = serde_json::from_str(&text).map_err(|e| QisError::Metadata(e.to_string()))?;
        if m.format != MANIFEST_FORMAT || m.version != MANIFEST_VERSION {
            return Err(QisError::Metadata(format!(
                "unsupported manifest {} v{}",
                m.format, m.version
            )));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetOptions {
    pub ppp: f64,
    pub patch_size: usize,
    pub patches_per_image: usize,
    pub magnitude_range: (f64, f64),
    pub model: MotionModel,
    /// Gain is recalibrated per patch from `ppp`.
    pub sensor: SensorConfig,
    pub depth: PgmDepth,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            ppp: 1.0,
            patch_size: crate::motion::DEFAULT_PATCH_SIZE,
            patches_per_image: 1,
            magnitude_range: crate::motion::DEFAULT_MAGNITUDE_RANGE,
            model: MotionModel::Linear,
            sensor: SensorConfig::default(),
            depth: PgmDepth::Sixteen,
        }
    }
}

/// Loads a PGM mask; any nonzero sample is foreground.
pub fn read_mask(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<bool>)> {
    let img = read_pgm(path)?;
    Ok((
        img.width(),
        img.height(),
        img.data().iter().map(|&v| v > 0.0).collect(),
    ))
}

fn mask_image(spec: &LocalMotionSpec) -> SceneImage {
    let data = spec
        .mask()
        .iter()
        .map(|&m| if m { 1.0 } else { 0.0 })
        .collect();
    SceneImage::new(spec.width(), spec.height(), data).expect("binary mask")
}

fn list_pgms(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn rel(path: &Path, base: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

/// Writes all members of a triplet under `dir` and returns its manifest entry.
pub fn write_triplet(
    triplet: &Triplet,
    dir: &Path,
    id: &str,
    source: &str,
    seed: u64,
    ppp: f64,
    depth: PgmDepth,
) -> Result<ManifestEntry> {
    let sub = dir.join(id);
    fs::create_dir_all(&sub)?;
    let x_true = sub.join("x_true.pgm");
    write_pgm(&triplet.x_true, &x_true, depth)?;
    let mut motion = Vec::with_capacity(triplet.x_motion.len());
    for (t, f) in triplet.x_motion.iter().enumerate() {
        let p = sub.join(format!("x_motion_{t:02}.pgm"));
        write_pgm(f, &p, depth)?;
        motion.push(rel(&p, dir));
    }
    let x_noise = sub.join("x_noise.qisb");
    write_burst(&triplet.x_noise, &x_noise)?;
    let x_qis = sub.join("x_qis.qisb");
    write_burst(&triplet.x_qis, &x_qis)?;
    let local_spec = match &triplet.local_spec {
        Some(spec) => {
            let p = sub.join("mask.pgm");
            write_pgm(&mask_image(spec), &p, PgmDepth::Eight)?;
            Some(LocalMotionEntry {
                mask: rel(&p, dir),
                transforms: spec.transforms().to_vec(),
            })
        }
        None => None,
    };
    Ok(ManifestEntry {
        id: id.to_string(),
        source: source.to_string(),
        seed,
        ppp,
        x_true: rel(&x_true, dir),
        x_motion: motion,
        x_noise: rel(&x_noise, dir),
        x_qis: rel(&x_qis, dir),
        trajectory: triplet.trajectory.clone(),
        local_spec,
        sensor: *triplet.x_qis.config(),
    })
}

/// Synthesizes triplets for every `.pgm` in `source_dir`. A same-named PGM
/// in `mask_dir` switches that image to local (foreground) motion. Writes
/// `manifest.json` into `out_dir` and returns the manifest.
pub fn synth_dataset(
    source_dir: &Path,
    mask_dir: Option<&Path>,
    out_dir: &Path,
    options: &DatasetOptions,
    seed: u64,
) -> Result<Manifest> {
    let (lo, hi) = options.magnitude_range;
    if !(0.0 <= lo && lo <= hi && hi.is_finite()) {
        return Err(QisError::InvalidMotion(format!(
            "magnitude range [{lo}, {hi}] must satisfy 0 <= lo <= hi"
        )));
    }
    if options.patches_per_image == 0 {
        return Err(QisError::InvalidArgument(
            "patches per image must be positive".into(),
        ));
    }
    options.sensor.validate()?;
    let frames = options.sensor.frames_per_burst;
    let margin = hi.ceil() as usize;
    let sources = list_pgms(source_dir)?;
    if sources.is_empty() {
        return Err(QisError::InvalidArgument(format!(
            "no .pgm images in {}",
            source_dir.display()
        )));
    }
    fs::create_dir_all(out_dir)?;
    let mut manifest = Manifest::new(seed);
    let mut index = 0u64;
    for src_path in &sources {
        let source = read_pgm(src_path)?;
        let name = src_path.file_name().expect("listed file").to_owned();
        let mask = match mask_dir.map(|d| d.join(&name)).filter(|p| p.exists()) {
            Some(p) => {
                let (w, h, m) = read_mask(&p)?;
                if (w, h) != (source.width(), source.height()) {
                    return Err(QisError::DimensionMismatch(format!(
                        "mask {} is {w}x{h}, image is {}x{}",
                        p.display(),
                        source.width(),
                        source.height()
                    )));
                }
                Some(m)
            }
            None => None,
        };
        for _ in 0..options.patches_per_image {
            let item_seed = derive_seed(seed, "triplet", index);
            let id = format!("{index:06}");
            index += 1;
            let sampled = sample_global_trajectory(item_seed, (lo, hi), frames, options.model)?;
            let local = match &mask {
                Some(m) => {
                    let mut rng = CounterRng::from_key(derive_seed(item_seed, "rotation", 0));
                    let angle = MAX_ROTATION_DEG * rng.uniform_open();
                    let spec = LocalMotionSpec::new(
                        source.width(),
                        source.height(),
                        m.clone(),
                        local_transforms(&sampled, angle)?,
                    )?;
                    Some(spec)
                }
                None => None,
            };
            // local motion keeps the camera still and moves the foreground
            let trajectory = if local.is_some() {
                MotionTrajectory::zero(frames)
            } else {
                sampled
            };
            let (x0, y0) = crate::motion::crop_origin(
                source.width(),
                source.height(),
                options.patch_size,
                margin,
                item_seed,
            )?;
            let patch = source.crop(x0, y0, options.patch_size, options.patch_size)?;
            let alpha = match calibrate_gain(&patch, options.ppp) {
                Ok(a) => a,
                Err(QisError::CalibrationImpossible) => {
                    log::warn!("skipping black patch {id} of {}", src_path.display());
                    continue;
                }
                Err(e) => return Err(e),
            };
            let config = options.sensor.with_gain(alpha);
            let triplet = make_patch_triplet(
                &source,
                options.patch_size,
                margin,
                &config,
                item_seed,
                &trajectory,
                local.as_ref(),
            )?;
            let entry = write_triplet(
                &triplet,
                out_dir,
                &id,
                &src_path.to_string_lossy(),
                item_seed,
                options.ppp,
                options.depth,
            )?;
            manifest.entries.push(entry);
        }
    }
    manifest.write(out_dir.join("manifest.json"))?;
    Ok(manifest)
}

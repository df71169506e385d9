//! Image metrics and the motion / photon-level sweep protocols.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QisError, Result};
use crate::motion::warp_sequence;
use crate::reconstruct::{reconstruct_pipeline_with, PipelineOptions, ReconstructionMethod};
use crate::rng::derive_seed;
use crate::sensor::{calibrate_gain, simulate_burst};
use crate::types::{MotionTrajectory, SceneImage, SensorConfig};

pub const PSNR_CAP_DB: f64 = 99.0;
pub const DEFAULT_BORDER: usize = 8;
pub const CSV_HEADER: &str = "variable,method,psnr_db,mse,n";

/// Mean squared error over the interior that excludes a `border` band.
pub fn mse(estimate: &SceneImage, truth: &SceneImage, border: usize) -> Result<f64> {
    if estimate.dims() != truth.dims() {
        return Err(QisError::DimensionMismatch(format!(
            "estimate is {}x{}, truth is {}x{}",
            estimate.width(),
            estimate.height(),
            truth.width(),
            truth.height()
        )));
    }
    let (w, h) = (truth.width(), truth.height());
    if 2 * border >= w || 2 * border >= h {
        return Err(QisError::InvalidArgument(format!(
            "border {border} leaves no interior in {w}x{h}"
        )));
    }
    let mut sum = 0.0;
    for y in border..h - border {
        for x in border..w - border {
            let d = estimate.get(x, y) - truth.get(x, y);
            sum += d * d;
        }
    }
    Ok(sum / ((w - 2 * border) * (h - 2 * border)) as f64)
}

#[inline]
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        PSNR_CAP_DB
    } else {
        (10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB)
    }
}

/// PSNR in dB for signals with peak 1.0, capped at [`PSNR_CAP_DB`].
pub fn psnr(estimate: &SceneImage, truth: &SceneImage, border_exclude: usize) -> Result<f64> {
    mse(estimate, truth, border_exclude).map(psnr_from_mse)
}

/// Formats a PSNR for tables, e.g. `26.74 dB`.
pub fn format_db(db: f64) -> String {
    format!("{db:.2} dB")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variable: f64,
    pub method: String,
    pub psnr_db: f64,
    /// MSE equivalent of the averaged PSNR, i.e. the geometric mean of the
    /// per-sample MSEs, so that `psnr_db = 10 log10(1 / mse)` holds per row.
    pub mse: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.variable, r.method, r.psnr_db, r.mse, r.n
            );
        }
        out
    }

    /// Rows for one method, in ascending variable order.
    pub fn curve(&self, method: &str) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.method == method)
            .map(|r| (r.variable, r.psnr_db))
            .collect()
    }
}

/// Everything about a sweep except the variable being swept.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    /// Sensor template; the gain is recalibrated per scene.
    pub sensor: SensorConfig,
    pub border_exclude: usize,
    pub pipeline: PipelineOptions,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            sensor: SensorConfig::default(),
            border_exclude: DEFAULT_BORDER,
            pipeline: PipelineOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Condition {
    variable: f64,
    ppp: f64,
    magnitude: f64,
}

fn check_nonempty<T>(items: &[T], what: &str) -> Result<()> {
    if items.is_empty() {
        return Err(QisError::InvalidArgument(format!("{what} list is empty")));
    }
    Ok(())
}

fn run_sweep(
    methods: &[ReconstructionMethod],
    conditions: &[Condition],
    scenes: &[SceneImage],
    seeds: &[u64],
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_nonempty(methods, "method")?;
    check_nonempty(scenes, "scene")?;
    check_nonempty(seeds, "seed")?;
    settings.sensor.validate()?;
    if let Some(c) = conditions.iter().find(|c| {
        !(c.magnitude.is_finite() && c.magnitude >= 0.0 && c.ppp.is_finite() && c.ppp > 0.0)
    }) {
        return Err(QisError::InvalidArgument(format!(
            "invalid sweep point: magnitude {} px, {} ppp",
            c.magnitude, c.ppp
        )));
    }
    let frames = settings.sensor.frames_per_burst;
    // every condition shares the same patch, so curves are comparable
    let margin = conditions
        .iter()
        .map(|c| c.magnitude)
        .fold(0.0, f64::max)
        .ceil() as usize;

    let jobs: Vec<(usize, usize, usize)> = (0..conditions.len())
        .flat_map(|c| (0..scenes.len()).flat_map(move |s| (0..seeds.len()).map(move |k| (c, s, k))))
        .collect();

    let scores: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(ci, si, ki)| -> Result<Vec<f64>> {
            let cond = conditions[ci];
            let scene = &scenes[si];
            let (w, h) = (scene.width(), scene.height());
            if w <= 2 * margin || h <= 2 * margin {
                return Err(QisError::InvalidArgument(format!(
                    "scene {si} ({w}x{h}) is too small for {margin} px of motion"
                )));
            }
            let (pw, ph) = (w - 2 * margin, h - 2 * margin);
            let truth = scene.crop(margin, margin, pw, ph)?;
            let traj = MotionTrajectory::linear((cond.magnitude, 0.0), frames)?;
            let clean = warp_sequence(scene, &traj, None)?
                .iter()
                .map(|f| f.crop(margin, margin, pw, ph))
                .collect::<Result<Vec<_>>>()?;
            let alpha = calibrate_gain(&truth, cond.ppp)?;
            let config = settings.sensor.with_gain(alpha);
            // same noise keys across conditions and methods
            let seed = derive_seed(seeds[ki], "sweep-scene", si as u64);
            let burst = simulate_burst(&clean, &config, seed)?;
            methods
                .iter()
                .map(|m| {
                    let est = reconstruct_pipeline_with(&burst, m, &settings.pipeline)?;
                    psnr(&est, &truth, settings.border_exclude)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let per_cell = scenes.len() * seeds.len();
    let mut rows = Vec::with_capacity(methods.len() * conditions.len());
    for (mi, m) in methods.iter().enumerate() {
        for (ci, cond) in conditions.iter().enumerate() {
            let cell = &scores[ci * per_cell..(ci + 1) * per_cell];
            let mean_db = cell.iter().map(|s| s[mi]).sum::<f64>() / per_cell as f64;
            rows.push(SweepRow {
                variable: cond.variable,
                method: m.name().to_string(),
                psnr_db: mean_db,
                mse: 10f64.powf(-mean_db / 10.0),
                n: per_cell,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.variable.total_cmp(&b.variable))
    });
    Ok(SweepResult { rows })
}

/// PSNR versus linear motion magnitude at a fixed photon level.
pub fn sweep_motion(
    methods: &[ReconstructionMethod],
    ppp: f64,
    magnitudes: &[f64],
    scenes: &[SceneImage],
    seeds: &[u64],
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_nonempty(magnitudes, "magnitude")?;
    let conditions: Vec<_> = magnitudes
        .iter()
        .map(|&m| Condition {
            variable: m,
            ppp,
            magnitude: m,
        })
        .collect();
    run_sweep(methods, &conditions, scenes, seeds, settings)
}

/// PSNR versus photon level at a fixed linear motion magnitude.
pub fn sweep_photon(
    methods: &[ReconstructionMethod],
    magnitude: f64,
    ppp_list: &[f64],
    scenes: &[SceneImage],
    seeds: &[u64],
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_nonempty(ppp_list, "ppp")?;
    let conditions: Vec<_> = ppp_list
        .iter()
        .map(|&p| Condition {
            variable: p,
            ppp: p,
            magnitude,
        })
        .collect();
    run_sweep(methods, &conditions, scenes, seeds, settings)
}

pub const DEFAULT_MOTION_SWEEP_PPP: f64 = 2.0;
pub const DEFAULT_PHOTON_SWEEP_MAGNITUDE: f64 = 4.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_of_known_mse() {
        let a = SceneImage::filled(4, 4, 0.5).unwrap();
        let b = SceneImage::filled(4, 4, 0.6).unwrap();
        assert!((psnr(&a, &b, 0).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(psnr(&a, &a, 0).unwrap(), PSNR_CAP_DB);
        assert_eq!(psnr(&a, &b, 0).unwrap(), psnr(&b, &a, 0).unwrap());
    }

    #[test]
    fn psnr_errors() {
        let a = SceneImage::filled(4, 4, 0.5).unwrap();
        let b = SceneImage::filled(5, 4, 0.5).unwrap();
        assert!(psnr(&a, &b, 0).is_err());
        assert!(psnr(&a, &a, 2).is_err());
        assert!(psnr(&a, &a, 1).is_ok());
    }

    #[test]
    fn border_band_is_ignored() {
        let truth = SceneImage::filled(10, 10, 0.5).unwrap();
        let est = SceneImage::from_fn(10, 10, |x, y| {
            if x < 2 || y < 2 || x > 7 || y > 7 {
                1.0
            } else {
                0.5
            }
        })
        .unwrap();
        assert_eq!(psnr(&est, &truth, 2).unwrap(), PSNR_CAP_DB);
    }

    #[test]
    fn db_formatting() {
        assert_eq!(format_db(26.7412), "26.74 dB");
    }

    #[test]
    fn csv_layout() {
        let r = SweepResult {
            rows: vec![SweepRow {
                variable: 4.0,
                method: "burst-average".into(),
                psnr_db: 20.0,
                mse: 0.01,
                n: 3,
            }],
        };
        assert_eq!(
            r.to_csv(),
            "variable,method,psnr_db,mse,n\n4,burst-average,20,0.01,3\n"
        );
    }

    #[test]
    fn empty_lists_are_rejected() {
        let scenes = vec![SceneImage::filled(40, 40, 0.5).unwrap()];
        let m = [ReconstructionMethod::BurstAverage];
        let s = SweepSettings::default();
        assert!(sweep_photon(&m, 4.0, &[], &scenes, &[1], &s).is_err());
        assert!(sweep_motion(&m, 2.0, &[], &scenes, &[1], &s).is_err());
        assert!(sweep_motion(&[], 2.0, &[0.0], &scenes, &[1], &s).is_err());
        assert!(sweep_motion(&m, 2.0, &[0.0], &scenes, &[], &s).is_err());
    }

    #[test]
    fn rows_are_sorted_and_counted() {
        let scenes = vec![SceneImage::from_fn(40, 40, |x, _| x as f64 / 40.0).unwrap()];
        let methods = [
            ReconstructionMethod::BurstAverage,
            ReconstructionMethod::AverageThenDenoise,
        ];
        let r = sweep_motion(
            &methods,
            2.0,
            &[8.0, 0.0, 4.0],
            &scenes,
            &[1, 2],
            &SweepSettings::default(),
        )
        .unwrap();
        assert_eq!(r.rows.len(), 6);
        assert_eq!(r.rows[0].method, "average-then-denoise");
        assert_eq!(
            r.curve("burst-average")
                .iter()
                .map(|p| p.0)
                .collect::<Vec<_>>(),
            vec![0.0, 4.0, 8.0]
        );
        for row in &r.rows {
            assert_eq!(row.n, 2);
            assert!((row.psnr_db - 10.0 * (1.0 / row.mse).log10()).abs() < 1e-9);
        }
    }
}

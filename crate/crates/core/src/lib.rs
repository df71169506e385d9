//! Quanta image sensor toolkit: photon-counting simulation, synthetic
//! motion bursts, classical reconstruction and evaluation.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod format;
pub mod motion;
pub mod pgm;
pub mod reconstruct;
pub mod rng;
pub mod sensor;
pub mod synthetic;
pub mod types;

pub use error::{QisError, Result};
pub use eval::{psnr, sweep_motion, sweep_photon, SweepResult, SweepRow, SweepSettings};
pub use format::{read_burst, write_burst};
pub use motion::{
    crop_patch, make_patch_triplet, make_triplet, sample_global_trajectory, warp_sequence,
    MotionModel,
};
pub use reconstruct::{
    anscombe_binomial, apply_kernel_field, average_burst, denoise_nlm, mle_invert_binary,
    reconstruct_pipeline, NlmParams, PipelineOptions, ReconstructionMethod,
};
pub use sensor::{
    adc_quantize, calibrate_gain, simulate_burst, simulate_cis_frame, simulate_frame,
    simulate_static_burst,
};
pub use types::{
    Burst, KernelField, LocalMotionSpec, MotionTrajectory, NormalizeMode, RigidTransform,
    SceneImage, SensorConfig, Triplet,
};

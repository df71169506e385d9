use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use qis_core::dataset::{synth_dataset, DatasetOptions};
use qis_core::eval::{self, SweepSettings};
use qis_core::format::{read_burst, read_header, sidecar_path, write_burst};
use qis_core::pgm::{read_pgm, write_pgm, PgmDepth};
use qis_core::rng::derive_seed;
use qis_core::{
    calibrate_gain, simulate_burst, warp_sequence, KernelField, MotionModel, MotionTrajectory,
    QisError, ReconstructionMethod, SceneImage, SensorConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "qis",
    version,
    about = "Quanta image sensor simulation and reconstruction"
)]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a burst from a grayscale scene.
    Simulate(SimulateArgs),
    /// Build a triplet dataset from a directory of PGM images.
    SynthDataset(SynthArgs),
    /// Reconstruct an image from a burst.
    Reconstruct(ReconstructArgs),
    /// Compute metrics or run a sweep.
    Eval(EvalArgs),
    /// Print the header and metadata of a burst file.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
struct SensorArgs {
    /// Frames per burst.
    #[arg(long, default_value_t = 8)]
    frames: usize,
    /// ADC bit depth (1..=8).
    #[arg(long, default_value_t = 3)]
    bits: u8,
    /// Read noise, electrons RMS.
    #[arg(long, default_value_t = 0.25)]
    read_noise: f64,
    /// Dark current, electrons per pixel per second.
    #[arg(long, default_value_t = 0.0068)]
    dark_current: f64,
    /// Frame integration time in seconds.
    #[arg(long, default_value_t = 75e-6)]
    integration_time: f64,
    /// Single-bit threshold in electrons.
    #[arg(long, default_value_t = 1)]
    threshold: u32,
}

impl SensorArgs {
    fn config(&self) -> SensorConfig {
        SensorConfig {
            gain_alpha: 1.0,
            dark_current_rate: self.dark_current,
            read_noise_sigma: self.read_noise,
            adc_bits: self.bits,
            single_bit_threshold: self.threshold,
            integration_time: self.integration_time,
            frames_per_burst: self.frames,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    input: PathBuf,
    /// Mean photons per pixel per frame.
    #[arg(long)]
    ppp: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Total linear motion over the burst, "dx,dy" in pixels.
    #[arg(long, value_parser = parse_pair)]
    motion: Option<(f64, f64)>,
    #[command(flatten)]
    sensor: SensorArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Linear,
    SmoothRandom,
}

impl From<ModelArg> for MotionModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Linear => MotionModel::Linear,
            ModelArg::SmoothRandom => MotionModel::SmoothRandom,
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    input_dir: PathBuf,
    /// Foreground masks with the same file names as the images.
    #[arg(long)]
    mask_dir: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    ppp: f64,
    #[arg(long, default_value_t = 64)]
    patch_size: usize,
    #[arg(long, default_value_t = 1)]
    patches_per_image: usize,
    #[arg(long, default_value_t = 7.0)]
    min_motion: f64,
    #[arg(long, default_value_t = 35.0)]
    max_motion: f64,
    #[arg(long, value_enum, default_value_t = ModelArg::Linear)]
    model: ModelArg,
    #[arg(long, default_value_t = 16)]
    depth: u8,
    #[command(flatten)]
    sensor: SensorArgs,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    /// burst-average, average-then-denoise, anscombe-denoise, mle-binary or kernel-merge.
    #[arg(long)]
    method: String,
    /// JSON kernel field, required for kernel-merge.
    #[arg(long)]
    kernel_field: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 16)]
    depth: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalMode {
    MotionSweep,
    PhotonSweep,
    Single,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    mode: EvalMode,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated method names.
    #[arg(long, default_value = "burst-average")]
    methods: String,
    /// Photon level for motion sweeps.
    #[arg(long, default_value_t = eval::DEFAULT_MOTION_SWEEP_PPP)]
    ppp: f64,
    /// Comma-separated motion magnitudes (pixels) for motion sweeps.
    #[arg(long, default_value = "0,4,8,14,21,28")]
    magnitudes: String,
    /// Motion magnitude for photon sweeps.
    #[arg(long, default_value_t = eval::DEFAULT_PHOTON_SWEEP_MAGNITUDE)]
    magnitude: f64,
    /// Comma-separated photon levels for photon sweeps.
    #[arg(long, default_value = "0.5,1,2,4")]
    ppp_list: String,
    /// Directory of PGM test scenes; procedural scenes are used when absent.
    #[arg(long)]
    scenes_dir: Option<PathBuf>,
    /// Number of procedural scenes.
    #[arg(long, default_value_t = 4)]
    synthetic_scenes: usize,
    /// Side length of procedural scenes.
    #[arg(long, default_value_t = 128)]
    scene_size: usize,
    /// Noise realizations per scene.
    #[arg(long, default_value_t = 2)]
    seeds: usize,
    #[arg(long, default_value_t = eval::DEFAULT_BORDER)]
    border: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Estimate image for single mode.
    #[arg(long)]
    estimate: Option<PathBuf>,
    /// Ground-truth image for single mode.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    sensor: SensorArgs,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(QisError),
}

impl From<QisError> for CliError {
    fn from(e: QisError) -> Self {
        Self::Data(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"dx,dy\", got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    let items: Vec<&str> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect();
    if items.is_empty() {
        return Err(usage(format!("--{what} must list at least one value")));
    }
    items
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| usage(format!("--{what}: bad value {t:?}: {e}")))
        })
        .collect()
}

fn depth(bits: u8) -> CliResult<PgmDepth> {
    match bits {
        8 => Ok(PgmDepth::Eight),
        16 => Ok(PgmDepth::Sixteen),
        other => Err(usage(format!("--depth must be 8 or 16, got {other}"))),
    }
}

fn validated(config: SensorConfig) -> CliResult<SensorConfig> {
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn log_config(config: &SensorConfig) {
    info!(
        "sensor: gain_alpha={} dark_current={} e-/px/s read_noise={} e- adc_bits={} threshold={} integration_time={} s frames={}",
        config.gain_alpha,
        config.dark_current_rate,
        config.read_noise_sigma,
        config.adc_bits,
        config.single_bit_threshold,
        config.integration_time,
        config.frames_per_burst
    );
}

fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let template = validated(args.sensor.config())?;
    let scene = read_pgm(&args.input)?;
    let alpha = calibrate_gain(&scene, args.ppp)?;
    let config = template.with_gain(alpha);
    log_config(&config);
    let trajectory = match args.motion {
        Some(total) => MotionTrajectory::linear(total, config.frames_per_burst)?,
        None => MotionTrajectory::zero(config.frames_per_burst),
    };
    let frames = warp_sequence(&scene, &trajectory, None)?;
    let burst = simulate_burst(&frames, &config, args.seed)?.with_trajectory(Some(trajectory));
    write_burst(&burst, &args.out)?;
    info!(
        "wrote {}x{}x{} burst to {}",
        burst.width(),
        burst.height(),
        burst.frame_count(),
        args.out.display()
    );
    Ok(())
}

fn synth(args: &SynthArgs) -> CliResult<()> {
    if !(0.0..=args.max_motion).contains(&args.min_motion) {
        return Err(usage("--min-motion must be in [0, --max-motion]"));
    }
    if args.patches_per_image == 0 || args.patch_size == 0 {
        return Err(usage(
            "--patch-size and --patches-per-image must be positive",
        ));
    }
    let sensor = validated(args.sensor.config())?;
    log_config(&sensor);
    let options = DatasetOptions {
        ppp: args.ppp,
        patch_size: args.patch_size,
        patches_per_image: args.patches_per_image,
        magnitude_range: (args.min_motion, args.max_motion),
        model: args.model.into(),
        sensor,
        depth: depth(args.depth)?,
    };
    let manifest = synth_dataset(
        &args.input_dir,
        args.mask_dir.as_deref(),
        &args.out_dir,
        &options,
        args.seed,
    )?;
    info!(
        "wrote {} triplets and {}",
        manifest.entries.len(),
        args.out_dir.join("manifest.json").display()
    );
    Ok(())
}

fn method(name: &str, kernel_field: Option<&Path>) -> CliResult<ReconstructionMethod> {
    if name == "kernel-merge" {
        let path = kernel_field.ok_or_else(|| usage("kernel-merge needs --kernel-field"))?;
        let text = fs::read_to_string(path).map_err(QisError::from)?;
        let field: KernelField = serde_json::from_str(&text)
            .map_err(|e| QisError::Metadata(format!("{}: {e}", path.display())))?;
        // re-run construction checks on deserialized data
        let field = KernelField::new(
            field.width(),
            field.height(),
            field.frames(),
            field.kernel_size(),
            field.raw_weights().to_vec(),
            field.normalize_mode(),
        )?;
        return Ok(ReconstructionMethod::KernelMerge(field));
    }
    ReconstructionMethod::parse(name).map_err(|e| usage(e.to_string()))
}

fn reconstruct(args: &ReconstructArgs) -> CliResult<()> {
    let method = method(&args.method, args.kernel_field.as_deref())?;
    let depth = depth(args.depth)?;
    let burst = read_burst(&args.input)?;
    log_config(burst.config());
    let image = qis_core::reconstruct_pipeline(&burst, &method)?;
    write_pgm(&image, &args.out, depth)?;
    info!(
        "wrote {} reconstruction to {}",
        method.name(),
        args.out.display()
    );
    Ok(())
}

fn load_scenes(args: &EvalArgs, seed: u64) -> CliResult<Vec<SceneImage>> {
    match &args.scenes_dir {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(QisError::from)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(CliError::Data(QisError::InvalidArgument(format!(
                    "no .pgm scenes in {}",
                    dir.display()
                ))));
            }
            Ok(paths.iter().map(read_pgm).collect::<Result<_, _>>()?)
        }
        None => {
            if args.synthetic_scenes == 0 {
                return Err(usage("--synthetic-scenes must be positive"));
            }
            (0..args.synthetic_scenes)
                .map(|i| {
                    qis_core::synthetic::textured_scene(
                        args.scene_size,
                        args.scene_size,
                        derive_seed(seed, "eval-scene", i as u64),
                    )
                    .map_err(CliError::from)
                })
                .collect()
        }
    }
}

fn eval_cmd(args: &EvalArgs) -> CliResult<()> {
    if args.mode == EvalMode::Single {
        let (est, truth) = match (&args.estimate, &args.truth) {
            (Some(e), Some(t)) => (read_pgm(e)?, read_pgm(t)?),
            _ => return Err(usage("single mode needs --estimate and --truth")),
        };
        let db = eval::psnr(&est, &truth, args.border)?;
        let mse = eval::mse(&est, &truth, args.border)?;
        let text = format!("{}\n0,single,{db},{mse},1\n", eval::CSV_HEADER);
        return emit(&text, args.out.as_deref());
    }

    let seed = args.seed.ok_or_else(|| usage("sweeps require --seed"))?;
    let names: Vec<&str> = args
        .methods
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(usage("--methods must list at least one method"));
    }
    let methods = names
        .iter()
        .map(|n| method(n, None))
        .collect::<CliResult<Vec<_>>>()?;
    if args.seeds == 0 {
        return Err(usage("--seeds must be positive"));
    }
    let variable = match args.mode {
        EvalMode::MotionSweep => parse_list(&args.magnitudes, "magnitudes")?,
        EvalMode::PhotonSweep => parse_list(&args.ppp_list, "ppp-list")?,
        EvalMode::Single => unreachable!(),
    };
    let sensor = validated(args.sensor.config())?;
    log_config(&sensor);
    let settings = SweepSettings {
        sensor,
        border_exclude: args.border,
        ..SweepSettings::default()
    };
    let scenes = load_scenes(args, seed)?;
    let seeds: Vec<u64> = (0..args.seeds as u64)
        .map(|i| derive_seed(seed, "eval-noise", i))
        .collect();
    let result = match args.mode {
        EvalMode::MotionSweep => {
            eval::sweep_motion(&methods, args.ppp, &variable, &scenes, &seeds, &settings)?
        }
        EvalMode::PhotonSweep => eval::sweep_photon(
            &methods,
            args.magnitude,
            &variable,
            &scenes,
            &seeds,
            &settings,
        )?,
        EvalMode::Single => unreachable!(),
    };
    emit(&result.to_csv(), args.out.as_deref())
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Data(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn inspect(args: &InspectArgs) -> CliResult<()> {
    let header = read_header(&args.input)?;
    println!("file:        {}", args.input.display());
    println!("version:     {}", header.version);
    println!("height:      {}", header.height);
    println!("width:       {}", header.width);
    println!("frame_count: {}", header.frame_count);
    println!("adc_bits:    {}", header.adc_bits);
    let meta = sidecar_path(&args.input);
    match fs::read_to_string(&meta) {
        Ok(text) => {
            println!("metadata:    {}", meta.display());
            print!("{text}");
        }
        Err(_) => println!("metadata:    (missing {})", meta.display()),
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::SynthDataset(a) => synth(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Inspect(a) => inspect(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `qis --help` for usage");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

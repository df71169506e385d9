use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use qis_core::eval::SweepSettings;
use qis_core::{MotionModel, QisError, ReconstructionMethod};

fn to_py(e: QisError) -> PyErr {
    match e {
        QisError::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "SensorConfig", module = "qis_toolkit", frozen, from_py_object)]
#[derive(Clone)]
struct PySensorConfig {
    inner: qis_core::SensorConfig,
}

#[pymethods]
impl PySensorConfig {
    #[new]
    #[pyo3(signature = (
        gain_alpha = 1.0,
        dark_current_rate = 0.0068,
        read_noise_sigma = 0.25,
        adc_bits = 3,
        single_bit_threshold = 1,
        integration_time = 75e-6,
        frames_per_burst = 8,
    ))]
    fn new(
        gain_alpha: f64,
        dark_current_rate: f64,
        read_noise_sigma: f64,
        adc_bits: u8,
        single_bit_threshold: u32,
        integration_time: f64,
        frames_per_burst: usize,
    ) -> PyResult<Self> {
        let inner = qis_core::SensorConfig {
            gain_alpha,
            dark_current_rate,
            read_noise_sigma,
            adc_bits,
            single_bit_threshold,
            integration_time,
            frames_per_burst,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn with_gain(&self, gain_alpha: f64) -> PyResult<Self> {
        let inner = self.inner.with_gain(gain_alpha);
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn gain_alpha(&self) -> f64 {
        self.inner.gain_alpha
    }
    #[getter]
    fn dark_current_rate(&self) -> f64 {
        self.inner.dark_current_rate
    }
    #[getter]
    fn read_noise_sigma(&self) -> f64 {
        self.inner.read_noise_sigma
    }
    #[getter]
    fn adc_bits(&self) -> u8 {
        self.inner.adc_bits
    }
    #[getter]
    fn single_bit_threshold(&self) -> u32 {
        self.inner.single_bit_threshold
    }
    #[getter]
    fn integration_time(&self) -> f64 {
        self.inner.integration_time
    }
    #[getter]
    fn frames_per_burst(&self) -> usize {
        self.inner.frames_per_burst
    }

    fn __repr__(&self) -> String {
        format!("SensorConfig({:?})", self.inner)
    }
}

/// Normalized radiance image, row-major floats in [0, 1].
#[pyclass(name = "Scene", module = "qis_toolkit", frozen, from_py_object)]
#[derive(Clone)]
struct PyScene {
    inner: qis_core::SceneImage,
}

#[pymethods]
impl PyScene {
    #[new]
    fn new(width: usize, height: usize, data: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: qis_core::SceneImage::new(width, height, data).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn filled(width: usize, height: usize, value: f64) -> PyResult<Self> {
        Ok(Self {
            inner: qis_core::SceneImage::filled(width, height, value).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn read_pgm(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: qis_core::pgm::read_pgm(path).map_err(to_py)?,
        })
    }

    #[pyo3(signature = (path, sixteen_bit = true))]
    fn write_pgm(&self, path: &str, sixteen_bit: bool) -> PyResult<()> {
        let depth = if sixteen_bit {
            qis_core::pgm::PgmDepth::Sixteen
        } else {
            qis_core::pgm::PgmDepth::Eight
        };
        qis_core::pgm::write_pgm(&self.inner, path, depth).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }
    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }
    #[getter]
    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<f64> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(PyValueError::new_err("pixel out of range"));
        }
        Ok(self.inner.get(x, y))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Scene({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Stack of quantized photon-count frames.
#[pyclass(name = "Burst", module = "qis_toolkit", frozen, from_py_object)]
#[derive(Clone)]
struct PyBurst {
    inner: qis_core::Burst,
}

#[pymethods]
impl PyBurst {
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: qis_core::read_burst(path).map_err(to_py)?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        qis_core::write_burst(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }
    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }
    #[getter]
    fn frame_count(&self) -> usize {
        self.inner.frame_count()
    }
    #[getter]
    fn adc_bits(&self) -> u8 {
        self.inner.adc_bits()
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }
    #[getter]
    fn config(&self) -> PySensorConfig {
        PySensorConfig {
            inner: *self.inner.config(),
        }
    }

    /// Raw payload bytes, frame-major then row-major.
    fn data(&self) -> Vec<u8> {
        self.inner.data().to_vec()
    }

    fn frame(&self, t: usize) -> PyResult<Vec<u8>> {
        if t >= self.inner.frame_count() {
            return Err(PyValueError::new_err("frame index out of range"));
        }
        Ok(self.inner.frame(t).to_vec())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Burst({}x{}x{}, {}-bit, seed={})",
            self.inner.width(),
            self.inner.height(),
            self.inner.frame_count(),
            self.inner.adc_bits(),
            self.inner.seed()
        )
    }
}

#[pyfunction]
fn calibrate_gain(scene: &PyScene, target_ppp: f64) -> PyResult<f64> {
    qis_core::calibrate_gain(&scene.inner, target_ppp).map_err(to_py)
}

#[pyfunction]
fn adc_quantize(analog_value: f64, config: &PySensorConfig) -> u8 {
    qis_core::adc_quantize(analog_value, &config.inner)
}

#[pyfunction]
fn simulate_frame(
    scene: &PyScene,
    config: &PySensorConfig,
    seed: u64,
    frame_index: usize,
) -> PyResult<Vec<u8>> {
    qis_core::simulate_frame(&scene.inner, &config.inner, seed, frame_index).map_err(to_py)
}

#[pyfunction]
fn simulate_burst(frames: Vec<PyScene>, config: &PySensorConfig, seed: u64) -> PyResult<PyBurst> {
    let frames: Vec<_> = frames.into_iter().map(|f| f.inner).collect();
    Ok(PyBurst {
        inner: qis_core::simulate_burst(&frames, &config.inner, seed).map_err(to_py)?,
    })
}

#[pyfunction]
fn simulate_static_burst(scene: &PyScene, config: &PySensorConfig, seed: u64) -> PyResult<PyBurst> {
    Ok(PyBurst {
        inner: qis_core::simulate_static_burst(&scene.inner, &config.inner, seed).map_err(to_py)?,
    })
}

fn model(name: &str) -> PyResult<MotionModel> {
    name.parse().map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (seed, magnitude_range = (7.0, 35.0), frames = 8, model_name = "linear"))]
fn sample_global_trajectory(
    seed: u64,
    magnitude_range: (f64, f64),
    frames: usize,
    model_name: &str,
) -> PyResult<Vec<(f64, f64)>> {
    let t = qis_core::sample_global_trajectory(seed, magnitude_range, frames, model(model_name)?)
        .map_err(to_py)?;
    Ok(t.displacements().to_vec())
}

#[pyfunction]
fn warp_sequence(scene: &PyScene, displacements: Vec<(f64, f64)>) -> PyResult<Vec<PyScene>> {
    let traj = qis_core::MotionTrajectory::new(displacements).map_err(to_py)?;
    Ok(qis_core::warp_sequence(&scene.inner, &traj, None)
        .map_err(to_py)?
        .into_iter()
        .map(|inner| PyScene { inner })
        .collect())
}

/// Returns `(x_true, x_motion, x_noise, x_qis)`.
#[pyfunction]
fn make_triplet(
    scene: &PyScene,
    config: &PySensorConfig,
    seed: u64,
    displacements: Vec<(f64, f64)>,
) -> PyResult<(PyScene, Vec<PyScene>, PyBurst, PyBurst)> {
    let traj = qis_core::MotionTrajectory::new(displacements).map_err(to_py)?;
    let t =
        qis_core::make_triplet(&scene.inner, &config.inner, seed, &traj, None).map_err(to_py)?;
    Ok((
        PyScene { inner: t.x_true },
        t.x_motion
            .into_iter()
            .map(|inner| PyScene { inner })
            .collect(),
        PyBurst { inner: t.x_noise },
        PyBurst { inner: t.x_qis },
    ))
}

#[pyfunction]
fn reconstruct(burst: &PyBurst, method: &str) -> PyResult<PyScene> {
    let m = ReconstructionMethod::parse(method).map_err(to_py)?;
    Ok(PyScene {
        inner: qis_core::reconstruct_pipeline(&burst.inner, &m).map_err(to_py)?,
    })
}

#[pyfunction]
fn anscombe_binomial(summed: Vec<u32>, frames: u32) -> PyResult<Vec<f64>> {
    qis_core::anscombe_binomial(&summed, frames).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (estimate, truth, border_exclude = 8))]
fn psnr(estimate: &PyScene, truth: &PyScene, border_exclude: usize) -> PyResult<f64> {
    qis_core::psnr(&estimate.inner, &truth.inner, border_exclude).map_err(to_py)
}

#[pyfunction]
fn textured_scene(width: usize, height: usize, seed: u64) -> PyResult<PyScene> {
    Ok(PyScene {
        inner: qis_core::synthetic::textured_scene(width, height, seed).map_err(to_py)?,
    })
}

fn methods(names: Vec<String>) -> PyResult<Vec<ReconstructionMethod>> {
    names
        .iter()
        .map(|n| ReconstructionMethod::parse(n).map_err(to_py))
        .collect()
}

/// Motion sweep; returns CSV text.
#[pyfunction]
fn sweep_motion(
    method_names: Vec<String>,
    ppp: f64,
    magnitudes: Vec<f64>,
    scenes: Vec<PyScene>,
    seeds: Vec<u64>,
) -> PyResult<String> {
    let scenes: Vec<_> = scenes.into_iter().map(|s| s.inner).collect();
    let r = qis_core::sweep_motion(
        &methods(method_names)?,
        ppp,
        &magnitudes,
        &scenes,
        &seeds,
        &SweepSettings::default(),
    )
    .map_err(to_py)?;
    Ok(r.to_csv())
}

/// Photon-level sweep; returns CSV text.
#[pyfunction]
fn sweep_photon(
    method_names: Vec<String>,
    magnitude: f64,
    ppp_list: Vec<f64>,
    scenes: Vec<PyScene>,
    seeds: Vec<u64>,
) -> PyResult<String> {
    let scenes: Vec<_> = scenes.into_iter().map(|s| s.inner).collect();
    let r = qis_core::sweep_photon(
        &methods(method_names)?,
        magnitude,
        &ppp_list,
        &scenes,
        &seeds,
        &SweepSettings::default(),
    )
    .map_err(to_py)?;
    Ok(r.to_csv())
}

#[pymodule]
fn qis_toolkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySensorConfig>()?;
    m.add_class::<PyScene>()?;
    m.add_class::<PyBurst>()?;
    m.add_function(wrap_pyfunction!(calibrate_gain, m)?)?;
    m.add_function(wrap_pyfunction!(adc_quantize, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_frame, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_burst, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_static_burst, m)?)?;
    m.add_function(wrap_pyfunction!(sample_global_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(warp_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(make_triplet, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(anscombe_binomial, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(textured_scene, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_motion, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_photon, m)?)?;
    Ok(())
}

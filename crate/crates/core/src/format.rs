//! QISB burst container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "QISB"
//! 4       4     version (u32) = 1
//! 8       4     height (u32)
//! 12      4     width (u32)
//! 16      4     frame_count (u32)
//! 20      1     adc_bits (u8)
//! 21      3     reserved, zero
//! 24      H*W*T payload, one byte per sample, frame-major then row-major
//! ```
//!
//! Sensor configuration, seed and trajectory live in a TOML sidecar at
//! `<path>.toml`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{QisError, Result};
use crate::types::{max_code, Burst, MotionTrajectory, SensorConfig};

pub const MAGIC: [u8; 4] = *b"QISB";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 24;

/// Fixed-size header of a QISB file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QisbHeader {
    pub version: u32,
    pub height: u32,
    pub width: u32,
    pub frame_count: u32,
    pub adc_bits: u8,
}

impl QisbHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..8].copy_from_slice(&self.version.to_le_bytes());
        out[8..12].copy_from_slice(&self.height.to_le_bytes());
        out[12..16].copy_from_slice(&self.width.to_le_bytes());
        out[16..20].copy_from_slice(&self.frame_count.to_le_bytes());
        out[20] = self.adc_bits;
        out
    }

    pub fn payload_len(&self) -> usize {
        self.height as usize * self.width as usize * self.frame_count as usize
    }

    /// Parses and checks the header bytes of `path`.
    pub fn parse(bytes: &[u8], path: &Path) -> Result<Self> {
        if bytes.len() < 4 || bytes[0..4] != MAGIC {
            let mut found = [0u8; 4];
            let n = bytes.len().min(4);
            found[..n].copy_from_slice(&bytes[..n]);
            return Err(QisError::BadMagic {
                path: path.to_owned(),
                found,
            });
        }
        if bytes.len() < HEADER_LEN {
            return Err(QisError::Truncated {
                path: path.to_owned(),
                what: "header",
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(QisError::VersionMismatch {
                path: path.to_owned(),
                found: version,
                expected: VERSION,
            });
        }
        let header = Self {
            version,
            height: u32_at(8),
            width: u32_at(12),
            frame_count: u32_at(16),
            adc_bits: bytes[20],
        };
        let malformed = |reason: String| QisError::MalformedHeader {
            path: path.to_owned(),
            reason,
        };
        if !(1..=8).contains(&header.adc_bits) {
            return Err(malformed(format!(
                "adc_bits {} outside [1, 8]",
                header.adc_bits
            )));
        }
        if bytes[21..24] != [0, 0, 0] {
            return Err(malformed("reserved bytes are not zero".into()));
        }
        if header.height == 0 || header.width == 0 || header.frame_count == 0 {
            return Err(malformed("zero dimension".into()));
        }
        Ok(header)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    format: String,
    version: u32,
    seed: u64,
    sensor: SensorConfig,
    trajectory: Option<MotionTrajectory>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".toml");
    PathBuf::from(s)
}

/// Serializes the burst into the exact bytes of a QISB file.
pub fn encode_burst(burst: &Burst) -> Result<Vec<u8>> {
    let max = max_code(burst.adc_bits());
    if let Some((offset, &value)) = burst.data().iter().enumerate().find(|(_, &v)| v > max) {
        return Err(QisError::PayloadOutOfRange {
            offset,
            value,
            max,
            bits: burst.adc_bits(),
        });
    }
    let dim = |v: usize, name: &str| {
        u32::try_from(v).map_err(|_| QisError::InvalidBurst(format!("{name} {v} exceeds u32")))
    };
    let header = QisbHeader {
        version: VERSION,
        height: dim(burst.height(), "height")?,
        width: dim(burst.width(), "width")?,
        frame_count: dim(burst.frame_count(), "frame_count")?,
        adc_bits: burst.adc_bits(),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + burst.data().len());
    out.extend_from_slice(&header.to_bytes());
    out.extend_from_slice(burst.data());
    Ok(out)
}

fn encode_sidecar(burst: &Burst) -> Result<String> {
    let sidecar = Sidecar {
        format: "QISB".into(),
        version: VERSION,
        seed: burst.seed(),
        sensor: *burst.config(),
        trajectory: burst.trajectory().cloned(),
    };
    toml::to_string(&sidecar).map_err(|e| QisError::Metadata(e.to_string()))
}

/// Writes `path` and its `.toml` sidecar.
pub fn write_burst(burst: &Burst, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_burst(burst)?;
    let meta = encode_sidecar(burst)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    fs::write(sidecar_path(path), meta)?;
    Ok(())
}

/// Reads only the fixed header, for inspection.
pub fn read_header(path: impl AsRef<Path>) -> Result<QisbHeader> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    QisbHeader::parse(&bytes, path)
}

pub fn read_burst(path: impl AsRef<Path>) -> Result<Burst> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let header = QisbHeader::parse(&bytes, path)?;
    let payload = &bytes[HEADER_LEN..];
    let expected = header.payload_len();
    if payload.len() < expected {
        return Err(QisError::Truncated {
            path: path.to_owned(),
            what: "payload",
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(QisError::MalformedHeader {
            path: path.to_owned(),
            reason: format!("{} trailing bytes after payload", payload.len() - expected),
        });
    }
    let max = max_code(header.adc_bits);
    if let Some((offset, &value)) = payload.iter().enumerate().find(|(_, &v)| v > max) {
        return Err(QisError::PayloadOutOfRange {
            offset,
            value,
            max,
            bits: header.adc_bits,
        });
    }

    let meta_path = sidecar_path(path);
    let text = fs::read_to_string(&meta_path)?;
    let sidecar: Sidecar = toml::from_str(&text)
        .map_err(|e| QisError::Metadata(format!("{}: {e}", meta_path.display())))?;
    if sidecar.sensor.adc_bits != header.adc_bits {
        return Err(QisError::Metadata(format!(
            "sidecar adc_bits {} disagrees with header {}",
            sidecar.sensor.adc_bits, header.adc_bits
        )));
    }

    Ok(Burst::new(
        header.width as usize,
        header.height as usize,
        header.frame_count as usize,
        payload.to_vec(),
        sidecar.sensor,
        sidecar.seed,
    )?
    .with_trajectory(sidecar.trajectory))
}

//! Binary portable graymap (P5) reading and writing, 8 or 16 bit.

use std::fs;
use std::path::Path;

use crate::error::{QisError, Result};
use crate::types::SceneImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmDepth {
    Eight,
    Sixteen,
}

impl PgmDepth {
    fn maxval(self) -> u32 {
        match self {
            Self::Eight => 255,
            Self::Sixteen => 65535,
        }
    }
}

fn fmt_err(msg: impl Into<String>) -> QisError {
    QisError::ImageFormat(msg.into())
}

/// Reads header tokens, skipping whitespace and `#` comments. Returns the
/// tokens and the offset of the first raster byte.
fn header_tokens(bytes: &[u8]) -> Result<([u32; 3], usize)> {
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(fmt_err("not a binary PGM (missing P5 magic)"));
    }
    let mut pos = 2;
    let mut vals = [0u32; 3];
    for v in vals.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(fmt_err("truncated PGM header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *v = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fmt_err("bad number in PGM header"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(fmt_err("missing whitespace after PGM maxval"));
    }
    Ok((vals, pos + 1))
}

pub fn decode_pgm(bytes: &[u8]) -> Result<SceneImage> {
    let ([width, height, maxval], start) = header_tokens(bytes)?;
    if maxval == 0 || maxval > 65535 {
        return Err(fmt_err(format!("unsupported maxval {maxval}")));
    }
    let (w, h) = (width as usize, height as usize);
    let bpp = if maxval < 256 { 1 } else { 2 };
    let raster = &bytes[start..];
    if raster.len() < w * h * bpp {
        return Err(fmt_err(format!(
            "PGM raster truncated: need {} bytes, have {}",
            w * h * bpp,
            raster.len()
        )));
    }
    let scale = 1.0 / f64::from(maxval);
    let data = if bpp == 1 {
        raster[..w * h]
            .iter()
            .map(|&v| f64::from(v) * scale)
            .collect()
    } else {
        raster[..w * h * 2]
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])) * scale)
            .collect()
    };
    SceneImage::from_clamped(w, h, data)
}

pub fn encode_pgm(image: &SceneImage, depth: PgmDepth) -> Vec<u8> {
    let maxval = depth.maxval();
    let mut out = format!("P5\n{} {}\n{}\n", image.width(), image.height(), maxval).into_bytes();
    let m = f64::from(maxval);
    for &v in image.data() {
        let q = (v * m).round() as u32;
        match depth {
            PgmDepth::Eight => out.push(q as u8),
            PgmDepth::Sixteen => out.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<SceneImage> {
    let path = path.as_ref();
    decode_pgm(&fs::read(path)?).map_err(|e| fmt_err(format!("{}: {e}", path.display())))
}

pub fn write_pgm(image: &SceneImage, path: impl AsRef<Path>, depth: PgmDepth) -> Result<()> {
    fs::write(path, encode_pgm(image, depth))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_bit_round_trip_is_exact_on_grid_values() {
        let img =
            SceneImage::from_fn(5, 3, |x, y| ((x + 5 * y) * 17 % 256) as f64 / 255.0).unwrap();
        let back = decode_pgm(&encode_pgm(&img, PgmDepth::Eight)).unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sixteen_bit_quantization_error_is_small() {
        let img =
            SceneImage::from_fn(7, 4, |x, y| (x as f64 * 0.13 + y as f64 * 0.07).fract()).unwrap();
        let back = decode_pgm(&encode_pgm(&img, PgmDepth::Sixteen)).unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-12);
        }
    }

    #[test]
    fn header_comments_are_skipped() {
        let bytes = b"P5\n# made by hand\n2 1\n# max\n255\n\x00\xff".to_vec();
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0]);
    }

    #[test]
    fn rejects_ascii_and_truncated() {
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00").is_err());
    }
}

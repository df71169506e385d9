//! Procedural test scenes with edges and texture, for sweeps and demos
//! when no image collection is at hand.

use crate::error::Result;
use crate::rng::{derive_seed, CounterRng};
use crate::types::SceneImage;

/// Overlapping soft-edged discs and rectangles over a sinusoidal background,
/// in `[0.05, 0.95]`. Deterministic in `seed`.
pub fn textured_scene(width: usize, height: usize, seed: u64) -> Result<SceneImage> {
    let mut rng = CounterRng::from_key(derive_seed(seed, "textured-scene", 0));
    let mut u = move || rng.uniform_open();
    let (wf, hf) = (width as f64, height as f64);
    let fx = 2.0 + 6.0 * u();
    let fy = 2.0 + 6.0 * u();
    let phase = std::f64::consts::TAU * u();

    struct Shape {
        disc: bool,
        cx: f64,
        cy: f64,
        a: f64,
        b: f64,
        level: f64,
    }
    let shapes: Vec<Shape> = (0..12)
        .map(|_| Shape {
            disc: u() < 0.5,
            cx: u() * wf,
            cy: u() * hf,
            a: (0.05 + 0.2 * u()) * wf.min(hf),
            b: (0.05 + 0.2 * u()) * wf.min(hf),
            level: u(),
        })
        .collect();

    SceneImage::from_fn(width, height, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let mut v = 0.5
            + 0.2
                * (std::f64::consts::TAU * fx * xf / wf + phase).sin()
                * (std::f64::consts::TAU * fy * yf / hf).cos();
        for s in &shapes {
            let inside = if s.disc {
                ((xf - s.cx) / s.a).powi(2) + ((yf - s.cy) / s.a).powi(2) <= 1.0
            } else {
                (xf - s.cx).abs() <= s.a && (yf - s.cy).abs() <= s.b
            };
            if inside {
                v = s.level;
            }
        }
        0.05 + 0.9 * v.clamp(0.0, 1.0)
    })
}

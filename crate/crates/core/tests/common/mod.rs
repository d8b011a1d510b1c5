#![allow(dead_code)]

use civc::Frame;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rand_distr::Normal;

/// Smooth periodic texture sampled at `(x + ox, y + oy)`.
pub fn texture(x: f64, y: f64) -> f64 {
    128.0
        + 45.0 * (x * 0.21 + 0.3 * (y * 0.05).sin()).sin()
        + 35.0 * (y * 0.17 - x * 0.04).cos()
        + 20.0 * ((x + y) * 0.43).sin()
}

/// Texture translated by `(dx, dy)` per frame, plus optional Gaussian noise.
pub fn moving_clip(
    w: usize,
    h: usize,
    n: usize,
    step: (f64, f64),
    noise: f64,
    seed: u64,
) -> Vec<Frame> {
    let mut rng = StdRng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(1e-12)).unwrap();
    (0..n)
        .map(|t| {
            let (ox, oy) = (step.0 * t as f64, step.1 * t as f64);
            let s: Vec<u8> = (0..w * h)
                .map(|i| {
                    let (x, y) = ((i % w) as f64, (i / w) as f64);
                    let mut v = texture(x - ox, y - oy);
                    if noise > 0.0 {
                        v += rng.sample(normal);
                    }
                    v.round().clamp(0.0, 255.0) as u8
                })
                .collect();
            Frame::from_u8(w, h, t, &s).unwrap()
        })
        .collect()
}

/// Uniform random 8-bit frame.
pub fn noise_frame(w: usize, h: usize, idx: usize, rng: &mut StdRng) -> Frame {
    let s: Vec<u8> = (0..w * h).map(|_| rng.random::<u8>()).collect();
    Frame::from_u8(w, h, idx, &s).unwrap()
}

/// Random texture: smooth base with a random phase plus white noise.
pub fn random_textured(w: usize, h: usize, idx: usize, rng: &mut StdRng) -> Frame {
    let (px, py) = (rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0);
    let amp = 4.0 + 20.0 * rng.random::<f64>();
    let s: Vec<u8> = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64 + px, (i / w) as f64 + py);
            let v = texture(x, y) + amp * (rng.random::<f64>() - 0.5);
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Frame::from_u8(w, h, idx, &s).unwrap()
}

//! Per-channel 8×8 block DCT-II (orthonormal).
//!
//! Blocks along the right and bottom edges may be narrower than 8; they use
//! the orthonormal DCT of their own size, so the transform stays exactly
//! invertible on any grid and the output keeps the input's shape.

use std::sync::OnceLock;

use crate::entropy::LatentGrid;
use crate::error::Result;
use crate::par::Exec;
use crate::types::{check_shape, FeatureTensor, Shape};

pub const BLOCK: usize = 8;

/// `basis(n)[k * n + i] = a_k cos(pi (2i + 1) k / 2n)`.
fn basis(n: usize) -> &'static [f32] {
    static TABLES: OnceLock<Vec<Vec<f32>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=BLOCK)
            .map(|n| {
                let mut b = vec![0.0f32; n * n];
                for k in 0..n {
                    let a = if k == 0 {
                        libm::sqrt(1.0 / n as f64)
                    } else {
                        libm::sqrt(2.0 / n as f64)
                    };
                    for i in 0..n {
                        let arg = std::f64::consts::PI * ((2 * i + 1) * k) as f64 / (2 * n) as f64;
                        b[k * n + i] = (a * libm::cos(arg)) as f32;
                    }
                }
                b
            })
            .collect()
    });
    &tables[n]
}

/// Transforms one `bh`×`bw` block in place. `inverse` applies the transpose.
fn transform_block(block: &mut [f32], bh: usize, bw: usize, inverse: bool) {
    let (rh, rw) = (basis(bh), basis(bw));
    let mut tmp = [0.0f32; BLOCK * BLOCK];
    // rows
    for y in 0..bh {
        for k in 0..bw {
            let mut acc = 0.0f32;
            for i in 0..bw {
                let w = if inverse {
                    rw[i * bw + k]
                } else {
                    rw[k * bw + i]
                };
                acc += w * block[y * bw + i];
            }
            tmp[y * bw + k] = acc;
        }
    }
    // columns
    for x in 0..bw {
        for k in 0..bh {
            let mut acc = 0.0f32;
            for i in 0..bh {
                let w = if inverse {
                    rh[i * bh + k]
                } else {
                    rh[k * bh + i]
                };
                acc += w * tmp[i * bw + x];
            }
            block[k * bw + x] = acc;
        }
    }
}

/// Applies the block transform to every block, then multiplies by `gain`.
fn blockwise(shape: Shape, data: &[f32], gain: f32, inverse: bool, exec: Exec) -> Vec<f32> {
    let brows = shape.height.div_ceil(BLOCK);
    // One task per (channel, block row); the strips tile the buffer in order.
    let strips = exec.map_range(shape.channels * brows, |task| {
        let (c, br) = (task / brows, task % brows);
        let y0 = br * BLOCK;
        let bh = BLOCK.min(shape.height - y0);
        let mut strip = vec![0.0f32; bh * shape.width];
        let mut block = [0.0f32; BLOCK * BLOCK];
        let mut x0 = 0;
        while x0 < shape.width {
            let bw = BLOCK.min(shape.width - x0);
            for y in 0..bh {
                let src = shape.index(c, y0 + y, x0);
                block[y * bw..y * bw + bw].copy_from_slice(&data[src..src + bw]);
            }
            if !inverse {
                transform_block(&mut block, bh, bw, false);
            }
            for v in &mut block[..bh * bw] {
                *v *= gain;
            }
            if inverse {
                transform_block(&mut block, bh, bw, true);
            }
            for y in 0..bh {
                strip[y * shape.width + x0..y * shape.width + x0 + bw]
                    .copy_from_slice(&block[y * bw..y * bw + bw]);
            }
            x0 += BLOCK;
        }
        strip
    });
    strips.concat()
}

/// Forward transform divided by `qstep`: the pre-quantization latents.
pub fn analysis(input: &FeatureTensor, qstep: f32) -> FeatureTensor {
    analysis_with(input, qstep, Exec::default())
}

pub fn analysis_with(input: &FeatureTensor, qstep: f32, exec: Exec) -> FeatureTensor {
    FeatureTensor {
        shape: input.shape,
        scale: input.scale,
        data: blockwise(input.shape, &input.data, 1.0 / qstep, false, exec),
    }
}

/// Multiplies by `qstep` and inverts the block transform.
pub fn synthesis(latents: &LatentGrid, qstep: f32, scale: usize) -> FeatureTensor {
    synthesis_with(latents, qstep, scale, Exec::default())
}

pub fn synthesis_with(latents: &LatentGrid, qstep: f32, scale: usize, exec: Exec) -> FeatureTensor {
    FeatureTensor {
        shape: latents.shape,
        scale,
        data: blockwise(latents.shape, &latents.values, qstep, true, exec),
    }
}

/// Synthesis of an unquantized latent tensor.
pub fn synthesis_real(latents: &FeatureTensor, qstep: f32) -> Result<FeatureTensor> {
    let grid = LatentGrid::new(latents.shape, latents.data.clone())?;
    let out = synthesis(&grid, qstep, latents.scale);
    check_shape("synthesis", latents.shape, out.shape)?;
    Ok(out)
}

/// True at positions holding a block's DC coefficient.
#[inline]
pub fn is_dc(y: usize, x: usize) -> bool {
    y.is_multiple_of(BLOCK) && x.is_multiple_of(BLOCK)
}

//! Pixel-to-feature motion prediction.
//!
//! Motion is first found in pixel space by exhaustive block matching, lifted
//! to feature resolution, used to warp the reference features, and finally
//! refined per cell by a small integer search against the target features.
//!
//! Sign convention: a vector `(dx, dy)` at a position means the content there
//! came from `(x - dx, y - dy)` in the reference.

use crate::config::CodecConfig;
use crate::error::Result;
use crate::par::Exec;
use crate::types::{check_shape, FeatureTensor, Frame, MotionField, MotionVector};

/// Ordering key for candidate displacements: lowest cost, then shortest
/// vector, then smallest `dy`, then smallest `dx`.
#[inline]
fn better<C: PartialOrd>(cost: C, d: (i32, i32), best_cost: C, best: (i32, i32)) -> bool {
    if cost < best_cost {
        return true;
    }
    if cost > best_cost {
        return false;
    }
    let key = |(dx, dy): (i32, i32)| (dx.abs() + dy.abs(), dy, dx);
    key(d) < key(best)
}

/// Edge-replicated copy of a plane with `m` extra samples on every side.
struct PaddedPlane {
    data: Vec<u16>,
    stride: usize,
    margin: usize,
}

impl PaddedPlane {
    fn new(f: &Frame, m: usize) -> Self {
        let stride = f.width + 2 * m;
        let rows = f.height + 2 * m;
        let mut data = Vec::with_capacity(stride * rows);
        for y in 0..rows {
            for x in 0..stride {
                data.push(f.at_clamped(x as isize - m as isize, y as isize - m as isize));
            }
        }
        PaddedPlane {
            data,
            stride,
            margin: m,
        }
    }

    #[inline]
    fn at(&self, x: isize, y: isize) -> u16 {
        let xi = (x + self.margin as isize) as usize;
        let yi = (y + self.margin as isize) as usize;
        self.data[yi * self.stride + xi]
    }
}

/// Exhaustive integer block matching, one vector per `block`×`block` pixel
/// block, displacements in `[-radius, radius]^2`.
pub fn estimate_pixel_flow(
    ref_frame: &Frame,
    cur: &Frame,
    radius: usize,
    block: usize,
) -> MotionField {
    estimate_pixel_flow_with(ref_frame, cur, radius, block, Exec::default())
}

pub fn estimate_pixel_flow_with(
    ref_frame: &Frame,
    cur: &Frame,
    radius: usize,
    block: usize,
    exec: Exec,
) -> MotionField {
    assert!(ref_frame.same_geometry(cur), "frames must share geometry");
    let rows = cur.height.div_ceil(block);
    let cols = cur.width.div_ceil(block);
    let padded = PaddedPlane::new(ref_frame, radius);
    let r = radius as i32;
    let vectors = exec.map_range(rows * cols, |k| {
        let (by, bx) = (k / cols, k % cols);
        let (y0, x0) = (by * block, bx * block);
        let (y1, x1) = ((y0 + block).min(cur.height), (x0 + block).min(cur.width));
        let mut best = (0i32, 0i32);
        let mut best_cost = u64::MAX;
        for dy in -r..=r {
            for dx in -r..=r {
                let mut sad = 0u64;
                for y in y0..y1 {
                    let row = y * cur.width;
                    let ry = y as isize - dy as isize;
                    for x in x0..x1 {
                        let a = cur.plane[row + x] as i32;
                        let b = padded.at(x as isize - dx as isize, ry) as i32;
                        sad += (a - b).unsigned_abs() as u64;
                    }
                    if sad > best_cost {
                        break;
                    }
                }
                if better(sad, (dx, dy), best_cost, best) {
                    best_cost = sad;
                    best = (dx, dy);
                }
            }
        }
        MotionVector::new(best.0 as f32, best.1 as f32)
    });
    MotionField {
        rows,
        cols,
        cell_size: block,
        vectors,
    }
}

/// Lifts pixel flow to a feature-cell field of `rows`×`cols` cells: each cell
/// averages the pixel vectors of the blocks it overlaps and divides by the
/// feature scale.
pub fn init_feature_motion(
    pixel_flow: &MotionField,
    scale: usize,
    cell_size: usize,
    rows: usize,
    cols: usize,
) -> MotionField {
    let span = cell_size * scale;
    let pb = pixel_flow.cell_size;
    let mut out = MotionField::zeros(rows, cols, cell_size);
    if pixel_flow.rows == 0 || pixel_flow.cols == 0 {
        return out;
    }
    for r in 0..rows {
        let b0 = (r * span / pb).min(pixel_flow.rows - 1);
        let b1 = (((r + 1) * span - 1) / pb).min(pixel_flow.rows - 1);
        for c in 0..cols {
            let a0 = (c * span / pb).min(pixel_flow.cols - 1);
            let a1 = (((c + 1) * span - 1) / pb).min(pixel_flow.cols - 1);
            let (mut sx, mut sy, mut n) = (0.0f32, 0.0f32, 0.0f32);
            for by in b0..=b1 {
                for bx in a0..=a1 {
                    let v = pixel_flow.get(by, bx);
                    sx += v.dx;
                    sy += v.dy;
                    n += 1.0;
                }
            }
            out.set(
                r,
                c,
                MotionVector::new(sx / n / scale as f32, sy / n / scale as f32),
            );
        }
    }
    out
}

/// Bilinear sample of one channel with edge replication.
#[inline]
fn sample(f: &FeatureTensor, c: usize, x: f32, y: f32) -> f32 {
    let s = f.shape;
    let (w, h) = (s.width as isize, s.height as isize);
    let x0 = x.floor();
    let y0 = y.floor();
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as isize, y0 as isize);
    let cx = |x: isize| x.clamp(0, w - 1) as usize;
    let cy = |y: isize| y.clamp(0, h - 1) as usize;
    let p00 = f.at(c, cy(y0), cx(x0));
    let p01 = f.at(c, cy(y0), cx(x0 + 1));
    let p10 = f.at(c, cy(y0 + 1), cx(x0));
    let p11 = f.at(c, cy(y0 + 1), cx(x0 + 1));
    let top = p00 + (p01 - p00) * fx;
    let bottom = p10 + (p11 - p10) * fx;
    top + (bottom - top) * fy
}

#[inline]
fn cell_of(motion: &MotionField, y: usize, x: usize) -> MotionVector {
    let r = (y / motion.cell_size).min(motion.rows - 1);
    let c = (x / motion.cell_size).min(motion.cols - 1);
    motion.get(r, c)
}

/// Warps the reference features: every sample of cell `k` is read from
/// `(x - dx_k, y - dy_k)`, all channels sharing the cell's vector.
pub fn align(ref_feat: &FeatureTensor, motion: &MotionField) -> FeatureTensor {
    align_with(ref_feat, motion, Exec::default())
}

pub fn align_with(ref_feat: &FeatureTensor, motion: &MotionField, exec: Exec) -> FeatureTensor {
    let s = ref_feat.shape;
    let rows = exec.map_range(s.channels * s.height, |task| {
        let (c, y) = (task / s.height, task % s.height);
        (0..s.width)
            .map(|x| {
                let v = cell_of(motion, y, x);
                sample(ref_feat, c, x as f32 - v.dx, y as f32 - v.dy)
            })
            .collect::<Vec<f32>>()
    });
    FeatureTensor {
        shape: s,
        scale: ref_feat.scale,
        data: rows.concat(),
    }
}

/// Sum of absolute differences between `cur` and `ref` warped by `v`,
/// restricted to cell `(row, col)` and summed over all channels.
pub fn cell_sad(
    ref_feat: &FeatureTensor,
    cur: &FeatureTensor,
    cell_size: usize,
    row: usize,
    col: usize,
    v: MotionVector,
) -> f32 {
    let s = cur.shape;
    let (y0, x0) = (row * cell_size, col * cell_size);
    let (y1, x1) = (
        (y0 + cell_size).min(s.height),
        (x0 + cell_size).min(s.width),
    );
    let mut sad = 0.0f32;
    for c in 0..s.channels {
        for y in y0..y1 {
            for x in x0..x1 {
                let p = sample(ref_feat, c, x as f32 - v.dx, y as f32 - v.dy);
                sad += (cur.at(c, y, x) - p).abs();
            }
        }
    }
    sad
}

/// Adds to every cell the integer offset in `[-radius, radius]^2` that
/// minimizes the cell's alignment SAD; zero wins ties.
pub fn refine_motion(
    init: &MotionField,
    ref_feat: &FeatureTensor,
    cur_feat: &FeatureTensor,
    radius: usize,
) -> Result<MotionField> {
    refine_motion_with(init, ref_feat, cur_feat, radius, Exec::default())
}

pub fn refine_motion_with(
    init: &MotionField,
    ref_feat: &FeatureTensor,
    cur_feat: &FeatureTensor,
    radius: usize,
    exec: Exec,
) -> Result<MotionField> {
    check_shape("refinement features", ref_feat.shape, cur_feat.shape)?;
    let r = radius as i32;
    let vectors = exec.map_range(init.rows * init.cols, |k| {
        let (row, col) = (k / init.cols, k % init.cols);
        let base = init.vectors[k];
        let mut best = (0i32, 0i32);
        let mut best_cost = f32::INFINITY;
        for dy in -r..=r {
            for dx in -r..=r {
                let v = MotionVector::new(base.dx + dx as f32, base.dy + dy as f32);
                let cost = cell_sad(ref_feat, cur_feat, init.cell_size, row, col, v);
                if better(cost, (dx, dy), best_cost, best) {
                    best_cost = cost;
                    best = (dx, dy);
                }
            }
        }
        MotionVector::new(base.dx + best.0 as f32, base.dy + best.1 as f32)
    });
    Ok(MotionField {
        rows: init.rows,
        cols: init.cols,
        cell_size: init.cell_size,
        vectors,
    })
}

/// Intermediate results of one motion prediction.
#[derive(Debug, Clone)]
pub struct MotionPrediction {
    pub pixel_flow: MotionField,
    pub init: MotionField,
    pub refined: MotionField,
}

/// Full pixel-to-feature prediction of `cur` from the decoded reference.
pub fn predict_motion(
    ref_frame: &Frame,
    cur: &Frame,
    ref_feat: &FeatureTensor,
    cur_feat: &FeatureTensor,
    cfg: &CodecConfig,
) -> Result<MotionPrediction> {
    let pixel_flow = estimate_pixel_flow(ref_frame, cur, cfg.search_radius, cfg.pixel_block());
    let (rows, cols) = motion_grid(cur_feat, cfg.cell_size);
    let init = init_feature_motion(&pixel_flow, cfg.feature_scale, cfg.cell_size, rows, cols);
    let refined = refine_motion(&init, ref_feat, cur_feat, cfg.refine_radius)?;
    Ok(MotionPrediction {
        pixel_flow,
        init,
        refined,
    })
}

/// Cell grid dimensions for a feature tensor.
pub fn motion_grid(feat: &FeatureTensor, cell_size: usize) -> (usize, usize) {
    (
        feat.shape.height.div_ceil(cell_size),
        feat.shape.width.div_ceil(cell_size),
    )
}

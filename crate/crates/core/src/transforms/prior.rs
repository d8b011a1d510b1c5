//! Structure/temporal priors for the three latent kinds.
//!
//! All priors are affine in two decoder-side signals:
//!
//! * structure activity `s`: standard deviation of a decoded feature tensor
//!   over the 8×8 block that holds the element, pooled over channels and
//!   expressed in quantization steps (std / feature-domain step);
//! * temporal value `p`: the co-located latent of the previous frame.
//!
//! `mu = alpha * p` and `sigma = clamp(beta0 + beta1 * s + beta2 * |p|)`.
//! Activity is accumulated in `f64`, the model itself in `f32`, in a fixed
//! order.

use crate::config::PriorCoefficients;
use crate::entropy::{GaussianModel, LatentGrid};
use crate::error::{Error, Result};
use crate::transforms::dct::{analysis, is_dc, BLOCK};
use crate::types::{check_shape, FeatureTensor, Shape};

/// Activity per 8×8 spatial block of `source`, row-major over blocks.
#[derive(Debug, Clone)]
pub struct BlockActivity {
    brows: usize,
    bcols: usize,
    values: Vec<f32>,
}

impl BlockActivity {
    pub fn measure(source: &FeatureTensor, step: f32) -> Self {
        let s = source.shape;
        let brows = s.height.div_ceil(BLOCK).max(1);
        let bcols = s.width.div_ceil(BLOCK).max(1);
        let mut values = Vec::with_capacity(brows * bcols);
        for by in 0..brows {
            for bx in 0..bcols {
                let (y0, x0) = (by * BLOCK, bx * BLOCK);
                let (y1, x1) = ((y0 + BLOCK).min(s.height), (x0 + BLOCK).min(s.width));
                let n = (s.channels * (y1 - y0) * (x1 - x0)) as f64;
                if n == 0.0 {
                    values.push(0.0);
                    continue;
                }
                let mut sum = 0.0f64;
                for c in 0..s.channels {
                    for y in y0..y1 {
                        for x in x0..x1 {
                            sum += source.at(c, y, x) as f64;
                        }
                    }
                }
                let mean = sum / n;
                let mut var = 0.0f64;
                for c in 0..s.channels {
                    for y in y0..y1 {
                        for x in x0..x1 {
                            let d = source.at(c, y, x) as f64 - mean;
                            var += d * d;
                        }
                    }
                }
                values.push(((var / n).sqrt() / step as f64) as f32);
            }
        }
        BlockActivity {
            brows,
            bcols,
            values,
        }
    }

    /// Activity of the block containing feature sample `(y, x)`.
    #[inline]
    pub fn at(&self, y: usize, x: usize) -> f32 {
        let by = (y / BLOCK).min(self.brows - 1);
        let bx = (x / BLOCK).min(self.bcols - 1);
        self.values[by * self.bcols + bx]
    }
}

fn temporal(prev: Option<&LatentGrid>, shape: Shape) -> Result<Option<&[f32]>> {
    match prev {
        Some(p) => {
            check_shape("previous latents", shape, p.shape)?;
            Ok(Some(&p.values))
        }
        None => Ok(None),
    }
}

/// Builds the affine model; `locate` maps a latent `(y, x)` to the structure
/// sample whose block supplies the activity.
fn affine_prior(
    shape: Shape,
    activity: &BlockActivity,
    locate: impl Fn(usize, usize) -> (usize, usize),
    prev: Option<&[f32]>,
    k: &PriorCoefficients,
) -> Result<GaussianModel> {
    let mut mu = Vec::with_capacity(shape.len());
    let mut sigma = Vec::with_capacity(shape.len());
    for c in 0..shape.channels {
        for y in 0..shape.height {
            for x in 0..shape.width {
                let i = shape.index(c, y, x);
                let p = prev.map_or(0.0, |p| p[i]);
                let (sy, sx) = locate(y, x);
                let s = activity.at(sy, sx);
                mu.push(k.alpha * p);
                sigma.push(k.clamp_sigma(k.beta0 + k.beta1 * s + k.beta2 * p.abs()));
            }
        }
    }
    GaussianModel::new(shape, mu, sigma)
}

/// Prior for motion latents. Structure comes from the reference features
/// (the cell's top-left feature sample picks the block), the temporal term
/// from the previous frame's motion latents.
pub fn predict_motion_prior(
    ref_feat: &FeatureTensor,
    prev_motion: Option<&LatentGrid>,
    motion_shape: Shape,
    cell_size: usize,
    step: f32,
    k: &PriorCoefficients,
) -> Result<GaussianModel> {
    if motion_shape.channels != 2 {
        return Err(Error::Shape(format!(
            "motion latents need 2 channels, got {motion_shape}"
        )));
    }
    let prev = temporal(prev_motion, motion_shape)?;
    let activity = BlockActivity::measure(ref_feat, step);
    affine_prior(
        motion_shape,
        &activity,
        |y, x| (y * cell_size, x * cell_size),
        prev,
        k,
    )
}

/// Prior for residual latents: structure from the motion-compensated
/// prediction, temporal term from the previous residual latents.
pub fn predict_residual_prior(
    pred_feat: &FeatureTensor,
    prev_residual: Option<&LatentGrid>,
    step: f32,
    k: &PriorCoefficients,
) -> Result<GaussianModel> {
    let shape = pred_feat.shape;
    let prev = temporal(prev_residual, shape)?;
    let activity = BlockActivity::measure(pred_feat, step);
    affine_prior(shape, &activity, |y, x| (y, x), prev, k)
}

/// Prior for conditional-I image latents: the aligned reference, taken to
/// the latent domain, predicts the mean; its activity sets the scale.
pub fn predict_ci_prior(
    aligned_ref: &FeatureTensor,
    step: f32,
    k: &PriorCoefficients,
) -> Result<GaussianModel> {
    let shape = aligned_ref.shape;
    let mu = analysis(aligned_ref, step).data;
    let activity = BlockActivity::measure(aligned_ref, step);
    let mut sigma = Vec::with_capacity(shape.len());
    for _c in 0..shape.channels {
        for y in 0..shape.height {
            for x in 0..shape.width {
                sigma.push(k.clamp_sigma(k.beta0 + k.beta1 * activity.at(y, x)));
            }
        }
    }
    GaussianModel::new(shape, mu, sigma)
}

/// Fixed prior for I-frame latents: zero mean, wide DC and AC scales.
pub fn intra_prior(shape: Shape, k: &PriorCoefficients) -> GaussianModel {
    let mut sigma = Vec::with_capacity(shape.len());
    for _c in 0..shape.channels {
        for y in 0..shape.height {
            for x in 0..shape.width {
                let s = if is_dc(y, x) {
                    k.intra_sigma_dc
                } else {
                    k.intra_sigma_ac
                };
                sigma.push(k.clamp_sigma(s));
            }
        }
    }
    GaussianModel {
        shape,
        mu: vec![0.0; shape.len()],
        sigma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(shape: Shape, v: f32) -> FeatureTensor {
        FeatureTensor::from_vec(shape, 2, vec![v; shape.len()]).unwrap()
    }

    fn k() -> PriorCoefficients {
        PriorCoefficients::default()
    }

    #[test]
    fn motion_prior_flat_reference_no_history() {
        let r = flat(Shape::new(4, 16, 16), 0.4);
        let m = predict_motion_prior(&r, None, Shape::new(2, 4, 4), 4, 8.0 / 255.0, &k()).unwrap();
        assert!(m.mu.iter().all(|&v| v == 0.0));
        assert!(m.sigma.iter().all(|&s| (s - 0.10).abs() < 1e-7));
    }

    #[test]
    fn motion_prior_temporal_substitution() {
        let r = flat(Shape::new(4, 16, 16), 0.4);
        let shape = Shape::new(2, 4, 4);
        let prev = LatentGrid::new(shape, vec![2.0; shape.len()]).unwrap();
        let m = predict_motion_prior(&r, Some(&prev), shape, 4, 0.03, &k()).unwrap();
        assert!(m.mu.iter().all(|&v| v == 1.5));
        assert!(m.sigma.iter().all(|&s| (s - 0.5).abs() < 1e-6));
    }

    #[test]
    fn residual_prior_same_formula() {
        let shape = Shape::new(4, 8, 8);
        let f = flat(shape, 0.9);
        let m = predict_residual_prior(&f, None, 0.03, &k()).unwrap();
        assert!(m.mu.iter().all(|&v| v == 0.0));
        assert!(m.sigma.iter().all(|&s| (s - 0.10).abs() < 1e-7));
        let prev = LatentGrid::new(shape, vec![-2.0; shape.len()]).unwrap();
        let m = predict_residual_prior(&f, Some(&prev), 0.03, &k()).unwrap();
        assert!(m.mu.iter().all(|&v| v == -1.5));
        assert!(m.sigma.iter().all(|&s| (s - 0.5).abs() < 1e-6));
    }

    #[test]
    fn textured_structure_raises_sigma() {
        let shape = Shape::new(1, 8, 16);
        let data: Vec<f32> = (0..shape.len())
            .map(|i| {
                if (i % 16) < 8 {
                    0.5
                } else if i % 2 == 0 {
                    0.0
                } else {
                    1.0
                }
            })
            .collect();
        let f = FeatureTensor::from_vec(shape, 1, data).unwrap();
        let m = predict_residual_prior(&f, None, 0.1, &k()).unwrap();
        // left block flat, right block std 0.5 -> 5 steps
        assert!((m.sigma[0] - 0.10).abs() < 1e-6);
        assert!((m.sigma[8] - (0.10 + 0.05 * 5.0)).abs() < 1e-5);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let f = flat(Shape::new(4, 8, 8), 0.1);
        let prev = LatentGrid::new(Shape::new(4, 8, 4), vec![0.0; 128]).unwrap();
        assert!(predict_residual_prior(&f, Some(&prev), 0.03, &k()).is_err());
        assert!(predict_motion_prior(&f, None, Shape::new(3, 2, 2), 4, 0.03, &k()).is_err());
    }

    #[test]
    fn ci_prior_zero_reference() {
        let f = flat(Shape::new(4, 8, 8), 0.0);
        let m = predict_ci_prior(&f, 0.03, &k()).unwrap();
        assert!(m.mu.iter().all(|&v| v == 0.0));
        assert!(m.sigma.iter().all(|&s| (s - 0.10).abs() < 1e-7));
    }

    #[test]
    fn intra_prior_dc_and_ac() {
        let m = intra_prior(Shape::new(1, 9, 9), &k());
        assert_eq!(m.sigma[0], 32.0);
        assert_eq!(m.sigma[1], 4.0);
        assert_eq!(m.sigma[8 * 9 + 8], 32.0);
    }
}

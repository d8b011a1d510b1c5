use crate::error::{Error, Result};
use crate::types::{FeatureTensor, Frame, Shape};

/// Feature-space geometry of a `width`×`height` picture at downsampling `scale`:
/// the picture is padded to a multiple of `2 * scale` first.
pub fn feature_shape(width: usize, height: usize, scale: usize) -> Shape {
    let m = 2 * scale;
    let pw = width.div_ceil(m) * m;
    let ph = height.div_ceil(m) * m;
    Shape::new(scale * scale, ph / scale, pw / scale)
}

/// Space-to-depth of the edge-padded luma plane, samples rescaled to [0, 1].
/// Channel `dy * scale + dx` holds the samples at phase `(dx, dy)`.
pub fn extract_features(frame: &Frame, scale: usize) -> FeatureTensor {
    let shape = feature_shape(frame.width, frame.height, scale);
    let max = frame.max_value() as f32;
    let mut data = vec![0.0f32; shape.len()];
    for dy in 0..scale {
        for dx in 0..scale {
            let c = dy * scale + dx;
            for fy in 0..shape.height {
                let y = (fy * scale + dy) as isize;
                let row = shape.index(c, fy, 0);
                for fx in 0..shape.width {
                    let x = (fx * scale + dx) as isize;
                    data[row + fx] = frame.at_clamped(x, y) as f32 / max;
                }
            }
        }
    }
    FeatureTensor { shape, scale, data }
}

/// Depth-to-space, crop to `width`×`height`, rescale, round half away from
/// zero and clamp to the sample range.
pub fn synthesize_frame(
    feat: &FeatureTensor,
    width: usize,
    height: usize,
    bitdepth: u8,
    frame_index: usize,
) -> Result<Frame> {
    let scale = feat.scale;
    let expected = feature_shape(width, height, scale);
    if feat.shape != expected {
        return Err(Error::Shape(format!(
            "features {} do not match {}x{} at scale {} (expected {})",
            feat.shape, width, height, scale, expected
        )));
    }
    let max = ((1u32 << bitdepth) - 1) as f32;
    let mut plane = vec![0u16; width * height];
    for y in 0..height {
        for x in 0..width {
            let c = (y % scale) * scale + x % scale;
            let v = feat.at(c, y / scale, x / scale) * max;
            plane[y * width + x] = v.round().clamp(0.0, max) as u16;
        }
    }
    Frame::new(width, height, bitdepth, frame_index, plane)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Frame {
        let plane = (0..w * h).map(|i| ((i * 37 + 11) % 256) as u16).collect();
        Frame::new(w, h, 8, 0, plane).unwrap()
    }

    #[test]
    fn four_by_four_shape() {
        let f = extract_features(&Frame::filled(4, 4, 0), 2);
        assert_eq!(f.shape, Shape::new(4, 2, 2));
    }

    #[test]
    fn constant_frame() {
        let f = extract_features(&Frame::filled(6, 6, 128), 2);
        assert!(f.data.iter().all(|&v| v == 128.0 / 255.0));
        // 6 pads to 8
        assert_eq!(f.shape, Shape::new(4, 4, 4));
    }

    #[test]
    fn even_frames_invert() {
        for (w, h) in [(4, 4), (8, 12), (16, 6)] {
            let x = ramp(w, h);
            let back = synthesize_frame(&extract_features(&x, 2), w, h, 8, 0).unwrap();
            assert_eq!(back, x);
        }
    }

    #[test]
    fn five_by_five_pads_and_crops() {
        let plane: Vec<u16> = (0..25).map(|i| (i * 10) as u16).collect();
        let x = Frame::new(5, 5, 8, 3, plane).unwrap();
        let f = extract_features(&x, 2);
        assert_eq!(f.shape, Shape::new(4, 4, 4));
        // edge replication into the padding: sample (7, 0) comes from (4, 0)
        assert_eq!(f.at(1, 0, 3), 40.0 / 255.0);
        let back = synthesize_frame(&f, 5, 5, 8, 3).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn out_of_range_features_clamp() {
        let mut f = extract_features(&Frame::filled(4, 4, 10), 2);
        f.data[0] = 1.5;
        f.data[1] = -0.2;
        let x = synthesize_frame(&f, 4, 4, 8, 0).unwrap();
        assert_eq!(x.at(0, 0), 255);
        assert_eq!(x.at(2, 0), 0);
    }

    #[test]
    fn geometry_mismatch_rejected() {
        let f = extract_features(&Frame::filled(8, 8, 1), 2);
        assert!(synthesize_frame(&f, 12, 8, 8, 0).is_err());
    }
}

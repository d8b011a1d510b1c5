//! Shared domain types.

use std::fmt;

use crate::error::{Error, Result};

/// A luma picture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub bitdepth: u8,
    pub frame_index: usize,
    /// Row-major samples, `height * width` entries.
    pub plane: Vec<u16>,
}

impl Frame {
    pub fn new(
        width: usize,
        height: usize,
        bitdepth: u8,
        frame_index: usize,
        plane: Vec<u16>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Frame(format!("empty geometry {width}x{height}")));
        }
        if !(1..=16).contains(&bitdepth) {
            return Err(Error::Frame(format!("unsupported bit depth {bitdepth}")));
        }
        if plane.len() != width * height {
            return Err(Error::Frame(format!(
                "plane has {} samples, expected {}",
                plane.len(),
                width * height
            )));
        }
        let max = Self::max_for(bitdepth);
        if let Some(&bad) = plane.iter().find(|&&s| s > max) {
            return Err(Error::Frame(format!(
                "sample {bad} exceeds {max} for {bitdepth}-bit"
            )));
        }
        Ok(Frame {
            width,
            height,
            bitdepth,
            frame_index,
            plane,
        })
    }

    /// 8-bit frame filled with `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Frame {
            width,
            height,
            bitdepth: 8,
            frame_index: 0,
            plane: vec![value as u16; width * height],
        }
    }

    pub fn from_u8(
        width: usize,
        height: usize,
        frame_index: usize,
        samples: &[u8],
    ) -> Result<Self> {
        Frame::new(
            width,
            height,
            8,
            frame_index,
            samples.iter().map(|&s| s as u16).collect(),
        )
    }

    fn max_for(bitdepth: u8) -> u16 {
        ((1u32 << bitdepth) - 1) as u16
    }

    pub fn max_value(&self) -> u16 {
        Self::max_for(self.bitdepth)
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u16 {
        self.plane[y * self.width + x]
    }

    /// Sample with coordinates clamped into the picture (edge replication).
    #[inline]
    pub fn at_clamped(&self, x: isize, y: isize) -> u16 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.at(x, y)
    }

    pub fn same_geometry(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height && self.bitdepth == other.bitdepth
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.plane.iter().map(|&s| s.min(255) as u8).collect()
    }
}

/// Dimensions of a channel-major 3-D grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub const fn new(channels: usize, height: usize, width: usize) -> Self {
        Shape {
            channels,
            height,
            width,
        }
    }

    pub const fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn plane_len(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub const fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.height + y) * self.width + x
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.height, self.width)
    }
}

pub(crate) fn check_shape(what: &str, expected: Shape, got: Shape) -> Result<()> {
    if expected != got {
        return Err(Error::Shape(format!(
            "{what}: expected {expected}, got {got}"
        )));
    }
    Ok(())
}

/// Multi-channel real-valued representation of a picture, a residual or a
/// motion field. `scale` is the spatial downsampling factor relative to the
/// pixel grid (1 for tensors that are not image features).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    pub shape: Shape,
    pub scale: usize,
    pub data: Vec<f32>,
}

impl FeatureTensor {
    pub fn zeros(shape: Shape, scale: usize) -> Self {
        FeatureTensor {
            shape,
            scale,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn from_vec(shape: Shape, scale: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::Shape(format!(
                "tensor {shape} needs {} values, got {}",
                shape.len(),
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("tensor contains non-finite values".into()));
        }
        Ok(FeatureTensor { shape, scale, data })
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[self.shape.index(c, y, x)]
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.shape.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    /// Element-wise `self - other`.
    pub fn sub(&self, other: &FeatureTensor) -> Result<FeatureTensor> {
        check_shape("tensor difference", self.shape, other.shape)?;
        Ok(FeatureTensor {
            shape: self.shape,
            scale: self.scale,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Element-wise `self + other`.
    pub fn add(&self, other: &FeatureTensor) -> Result<FeatureTensor> {
        check_shape("tensor sum", self.shape, other.shape)?;
        Ok(FeatureTensor {
            shape: self.shape,
            scale: self.scale,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|&v| (v as f64) * (v as f64)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionVector {
    pub dx: f32,
    pub dy: f32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0.0, dy: 0.0 };

    pub const fn new(dx: f32, dy: f32) -> Self {
        MotionVector { dx, dy }
    }
}

/// One displacement per `cell_size`×`cell_size` cell. Units are those of the
/// grid the cells tile: pixels for pixel flow, feature samples otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionField {
    pub rows: usize,
    pub cols: usize,
    pub cell_size: usize,
    pub vectors: Vec<MotionVector>,
}

impl MotionField {
    pub fn zeros(rows: usize, cols: usize, cell_size: usize) -> Self {
        MotionField {
            rows,
            cols,
            cell_size,
            vectors: vec![MotionVector::ZERO; rows * cols],
        }
    }

    pub fn uniform(rows: usize, cols: usize, cell_size: usize, v: MotionVector) -> Self {
        MotionField {
            rows,
            cols,
            cell_size,
            vectors: vec![v; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> MotionVector {
        self.vectors[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: MotionVector) {
        self.vectors[row * self.cols + col] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.vectors
            .iter()
            .all(|v| v.dx.is_finite() && v.dy.is_finite())
    }

    pub fn max_abs(&self) -> f32 {
        self.vectors
            .iter()
            .fold(0.0f32, |m, v| m.max(v.dx.abs()).max(v.dy.abs()))
    }

    /// Two-channel tensor (dx plane, dy plane) used for motion coding.
    pub fn to_tensor(&self) -> FeatureTensor {
        let shape = Shape::new(2, self.rows, self.cols);
        let mut data = Vec::with_capacity(shape.len());
        data.extend(self.vectors.iter().map(|v| v.dx));
        data.extend(self.vectors.iter().map(|v| v.dy));
        FeatureTensor {
            shape,
            scale: 1,
            data,
        }
    }

    pub fn from_tensor(t: &FeatureTensor, cell_size: usize) -> Result<Self> {
        if t.shape.channels != 2 {
            return Err(Error::Shape(format!(
                "motion tensor needs 2 channels, got {}",
                t.shape.channels
            )));
        }
        let n = t.shape.plane_len();
        let vectors = (0..n)
            .map(|i| MotionVector::new(t.data[i], t.data[n + i]))
            .collect();
        Ok(MotionField {
            rows: t.shape.height,
            cols: t.shape.width,
            cell_size,
            vectors,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameType {
    I,
    P,
    /// Conditional-I: intra-coded input, entropy model conditioned on the
    /// aligned reference.
    CI,
}

impl FrameType {
    pub fn code(self) -> u8 {
        match self {
            FrameType::I => 0,
            FrameType::P => 1,
            FrameType::CI => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(FrameType::I),
            1 => Some(FrameType::P),
            2 => Some(FrameType::CI),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FrameType::I => "I",
            FrameType::P => "P",
            FrameType::CI => "cI",
        }
    }
}

impl fmt::Display for FrameType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-frame rate/distortion record.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStat {
    pub frame_index: usize,
    pub frame_type: FrameType,
    pub bits: u64,
    pub psnr: f64,
}

/// Rate/distortion summary of one coded sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RDPoint {
    pub bits_total: u64,
    pub bpp: f64,
    /// Mean of the per-frame PSNR values (identical frames count as the
    /// infinite sentinel, which makes the mean infinite).
    pub psnr: f64,
    pub frames: Vec<FrameStat>,
}

impl RDPoint {
    pub fn from_frames(frames: Vec<FrameStat>, width: usize, height: usize) -> Self {
        let bits_total: u64 = frames.iter().map(|f| f.bits).sum();
        let pixels = (frames.len() * width * height).max(1) as f64;
        let psnr = if frames.is_empty() {
            0.0
        } else {
            frames.iter().map(|f| f.psnr).sum::<f64>() / frames.len() as f64
        };
        RDPoint {
            bits_total,
            bpp: bits_total as f64 / pixels,
            psnr,
            frames,
        }
    }
}

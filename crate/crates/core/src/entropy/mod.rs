//! Discretized-Gaussian entropy coding with probability-based skipping.
//!
//! Every latent element carries a predicted `(mu, sigma)`. Elements whose
//! scale falls below `tau_sigma` are not coded at all: both sides replace them
//! with `mu`, the mode of the predicted density. Because the decision only
//! looks at `sigma`, the decoder rebuilds the same mask from the prior alone.
//!
//! Remaining elements are range coded under the Gaussian's integer-bin masses
//! (see [`SymbolModel`] for the alphabet layout).

pub mod gaussian;
pub mod range_coder;

use crate::error::{Error, Result};
use crate::types::{check_shape, Shape};

pub use gaussian::{bin_mass, mode_and_mass, phi, sigma_for_mass, symbol_cost, PROB_FLOOR};
pub use range_coder::{RangeDecoder, RangeEncoder};

/// Symbols are coded within `round(mu) ± WINDOW`; values beyond are saturated.
pub const WINDOW: i32 = 255;
/// Total of every quantized CDF.
pub const CDF_TOTAL: u32 = 1 << 16;

/// Predicted per-element Gaussian parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    pub shape: Shape,
    pub mu: Vec<f32>,
    pub sigma: Vec<f32>,
}

impl GaussianModel {
    pub fn new(shape: Shape, mu: Vec<f32>, sigma: Vec<f32>) -> Result<Self> {
        if mu.len() != shape.len() || sigma.len() != shape.len() {
            return Err(Error::Shape(format!(
                "model {shape}: {} means, {} scales",
                mu.len(),
                sigma.len()
            )));
        }
        if mu.iter().any(|m| !m.is_finite()) || sigma.iter().any(|s| *s <= 0.0 || !s.is_finite()) {
            return Err(Error::Shape(
                "model parameters must be finite, sigma > 0".into(),
            ));
        }
        Ok(GaussianModel { shape, mu, sigma })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

/// Quantized latent symbols. Coded entries are integers; skipped entries hold
/// the model mean they were replaced with.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGrid {
    pub shape: Shape,
    pub values: Vec<f32>,
}

impl LatentGrid {
    pub fn new(shape: Shape, values: Vec<f32>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::Shape(format!(
                "latents {shape}: got {} values",
                values.len()
            )));
        }
        Ok(LatentGrid { shape, values })
    }
}

/// `true` where an element was skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkipMask {
    pub shape: Shape,
    pub skipped: Vec<bool>,
}

impl SkipMask {
    /// The skip rule: an element is skipped iff `sigma < tau_sigma`.
    pub fn from_model(model: &GaussianModel, tau_sigma: f32) -> Self {
        SkipMask {
            shape: model.shape,
            skipped: model.sigma.iter().map(|&s| s < tau_sigma).collect(),
        }
    }

    pub fn none(shape: Shape) -> Self {
        SkipMask {
            shape,
            skipped: vec![false; shape.len()],
        }
    }

    pub fn count(&self) -> usize {
        self.skipped.iter().filter(|&&s| s).count()
    }

    /// Skipped elements / total elements.
    pub fn ratio(&self) -> f64 {
        if self.skipped.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.skipped.len() as f64
        }
    }
}

/// Round half away from zero.
#[inline]
pub fn round_half_away(v: f32) -> f32 {
    // + 0.0 turns -0.0 into +0.0
    v.round() + 0.0
}

/// Quantizes `values`, replacing low-scale elements by their mean.
pub fn apply_skip(
    values: &[f32],
    model: &GaussianModel,
    tau_sigma: f32,
) -> Result<(LatentGrid, SkipMask)> {
    if values.len() != model.len() {
        return Err(Error::Shape(format!(
            "{} values against a model of {} elements",
            values.len(),
            model.len()
        )));
    }
    let mask = SkipMask::from_model(model, tau_sigma);
    let out = values
        .iter()
        .zip(&model.mu)
        .zip(&mask.skipped)
        .map(|((&v, &mu), &skip)| if skip { mu } else { round_half_away(v) })
        .collect();
    Ok((
        LatentGrid {
            shape: model.shape,
            values: out,
        },
        mask,
    ))
}

/// Center of the coding window for an element with mean `mu`.
#[inline]
fn window_center(mu: f32) -> i32 {
    round_half_away(mu) as i32
}

/// Saturates coded elements into their `round(mu) ± WINDOW` support so that
/// the encoder-side grid equals what the decoder will reconstruct.
pub fn clamp_to_window(latents: &mut LatentGrid, model: &GaussianModel, mask: &SkipMask) {
    for ((v, &mu), &skip) in latents.values.iter_mut().zip(&model.mu).zip(&mask.skipped) {
        if !skip {
            let c = window_center(mu);
            *v = v.clamp((c - WINDOW) as f32, (c + WINDOW) as f32);
        }
    }
}

/// Quantized CDF of one element.
///
/// The alphabet is a core of `2w + 1` integers centred on `round(mu)`, with
/// `w = min(255, ceil(6 sigma) + 1)`, plus an escape symbol when `w < 255`.
/// An escaped value is followed by a uniform code over the remaining part of
/// the `± 255` window. Cumulative counts are `floor(P * (T - M)) + index`,
/// which gives every symbol a count of at least one while keeping the total
/// at `T = 2^16`.
#[derive(Debug, Clone, Copy)]
pub struct SymbolModel {
    mu: f64,
    sigma: f64,
    center: i32,
    core: i32,
    escape: bool,
    base: f64,
    norm: f64,
}

impl SymbolModel {
    pub fn new(mu: f32, sigma: f32) -> Self {
        let center = window_center(mu);
        let core = ((6.0 * sigma as f64).ceil() as i64 + 1).min(WINDOW as i64) as i32;
        let escape = core < WINDOW;
        let (mu, sigma) = (mu as f64, sigma as f64);
        let mut m = SymbolModel {
            mu,
            sigma,
            center,
            core,
            escape,
            base: 0.0,
            norm: 1.0,
        };
        m.base = phi(m.boundary(0));
        if !escape {
            m.norm = phi(m.boundary(2 * core + 1)) - m.base;
        }
        m
    }

    /// Number of symbols in the alphabet.
    #[inline]
    fn symbols(&self) -> u32 {
        (2 * self.core + 1) as u32 + self.escape as u32
    }

    /// Lower bin edge of core symbol `idx`, standardized.
    #[inline]
    fn boundary(&self, idx: i32) -> f64 {
        ((self.center - self.core + idx) as f64 - 0.5 - self.mu) / self.sigma
    }

    #[inline]
    fn cum(&self, idx: u32) -> u32 {
        let m = self.symbols();
        if idx == 0 {
            return 0;
        }
        if idx >= m {
            return CDF_TOTAL;
        }
        let p = ((phi(self.boundary(idx as i32)) - self.base) / self.norm).clamp(0.0, 1.0);
        (p * (CDF_TOTAL - m) as f64).floor() as u32 + idx
    }

    /// Entries of the uniform escape code.
    #[inline]
    fn escape_span(&self) -> u32 {
        2 * (WINDOW - self.core) as u32
    }

    fn encode(&self, enc: &mut RangeEncoder, value: i32) -> Result<()> {
        let d = value - self.center;
        if d.abs() > WINDOW {
            return Err(Error::Entropy(format!(
                "symbol {value} outside window around {}",
                self.center
            )));
        }
        if d.abs() <= self.core {
            let idx = (d + self.core) as u32;
            let (lo, hi) = (self.cum(idx), self.cum(idx + 1));
            return enc.encode(lo, hi - lo, CDF_TOTAL);
        }
        let idx = self.symbols() - 1;
        let lo = self.cum(idx);
        enc.encode(lo, CDF_TOTAL - lo, CDF_TOTAL)?;
        let tail = (WINDOW - self.core) as u32;
        let u = if d > 0 {
            (d - self.core - 1) as u32
        } else {
            tail + (-d - self.core - 1) as u32
        };
        enc.encode(u, 1, self.escape_span())
    }

    fn decode(&self, dec: &mut RangeDecoder<'_>) -> Result<i32> {
        let t = dec.target(CDF_TOTAL);
        // Largest idx with cum(idx) <= t.
        let (mut lo, mut hi) = (0u32, self.symbols());
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cum(mid) <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (c0, c1) = (self.cum(lo), self.cum(lo + 1));
        dec.consume(c0, c1 - c0)?;
        if !self.escape || lo < self.symbols() - 1 {
            return Ok(self.center - self.core + lo as i32);
        }
        let span = self.escape_span();
        let u = dec.target(span);
        dec.consume(u, 1)?;
        let tail = (WINDOW - self.core) as u32;
        Ok(if u < tail {
            self.center + self.core + 1 + u as i32
        } else {
            self.center - self.core - 1 - (u - tail) as i32
        })
    }
}

fn check_parts(latents: &LatentGrid, model: &GaussianModel, mask: &SkipMask) -> Result<()> {
    check_shape("latents vs model", model.shape, latents.shape)?;
    check_shape("mask vs model", model.shape, mask.shape)?;
    if latents.values.len() != model.len() || mask.skipped.len() != model.len() {
        return Err(Error::Shape("grid lengths disagree with shape".into()));
    }
    Ok(())
}

/// Range codes every non-skipped element in row-major order.
pub fn encode_latents(
    latents: &LatentGrid,
    model: &GaussianModel,
    mask: &SkipMask,
) -> Result<Vec<u8>> {
    check_parts(latents, model, mask)?;
    let mut enc = RangeEncoder::new();
    for i in 0..latents.values.len() {
        if mask.skipped[i] {
            continue;
        }
        let v = latents.values[i];
        if v.fract() != 0.0 || !v.is_finite() {
            return Err(Error::Entropy(format!(
                "element {i} = {v} is coded but not an integer"
            )));
        }
        let sm = SymbolModel::new(model.mu[i], model.sigma[i]);
        let c = sm.center;
        let v = (v as i64).clamp((c - WINDOW) as i64, (c + WINDOW) as i64) as i32;
        sm.encode(&mut enc, v)?;
    }
    Ok(enc.finish())
}

/// Inverse of [`encode_latents`]; the skip mask is recomputed from the model.
pub fn decode_latents(
    payload: &[u8],
    model: &GaussianModel,
    tau_sigma: f32,
    shape: Shape,
) -> Result<LatentGrid> {
    check_shape("decode shape vs model", model.shape, shape)?;
    let mask = SkipMask::from_model(model, tau_sigma);
    let coded = mask.skipped.len() - mask.count();
    let mut values = model.mu.clone();
    if coded == 0 {
        if !payload.is_empty() {
            return Err(Error::Entropy(format!(
                "{} payload bytes but nothing to decode",
                payload.len()
            )));
        }
        return Ok(LatentGrid { shape, values });
    }
    let mut dec = RangeDecoder::new(payload)?;
    for (i, v) in values.iter_mut().enumerate() {
        if mask.skipped[i] {
            continue;
        }
        let sm = SymbolModel::new(model.mu[i], model.sigma[i]);
        *v = sm.decode(&mut dec)? as f32;
    }
    if dec.trailing_unread() != 0 {
        return Err(Error::Entropy(format!(
            "{} unread bytes after the last symbol",
            dec.trailing_unread()
        )));
    }
    Ok(LatentGrid { shape, values })
}

/// Ideal code length of the non-skipped elements, in bits.
pub fn ideal_rate(latents: &LatentGrid, model: &GaussianModel, mask: &SkipMask) -> f64 {
    latents
        .values
        .iter()
        .zip(&model.mu)
        .zip(&model.sigma)
        .zip(&mask.skipped)
        .filter(|(_, &skip)| !skip)
        .map(|(((&v, &mu), &s), _)| symbol_cost(v as f64, mu as f64, s as f64))
        .sum()
}

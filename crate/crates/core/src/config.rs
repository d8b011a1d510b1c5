//! Codec configuration and its validation.

use crate::error::{Error, Result};

/// Quantization steps per quality index, in 8-bit sample units.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantTable {
    steps: Vec<f32>,
}

impl QuantTable {
    pub const DEFAULT_STEPS: [f32; 6] = [8.0, 12.0, 17.0, 24.0, 34.0, 48.0];

    pub fn new(steps: Vec<f32>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::config("quant_table", "empty"));
        }
        if steps.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
            return Err(Error::config("quant_table", "steps must be positive"));
        }
        if steps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "quant_table",
                "steps must be strictly increasing",
            ));
        }
        Ok(QuantTable { steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn qstep(&self, quality_index: u8) -> Option<f32> {
        self.steps.get(quality_index as usize).copied()
    }

    pub fn steps(&self) -> &[f32] {
        &self.steps
    }
}

impl Default for QuantTable {
    fn default() -> Self {
        QuantTable {
            steps: Self::DEFAULT_STEPS.to_vec(),
        }
    }
}

/// Coefficients of the affine structure/temporal prior.
///
/// `sigma = clamp(beta0 + beta1 * activity + beta2 * |prev|, sigma_min, sigma_max)`,
/// `mu = alpha * prev`. I-frames have no reference, so they use the fixed
/// `intra_sigma_dc` / `intra_sigma_ac` scales instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorCoefficients {
    pub alpha: f32,
    pub beta0: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub sigma_min: f32,
    pub sigma_max: f32,
    pub intra_sigma_dc: f32,
    pub intra_sigma_ac: f32,
}

impl Default for PriorCoefficients {
    fn default() -> Self {
        PriorCoefficients {
            alpha: 0.75,
            beta0: 0.10,
            beta1: 0.05,
            beta2: 0.20,
            sigma_min: 0.01,
            sigma_max: 64.0,
            intra_sigma_dc: 32.0,
            intra_sigma_ac: 4.0,
        }
    }
}

impl PriorCoefficients {
    #[inline]
    pub fn clamp_sigma(&self, s: f32) -> f32 {
        s.clamp(self.sigma_min, self.sigma_max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    pub gop_size: usize,
    pub quality_index: u8,
    /// Skip threshold on the predicted scale; 0 disables skipping.
    pub tau_sigma: f32,
    /// Block-matching search range, pixels.
    pub search_radius: usize,
    /// Local refinement range, feature samples.
    pub refine_radius: usize,
    pub feature_scale: usize,
    /// Motion cell edge, feature samples.
    pub cell_size: usize,
    pub prior: PriorCoefficients,
    pub quant_table: QuantTable,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            gop_size: 20,
            quality_index: 0,
            tau_sigma: 0.16,
            search_radius: 16,
            refine_radius: 2,
            feature_scale: 2,
            cell_size: 4,
            prior: PriorCoefficients::default(),
            quant_table: QuantTable::default(),
        }
    }
}

impl CodecConfig {
    pub fn qstep(&self) -> f32 {
        self.quant_table
            .qstep(self.quality_index)
            .expect("quality index validated")
    }

    /// Quantization step expressed in feature units (samples scaled to [0,1]).
    pub fn feature_step(&self, bitdepth: u8) -> f32 {
        self.qstep() / ((1u32 << bitdepth) - 1) as f32
    }

    /// Largest magnitude a decoded feature-space motion component may take.
    pub fn motion_limit(&self) -> f32 {
        self.search_radius as f32 / self.feature_scale as f32 + self.refine_radius as f32
    }

    /// Pixel block edge used by block matching (one block per motion cell).
    pub fn pixel_block(&self) -> usize {
        self.cell_size * self.feature_scale
    }
}

/// Returns the config unchanged if every invariant holds, otherwise names the
/// first violated field.
pub fn validate_config(cfg: CodecConfig) -> Result<CodecConfig> {
    let p = &cfg.prior;
    if cfg.gop_size < 1 {
        return Err(Error::config("gop_size", "must be >= 1"));
    }
    if cfg.quant_table.is_empty() || cfg.quant_table.steps().windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(
            "quant_table",
            "must be non-empty and strictly increasing",
        ));
    }
    if cfg.quality_index as usize >= cfg.quant_table.len() {
        return Err(Error::config(
            "quality_index",
            format!("must be < {}", cfg.quant_table.len()),
        ));
    }
    if p.sigma_min <= 0.0 || !p.sigma_min.is_finite() {
        return Err(Error::config("sigma_min", "must be > 0"));
    }
    if p.sigma_max <= p.sigma_min || !p.sigma_max.is_finite() {
        return Err(Error::config("sigma_max", "must exceed sigma_min"));
    }
    // 0 is accepted: it is the "skip disabled" setting.
    if !(cfg.tau_sigma >= 0.0 && cfg.tau_sigma < p.sigma_max) {
        return Err(Error::config(
            "tau_sigma",
            format!("must lie in [0, {})", p.sigma_max),
        ));
    }
    if cfg.feature_scale < 1 {
        return Err(Error::config("feature_scale", "must be >= 1"));
    }
    if cfg.cell_size < 1 {
        return Err(Error::config("cell_size", "must be >= 1"));
    }
    for (name, v) in [
        ("alpha", p.alpha),
        ("beta0", p.beta0),
        ("beta1", p.beta1),
        ("beta2", p.beta2),
        ("intra_sigma_dc", p.intra_sigma_dc),
        ("intra_sigma_ac", p.intra_sigma_ac),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::config(name, "must be finite and non-negative"));
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(r: Result<CodecConfig>) -> &'static str {
        match r {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_are_valid() {
        let cfg = validate_config(CodecConfig::default()).unwrap();
        assert_eq!(cfg.gop_size, 20);
        assert_eq!(cfg.tau_sigma, 0.16);
    }

    #[test]
    fn zero_gop_rejected() {
        let cfg = CodecConfig {
            gop_size: 0,
            ..Default::default()
        };
        assert_eq!(field_of(validate_config(cfg)), "gop_size");
    }

    #[test]
    fn negative_tau_rejected() {
        let cfg = CodecConfig {
            tau_sigma: -1.0,
            ..Default::default()
        };
        assert_eq!(field_of(validate_config(cfg)), "tau_sigma");
        let cfg = CodecConfig {
            tau_sigma: 64.0,
            ..Default::default()
        };
        assert_eq!(field_of(validate_config(cfg)), "tau_sigma");
    }

    #[test]
    fn quality_out_of_table() {
        let cfg = CodecConfig {
            quality_index: 6,
            ..Default::default()
        };
        assert_eq!(field_of(validate_config(cfg)), "quality_index");
    }

    #[test]
    fn sigma_min_must_be_positive() {
        let mut cfg = CodecConfig::default();
        cfg.prior.sigma_min = 0.0;
        assert_eq!(field_of(validate_config(cfg)), "sigma_min");
    }

    #[test]
    fn quant_table_ordering() {
        assert!(QuantTable::new(vec![8.0, 8.0]).is_err());
        assert!(QuantTable::new(vec![-1.0, 2.0]).is_err());
        let t = QuantTable::default();
        assert_eq!(t.qstep(5), Some(48.0));
        assert_eq!(t.qstep(6), None);
    }
}

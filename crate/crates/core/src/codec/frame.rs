//! Per-frame encode and decode pipelines.
//!
//! Encoders and decoders share every reconstruction step; the encoder only
//! adds motion search and analysis of the source. Each prior is computed from
//! state that the decoder holds at that point of the decode order.

use crate::config::CodecConfig;
use crate::entropy::{
    apply_skip, clamp_to_window, decode_latents, encode_latents, ideal_rate, GaussianModel,
    LatentGrid, SkipMask,
};
use crate::error::{Error, Result};
use crate::io::{expected_streams, FrameRecord, Payload, StreamId};
use crate::motion::{align, predict_motion};
use crate::transforms::{
    analysis, extract_features, feature_shape, intra_prior, predict_ci_prior, predict_motion_prior,
    predict_residual_prior, synthesis, synthesis_real, synthesize_frame,
};
use crate::types::{FeatureTensor, Frame, FrameType, MotionField, Shape};

/// Quantization step of motion latents, in feature samples.
pub const MOTION_QSTEP: f32 = 0.125;

/// Picture geometry shared by every frame of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    pub width: usize,
    pub height: usize,
    pub bitdepth: u8,
}

impl Geometry {
    pub fn of(frame: &Frame) -> Self {
        Geometry {
            width: frame.width,
            height: frame.height,
            bitdepth: frame.bitdepth,
        }
    }

    pub fn feature_shape(&self, cfg: &CodecConfig) -> Shape {
        feature_shape(self.width, self.height, cfg.feature_scale)
    }

    pub fn motion_shape(&self, cfg: &CodecConfig) -> Shape {
        let f = self.feature_shape(cfg);
        Shape::new(
            2,
            f.height.div_ceil(cfg.cell_size),
            f.width.div_ceil(cfg.cell_size),
        )
    }
}

/// Decoder-visible state carried between frames.
#[derive(Debug, Clone)]
pub struct CodecState {
    pub recon: Frame,
    /// Features of `recon`.
    pub ref_feat: FeatureTensor,
    pub prev_motion: Option<LatentGrid>,
    pub prev_residual: Option<LatentGrid>,
    pub frame_counter: usize,
}

impl CodecState {
    fn after(recon: Frame, cfg: &CodecConfig, counter: usize) -> Self {
        let ref_feat = extract_features(&recon, cfg.feature_scale);
        CodecState {
            recon,
            ref_feat,
            prev_motion: None,
            prev_residual: None,
            frame_counter: counter,
        }
    }
}

/// What happened to one latent stream inside the encoder.
#[derive(Debug, Clone)]
pub struct StreamTrace {
    pub stream: StreamId,
    /// Latents before quantization and skipping.
    pub values: Vec<f32>,
    pub model: GaussianModel,
    pub skipped: usize,
    pub payload_bytes: usize,
    pub ideal_bits: f64,
}

impl StreamTrace {
    pub fn total(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone)]
pub struct EncodedFrame {
    pub record: FrameRecord,
    pub recon: Frame,
    pub traces: Vec<StreamTrace>,
}

struct CodedStream {
    latents: LatentGrid,
    payload: Vec<u8>,
    trace: StreamTrace,
}

/// Quantize, skip, saturate and entropy code one stream.
fn code_stream(
    stream: StreamId,
    values: &FeatureTensor,
    model: GaussianModel,
    tau_sigma: f32,
) -> Result<CodedStream> {
    let (mut latents, mask) = apply_skip(&values.data, &model, tau_sigma)?;
    clamp_to_window(&mut latents, &model, &mask);
    let payload = encode_latents(&latents, &model, &mask)?;
    let trace = StreamTrace {
        stream,
        values: values.data.clone(),
        skipped: mask.count(),
        payload_bytes: payload.len(),
        ideal_bits: ideal_rate(&latents, &model, &mask),
        model,
    };
    Ok(CodedStream {
        latents,
        payload,
        trace,
    })
}

fn payload(stream: StreamId, bytes: Vec<u8>) -> Payload {
    Payload { stream, bytes }
}

/// Checks the record type and that its streams appear in decode order.
fn check_record(record: &FrameRecord, want: FrameType) -> Result<()> {
    if record.frame_type != want {
        return Err(Error::Bitstream(format!(
            "expected a {want} record, got {}",
            record.frame_type
        )));
    }
    let order: Vec<StreamId> = record.payloads.iter().map(|p| p.stream).collect();
    if order != expected_streams(want) {
        return Err(Error::Bitstream(format!(
            "{want} record streams {:?} out of decode order {:?}",
            order,
            expected_streams(want)
        )));
    }
    Ok(())
}

fn finish_frame(feat: &FeatureTensor, geom: Geometry, index: usize) -> Result<Frame> {
    synthesize_frame(feat, geom.width, geom.height, geom.bitdepth, index)
}

fn check_frame(frame: &Frame, geom: Geometry) -> Result<()> {
    if Geometry::of(frame) != geom {
        return Err(Error::Frame(format!(
            "frame {} is {}x{}@{} but the sequence is {}x{}@{}",
            frame.frame_index,
            frame.width,
            frame.height,
            frame.bitdepth,
            geom.width,
            geom.height,
            geom.bitdepth
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------- I frames

pub fn encode_i(frame: &Frame, cfg: &CodecConfig) -> Result<(EncodedFrame, CodecState)> {
    let geom = Geometry::of(frame);
    let step = cfg.feature_step(geom.bitdepth);
    let feat = extract_features(frame, cfg.feature_scale);
    let y = analysis(&feat, step);
    let model = intra_prior(y.shape, &cfg.prior);
    let coded = code_stream(StreamId::Image, &y, model, cfg.tau_sigma)?;
    let recon = finish_frame(
        &synthesis(&coded.latents, step, cfg.feature_scale),
        geom,
        frame.frame_index,
    )?;
    let record = FrameRecord {
        frame_type: FrameType::I,
        payloads: vec![payload(StreamId::Image, coded.payload)],
    };
    let state = CodecState::after(recon.clone(), cfg, frame.frame_index + 1);
    Ok((
        EncodedFrame {
            record,
            recon,
            traces: vec![coded.trace],
        },
        state,
    ))
}

pub fn decode_i(
    record: &FrameRecord,
    geom: Geometry,
    cfg: &CodecConfig,
    frame_index: usize,
) -> Result<(Frame, CodecState)> {
    check_record(record, FrameType::I)?;
    let step = cfg.feature_step(geom.bitdepth);
    let shape = geom.feature_shape(cfg);
    let model = intra_prior(shape, &cfg.prior);
    let y = decode_latents(
        record.payloads[0].bytes.as_slice(),
        &model,
        cfg.tau_sigma,
        shape,
    )?;
    let recon = finish_frame(&synthesis(&y, step, cfg.feature_scale), geom, frame_index)?;
    let state = CodecState::after(recon.clone(), cfg, frame_index + 1);
    Ok((recon, state))
}

// ------------------------------------------------------------------ motion

/// Decoded motion field: latents back to feature-space vectors, clamped to
/// the configured search range.
fn reconstruct_motion(m_hat: &LatentGrid, cfg: &CodecConfig) -> Result<MotionField> {
    let t = synthesis(m_hat, MOTION_QSTEP, 1);
    let limit = cfg.motion_limit();
    let mut field = MotionField::from_tensor(&t, cfg.cell_size)?;
    for v in &mut field.vectors {
        v.dx = v.dx.clamp(-limit, limit);
        v.dy = v.dy.clamp(-limit, limit);
    }
    Ok(field)
}

fn motion_prior(state: &CodecState, geom: Geometry, cfg: &CodecConfig) -> Result<GaussianModel> {
    predict_motion_prior(
        &state.ref_feat,
        state.prev_motion.as_ref(),
        geom.motion_shape(cfg),
        cfg.cell_size,
        cfg.feature_step(geom.bitdepth),
        &cfg.prior,
    )
}

struct EncodedMotion {
    coded: CodedStream,
    decoded: MotionField,
}

fn encode_motion(
    frame: &Frame,
    feat: &FeatureTensor,
    state: &CodecState,
    cfg: &CodecConfig,
) -> Result<EncodedMotion> {
    let geom = Geometry::of(frame);
    let prediction = predict_motion(&state.recon, frame, &state.ref_feat, feat, cfg)?;
    let m = analysis(&prediction.refined.to_tensor(), MOTION_QSTEP);
    let model = motion_prior(state, geom, cfg)?;
    let coded = code_stream(StreamId::Motion, &m, model, cfg.tau_sigma)?;
    let decoded = reconstruct_motion(&coded.latents, cfg)?;
    Ok(EncodedMotion { coded, decoded })
}

fn decode_motion(
    bytes: &[u8],
    state: &CodecState,
    geom: Geometry,
    cfg: &CodecConfig,
) -> Result<(LatentGrid, MotionField)> {
    let model = motion_prior(state, geom, cfg)?;
    let m_hat = decode_latents(bytes, &model, cfg.tau_sigma, model.shape)?;
    let field = reconstruct_motion(&m_hat, cfg)?;
    Ok((m_hat, field))
}

// ---------------------------------------------------------------- P frames

pub fn encode_p(
    frame: &Frame,
    state: &CodecState,
    cfg: &CodecConfig,
) -> Result<(EncodedFrame, CodecState)> {
    let geom = Geometry::of(&state.recon);
    check_frame(frame, geom)?;
    let step = cfg.feature_step(geom.bitdepth);
    let feat = extract_features(frame, cfg.feature_scale);

    let motion = encode_motion(frame, &feat, state, cfg)?;
    // The prediction uses decoded motion, exactly as the decoder will.
    let predicted = align(&state.ref_feat, &motion.decoded);

    let r = analysis(&feat.sub(&predicted)?, step);
    let model = predict_residual_prior(&predicted, state.prev_residual.as_ref(), step, &cfg.prior)?;
    let residual = code_stream(StreamId::Residual, &r, model, cfg.tau_sigma)?;
    let recon_feat = predicted.add(&synthesis(&residual.latents, step, cfg.feature_scale))?;
    let recon = finish_frame(&recon_feat, geom, frame.frame_index)?;

    let mut next = CodecState::after(recon.clone(), cfg, frame.frame_index + 1);
    next.prev_motion = Some(motion.coded.latents);
    next.prev_residual = Some(residual.latents);
    let record = FrameRecord {
        frame_type: FrameType::P,
        payloads: vec![
            payload(StreamId::Motion, motion.coded.payload),
            payload(StreamId::Residual, residual.payload),
        ],
    };
    Ok((
        EncodedFrame {
            record,
            recon,
            traces: vec![motion.coded.trace, residual.trace],
        },
        next,
    ))
}

pub fn decode_p(
    record: &FrameRecord,
    state: &CodecState,
    cfg: &CodecConfig,
    frame_index: usize,
) -> Result<(Frame, CodecState)> {
    check_record(record, FrameType::P)?;
    let geom = Geometry::of(&state.recon);
    let step = cfg.feature_step(geom.bitdepth);

    let (m_hat, field) = decode_motion(&record.payloads[0].bytes, state, geom, cfg)?;
    let predicted = align(&state.ref_feat, &field);

    let model = predict_residual_prior(&predicted, state.prev_residual.as_ref(), step, &cfg.prior)?;
    let r_hat = decode_latents(
        &record.payloads[1].bytes,
        &model,
        cfg.tau_sigma,
        model.shape,
    )?;
    let recon_feat = predicted.add(&synthesis(&r_hat, step, cfg.feature_scale))?;
    let recon = finish_frame(&recon_feat, geom, frame_index)?;

    let mut next = CodecState::after(recon.clone(), cfg, frame_index + 1);
    next.prev_motion = Some(m_hat);
    next.prev_residual = Some(r_hat);
    Ok((recon, next))
}

/// Features and reconstruction of a P frame with quantization and entropy
/// coding bypassed (motion used as predicted, residual passed through the
/// transforms unrounded). Returns `(source features, reconstructed features,
/// reconstructed frame)`.
pub fn p_reconstruction_unquantized(
    frame: &Frame,
    state: &CodecState,
    cfg: &CodecConfig,
) -> Result<(FeatureTensor, FeatureTensor, Frame)> {
    let geom = Geometry::of(&state.recon);
    check_frame(frame, geom)?;
    let step = cfg.feature_step(geom.bitdepth);
    let feat = extract_features(frame, cfg.feature_scale);
    let prediction = predict_motion(&state.recon, frame, &state.ref_feat, &feat, cfg)?;
    let predicted = align(&state.ref_feat, &prediction.refined);
    let r = analysis(&feat.sub(&predicted)?, step);
    let recon_feat = predicted.add(&synthesis_real(&r, step)?)?;
    let recon = finish_frame(&recon_feat, geom, frame.frame_index)?;
    Ok((feat, recon_feat, recon))
}

// --------------------------------------------------------------- cI frames

pub fn encode_ci(
    frame: &Frame,
    state: &CodecState,
    cfg: &CodecConfig,
) -> Result<(EncodedFrame, CodecState)> {
    let geom = Geometry::of(&state.recon);
    check_frame(frame, geom)?;
    let step = cfg.feature_step(geom.bitdepth);
    let feat = extract_features(frame, cfg.feature_scale);

    let motion = encode_motion(frame, &feat, state, cfg)?;
    let aligned = align(&state.ref_feat, &motion.decoded);

    // The reference only conditions the entropy model; the encoder input is
    // the current frame alone.
    let y = analysis(&feat, step);
    let model = predict_ci_prior(&aligned, step, &cfg.prior)?;
    let image = code_stream(StreamId::Image, &y, model, cfg.tau_sigma)?;
    let recon = finish_frame(
        &synthesis(&image.latents, step, cfg.feature_scale),
        geom,
        frame.frame_index,
    )?;

    let next = CodecState::after(recon.clone(), cfg, frame.frame_index + 1);
    let record = FrameRecord {
        frame_type: FrameType::CI,
        payloads: vec![
            payload(StreamId::Motion, motion.coded.payload),
            payload(StreamId::Image, image.payload),
        ],
    };
    Ok((
        EncodedFrame {
            record,
            recon,
            traces: vec![motion.coded.trace, image.trace],
        },
        next,
    ))
}

pub fn decode_ci(
    record: &FrameRecord,
    state: &CodecState,
    cfg: &CodecConfig,
    frame_index: usize,
) -> Result<(Frame, CodecState)> {
    check_record(record, FrameType::CI)?;
    let geom = Geometry::of(&state.recon);
    let step = cfg.feature_step(geom.bitdepth);

    let (_, field) = decode_motion(&record.payloads[0].bytes, state, geom, cfg)?;
    let aligned = align(&state.ref_feat, &field);
    let model = predict_ci_prior(&aligned, step, &cfg.prior)?;
    let y_hat = decode_latents(
        &record.payloads[1].bytes,
        &model,
        cfg.tau_sigma,
        model.shape,
    )?;
    let recon = finish_frame(
        &synthesis(&y_hat, step, cfg.feature_scale),
        geom,
        frame_index,
    )?;
    let state = CodecState::after(recon.clone(), cfg, frame_index + 1);
    Ok((recon, state))
}

/// Skip mask the decoder derives for a stream model; exposed for analysis.
pub fn decoder_mask(model: &GaussianModel, cfg: &CodecConfig) -> SkipMask {
    SkipMask::from_model(model, cfg.tau_sigma)
}

//! Frame pipelines and sequence-level encode/decode.

mod frame;
mod schedule;

pub use frame::{
    decode_ci, decode_i, decode_p, decoder_mask, encode_ci, encode_i, encode_p,
    p_reconstruction_unquantized, CodecState, EncodedFrame, Geometry, StreamTrace, MOTION_QSTEP,
};
pub use schedule::{schedule, Schedule};

use crate::config::{validate_config, CodecConfig};
use crate::error::{Error, Result};
use crate::eval::psnr;
use crate::io::{read_container, write_container, FrameRecord, SequenceHeader};
use crate::types::{Frame, FrameStat, FrameType, RDPoint};

/// Encodes frames one at a time in display order.
#[derive(Debug)]
pub struct SequenceEncoder {
    cfg: CodecConfig,
    schedule: Schedule,
    state: Option<CodecState>,
    next_index: usize,
}

impl SequenceEncoder {
    pub fn new(cfg: CodecConfig, schedule: Schedule) -> Result<Self> {
        Ok(SequenceEncoder {
            cfg: validate_config(cfg)?,
            schedule,
            state: None,
            next_index: 0,
        })
    }

    pub fn config(&self) -> &CodecConfig {
        &self.cfg
    }

    /// Type the next pushed frame will be coded as.
    pub fn next_type(&self) -> FrameType {
        self.schedule.frame_type(self.next_index, self.cfg.gop_size)
    }

    pub fn push(&mut self, frame: &Frame) -> Result<EncodedFrame> {
        let mut frame = frame.clone();
        frame.frame_index = self.next_index;
        let (encoded, state) = match (self.next_type(), &self.state) {
            (FrameType::I, _) => encode_i(&frame, &self.cfg)?,
            (FrameType::P, Some(s)) => encode_p(&frame, s, &self.cfg)?,
            (FrameType::CI, Some(s)) => encode_ci(&frame, s, &self.cfg)?,
            (t, None) => {
                return Err(Error::Bitstream(format!(
                    "missing reference for {t} frame {}",
                    self.next_index
                )))
            }
        };
        self.state = Some(state);
        self.next_index += 1;
        Ok(encoded)
    }
}

/// Decodes frame records in order.
#[derive(Debug)]
pub struct SequenceDecoder {
    cfg: CodecConfig,
    geom: Geometry,
    state: Option<CodecState>,
    next_index: usize,
}

impl SequenceDecoder {
    pub fn new(cfg: CodecConfig, geom: Geometry) -> Result<Self> {
        Ok(SequenceDecoder {
            cfg: validate_config(cfg)?,
            geom,
            state: None,
            next_index: 0,
        })
    }

    pub fn push(&mut self, record: &FrameRecord) -> Result<Frame> {
        let idx = self.next_index;
        let (frame, state) = match (record.frame_type, &self.state) {
            (FrameType::I, _) => decode_i(record, self.geom, &self.cfg, idx)?,
            (FrameType::P, Some(s)) => decode_p(record, s, &self.cfg, idx)?,
            (FrameType::CI, Some(s)) => decode_ci(record, s, &self.cfg, idx)?,
            (t, None) => {
                return Err(Error::Bitstream(format!(
                    "missing reference for {t} frame {idx}"
                )))
            }
        };
        self.state = Some(state);
        self.next_index += 1;
        Ok(frame)
    }
}

/// Everything the encoder produced for a sequence.
#[derive(Debug, Clone)]
pub struct EncodedSequence {
    pub bytes: Vec<u8>,
    pub recons: Vec<Frame>,
    pub records: Vec<FrameRecord>,
    pub rd: RDPoint,
    /// Stream traces per frame.
    pub traces: Vec<Vec<StreamTrace>>,
}

fn check_input(frames: &[Frame], cfg: &CodecConfig) -> Result<()> {
    let Some(first) = frames.first() else {
        return Ok(());
    };
    if first.bitdepth != 8 {
        return Err(Error::Frame(format!(
            "only 8-bit input is supported, got {}",
            first.bitdepth
        )));
    }
    if first.width > u16::MAX as usize || first.height > u16::MAX as usize {
        return Err(Error::Frame(format!(
            "{}x{} does not fit the container",
            first.width, first.height
        )));
    }
    if let Some(bad) = frames
        .iter()
        .find(|f| !f.same_geometry(first) || f.bitdepth != 8)
    {
        return Err(Error::Frame(format!(
            "frame {} is {}x{}, expected {}x{}",
            bad.frame_index, bad.width, bad.height, first.width, first.height
        )));
    }
    if cfg.gop_size > u8::MAX as usize {
        return Err(Error::config(
            "gop_size",
            "must be <= 255 to fit the container",
        ));
    }
    if frames.len() > u32::MAX as usize {
        return Err(Error::Frame("too many frames".into()));
    }
    Ok(())
}

pub fn encode_sequence(frames: &[Frame], cfg: &CodecConfig) -> Result<Vec<u8>> {
    Ok(encode_sequence_with(frames, cfg, Schedule::Full)?.bytes)
}

pub fn encode_sequence_with(
    frames: &[Frame],
    cfg: &CodecConfig,
    schedule: Schedule,
) -> Result<EncodedSequence> {
    let cfg = validate_config(cfg.clone())?;
    check_input(frames, &cfg)?;
    let (width, height) = frames.first().map_or((0, 0), |f| (f.width, f.height));
    if frames.is_empty() {
        return Err(Error::Frame("no frames to encode".into()));
    }

    let mut enc = SequenceEncoder::new(cfg.clone(), schedule)?;
    let mut records = Vec::with_capacity(frames.len());
    let mut recons = Vec::with_capacity(frames.len());
    let mut traces = Vec::with_capacity(frames.len());
    let mut stats = Vec::with_capacity(frames.len());
    for (i, f) in frames.iter().enumerate() {
        let out = enc.push(f)?;
        stats.push(FrameStat {
            frame_index: i,
            frame_type: out.record.frame_type,
            bits: out.record.bits(),
            psnr: psnr(f, &out.recon)?,
        });
        records.push(out.record);
        recons.push(out.recon);
        traces.push(out.traces);
    }
    let header = SequenceHeader {
        width: width as u16,
        height: height as u16,
        bitdepth: 8,
        gop_size: cfg.gop_size as u8,
        quality_index: cfg.quality_index,
        tau_sigma: cfg.tau_sigma,
        frame_count: frames.len() as u32,
    };
    let bytes = write_container(&header, &records)?;
    Ok(EncodedSequence {
        bytes,
        recons,
        records,
        rd: RDPoint::from_frames(stats, width, height),
        traces,
    })
}

/// Decodes a container using the default values for parameters the header
/// does not carry.
pub fn decode_sequence(bytes: &[u8]) -> Result<Vec<Frame>> {
    decode_sequence_with(bytes, &CodecConfig::default())
}

/// Decodes a container. Header fields override `base`; everything else
/// (priors, search ranges, quantization table) is taken from `base` and must
/// match the encoder.
pub fn decode_sequence_with(bytes: &[u8], base: &CodecConfig) -> Result<Vec<Frame>> {
    let (header, records) = read_container(bytes)?;
    if header.bitdepth != 8 {
        return Err(Error::Container(format!(
            "unsupported bit depth {}",
            header.bitdepth
        )));
    }
    let cfg = CodecConfig {
        gop_size: header.gop_size as usize,
        quality_index: header.quality_index,
        tau_sigma: header.tau_sigma,
        ..base.clone()
    };
    let cfg = validate_config(cfg).map_err(|e| Error::Container(format!("header: {e}")))?;
    let geom = Geometry {
        width: header.width as usize,
        height: header.height as usize,
        bitdepth: header.bitdepth,
    };
    let mut dec = SequenceDecoder::new(cfg, geom)?;
    records.iter().map(|r| dec.push(r)).collect()
}

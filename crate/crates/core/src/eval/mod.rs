//! Metrics, BD-rate and the drift / skip / RD analyzers.
//!
//! CSV schemas (header line included in every report):
//!
//! ```text
//! drift: frame_index,frame_type,bits,psnr
//! skip:  quality,stream,skip_ratio,time_with_skip_us,time_without_skip_us
//! rd:    quality,qstep,bits,bpp,psnr,ms_ssim
//! ```
//!
//! `ms_ssim` is reserved and always empty. Infinite PSNR is written as `inf`.

mod bd;

pub use bd::bd_rate;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::codec::{encode_sequence_with, Schedule, StreamTrace};
use crate::config::{validate_config, CodecConfig};
use crate::entropy::{apply_skip, clamp_to_window, decode_latents, encode_latents};
use crate::error::{Error, Result};
use crate::io::StreamId;
use crate::par::{with_thread_cap, Exec};
use crate::types::{Frame, FrameType, RDPoint};

pub const DRIFT_CSV_HEADER: &str = "frame_index,frame_type,bits,psnr";
pub const SKIP_CSV_HEADER: &str =
    "quality,stream,skip_ratio,time_with_skip_us,time_without_skip_us";
pub const RD_CSV_HEADER: &str = "quality,qstep,bits,bpp,psnr,ms_ssim";

/// Environment variable capping analyzer worker threads.
pub const THREADS_ENV: &str = "CIVC_THREADS";

/// Peak signal-to-noise ratio in dB; `f64::INFINITY` for identical frames.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    if !a.same_geometry(b) || a.bitdepth != b.bitdepth {
        return Err(Error::Eval(format!(
            "psnr of {}x{}@{} against {}x{}@{}",
            a.width, a.height, a.bitdepth, b.width, b.height, b.bitdepth
        )));
    }
    let sse: f64 = a
        .plane
        .iter()
        .zip(&b.plane)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse / a.plane.len() as f64;
    let max = a.max_value() as f64;
    Ok(10.0 * (max * max / mse).log10())
}

fn fmt_psnr(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p:.4}")
    }
}

/// Worker cap from `CIVC_THREADS`, if set to a positive integer.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

// ------------------------------------------------------------------- drift

#[derive(Debug, Clone, PartialEq)]
pub struct DriftRow {
    pub frame_index: usize,
    pub frame_type: FrameType,
    pub bits: u64,
    pub psnr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub schedule: Schedule,
    pub rows: Vec<DriftRow>,
}

impl DriftReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(DRIFT_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                r.frame_index,
                r.frame_type,
                r.bits,
                fmt_psnr(r.psnr)
            );
        }
        s
    }
}

/// Per-frame rate and quality of `frames` coded under `schedule`.
pub fn analyze_drift(
    frames: &[Frame],
    cfg: &CodecConfig,
    schedule: Schedule,
) -> Result<DriftReport> {
    let cfg = validate_config(cfg.clone())?;
    if frames.len() < 2 * cfg.gop_size {
        return Err(Error::Eval(format!(
            "drift analysis needs at least {} frames, got {}",
            2 * cfg.gop_size,
            frames.len()
        )));
    }
    let enc = encode_sequence_with(frames, &cfg, schedule)?;
    let rows = enc
        .rd
        .frames
        .iter()
        .map(|f| DriftRow {
            frame_index: f.frame_index,
            frame_type: f.frame_type,
            bits: f.bits,
            psnr: f.psnr,
        })
        .collect();
    Ok(DriftReport { schedule, rows })
}

// -------------------------------------------------------------------- skip

#[derive(Debug, Clone, PartialEq)]
pub struct SkipRow {
    pub quality: u8,
    pub stream: StreamId,
    pub skip_ratio: f64,
    pub time_with_skip: Duration,
    pub time_without_skip: Duration,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SkipReport {
    pub rows: Vec<SkipRow>,
}

impl SkipReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(SKIP_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.6},{},{}",
                r.quality,
                r.stream.label(),
                r.skip_ratio,
                r.time_with_skip.as_micros(),
                r.time_without_skip.as_micros()
            );
        }
        s
    }

    pub fn get(&self, quality: u8, stream: StreamId) -> Option<&SkipRow> {
        self.rows
            .iter()
            .find(|r| r.quality == quality && r.stream == stream)
    }
}

/// Wall-clock time of entropy encode + decode for every traced grid, with
/// the given threshold. Median of three runs.
pub fn entropy_time(traces: &[&StreamTrace], tau_sigma: f32) -> Result<Duration> {
    let mut prepared = Vec::with_capacity(traces.len());
    for t in traces {
        let (mut lat, mask) = apply_skip(&t.values, &t.model, tau_sigma)?;
        clamp_to_window(&mut lat, &t.model, &mask);
        prepared.push((lat, mask, &t.model));
    }
    let mut runs = [Duration::ZERO; 3];
    for run in &mut runs {
        let start = Instant::now();
        for (lat, mask, model) in &prepared {
            let bytes = encode_latents(lat, model, mask)?;
            let back = decode_latents(&bytes, model, tau_sigma, model.shape)?;
            std::hint::black_box(back);
        }
        *run = start.elapsed();
    }
    runs.sort();
    Ok(runs[1])
}

/// Skip density and entropy-coding time per quality point and stream.
///
/// Each quality point is encoded once; the recorded latents are then coded
/// again with skip forced off to time the difference.
pub fn analyze_skip(frames: &[Frame], cfg: &CodecConfig, qualities: &[u8]) -> Result<SkipReport> {
    let cfg = validate_config(cfg.clone())?;
    let mut rows = Vec::new();
    for &q in qualities {
        let qcfg = validate_config(CodecConfig {
            quality_index: q,
            ..cfg.clone()
        })?;
        let enc = encode_sequence_with(frames, &qcfg, Schedule::Full)?;
        let all: Vec<&StreamTrace> = enc.traces.iter().flatten().collect();
        for stream in [StreamId::Motion, StreamId::Residual, StreamId::Image] {
            let traces: Vec<&StreamTrace> =
                all.iter().copied().filter(|t| t.stream == stream).collect();
            if traces.is_empty() {
                continue;
            }
            let total: usize = traces.iter().map(|t| t.total()).sum();
            let skipped: usize = traces.iter().map(|t| t.skipped).sum();
            // timing runs on one thread
            let (with, without) = with_thread_cap(Some(1), || -> Result<_> {
                Ok((
                    entropy_time(&traces, qcfg.tau_sigma)?,
                    entropy_time(&traces, 0.0)?,
                ))
            })?;
            rows.push(SkipRow {
                quality: q,
                stream,
                skip_ratio: if total == 0 {
                    0.0
                } else {
                    skipped as f64 / total as f64
                },
                time_with_skip: with,
                time_without_skip: without,
            });
        }
    }
    Ok(SkipReport { rows })
}

// ---------------------------------------------------------------------- rd

#[derive(Debug, Clone, PartialEq)]
pub struct RdRow {
    pub quality: u8,
    pub qstep: f32,
    pub point: RDPoint,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RdReport {
    pub rows: Vec<RdRow>,
}

impl RdReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(RD_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{:.6},{},",
                r.quality,
                r.qstep,
                r.point.bits_total,
                r.point.bpp,
                fmt_psnr(r.point.psnr)
            );
        }
        s
    }

    /// `(bpp, psnr)` pairs for [`bd_rate`].
    pub fn curve(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .map(|r| (r.point.bpp, r.point.psnr))
            .collect()
    }
}

/// Encodes the sequence at each quality index. Quality points run in
/// parallel, capped by `CIVC_THREADS`.
pub fn analyze_rd(
    frames: &[Frame],
    cfg: &CodecConfig,
    qualities: &[u8],
    schedule: Schedule,
) -> Result<RdReport> {
    let cfg = validate_config(cfg.clone())?;
    let points = with_thread_cap(thread_cap_from_env(), || {
        Exec::default().map_range(qualities.len(), |i| -> Result<RdRow> {
            let qcfg = validate_config(CodecConfig {
                quality_index: qualities[i],
                ..cfg.clone()
            })?;
            let enc = encode_sequence_with(frames, &qcfg, schedule)?;
            Ok(RdRow {
                quality: qualities[i],
                qstep: qcfg.qstep(),
                point: enc.rd,
            })
        })
    });
    Ok(RdReport {
        rows: points.into_iter().collect::<Result<_>>()?,
    })
}

//! `.civ` container.
//!
//! ```text
//! header (20 bytes, little-endian)
//!   magic        4  "CIV1"
//!   version      u8 = 1
//!   width        u16
//!   height       u16
//!   bitdepth     u8
//!   gop_size     u8
//!   quality      u8
//!   tau_sigma    f32
//!   frame_count  u32
//! frame record (repeated frame_count times)
//!   frame_type   u8   0 = I, 1 = P, 2 = cI
//!   payloads     u8
//!   payload (repeated)
//!     stream_id  u8   0 = image, 1 = motion, 2 = residual
//!     length     u32
//!     bytes      [length]
//! ```
//!
//! I records carry `[image]`, P records `[motion, residual]`, cI records
//! `[motion, image]`. The container checks the stream set; the decoder
//! additionally insists on motion first.

use crate::error::{Error, Result};
use crate::types::FrameType;

pub const MAGIC: [u8; 4] = *b"CIV1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 2 + 2 + 1 + 1 + 1 + 4 + 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceHeader {
    pub width: u16,
    pub height: u16,
    pub bitdepth: u8,
    pub gop_size: u8,
    pub quality_index: u8,
    pub tau_sigma: f32,
    pub frame_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StreamId {
    Image = 0,
    Motion = 1,
    Residual = 2,
}

impl StreamId {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(StreamId::Image),
            1 => Some(StreamId::Motion),
            2 => Some(StreamId::Residual),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StreamId::Image => "image",
            StreamId::Motion => "motion",
            StreamId::Residual => "residual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payload {
    pub stream: StreamId,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRecord {
    pub frame_type: FrameType,
    pub payloads: Vec<Payload>,
}

impl FrameRecord {
    /// Payload bits including the per-record and per-payload framing.
    pub fn bits(&self) -> u64 {
        let framing = 2 + 5 * self.payloads.len();
        let body: usize = self.payloads.iter().map(|p| p.bytes.len()).sum();
        8 * (framing + body) as u64
    }

    pub fn payload(&self, stream: StreamId) -> Option<&[u8]> {
        self.payloads
            .iter()
            .find(|p| p.stream == stream)
            .map(|p| p.bytes.as_slice())
    }
}

/// Streams a frame type must carry, in decode order.
pub fn expected_streams(t: FrameType) -> &'static [StreamId] {
    match t {
        FrameType::I => &[StreamId::Image],
        FrameType::P => &[StreamId::Motion, StreamId::Residual],
        FrameType::CI => &[StreamId::Motion, StreamId::Image],
    }
}

/// The record carries exactly the streams its type implies (in any order).
pub fn check_stream_set(rec: &FrameRecord) -> Result<()> {
    let mut got: Vec<StreamId> = rec.payloads.iter().map(|p| p.stream).collect();
    got.sort();
    let mut want = expected_streams(rec.frame_type).to_vec();
    want.sort();
    if got != want {
        return Err(Error::Container(format!(
            "{} record carries streams {:?}, expected {:?}",
            rec.frame_type,
            got,
            expected_streams(rec.frame_type)
        )));
    }
    Ok(())
}

pub fn write_container(header: &SequenceHeader, records: &[FrameRecord]) -> Result<Vec<u8>> {
    if header.width == 0 || header.height == 0 {
        return Err(Error::Container("width and height must be nonzero".into()));
    }
    if records.len() != header.frame_count as usize {
        return Err(Error::Container(format!(
            "header announces {} frames, got {} records",
            header.frame_count,
            records.len()
        )));
    }
    let body: usize = records
        .iter()
        .map(|r| 2 + r.payloads.iter().map(|p| 5 + p.bytes.len()).sum::<usize>())
        .sum();
    let mut out = Vec::with_capacity(HEADER_LEN + body);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&header.width.to_le_bytes());
    out.extend_from_slice(&header.height.to_le_bytes());
    out.push(header.bitdepth);
    out.push(header.gop_size);
    out.push(header.quality_index);
    out.extend_from_slice(&header.tau_sigma.to_le_bytes());
    out.extend_from_slice(&header.frame_count.to_le_bytes());
    for rec in records {
        check_stream_set(rec)?;
        out.push(rec.frame_type.code());
        out.push(rec.payloads.len() as u8);
        for p in &rec.payloads {
            let len = u32::try_from(p.bytes.len())
                .map_err(|_| Error::Container("payload exceeds 4 GiB".into()))?;
            out.push(p.stream as u8);
            out.extend_from_slice(&len.to_le_bytes());
            out.extend_from_slice(&p.bytes);
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(Error::Container(format!("truncated while reading {what}")));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn read_container(source: &[u8]) -> Result<(SequenceHeader, Vec<FrameRecord>)> {
    let mut c = Cursor {
        data: source,
        pos: 0,
    };
    if c.take(4, "magic")? != MAGIC {
        return Err(Error::Container("bad magic".into()));
    }
    let version = c.u8("version")?;
    if version != VERSION {
        return Err(Error::Container(format!("unsupported version {version}")));
    }
    let header = SequenceHeader {
        width: c.u16("width")?,
        height: c.u16("height")?,
        bitdepth: c.u8("bitdepth")?,
        gop_size: c.u8("gop_size")?,
        quality_index: c.u8("quality_index")?,
        tau_sigma: f32::from_bits(c.u32("tau_sigma")?),
        frame_count: c.u32("frame_count")?,
    };
    if header.width == 0 || header.height == 0 {
        return Err(Error::Container("width and height must be nonzero".into()));
    }
    let mut records = Vec::with_capacity((header.frame_count as usize).min(1 << 16));
    for _ in 0..header.frame_count {
        let code = c.u8("frame_type")?;
        let frame_type = FrameType::from_code(code)
            .ok_or_else(|| Error::Container(format!("unknown frame_type {code}")))?;
        let n = c.u8("payload_count")?;
        let mut payloads = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let sid = c.u8("stream_id")?;
            let stream = StreamId::from_code(sid)
                .ok_or_else(|| Error::Container(format!("unknown stream_id {sid}")))?;
            let len = c.u32("payload length")? as usize;
            let bytes = c.take(len, "payload")?.to_vec();
            payloads.push(Payload { stream, bytes });
        }
        let rec = FrameRecord {
            frame_type,
            payloads,
        };
        check_stream_set(&rec)?;
        records.push(rec);
    }
    if c.pos != source.len() {
        return Err(Error::Container(format!(
            "{} trailing bytes after the last record",
            source.len() - c.pos
        )));
    }
    Ok((header, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(n: u32) -> SequenceHeader {
        SequenceHeader {
            width: 64,
            height: 48,
            bitdepth: 8,
            gop_size: 20,
            quality_index: 2,
            tau_sigma: 0.16,
            frame_count: n,
        }
    }

    fn payload(stream: StreamId, n: usize) -> Payload {
        Payload {
            stream,
            bytes: (0..n).map(|i| i as u8).collect(),
        }
    }

    fn three_records() -> Vec<FrameRecord> {
        vec![
            FrameRecord {
                frame_type: FrameType::I,
                payloads: vec![payload(StreamId::Image, 10)],
            },
            FrameRecord {
                frame_type: FrameType::P,
                payloads: vec![payload(StreamId::Motion, 0), payload(StreamId::Residual, 7)],
            },
            FrameRecord {
                frame_type: FrameType::CI,
                payloads: vec![payload(StreamId::Motion, 3), payload(StreamId::Image, 5)],
            },
        ]
    }

    #[test]
    fn empty_sequence_is_header_only() {
        let bytes = write_container(&header(0), &[]).unwrap();
        assert_eq!(HEADER_LEN, 20);
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(&bytes[..4], b"CIV1");
    }

    #[test]
    fn three_frames_round_trip() {
        let recs = three_records();
        let bytes = write_container(&header(3), &recs).unwrap();
        let (h, r) = read_container(&bytes).unwrap();
        assert_eq!(h, header(3));
        assert_eq!(r, recs);
    }

    #[test]
    fn header_layout_is_little_endian() {
        let bytes = write_container(&header(0), &[]).unwrap();
        assert_eq!(bytes[4], 1);
        assert_eq!(&bytes[5..7], &64u16.to_le_bytes());
        assert_eq!(&bytes[7..9], &48u16.to_le_bytes());
        assert_eq!(&bytes[12..16], &0.16f32.to_le_bytes());
    }

    #[test]
    fn p_without_residual_rejected() {
        let recs = vec![FrameRecord {
            frame_type: FrameType::P,
            payloads: vec![payload(StreamId::Motion, 2)],
        }];
        assert!(write_container(&header(1), &recs).is_err());
    }

    #[test]
    fn count_mismatch_rejected() {
        assert!(write_container(&header(2), &three_records()[..1]).is_err());
    }

    #[test]
    fn corrupt_magic() {
        let mut bytes = write_container(&header(0), &[]).unwrap();
        bytes[0] = b'X';
        let e = read_container(&bytes).unwrap_err().to_string();
        assert!(e.contains("magic"), "{e}");
    }

    #[test]
    fn wrong_version() {
        let mut bytes = write_container(&header(0), &[]).unwrap();
        bytes[4] = 2;
        let e = read_container(&bytes).unwrap_err().to_string();
        assert!(e.contains("version"), "{e}");
    }

    #[test]
    fn truncation_and_unknown_type() {
        let bytes = write_container(&header(3), &three_records()).unwrap();
        for cut in [3, 10, HEADER_LEN + 1, bytes.len() - 1] {
            assert!(read_container(&bytes[..cut]).is_err(), "cut {cut}");
        }
        let mut bad = bytes.clone();
        bad[HEADER_LEN] = 7;
        let e = read_container(&bad).unwrap_err().to_string();
        assert!(e.contains("frame_type"), "{e}");
    }
}

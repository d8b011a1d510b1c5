//! YUV4MPEG2 input and output (luma only).

use std::cell::Cell;
use std::io::{Read, Write};
use std::rc::Rc;

use y4m::Colorspace;

use crate::error::{Error, Result};
use crate::types::Frame;

fn map_err(e: y4m::Error) -> Error {
    match e {
        y4m::Error::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Y4m("truncated frame payload".into())
        }
        y4m::Error::IoError(io) => Error::Io(io),
        y4m::Error::EOF => Error::Y4m("unexpected end of stream".into()),
        y4m::Error::ParseError(p) => Error::Y4m(format!("malformed header: {p:?}")),
        y4m::Error::UnknownColorspace => Error::Y4m("unknown colorspace".into()),
        y4m::Error::BadInput => Error::Y4m("bad input".into()),
        y4m::Error::OutOfMemory => Error::Y4m("frame exceeds size limit".into()),
    }
}

/// Counts bytes pulled from the inner reader.
struct Counted<R> {
    inner: R,
    n: Rc<Cell<u64>>,
}

impl<R: Read> Read for Counted<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let k = self.inner.read(buf)?;
        self.n.set(self.n.get() + k as u64);
        Ok(k)
    }
}

/// Reads every frame of a Y4M stream. Chroma planes are read and dropped.
/// Only 8-bit streams are accepted. The decoder reads in small pieces, so
/// wrap unbuffered sources in a `BufReader`.
pub fn read_y4m<R: Read>(source: R) -> Result<Vec<Frame>> {
    let count = Rc::new(Cell::new(0u64));
    let counted = Counted {
        inner: source,
        n: Rc::clone(&count),
    };
    let mut dec = y4m::Decoder::new(counted).map_err(map_err)?;
    let (w, h) = (dec.get_width(), dec.get_height());
    if w == 0 || h == 0 {
        return Err(Error::Y4m(format!("invalid geometry {w}x{h}")));
    }
    if dec.get_bit_depth() != 8 {
        return Err(Error::Y4m(format!(
            "unsupported bit depth {}",
            dec.get_bit_depth()
        )));
    }
    let mut frames = Vec::new();
    loop {
        let boundary = count.get();
        match dec.read_frame() {
            Ok(f) => {
                let idx = frames.len();
                frames.push(Frame::from_u8(w, h, idx, f.get_y_plane())?);
            }
            Err(y4m::Error::EOF) if count.get() == boundary => break,
            Err(y4m::Error::EOF) => {
                return Err(Error::Y4m(format!(
                    "truncated frame {} ({} stray bytes)",
                    frames.len(),
                    count.get() - boundary
                )))
            }
            Err(e) => return Err(map_err(e)),
        }
    }
    Ok(frames)
}

/// Writes frames as a `Cmono` Y4M stream at 25 fps.
pub fn write_y4m<W: Write>(sink: W, frames: &[Frame]) -> Result<()> {
    let Some(first) = frames.first() else {
        return Err(Error::Y4m("no frames to write".into()));
    };
    write_y4m_sized(sink, first.width, first.height, frames)
}

/// Like [`write_y4m`] with explicit geometry, so an empty frame list still
/// produces a valid stream header.
pub fn write_y4m_sized<W: Write>(
    sink: W,
    width: usize,
    height: usize,
    frames: &[Frame],
) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Y4m(format!("invalid geometry {width}x{height}")));
    }
    let mut enc = y4m::encode(width, height, y4m::Ratio::new(25, 1))
        .with_colorspace(Colorspace::Cmono)
        .write_header(sink)
        .map_err(map_err)?;
    for f in frames {
        if f.width != width || f.height != height || f.bitdepth != 8 {
            return Err(Error::Y4m("frames must share 8-bit geometry".into()));
        }
        let y = f.to_u8();
        enc.write_frame(&y4m::Frame::new([&y, &[], &[]], None))
            .map_err(map_err)?;
    }
    Ok(())
}

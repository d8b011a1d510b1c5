//! Conditional-I-frame learned-style video codec on deterministic transforms.
//!
//! Frames are coded as I (standalone), P (motion + residual against the
//! previous reconstruction) or cI (standalone image whose entropy model is
//! conditioned on the aligned previous reconstruction). Latents whose
//! predicted scale is below a threshold are not coded at all; the decoder
//! substitutes the predicted mean.
//!
//! ```no_run
//! use civc::{decode_sequence, encode_sequence, read_y4m, CodecConfig};
//!
//! let frames = read_y4m(std::fs::File::open("clip.y4m")?)?;
//! let bytes = encode_sequence(&frames, &CodecConfig::default())?;
//! let decoded = decode_sequence(&bytes)?;
//! assert_eq!(decoded.len(), frames.len());
//! # Ok::<(), civc::Error>(())
//! ```

pub mod codec;
pub mod config;
pub mod entropy;
pub mod error;
pub mod eval;
pub mod io;
pub mod motion;
pub mod par;
pub mod transforms;
pub mod types;

pub use codec::{
    decode_sequence, decode_sequence_with, encode_sequence, encode_sequence_with, schedule,
    EncodedSequence, Schedule,
};
pub use config::{validate_config, CodecConfig, PriorCoefficients, QuantTable};
pub use error::{Error, Result};
pub use eval::{analyze_drift, analyze_rd, analyze_skip, bd_rate, psnr};
pub use io::{read_y4m, write_y4m};
pub use par::Exec;
pub use types::{FeatureTensor, Frame, FrameType, MotionField, MotionVector, RDPoint, Shape};

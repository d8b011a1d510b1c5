use std::fmt;
use std::str::FromStr;

use crate::types::FrameType;

/// Coding mode: I for the first frame, cI at the head of every later GoP,
/// P elsewhere.
pub fn schedule(frame_index: usize, gop_size: usize) -> FrameType {
    Schedule::Full.frame_type(frame_index, gop_size)
}

/// Frame-type pattern of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Schedule {
    /// I, then P with a cI at every GoP head.
    #[default]
    Full,
    /// I, then P only.
    POnly,
    /// I, then cI only.
    CiOnly,
}

impl Schedule {
    pub fn frame_type(self, frame_index: usize, gop_size: usize) -> FrameType {
        if frame_index == 0 {
            return FrameType::I;
        }
        match self {
            Schedule::Full if frame_index.is_multiple_of(gop_size.max(1)) => FrameType::CI,
            Schedule::Full | Schedule::POnly => FrameType::P,
            Schedule::CiOnly => FrameType::CI,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Schedule::Full => "full",
            Schedule::POnly => "p-only",
            Schedule::CiOnly => "ci-only",
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Schedule::Full),
            "p-only" => Ok(Schedule::POnly),
            "ci-only" => Ok(Schedule::CiOnly),
            _ => Err(format!("unknown schedule {s:?} (full|p-only|ci-only)")),
        }
    }
}

//! Raw video input/output and the compressed container.

pub mod container;
pub mod y4m;

pub use self::y4m::{read_y4m, write_y4m, write_y4m_sized};
pub use container::{
    check_stream_set, expected_streams, read_container, write_container, FrameRecord, Payload,
    SequenceHeader, StreamId, HEADER_LEN,
};

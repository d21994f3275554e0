//! Readers and writers: as-graph literals, `.amtree` tree files and `.sdp`
//! graph files. All output is UTF-8 with LF line endings and deterministic
//! byte-for-byte.

pub mod amtree;
pub mod literal;
pub mod sdp;

pub use amtree::{read_am_trees, read_am_trees_str, write_am_trees, write_am_trees_string, AmTreeFileError};
pub use literal::{parse_graph, print_graph, LiteralError};
pub use sdp::{read_sdp, read_sdp_str, write_sdp, write_sdp_string, SdpFileError, SdpOptions};

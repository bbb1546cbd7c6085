//! Static model of heterogeneous quorum systems: processes, per-process
//! quorums, property checkers and the quorum graph.

pub mod error;
pub mod fixtures;
pub mod gen;
pub mod graph;
pub mod ids;
pub mod json;
pub mod props;
pub mod system;

pub use error::{Error, Result};
pub use ids::{ProcessId, ProcessSet, MAX_PROCESSES};
pub use json::{parse_system, write_system, Labels, SystemDoc};
pub use props::{Property, PropertyReport, TentativeMap, Witness};
pub use system::{normalize, Attack, QuorumSet, QuorumSystem, ReconfigOp};

//! Typed feature structures: mutable graphs for computation, frozen
//! structures for results, and their textual encodings.

mod avm;
mod encode;
mod extend;
mod fs;
mod heap;

pub use avm::{parse_avm, print_avm, structure_from_json, structure_to_json};
pub use encode::{decode, encode, EncodedTerm};
pub use extend::{maximal_extensions, Extensions};
pub use fs::{FeatureStructure, FsNode};
pub use heap::{Event, Heap, Mark, NodeId};

use crate::desclang::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TfsError {
    #[error("type `{0}` has no finite most general satisfier (appropriateness loop)")]
    InfiniteSatisfier(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("inconsistent structure at {0}")]
    Inconsistent(String),
    #[error("malformed structure: {0}")]
    Json(String),
}

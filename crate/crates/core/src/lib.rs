//! Typed feature structures with universally quantified principles
//! compiled to subsumption-triggered suspensions.

pub mod desclang;
pub mod signature;
pub mod tfs;
pub mod satisfier;
pub mod compiler;
pub mod engine;

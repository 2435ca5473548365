//! Graph algorithms, decorations, the blow-up map and the uniform samplers.

pub mod graph;
pub mod sampler;

pub use graph::{ChordalGraph, Elimination, MembershipReport};
pub use sampler::{blow_up, deroot, relabel_uniform, BlownUp, Decoration, Deroot, GraphSampler, RecursiveTables, SampleMode};

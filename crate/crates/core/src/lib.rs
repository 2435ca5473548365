//! Exact enumeration and uniform sampling of labelled k-connected chordal
//! graphs with tree-width at most t.

pub mod analytic;
pub mod chordal;
pub mod error;
pub mod gfchain;
pub mod par;
pub mod series;
pub mod trees;

pub use error::{Error, Result};

//! Structural diversity measures over temporal network snapshots.

pub mod analysis;
pub mod connectivity;
pub mod degree;
pub mod error;
pub mod graph;
pub mod growth;
pub mod ingest;
pub mod linkpred;
pub mod spectral;
pub mod trend;

pub use error::{Error, Result};

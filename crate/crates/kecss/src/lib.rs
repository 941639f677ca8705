//! Round-based CONGEST simulator and the distributed greedy approximation for
//! the minimum-cost k-edge-connected spanning subgraph problem.

pub mod augment;
pub mod congest;
pub mod cutinfo;
pub mod error;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod par;
pub mod respect;
pub mod rho;
pub mod sketch;
pub mod tree;

pub use error::{Error, Result};

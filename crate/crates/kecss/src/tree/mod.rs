//! Rooted spanning trees, fragment decompositions, LCA labels, cover values
//! and path aggregation, each with a centralized and a simulated variant.

mod cover;
pub mod dist;
mod fragments;
mod labels;
mod span;

pub use cover::{cover_values, path_aggregate, path_aggregate_naive, CoverValues};
pub use fragments::{default_target, Fragment, FragmentDecomp};
pub use labels::{LabelScheme, LcaLabel};
pub use span::SpanTree;

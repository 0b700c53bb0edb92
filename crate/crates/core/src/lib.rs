//! Semantic novelty curves and narrative-shape analysis.
//!
//! The pipeline for one book is:
//! embeddings → [`novelty::compute_novelty_curve`] → summary statistics →
//! z-normalized [`repr::paa`] → [`repr::sax`] → [`metrics::shape_metrics`] →
//! [`cluster::ClusterModel::assign`]. The [`corpus`] module drives it over a
//! directory of books and exports one row per book.

pub mod cluster;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod novelty;
mod numeric;
pub mod repr;
pub mod shapelet;
pub mod stats;

pub use cluster::{builtin_centroids, Assignment, ClusterModel, Dendrogram};
pub use error::{Error, Result};
pub use metrics::ShapeMetrics;
pub use novelty::{
    compute_novelty_curve, CurveType, EmbeddingSequence, NoveltyCurve, NoveltySummary,
};
pub use repr::{PaaVector, SaxString};

//! Ward-linkage clustering of PAA vectors, nearest-centroid assignment against
//! the published archetypes, and model-selection diagnostics.

mod eval;
mod model;
mod ward;

pub use eval::{adjusted_rand_index, k_selection, silhouette, wcss, KDiagnostics};
pub use model::{
    builtin_centroids, legacy_curve_type, Assignment, ClusterModel, Provenance, ARCHETYPE_NAMES,
    BUILTIN_CENTROIDS,
};
pub use ward::{
    cut_labels, dtw_ward_labels, ward_fit, ward_linkage, ward_linkage_from_dissimilarities,
    Dendrogram, Merge, WardFit, WardOptions,
};

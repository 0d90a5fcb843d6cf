//! Structural and semantic network features.

pub mod clusters;
pub mod features;
pub mod hdbscan;
pub mod metrics;

pub use clusters::{
    cluster_quality, hdbscan_word_clusters, naive_clusters, plurality_label, ClusterQuality,
    ClusterSpace, NaiveClusters, WordClusters,
};
pub use features::{extract_features, FeatureParams, NetworkFeatures, FEATURE_NAMES};
pub use hdbscan::{
    cosine_distance_matrix, hdbscan, hop_distance_matrix, HdbscanParams, HdbscanResult,
};
pub use metrics::{
    average_path_length, clustering_coefficient, er_baseline, erdos_renyi_gnm, local_clustering,
    small_worldness, watts_strogatz, Baseline, SmallWorld,
};

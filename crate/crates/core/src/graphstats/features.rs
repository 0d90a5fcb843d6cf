//! Per-network feature vectors.

use serde::{Deserialize, Serialize};

use super::clusters::{cluster_quality, hdbscan_word_clusters, naive_clusters, ClusterSpace};
use super::hdbscan::HdbscanParams;
use super::metrics::{
    average_path_length, clustering_coefficient, er_baseline, small_worldness, DEFAULT_ER_SAMPLES,
};
use crate::corpus::CategoryNorms;
use crate::learner::MeaningVectors;
use crate::network::SemanticNetwork;
use crate::Result;

/// Names of the numeric features, in [`NetworkFeatures::values`] order.
pub const FEATURE_NAMES: [&str; 14] = [
    "n_vertices",
    "n_edges",
    "sparsity",
    "C",
    "L",
    "gamma",
    "lambda",
    "sigma",
    "weighted_precision",
    "weighted_recall",
    "weighted_fscore",
    "n_hdbscan_clusters",
    "n_naive_clusters",
    "n_singletons",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFeatures {
    pub n_vertices: usize,
    pub n_edges: usize,
    /// Mean degree.
    pub sparsity: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_fscore: f64,
    pub n_hdbscan_clusters: usize,
    pub n_naive_clusters: usize,
    pub n_singletons: usize,
    pub mvt_label: bool,
}

impl NetworkFeatures {
    pub fn values(&self) -> [f64; 14] {
        [
            self.n_vertices as f64,
            self.n_edges as f64,
            self.sparsity,
            self.c,
            self.l,
            self.gamma,
            self.lambda,
            self.sigma,
            self.weighted_precision,
            self.weighted_recall,
            self.weighted_fscore,
            self.n_hdbscan_clusters as f64,
            self.n_naive_clusters as f64,
            self.n_singletons as f64,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureParams {
    pub er_samples: usize,
    pub hdbscan: HdbscanParams,
    pub cluster_space: ClusterSpace,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            er_samples: DEFAULT_ER_SAMPLES,
            hdbscan: HdbscanParams::default(),
            cluster_space: ClusterSpace::Meaning,
        }
    }
}

/// Computes every structural and semantic feature of `net`.
///
/// The cue word counts toward |V|, |E|, C and L but is left out of the
/// clusterings. When HDBSCAN finds no cluster the quality scores are 0.
pub fn extract_features(
    net: &SemanticNetwork,
    vectors: Option<&MeaningVectors>,
    norms: &CategoryNorms,
    mvt_label: bool,
    params: &FeatureParams,
    seed: u64,
) -> Result<NetworkFeatures> {
    let g = net.graph();
    let (n, m) = (g.len(), g.edge_count());
    let c = clustering_coefficient(&g);
    let l = average_path_length(&g)?;
    let baseline = er_baseline(n, m, params.er_samples, seed)?;
    let sw = small_worldness(c, l, &baseline)?;

    let cue = net.meta.cue.as_str();
    let cue_opt = net.contains(cue).then_some(cue);
    let hdb = hdbscan_word_clusters(net, vectors, params.cluster_space, cue_opt, &params.hdbscan)?;
    let quality = if hdb.clusters.is_empty() {
        None
    } else {
        Some(cluster_quality(
            &hdb.clusters,
            norms,
            net.nodes().filter(|w| Some(*w) != cue_opt),
        )?)
    };
    let (n_naive, n_single) = match cue_opt {
        Some(cue) => {
            let nc = naive_clusters(net, cue)?;
            (nc.clusters.len(), nc.singletons.len())
        }
        None => {
            let comps = g.components();
            let singles = comps.iter().filter(|c| c.len() == 1).count();
            (comps.len() - singles, singles)
        }
    };
    Ok(NetworkFeatures {
        n_vertices: n,
        n_edges: m,
        sparsity: if n == 0 {
            0.0
        } else {
            2.0 * m as f64 / n as f64
        },
        c,
        l,
        gamma: sw.gamma,
        lambda: sw.lambda,
        sigma: sw.sigma,
        weighted_precision: quality.map_or(0.0, |q| q.weighted_precision),
        weighted_recall: quality.map_or(0.0, |q| q.weighted_recall),
        weighted_fscore: quality.map_or(0.0, |q| q.weighted_fscore),
        n_hdbscan_clusters: hdb.clusters.len(),
        n_naive_clusters: n_naive,
        n_singletons: n_single,
        mvt_label,
    })
}

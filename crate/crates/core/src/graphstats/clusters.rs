//! Word clusters and their agreement with category norms.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::hdbscan::{cosine_distance_matrix, hdbscan, hop_distance_matrix, HdbscanParams};
use crate::corpus::CategoryNorms;
use crate::learner::MeaningVectors;
use crate::network::SemanticNetwork;
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordClusters {
    /// Clusters ordered by their alphabetically first member.
    pub clusters: Vec<BTreeSet<String>>,
    pub noise: BTreeSet<String>,
}

impl WordClusters {
    fn from_groups(groups: Vec<BTreeSet<String>>, noise: BTreeSet<String>) -> Self {
        let mut clusters = groups;
        clusters.sort();
        Self { clusters, noise }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClusterSpace {
    /// Cosine distance between meaning vectors.
    #[default]
    Meaning,
    /// Hop distance in the network.
    Graph,
}

/// HDBSCAN over the network's words, excluding `exclude` (usually the cue).
pub fn hdbscan_word_clusters(
    net: &SemanticNetwork,
    vectors: Option<&MeaningVectors>,
    space: ClusterSpace,
    exclude: Option<&str>,
    params: &HdbscanParams,
) -> Result<WordClusters> {
    let words: Vec<&str> = net.nodes().filter(|w| Some(*w) != exclude).collect();
    let dist = match space {
        ClusterSpace::Meaning => {
            let vectors = vectors
                .ok_or_else(|| Error::invalid("meaning-space clustering needs meaning vectors"))?;
            let vs = words
                .iter()
                .map(|w| {
                    vectors
                        .get(w)
                        .ok_or_else(|| Error::MissingWords(vec![(*w).to_owned()]))
                })
                .collect::<Result<Vec<_>>>()?;
            cosine_distance_matrix(&vs)?
        }
        ClusterSpace::Graph => {
            let g = net.graph();
            let idx: Vec<usize> = words
                .iter()
                .map(|w| g.index(w).expect("node of net"))
                .collect();
            hop_distance_matrix(&g, &idx)
        }
    };
    let result = hdbscan(&dist, params)?;
    let groups = result
        .clusters()
        .into_iter()
        .map(|c| c.into_iter().map(|i| words[i].to_owned()).collect())
        .collect();
    let noise = result
        .noise()
        .into_iter()
        .map(|i| words[i].to_owned())
        .collect();
    Ok(WordClusters::from_groups(groups, noise))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaiveClusters {
    pub clusters: Vec<BTreeSet<String>>,
    pub singletons: BTreeSet<String>,
}

/// Connected components of the network once the cue is removed. Components of
/// two or more words are clusters; isolated words are singletons.
pub fn naive_clusters(net: &SemanticNetwork, cue: &str) -> Result<NaiveClusters> {
    let g = net.graph();
    let c = g
        .index(cue)
        .ok_or_else(|| Error::not_found("cue word", cue))?;
    let mut clusters = Vec::new();
    let mut singletons = BTreeSet::new();
    for comp in g.components_without(Some(c)) {
        let names: BTreeSet<String> = comp.iter().map(|&i| g.name(i).to_owned()).collect();
        if names.len() == 1 {
            singletons.extend(names);
        } else {
            clusters.push(names);
        }
    }
    clusters.sort();
    Ok(NaiveClusters {
        clusters,
        singletons,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterQuality {
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_fscore: f64,
}

/// Plurality category of `members`; ties go to the lexicographically smallest label.
pub fn plurality_label(members: &BTreeSet<String>, norms: &CategoryNorms) -> Result<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for w in members {
        let cats = norms
            .get(w)
            .ok_or_else(|| Error::not_found("word in norms", w.clone()))?;
        for c in cats {
            *counts.entry(c).or_default() += 1;
        }
    }
    let best = counts
        .iter()
        .fold(None::<(&str, usize)>, |best, (&c, &n)| match best {
            Some((_, m)) if m >= n => best,
            _ => Some((c, n)),
        })
        .ok_or_else(|| Error::invalid("cannot label an empty cluster"))?;
    Ok(best.0.to_owned())
}

/// Size-weighted precision, recall and F-score of `clusters` against `norms`.
/// Recall only counts category members that are among `network_words`.
pub fn cluster_quality<'a, I>(
    clusters: &[BTreeSet<String>],
    norms: &CategoryNorms,
    network_words: I,
) -> Result<ClusterQuality>
where
    I: IntoIterator<Item = &'a str>,
{
    if clusters.is_empty() || clusters.iter().any(BTreeSet::is_empty) {
        return Err(Error::invalid("cluster quality needs non-empty clusters"));
    }
    let network: BTreeSet<&str> = network_words.into_iter().collect();
    let total: usize = clusters.iter().map(BTreeSet::len).sum();
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for c in clusters {
        let label = plurality_label(c, norms)?;
        let hits = c
            .iter()
            .filter(|w| norms.get(w).is_some_and(|cats| cats.contains(&label)))
            .count() as f64;
        let in_network = network
            .iter()
            .filter(|w| norms.get(w).is_some_and(|cats| cats.contains(&label)))
            .count()
            .max(1) as f64;
        let precision = hits / c.len() as f64;
        let recall = (hits / in_network).min(1.0);
        let fscore = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let w = c.len() as f64 / total as f64;
        p += w * precision;
        r += w * recall;
        f += w * fscore;
    }
    Ok(ClusterQuality {
        weighted_precision: p,
        weighted_recall: r,
        weighted_fscore: f,
    })
}

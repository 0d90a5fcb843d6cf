//! Semantic network construction from learned meanings.
//!
//! Batch networks compare every word pair once training is over. Incremental
//! networks are maintained while the learner trains: after each pair only the
//! edges of the words in that pair are touched, and new edges are searched for
//! among a limited sample of candidates drawn from prototype clusters.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::corpus::UtteranceScenePair;
use crate::learner::{LearnedMeanings, LearnerState};
use crate::network::{NetworkMeta, NetworkMode, SemanticNetwork};
use crate::rng::{stage_rng, StageRng, STAGE_INCREMENTAL};
use crate::vector::SparseVec;
use crate::{Error, Result};

pub use crate::vector::cosine;

pub const DEFAULT_RHO: f64 = 0.8;
pub const DEFAULT_RHO_ANIMAL: f64 = 0.4;

/// Exhaustive construction over `vocab` plus the cue word.
pub fn build_batch_network<'a, I>(
    meanings: &LearnedMeanings,
    vocab: I,
    cue: &str,
    rho: f64,
    rho_animal: f64,
) -> Result<SemanticNetwork>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut words: BTreeSet<&str> = vocab.into_iter().collect();
    words.insert(cue);
    let vectors = meanings.vectors(words.iter().copied())?;

    let meta = NetworkMeta {
        mode: NetworkMode::Batch,
        rho,
        rho_animal,
        cue: cue.to_owned(),
    };
    let mut net = SemanticNetwork::new(meta);
    let words: Vec<&str> = words.into_iter().collect();
    for w in &words {
        net.add_node(*w);
    }
    for (i, a) in words.iter().enumerate() {
        let va = vectors.get(a).expect("vector built above");
        for b in &words[i + 1..] {
            let sim = va.cosine(vectors.get(b).expect("vector built above"))?;
            if sim >= net.meta.threshold(a, b) {
                net.set_edge(a, b, sim)?;
            }
        }
    }
    Ok(net)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    /// Concentration parameter of the new-cluster option.
    pub alpha: f64,
    /// Sharpness of the prototype-similarity term.
    pub beta: f64,
    /// Fraction of all `n(n-1)/2` word pairs that may be compared per step.
    pub budget_fraction: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 10.0,
            budget_fraction: 0.08,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub members: BTreeSet<u32>,
    pub prototype: SparseVec,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ClusterState {
    pub clusters: Vec<Cluster>,
    membership: HashMap<u32, usize>,
}

impl ClusterState {
    pub fn cluster_of(&self, word: u32) -> Option<usize> {
        self.membership.get(&word).copied()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Adds `word` to cluster `k`, or to a new cluster when `k == len()`.
    pub fn insert(&mut self, word: u32, k: usize, vectors: &HashMap<u32, SparseVec>) {
        if k == self.clusters.len() {
            self.clusters.push(Cluster {
                members: BTreeSet::new(),
                prototype: SparseVec::default(),
            });
        }
        self.clusters[k].members.insert(word);
        self.membership.insert(word, k);
        self.recompute(k, vectors);
    }

    /// Removes `word` from its cluster, dropping the cluster if it empties.
    pub fn remove(&mut self, word: u32, vectors: &HashMap<u32, SparseVec>) {
        let Some(k) = self.membership.remove(&word) else {
            return;
        };
        self.clusters[k].members.remove(&word);
        if self.clusters[k].members.is_empty() {
            self.clusters.remove(k);
            for idx in self.membership.values_mut() {
                if *idx > k {
                    *idx -= 1;
                }
            }
        } else {
            self.recompute(k, vectors);
        }
    }

    fn recompute(&mut self, k: usize, vectors: &HashMap<u32, SparseVec>) {
        let cluster = &mut self.clusters[k];
        cluster.prototype = SparseVec::mean(cluster.members.iter().map(|w| &vectors[w]));
    }
}

/// Membership probabilities of `vector` for each existing cluster, followed by
/// the new-cluster probability as the last element.
///
/// Existing clusters score `size * exp(beta * cos(vector, prototype))`, the new
/// cluster scores `alpha`; scores are normalised to sum to one.
pub fn assign_cluster_probabilities(
    vector: &SparseVec,
    clusters: &ClusterState,
    params: &ClusterParams,
) -> Vec<f64> {
    let sims: Vec<f64> = clusters
        .clusters
        .iter()
        .map(|c| vector.cosine(&c.prototype).unwrap_or(0.0))
        .collect();
    // log-space with a shared shift so large beta cannot overflow
    let mut logs: Vec<f64> = clusters
        .clusters
        .iter()
        .zip(&sims)
        .map(|(c, s)| (c.size() as f64).ln() + params.beta * s)
        .collect();
    logs.push(if params.alpha > 0.0 {
        params.alpha.ln()
    } else {
        f64::NEG_INFINITY
    });
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        let mut out = vec![0.0; logs.len()];
        *out.last_mut().expect("new-cluster slot") = 1.0;
        return out;
    }
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Splits `budget` across clusters in proportion to `probs`, capped by each
/// cluster's available candidates; unused budget goes to the most probable
/// clusters that still have candidates left.
pub fn allocate_candidates(probs: &[f64], available: &[usize], budget: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = probs
        .iter()
        .zip(available)
        .map(|(&p, &avail)| ((p * budget as f64).round() as usize).min(avail))
        .collect();
    let mut used: usize = counts.iter().sum();
    if used > budget {
        // rounding overshoot: trim from the least probable clusters first
        let mut order: Vec<usize> = (0..probs.len()).collect();
        order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]).then(b.cmp(&a)));
        for k in order {
            while used > budget && counts[k] > 0 {
                counts[k] -= 1;
                used -= 1;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..probs.len()).collect();
        order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
        for k in order {
            if used == budget {
                break;
            }
            let extra = (available[k] - counts[k]).min(budget - used);
            counts[k] += extra;
            used += extra;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BudgetStats {
    pub steps: u64,
    pub total_comparisons: u64,
    pub max_comparisons: usize,
    /// Re-evaluations of existing edges; these are mandatory and not budgeted.
    pub total_reweights: u64,
    /// Steps whose candidate comparison count exceeded the step budget.
    pub violations: u64,
    /// Largest observed comparisons / budget ratio over steps with a non-zero budget.
    pub max_ratio: f64,
}

/// Trains a learner while maintaining a semantic network over `tracked` words.
pub struct IncrementalBuilder {
    learner: LearnerState,
    clusters: ClusterState,
    params: ClusterParams,
    meta: NetworkMeta,
    tracked: Option<HashSet<String>>,
    seen: BTreeSet<u32>,
    vectors: HashMap<u32, SparseVec>,
    adj: HashMap<u32, BTreeMap<u32, f64>>,
    cue_id: Option<u32>,
    rng: StageRng,
    stats: BudgetStats,
    last_step: Vec<usize>,
}

impl IncrementalBuilder {
    /// `tracked = None` puts every word the learner sees into the network.
    pub fn new(
        cue: &str,
        rho: f64,
        rho_animal: f64,
        params: ClusterParams,
        tracked: Option<HashSet<String>>,
        seed: u64,
    ) -> Self {
        Self {
            learner: LearnerState::new(),
            clusters: ClusterState::default(),
            params,
            meta: NetworkMeta {
                mode: NetworkMode::Incremental,
                rho,
                rho_animal,
                cue: cue.to_owned(),
            },
            tracked,
            seen: BTreeSet::new(),
            vectors: HashMap::new(),
            adj: HashMap::new(),
            cue_id: None,
            rng: stage_rng(seed, STAGE_INCREMENTAL, 0),
            stats: BudgetStats::default(),
            last_step: Vec::new(),
        }
    }

    pub fn learner(&self) -> &LearnerState {
        &self.learner
    }

    pub fn clusters(&self) -> &ClusterState {
        &self.clusters
    }

    pub fn stats(&self) -> BudgetStats {
        self.stats
    }

    /// Candidate comparisons made for each updated word during the most recent step.
    pub fn last_step_comparisons(&self) -> &[usize] {
        &self.last_step
    }

    pub fn word_vector(&self, word: &str) -> Option<&SparseVec> {
        self.vectors.get(&self.learner.words().get(word)?)
    }

    fn is_tracked(&self, word: &str) -> bool {
        self.tracked.as_ref().is_none_or(|t| t.contains(word))
    }

    fn threshold(&self, a: u32, b: u32) -> f64 {
        if Some(a) == self.cue_id || Some(b) == self.cue_id {
            self.meta.rho_animal
        } else {
            self.meta.rho
        }
    }

    /// Per-step comparison budget for `n` tracked words.
    pub fn step_budget(&self, n: usize) -> usize {
        let pairs = n * n.saturating_sub(1) / 2;
        (self.params.budget_fraction * pairs as f64 + 1e-9).floor() as usize
    }

    /// Processes one pair: learner update followed by the network update.
    pub fn process_pair(&mut self, pair: &UtteranceScenePair) -> Result<()> {
        let touched = self.learner.process_pair(pair);
        let mut updated = Vec::new();
        for id in touched {
            let name = self.learner.words().name(id).to_owned();
            if !self.is_tracked(&name) || updated.contains(&id) {
                continue;
            }
            if name == self.meta.cue {
                self.cue_id = Some(id);
            }
            self.seen.insert(id);
            self.vectors.insert(id, self.learner.sparse_vector(id));
            updated.push(id);
        }
        self.update_network(&updated)
    }

    pub fn process_corpus<'a, I>(&mut self, pairs: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a UtteranceScenePair>,
    {
        for pair in pairs {
            self.process_pair(pair)?;
        }
        Ok(())
    }

    fn update_network(&mut self, updated: &[u32]) -> Result<()> {
        self.last_step.clear();
        if updated.is_empty() {
            return Ok(());
        }
        let budget = self.step_budget(self.seen.len());
        let mut remaining = budget;
        let mut step_total = 0usize;

        for (i, &u) in updated.iter().enumerate() {
            let share = remaining / (updated.len() - i);
            let (reweights, used) = self.update_word(u, share)?;
            self.stats.total_reweights += reweights as u64;
            remaining = remaining.saturating_sub(used);
            step_total += used;
            self.last_step.push(used);
        }

        self.stats.steps += 1;
        self.stats.total_comparisons += step_total as u64;
        self.stats.max_comparisons = self.stats.max_comparisons.max(step_total);
        if step_total > budget {
            self.stats.violations += 1;
        }
        if budget > 0 {
            self.stats.max_ratio = self.stats.max_ratio.max(step_total as f64 / budget as f64);
        }
        Ok(())
    }

    /// Updates the edges and cluster of one word; returns the number of
    /// reweighted edges and of candidate comparisons.
    fn update_word(&mut self, u: u32, share: usize) -> Result<(usize, usize)> {
        let vec_u = self.vectors[&u].clone();

        // (1) reweight or prune existing edges
        let neighbors: Vec<u32> = self
            .adj
            .get(&u)
            .map(|m| m.keys().copied().collect())
            .unwrap_or_default();
        for v in &neighbors {
            let sim = vec_u.cosine(&self.vectors[v])?;
            if sim >= self.threshold(u, *v) {
                self.link(u, *v, sim);
            } else {
                self.unlink(u, *v);
            }
        }

        // (2) candidates drawn from clusters in proportion to membership probability
        self.clusters.remove(u, &self.vectors);
        let probs = assign_cluster_probabilities(&vec_u, &self.clusters, &self.params);
        let linked: BTreeSet<u32> = self
            .adj
            .get(&u)
            .map(|m| m.keys().copied().collect())
            .unwrap_or_default();
        let pools: Vec<Vec<u32>> = self
            .clusters
            .clusters
            .iter()
            .map(|c| {
                c.members
                    .iter()
                    .copied()
                    .filter(|w| *w != u && !linked.contains(w))
                    .collect()
            })
            .collect();
        let available: Vec<usize> = pools.iter().map(Vec::len).collect();
        let counts = allocate_candidates(&probs[..self.clusters.len()], &available, share);
        let mut comparisons = 0usize;
        for (pool, &n) in pools.iter().zip(&counts) {
            if n == 0 {
                continue;
            }
            let mut picks: Vec<usize> = sample(&mut self.rng, pool.len(), n).into_vec();
            picks.sort_unstable();
            for idx in picks {
                let v = pool[idx];
                let sim = vec_u.cosine(&self.vectors[&v])?;
                comparisons += 1;
                if sim >= self.threshold(u, v) {
                    self.link(u, v, sim);
                }
            }
        }

        // (3) reassign to the most probable cluster
        let best = probs
            .iter()
            .enumerate()
            .fold(0, |best, (k, p)| if *p > probs[best] { k } else { best });
        self.clusters.insert(u, best, &self.vectors);
        Ok((neighbors.len(), comparisons))
    }

    fn link(&mut self, a: u32, b: u32, w: f64) {
        self.adj.entry(a).or_default().insert(b, w);
        self.adj.entry(b).or_default().insert(a, w);
    }

    fn unlink(&mut self, a: u32, b: u32) {
        if let Some(m) = self.adj.get_mut(&a) {
            m.remove(&b);
        }
        if let Some(m) = self.adj.get_mut(&b) {
            m.remove(&a);
        }
    }

    /// Snapshot of the current network over all tracked words seen so far.
    pub fn network(&self) -> SemanticNetwork {
        let mut net = SemanticNetwork::new(self.meta.clone());
        let names = self.learner.words();
        for &id in &self.seen {
            net.add_node(names.name(id));
        }
        for (&a, nbrs) in &self.adj {
            for (&b, &w) in nbrs {
                if a < b {
                    net.set_edge(names.name(a), names.name(b), w)
                        .expect("weights are cosines of distinct words");
                }
            }
        }
        net
    }

    /// Largest deviation between a prototype and the mean of its members' vectors.
    pub fn prototype_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.clusters.clusters {
            let mean = SparseVec::mean(c.members.iter().map(|w| &self.vectors[w]));
            let dim = mean
                .entries()
                .iter()
                .chain(c.prototype.entries())
                .map(|&(i, _)| i as usize + 1)
                .max()
                .unwrap_or(0);
            let (a, b) = (mean.to_dense(dim), c.prototype.to_dense(dim));
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }
}

/// Fraction of `reference` edges absent from `net`.
pub fn missing_edge_fraction(net: &SemanticNetwork, reference: &SemanticNetwork) -> f64 {
    let total = reference.edge_count();
    if total == 0 {
        return 0.0;
    }
    let missing = reference
        .edges()
        .filter(|(a, b, _)| net.weight(a, b).is_none())
        .count();
    missing as f64 / total as f64
}

/// Checks that every requested word has a learned meaning.
pub fn require_words<'a, I>(meanings: &LearnedMeanings, words: I) -> Result<()>
where
    I: IntoIterator<Item = &'a str>,
{
    let missing: Vec<String> = words
        .into_iter()
        .filter(|w| !meanings.contains(w))
        .map(str::to_owned)
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingWords(missing))
    }
}

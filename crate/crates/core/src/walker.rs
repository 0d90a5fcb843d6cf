//! Weighted random walks and first-visit retrieval sequences.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::network::{Graph, SemanticNetwork};
use crate::rng::{derive_seed, rng_from_seed, STAGE_WALKS};
use crate::{Error, Result};

pub const DEFAULT_STEPS: usize = 70;
pub const DEFAULT_WALKS: usize = 300;

/// A first visit. `irt` is the number of steps since the previous first visit,
/// absent for the start word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Retrieval {
    pub word: String,
    pub irt: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkRecord {
    pub seed: u64,
    pub steps: Vec<String>,
    pub retrievals: Vec<Retrieval>,
}

impl WalkRecord {
    pub fn unique_words(&self) -> usize {
        self.retrievals.len()
    }
}

/// First-visit sequence of `steps` with inter-retrieval step counts.
pub fn extract_retrievals<S: AsRef<str>>(steps: &[S]) -> Vec<Retrieval> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut last = 0usize;
    for (i, s) in steps.iter().enumerate() {
        let word = s.as_ref();
        if seen.insert(word) {
            let irt = if out.is_empty() { None } else { Some(i - last) };
            out.push(Retrieval {
                word: word.to_owned(),
                irt,
            });
            last = i;
        }
    }
    out
}

/// Precomputed transition samplers over an immutable network.
pub struct Walker {
    graph: Graph,
    samplers: Vec<Option<WeightedIndex<f64>>>,
}

impl Walker {
    pub fn new(net: &SemanticNetwork) -> Self {
        let graph = net.graph();
        let samplers = (0..graph.len())
            .map(|i| WeightedIndex::new(graph.neighbors(i).iter().map(|&(_, w)| w)).ok())
            .collect();
        Self { graph, samplers }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    fn check_start(&self, start: &str) -> Result<usize> {
        let s = self
            .graph
            .index(start)
            .ok_or_else(|| Error::not_found("node", start))?;
        if self.samplers[s].is_none() {
            return Err(Error::NoNeighbors(start.to_owned()));
        }
        Ok(s)
    }

    /// Walks `steps` transitions from `start`, choosing each neighbor with
    /// probability proportional to the edge weight.
    pub fn walk<R: Rng>(
        &self,
        start: &str,
        steps: usize,
        rng: &mut R,
        seed: u64,
    ) -> Result<WalkRecord> {
        let mut cur = self.check_start(start)?;
        let mut path = Vec::with_capacity(steps + 1);
        path.push(self.graph.name(cur).to_owned());
        for _ in 0..steps {
            let sampler = self.samplers[cur]
                .as_ref()
                .ok_or_else(|| Error::NoNeighbors(self.graph.name(cur).to_owned()))?;
            cur = self.graph.neighbors(cur)[sampler.sample(rng)].0;
            path.push(self.graph.name(cur).to_owned());
        }
        let retrievals = extract_retrievals(&path);
        Ok(WalkRecord {
            seed,
            steps: path,
            retrievals,
        })
    }

    pub fn ensemble(
        &self,
        start: &str,
        steps: usize,
        n_walks: usize,
        master_seed: u64,
    ) -> Result<Vec<WalkRecord>> {
        self.check_start(start)?;
        (0..n_walks)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(master_seed, STAGE_WALKS, i as u64);
                self.walk(start, steps, &mut rng_from_seed(seed), seed)
            })
            .collect()
    }
}

pub fn random_walk<R: Rng>(
    net: &SemanticNetwork,
    start: &str,
    steps: usize,
    rng: &mut R,
) -> Result<WalkRecord> {
    Walker::new(net).walk(start, steps, rng, 0)
}

/// Runs `n_walks` walks; walk `i` uses the stream `derive_seed(master_seed, "walks", i)`.
pub fn run_ensemble(
    net: &SemanticNetwork,
    start: &str,
    steps: usize,
    n_walks: usize,
    master_seed: u64,
) -> Result<Vec<WalkRecord>> {
    Walker::new(net).ensemble(start, steps, n_walks, master_seed)
}

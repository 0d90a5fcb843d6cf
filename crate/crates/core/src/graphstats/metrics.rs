//! Clustering coefficient, path length and random-graph baselines.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::network::Graph;
use crate::rng::{derive_seed, rng_from_seed, STAGE_ER};
use crate::{Error, Result};

pub const DEFAULT_ER_SAMPLES: usize = 20;

/// Average local clustering coefficient; nodes of degree < 2 count as 0.
pub fn clustering_coefficient(g: &Graph) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    let total: f64 = (0..g.len()).map(|i| local_clustering(g, i)).sum();
    total / g.len() as f64
}

pub fn local_clustering(g: &Graph, i: usize) -> f64 {
    let nbrs = g.neighbors(i);
    let k = nbrs.len();
    if k < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (a, &(u, _)) in nbrs.iter().enumerate() {
        for &(v, _) in &nbrs[a + 1..] {
            if g.has_edge(u, v) {
                links += 1;
            }
        }
    }
    links as f64 / (k * (k - 1) / 2) as f64
}

/// Mean hop distance over all pairs of the largest connected component.
///
/// Ties between equally large components go to the one holding the smallest
/// node index.
pub fn average_path_length(g: &Graph) -> Result<f64> {
    if g.edge_count() == 0 {
        return Err(Error::Undefined(
            "average path length of a graph without edges".into(),
        ));
    }
    let comps = g.components();
    let largest = comps
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .expect("graph has edges");
    let sum: usize = largest
        .par_iter()
        .map(|&s| {
            let d = g.bfs_distances(s);
            largest
                .iter()
                .filter(|&&t| t != s)
                .map(|&t| d[t])
                .sum::<usize>()
        })
        .sum();
    let n = largest.len();
    Ok(sum as f64 / (n * (n - 1)) as f64)
}

/// Uniform random graph with exactly `m` edges on `n` nodes.
pub fn erdos_renyi_gnm<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    let pairs = n * n.saturating_sub(1) / 2;
    if m > pairs {
        return Err(Error::invalid(format!("{m} edges do not fit on {n} nodes")));
    }
    let mut edges: Vec<(usize, usize)> = sample(rng, pairs, m)
        .into_iter()
        .map(|k| unrank_pair(k, n))
        .collect();
    edges.sort_unstable();
    Ok(Graph::from_edges(n, &edges))
}

/// The `k`-th pair (i, j), i < j, in row-major order.
fn unrank_pair(mut k: usize, n: usize) -> (usize, usize) {
    let mut i = 0;
    while k >= n - 1 - i {
        k -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + k)
}

/// Ring lattice with `k` nearest neighbours per node (k even), each edge rewired
/// with probability `p` to a uniformly chosen non-neighbour.
pub fn watts_strogatz<R: Rng>(n: usize, k: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !k.is_multiple_of(2) || k >= n {
        return Err(Error::invalid(format!("need even k < n, got k={k}, n={n}")));
    }
    let mut adj = vec![std::collections::BTreeSet::new(); n];
    for i in 0..n {
        for j in 1..=k / 2 {
            let t = (i + j) % n;
            adj[i].insert(t);
            adj[t].insert(i);
        }
    }
    for j in 1..=k / 2 {
        for i in 0..n {
            let t = (i + j) % n;
            if !rng.gen_bool(p) || !adj[i].contains(&t) || adj[i].len() >= n - 1 {
                continue;
            }
            let mut new = rng.gen_range(0..n);
            while new == i || adj[i].contains(&new) {
                new = rng.gen_range(0..n);
            }
            adj[i].remove(&t);
            adj[t].remove(&i);
            adj[i].insert(new);
            adj[new].insert(i);
        }
    }
    let edges: Vec<(usize, usize)> = adj
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
        .collect();
    Ok(Graph::from_edges(n, &edges))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub c_random: f64,
    pub l_random: f64,
    pub samples: usize,
}

/// Means of C and L over `n_samples` G(n, m) graphs. Sample `i` is drawn from
/// the stream `derive_seed(seed, "er", i)`.
pub fn er_baseline(n: usize, m: usize, n_samples: usize, seed: u64) -> Result<Baseline> {
    if n_samples == 0 {
        return Err(Error::invalid("baseline needs at least one sample"));
    }
    let per: Vec<(f64, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let g = erdos_renyi_gnm(
                n,
                m,
                &mut rng_from_seed(derive_seed(seed, STAGE_ER, i as u64)),
            )?;
            Ok((clustering_coefficient(&g), average_path_length(&g)?))
        })
        .collect::<Result<_>>()?;
    let k = per.len() as f64;
    Ok(Baseline {
        c_random: per.iter().map(|x| x.0).sum::<f64>() / k,
        l_random: per.iter().map(|x| x.1).sum::<f64>() / k,
        samples: n_samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallWorld {
    pub gamma: f64,
    pub lambda: f64,
    pub sigma: f64,
}

pub fn small_worldness(c: f64, l: f64, baseline: &Baseline) -> Result<SmallWorld> {
    if baseline.c_random == 0.0 {
        return Err(Error::Undefined(
            "gamma: random baseline has clustering coefficient 0".into(),
        ));
    }
    if baseline.l_random == 0.0 {
        return Err(Error::Undefined(
            "lambda: random baseline has path length 0".into(),
        ));
    }
    let gamma = c / baseline.c_random;
    let lambda = l / baseline.l_random;
    if lambda == 0.0 {
        return Err(Error::Undefined("sigma: path length 0".into()));
    }
    Ok(SmallWorld {
        gamma,
        lambda,
        sigma: gamma / lambda,
    })
}

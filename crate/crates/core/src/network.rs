//! Weighted undirected semantic networks.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkMode {
    Batch,
    Incremental,
}

impl fmt::Display for NetworkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NetworkMode::Batch => "batch",
            NetworkMode::Incremental => "incremental",
        })
    }
}

impl std::str::FromStr for NetworkMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "batch" => Ok(NetworkMode::Batch),
            "incremental" => Ok(NetworkMode::Incremental),
            other => Err(Error::invalid(format!("unknown network mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub mode: NetworkMode,
    pub rho: f64,
    pub rho_animal: f64,
    pub cue: String,
}

impl NetworkMeta {
    /// Edge threshold for a word pair: `rho_animal` for cue-incident pairs, `rho` otherwise.
    pub fn threshold(&self, a: &str, b: &str) -> f64 {
        if a == self.cue || b == self.cue {
            self.rho_animal
        } else {
            self.rho
        }
    }
}

/// Undirected graph over words with cosine edge weights.
///
/// Edge keys are stored with the lexicographically smaller word first, so the
/// JSON output `{meta, nodes, edges: [[a, b, w], ...]}` is canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticNetwork {
    pub meta: NetworkMeta,
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), f64>,
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

impl SemanticNetwork {
    pub fn new(meta: NetworkMeta) -> Self {
        Self {
            meta,
            nodes: BTreeSet::new(),
            edges: BTreeMap::new(),
        }
    }

    pub fn add_node(&mut self, word: impl Into<String>) {
        self.nodes.insert(word.into());
    }

    /// Inserts or reweights an edge, adding missing endpoints.
    pub fn set_edge(&mut self, a: &str, b: &str, weight: f64) -> Result<()> {
        if a == b {
            return Err(Error::invalid(format!("self-loop on {a}")));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::invalid(format!(
                "edge weight {weight} outside [0, 1]"
            )));
        }
        self.add_node(a);
        self.add_node(b);
        self.edges.insert(key(a, b), weight);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: &str, b: &str) -> Option<f64> {
        self.edges.remove(&key(a, b))
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<f64> {
        self.edges.get(&key(a, b)).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.nodes.contains(word)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.edges
            .iter()
            .map(|((a, b), &w)| (a.as_str(), b.as_str(), w))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges that fall below their threshold class.
    pub fn threshold_violations(&self) -> Vec<(String, String, f64)> {
        self.edges()
            .filter(|(a, b, w)| *w < self.meta.threshold(a, b))
            .map(|(a, b, w)| (a.to_owned(), b.to_owned(), w))
            .collect()
    }

    pub fn graph(&self) -> Graph {
        Graph::from_network(self)
    }

    /// Number of nodes reachable from `start`, excluding `start` itself.
    pub fn reachable_count(&self, start: &str) -> usize {
        let g = self.graph();
        match g.index(start) {
            Some(s) => g.reachable_from(s).len() - 1,
            None => 0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&NetworkWire::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: NetworkWire = serde_json::from_str(text)?;
        Self::try_from(wire)
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkWire {
    meta: NetworkMeta,
    nodes: Vec<String>,
    edges: Vec<(String, String, f64)>,
}

impl From<&SemanticNetwork> for NetworkWire {
    fn from(net: &SemanticNetwork) -> Self {
        NetworkWire {
            meta: net.meta.clone(),
            nodes: net.nodes.iter().cloned().collect(),
            edges: net
                .edges()
                .map(|(a, b, w)| (a.to_owned(), b.to_owned(), w))
                .collect(),
        }
    }
}

impl TryFrom<NetworkWire> for SemanticNetwork {
    type Error = Error;

    fn try_from(wire: NetworkWire) -> Result<Self> {
        let mut net = SemanticNetwork::new(wire.meta);
        for n in wire.nodes {
            net.add_node(n);
        }
        for (a, b, w) in wire.edges {
            if !net.contains(&a) || !net.contains(&b) {
                return Err(Error::invalid(format!(
                    "edge {a}-{b} references an unknown node"
                )));
            }
            net.set_edge(&a, &b, w)?;
        }
        Ok(net)
    }
}

/// Index-based adjacency view of a network, with neighbors in name order.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    pub fn from_network(net: &SemanticNetwork) -> Self {
        let names: Vec<String> = net.nodes().map(str::to_owned).collect();
        let index: HashMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut adj = vec![Vec::new(); names.len()];
        for (a, b, w) in net.edges() {
            let (ia, ib) = (index[a], index[b]);
            adj[ia].push((ib, w));
            adj[ib].push((ia, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
        }
        Self { names, index, adj }
    }

    /// Unweighted graph from an edge list over `n` anonymous nodes.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let mut adj = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for &(a, b) in edges {
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            adj[a].push((b, 1.0));
            adj[b].push((a, 1.0));
        }
        for list in &mut adj {
            list.sort_by_key(|&(j, _)| j);
        }
        Self { names, index, adj }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search_by_key(&b, |&(j, _)| j).is_ok()
    }

    /// Nodes reachable from `start`, including `start`, in BFS order.
    pub fn reachable_from(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut order = vec![start];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    order.push(v);
                    queue.push_back(v);
                }
            }
        }
        order
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        self.components_without(None)
    }

    /// Connected components after deleting `removed`.
    pub fn components_without(&self, removed: Option<usize>) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        if let Some(r) = removed {
            seen[r] = true;
        }
        let mut out = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Hop distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

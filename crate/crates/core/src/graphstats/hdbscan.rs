//! HDBSCAN over a precomputed distance matrix.
//!
//! Pipeline: core distances, mutual-reachability minimum spanning tree (Prim),
//! single-linkage hierarchy, condensed tree at `min_cluster_size`, and
//! excess-of-mass cluster selection.

use serde::{Deserialize, Serialize};

use crate::network::Graph;
use crate::vector::SparseVec;
use crate::{Error, Result};

pub const DEFAULT_MIN_CLUSTER_SIZE: usize = 3;

const MIN_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    /// Neighbourhood size for core distances, counting the point itself.
    /// Defaults to `min_cluster_size`.
    pub min_samples: Option<usize>,
    /// Let the root of the condensed tree be selected as the only cluster.
    pub allow_single_cluster: bool,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        Self {
            min_cluster_size: DEFAULT_MIN_CLUSTER_SIZE,
            min_samples: None,
            allow_single_cluster: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdbscanResult {
    /// Cluster index per point, `None` for noise. Clusters are numbered by
    /// their smallest point index.
    pub labels: Vec<Option<usize>>,
    pub n_clusters: usize,
    /// Stability of each returned cluster.
    pub stabilities: Vec<f64>,
}

impl HdbscanResult {
    fn all_noise(n: usize) -> Self {
        Self {
            labels: vec![None; n],
            n_clusters: 0,
            stabilities: Vec::new(),
        }
    }

    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters];
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(c) = l {
                out[*c].push(i);
            }
        }
        out
    }

    pub fn noise(&self) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i].is_none())
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum Child {
    Point(usize),
    Cluster(usize),
}

#[derive(Debug, Clone, Copy)]
struct CondensedEdge {
    parent: usize,
    child: Child,
    lambda: f64,
    size: usize,
}

fn validate(dist: &[Vec<f64>]) -> Result<()> {
    let n = dist.len();
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::invalid(format!(
                "distance row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        for (j, &d) in row.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::invalid(format!(
                    "distance ({i}, {j}) = {d} is not a finite non-negative number"
                )));
            }
            if (d - dist[j][i]).abs() > 1e-9 * d.max(1.0) {
                return Err(Error::invalid(format!(
                    "distance matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

fn core_distances(dist: &[Vec<f64>], k: usize) -> Vec<f64> {
    dist.iter()
        .map(|row| {
            let mut sorted = row.clone();
            sorted.sort_by(f64::total_cmp);
            sorted[(k - 1).min(sorted.len() - 1)]
        })
        .collect()
}

/// Prim's algorithm on the dense mutual-reachability graph.
fn mutual_reachability_mst(dist: &[Vec<f64>], core: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = dist.len();
    let mr = |i: usize, j: usize| dist[i][j].max(core[i]).max(core[j]);
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = mr(cur, j);
            if d < best[j] {
                best[j] = d;
                from[j] = cur;
            }
            if next == usize::MAX || best[j] < best[next] {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((from[next], next, best[next]));
        cur = next;
    }
    edges
}

struct Linkage {
    n: usize,
    left: Vec<usize>,
    right: Vec<usize>,
    dist: Vec<f64>,
    size: Vec<usize>,
}

impl Linkage {
    fn from_mst(n: usize, mut edges: Vec<(usize, usize, f64)>) -> Self {
        edges.sort_by(|a, b| a.2.total_cmp(&b.2));
        let mut parent: Vec<usize> = (0..2 * n - 1).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut l = Linkage {
            n,
            left: Vec::new(),
            right: Vec::new(),
            dist: Vec::new(),
            size: Vec::new(),
        };
        for (a, b, d) in edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            let id = n + l.left.len();
            parent[ra] = id;
            parent[rb] = id;
            let size = l.node_size(ra) + l.node_size(rb);
            l.left.push(ra);
            l.right.push(rb);
            l.dist.push(d);
            l.size.push(size);
        }
        l
    }

    fn node_size(&self, node: usize) -> usize {
        if node < self.n {
            1
        } else {
            self.size[node - self.n]
        }
    }

    fn leaves(&self, node: usize, out: &mut Vec<usize>) {
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < self.n {
                out.push(x);
            } else {
                stack.push(self.left[x - self.n]);
                stack.push(self.right[x - self.n]);
            }
        }
    }
}

fn lambda_of(d: f64) -> f64 {
    1.0 / d.max(MIN_DISTANCE)
}

/// Condensed tree edges and the number of clusters (root = 0).
fn condense(link: &Linkage, min_cluster_size: usize) -> (Vec<CondensedEdge>, usize) {
    let n = link.n;
    let root = 2 * n - 2;
    let mut relabel = vec![usize::MAX; 2 * n - 1];
    relabel[root] = 0;
    let mut next_label = 1;
    let mut out = Vec::new();
    let mut queue = std::collections::VecDeque::from([root]);
    let mut leaves = Vec::new();
    while let Some(node) = queue.pop_front() {
        if node < n {
            continue;
        }
        let k = node - n;
        let (left, right) = (link.left[k], link.right[k]);
        let lambda = lambda_of(link.dist[k]);
        let parent = relabel[node];
        let (lc, rc) = (link.node_size(left), link.node_size(right));
        let mut fall_out = |sub: usize, out: &mut Vec<CondensedEdge>| {
            leaves.clear();
            link.leaves(sub, &mut leaves);
            for &p in &leaves {
                out.push(CondensedEdge {
                    parent,
                    child: Child::Point(p),
                    lambda,
                    size: 1,
                });
            }
        };
        match (lc >= min_cluster_size, rc >= min_cluster_size) {
            (true, true) => {
                for (child, size) in [(left, lc), (right, rc)] {
                    relabel[child] = next_label;
                    out.push(CondensedEdge {
                        parent,
                        child: Child::Cluster(next_label),
                        lambda,
                        size,
                    });
                    next_label += 1;
                    queue.push_back(child);
                }
            }
            (false, false) => {
                fall_out(left, &mut out);
                fall_out(right, &mut out);
            }
            (false, true) => {
                fall_out(left, &mut out);
                relabel[right] = parent;
                queue.push_back(right);
            }
            (true, false) => {
                fall_out(right, &mut out);
                relabel[left] = parent;
                queue.push_back(left);
            }
        }
    }
    (out, next_label)
}

/// Runs HDBSCAN on a symmetric distance matrix.
pub fn hdbscan(dist: &[Vec<f64>], params: &HdbscanParams) -> Result<HdbscanResult> {
    if params.min_cluster_size < 2 {
        return Err(Error::invalid("min_cluster_size must be at least 2"));
    }
    let min_samples = params.min_samples.unwrap_or(params.min_cluster_size);
    if min_samples < 1 {
        return Err(Error::invalid("min_samples must be at least 1"));
    }
    validate(dist)?;
    let n = dist.len();
    if n < params.min_cluster_size || n < 2 {
        return Ok(HdbscanResult::all_noise(n));
    }

    let core = core_distances(dist, min_samples);
    let link = Linkage::from_mst(n, mutual_reachability_mst(dist, &core));
    let (tree, n_nodes) = condense(&link, params.min_cluster_size);

    let mut birth = vec![0.0; n_nodes];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    for e in &tree {
        if let Child::Cluster(c) = e.child {
            birth[c] = e.lambda;
            children[e.parent].push(c);
        }
    }
    let mut stability = vec![0.0; n_nodes];
    for e in &tree {
        stability[e.parent] += (e.lambda - birth[e.parent]) * e.size as f64;
    }

    // excess of mass; children always carry larger ids than their parent
    let first = usize::from(!params.allow_single_cluster);
    let mut selected = vec![false; n_nodes];
    for c in first..n_nodes {
        selected[c] = true;
    }
    for c in (first..n_nodes).rev() {
        let subtree: f64 = children[c].iter().map(|&k| stability[k]).sum();
        if subtree > stability[c] {
            selected[c] = false;
            stability[c] = subtree;
        } else {
            let mut stack = children[c].clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(&children[d]);
            }
        }
    }

    let mut parent_of = vec![usize::MAX; n_nodes];
    for e in &tree {
        if let Child::Cluster(c) = e.child {
            parent_of[c] = e.parent;
        }
    }
    let selected_ancestor = |mut c: usize| -> Option<usize> {
        loop {
            if selected[c] {
                return Some(c);
            }
            if c == 0 {
                return None;
            }
            c = parent_of[c];
        }
    };

    let mut raw: Vec<Option<usize>> = vec![None; n];
    let mut point_lambda = vec![0.0; n];
    for e in &tree {
        if let Child::Point(p) = e.child {
            raw[p] = selected_ancestor(e.parent);
            point_lambda[p] = e.lambda;
        }
    }
    if selected[0] {
        // The root spans every point, so sparse stragglers that only joined at
        // the top of the hierarchy are reported as noise: a root member whose
        // fall-out density is below a tenth of the root's median is an outlier.
        let mut lambdas: Vec<f64> = (0..n)
            .filter(|&p| raw[p] == Some(0))
            .map(|p| point_lambda[p])
            .collect();
        lambdas.sort_by(f64::total_cmp);
        if let Some(&median) = lambdas.get(lambdas.len() / 2) {
            for p in 0..n {
                if raw[p] == Some(0) && point_lambda[p] < 0.1 * median {
                    raw[p] = None;
                }
            }
        }
    }

    // renumber by smallest member
    let mut order: Vec<usize> = Vec::new();
    let mut map = vec![usize::MAX; n_nodes];
    for l in raw.iter().flatten() {
        if map[*l] == usize::MAX {
            map[*l] = order.len();
            order.push(*l);
        }
    }
    Ok(HdbscanResult {
        labels: raw.iter().map(|l| l.map(|c| map[c])).collect(),
        n_clusters: order.len(),
        stabilities: order.iter().map(|&c| stability[c]).collect(),
    })
}

/// Pairwise `1 - cosine` distances.
pub fn cosine_distance_matrix(vectors: &[&SparseVec]) -> Result<Vec<Vec<f64>>> {
    let n = vectors.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = 1.0 - vectors[i].cosine(vectors[j])?;
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    Ok(d)
}

/// Hop distances between `nodes`; disconnected pairs get `g.len()`, one more
/// than any possible path length.
pub fn hop_distance_matrix(g: &Graph, nodes: &[usize]) -> Vec<Vec<f64>> {
    let unreachable = g.len() as f64;
    nodes
        .iter()
        .map(|&s| {
            let d = g.bfs_distances(s);
            nodes
                .iter()
                .map(|&t| {
                    if d[t] == usize::MAX {
                        unreachable
                    } else {
                        d[t] as f64
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(points: &[(f64, f64)]) -> Vec<Vec<f64>> {
        points
            .iter()
            .map(|a| {
                points
                    .iter()
                    .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn too_few_points_are_noise() {
        let r = hdbscan(
            &euclid(&[(0.0, 0.0), (1.0, 0.0)]),
            &HdbscanParams::default(),
        )
        .unwrap();
        assert_eq!(r.labels, vec![None, None]);
        assert_eq!(r.n_clusters, 0);
    }

    #[test]
    fn two_groups() {
        let pts = [
            (0.0, 0.0),
            (0.1, 0.0),
            (0.0, 0.1),
            (0.1, 0.1),
            (5.0, 5.0),
            (5.1, 5.0),
            (5.0, 5.1),
            (5.1, 5.1),
        ];
        let r = hdbscan(&euclid(&pts), &HdbscanParams::default()).unwrap();
        assert_eq!(r.n_clusters, 2);
        assert_eq!(r.labels[..4], [Some(0); 4]);
        assert_eq!(r.labels[4..], [Some(1); 4]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(hdbscan(&[vec![0.0, 1.0], vec![2.0, 0.0]], &HdbscanParams::default()).is_err());
        assert!(hdbscan(
            &[vec![0.0]],
            &HdbscanParams {
                min_cluster_size: 1,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn hop_distances() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2)]);
        let d = hop_distance_matrix(&g, &[0, 2, 3]);
        assert_eq!(d[0], vec![0.0, 2.0, 4.0]);
    }
}

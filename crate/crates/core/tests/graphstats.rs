use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use semwalk::corpus::CategoryNorms;
use semwalk::graphstats::{
    average_path_length, cluster_quality, clustering_coefficient, er_baseline, erdos_renyi_gnm,
    hdbscan, small_worldness, watts_strogatz, HdbscanParams,
};
use semwalk::network::Graph;
use semwalk::rng::rng_from_seed;

/// Standard normal draw by Box-Muller.
fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

fn random_graph<R: Rng>(rng: &mut R) -> (usize, Vec<Vec<bool>>, Graph) {
    let n = rng.gen_range(1..=10);
    let p = rng.gen_range(0.1..0.9);
    let mut adj = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                adj[i][j] = true;
                adj[j][i] = true;
                edges.push((i, j));
            }
        }
    }
    (n, adj, Graph::from_edges(n, &edges))
}

fn oracle_c(n: usize, adj: &[Vec<bool>]) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        let nb: Vec<usize> = (0..n).filter(|&j| adj[i][j]).collect();
        if nb.len() < 2 {
            continue;
        }
        let mut tri = 0;
        for a in 0..nb.len() {
            for b in a + 1..nb.len() {
                tri += usize::from(adj[nb[a]][nb[b]]);
            }
        }
        total += tri as f64 / (nb.len() * (nb.len() - 1) / 2) as f64;
    }
    total / n as f64
}

/// Floyd-Warshall, then the mean over ordered pairs of the largest component
/// (ties to the component holding the lowest node).
fn oracle_l(n: usize, adj: &[Vec<bool>]) -> Option<f64> {
    if !adj.iter().flatten().any(|&e| e) {
        return None;
    }
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let comp = |i: usize| -> Vec<usize> { (0..n).filter(|&j| d[i][j] < INF).collect() };
    let mut best = comp(0);
    for i in 1..n {
        let c = comp(i);
        if c.len() > best.len() {
            best = c;
        }
    }
    let m = best.len();
    let sum: usize = best
        .iter()
        .flat_map(|&a| best.iter().map(move |&b| (a, b)))
        .map(|(a, b)| d[a][b])
        .sum();
    Some(sum as f64 / (m * (m - 1)) as f64)
}

#[test]
fn metrics_match_brute_force_on_small_graphs() {
    let mut rng = rng_from_seed(2024);
    for _ in 0..200 {
        let (n, adj, g) = random_graph(&mut rng);
        assert_eq!(clustering_coefficient(&g), oracle_c(n, &adj));
        match oracle_l(n, &adj) {
            Some(l) => assert_eq!(average_path_length(&g).unwrap(), l),
            None => assert!(average_path_length(&g).is_err()),
        }
    }
}

#[test]
fn hand_checked_metrics() {
    let triangle = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
    assert_eq!(clustering_coefficient(&triangle), 1.0);
    assert_eq!(average_path_length(&triangle).unwrap(), 1.0);

    let path = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
    assert_eq!(clustering_coefficient(&path), 0.0);
    // distances 1,2,3,1,2,1 over 6 unordered pairs
    assert_eq!(average_path_length(&path).unwrap(), 10.0 / 6.0);

    let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
    assert_eq!(clustering_coefficient(&star), 0.0);
    assert_eq!(average_path_length(&star).unwrap(), 1.5);
}

#[test]
fn watts_strogatz_is_small_world() {
    let g = watts_strogatz(100, 6, 0.05, &mut rng_from_seed(3)).unwrap();
    assert_eq!(g.edge_count(), 300);
    let base = er_baseline(100, g.edge_count(), 20, 9).unwrap();
    let sw = small_worldness(
        clustering_coefficient(&g),
        average_path_length(&g).unwrap(),
        &base,
    )
    .unwrap();
    assert!(sw.sigma > 1.0, "{sw:?}");
}

#[test]
fn random_graphs_are_not_small_world() {
    for seed in 0..20 {
        let g = erdos_renyi_gnm(100, 400, &mut rng_from_seed(1000 + seed)).unwrap();
        let base = er_baseline(100, 400, 20, seed).unwrap();
        let sw = small_worldness(
            clustering_coefficient(&g),
            average_path_length(&g).unwrap(),
            &base,
        )
        .unwrap();
        assert!((0.5..=1.5).contains(&sw.sigma), "seed {seed}: {sw:?}");
    }
}

#[test]
fn baseline_is_reproducible() {
    assert_eq!(
        er_baseline(30, 60, 5, 4).unwrap(),
        er_baseline(30, 60, 5, 4).unwrap()
    );
    assert!(er_baseline(3, 4, 1, 0).is_err());
}

fn blobs(seed: u64, centres: &[(f64, f64)], per: usize, sd: f64) -> Vec<(f64, f64)> {
    let mut rng = rng_from_seed(seed);
    centres
        .iter()
        .flat_map(|&(x, y)| (0..per).map(|_| (x, y)).collect::<Vec<_>>())
        .map(|(x, y)| (x + sd * normal(&mut rng), y + sd * normal(&mut rng)))
        .collect()
}

fn euclidean(points: &[(f64, f64)]) -> Vec<Vec<f64>> {
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
fn three_blobs_are_recovered() {
    let pts = blobs(8, &[(0.0, 0.0), (10.0, 0.0), (5.0, 9.0)], 10, 0.5);
    let res = hdbscan(&euclidean(&pts), &HdbscanParams::default()).unwrap();
    assert_eq!(res.n_clusters, 3);
    assert!(res.noise().is_empty());
    let expected: Vec<Vec<usize>> = (0..3).map(|b| (b * 10..b * 10 + 10).collect()).collect();
    assert_eq!(res.clusters(), expected);

    let mut norms = CategoryNorms::default();
    let names: Vec<String> = (0..30).map(|i| format!("p{i:02}")).collect();
    for (i, n) in names.iter().enumerate() {
        norms.insert(n.clone(), format!("blob{}", i / 10));
    }
    let clusters: Vec<BTreeSet<String>> = res
        .clusters()
        .iter()
        .map(|c| c.iter().map(|&i| names[i].clone()).collect())
        .collect();
    let q = cluster_quality(&clusters, &norms, names.iter().map(String::as_str)).unwrap();
    assert_eq!(q.weighted_fscore, 1.0);
    assert_eq!(q.weighted_precision, 1.0);
    assert_eq!(q.weighted_recall, 1.0);
}

#[test]
fn single_blob_with_outliers() {
    let mut pts = blobs(2, &[(0.0, 0.0)], 12, 0.3);
    pts.extend([(40.0, 40.0), (-35.0, 20.0)]);
    let d = euclidean(&pts);
    let default = hdbscan(&d, &HdbscanParams::default()).unwrap();
    assert!(default.n_clusters != 1 || default.noise().len() >= 2);
    let single = hdbscan(
        &d,
        &HdbscanParams {
            allow_single_cluster: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(single.n_clusters, 1);
    assert_eq!(single.noise(), vec![12, 13]);
}

#[test]
fn hdbscan_rejects_bad_input() {
    assert!(hdbscan(&[vec![0.0, 1.0], vec![1.0]], &HdbscanParams::default()).is_err());
    let tiny = hdbscan(
        &euclidean(&[(0.0, 0.0), (1.0, 0.0)]),
        &HdbscanParams::default(),
    )
    .unwrap();
    assert_eq!(tiny.n_clusters, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_are_bounded(seed in any::<u64>()) {
        let (_, _, g) = random_graph(&mut rng_from_seed(seed));
        let c = clustering_coefficient(&g);
        prop_assert!((0.0..=1.0).contains(&c));
        if let Ok(l) = average_path_length(&g) {
            prop_assert!(l >= 1.0);
        }
    }

    #[test]
    fn hdbscan_labels_are_canonical(seed in any::<u64>()) {
        let pts = blobs(seed, &[(0.0, 0.0), (6.0, 6.0)], 8, 1.0);
        let res = hdbscan(&euclidean(&pts), &HdbscanParams::default()).unwrap();
        prop_assert_eq!(res.stabilities.len(), res.n_clusters);
        let firsts: Vec<usize> = res.clusters().iter().map(|c| c[0]).collect();
        prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(res.clusters().iter().all(|c| c.len() >= 3));
    }
}

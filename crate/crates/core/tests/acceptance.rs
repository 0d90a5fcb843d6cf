//! Acceptance checks. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use semwalk::corpus::{generate_synthetic_corpus, CategoryNorms, SynthConfig, UtteranceScenePair};
use semwalk::fluency::{analyze_walks, AnalysisParams, FluencyReport, QuartileBasis};
use semwalk::graphstats::{
    average_path_length, cluster_quality, clustering_coefficient, er_baseline, erdos_renyi_gnm,
    hdbscan, small_worldness, watts_strogatz, HdbscanParams,
};
use semwalk::learner::LearnerState;
use semwalk::modelselect::{
    fit_logistic, gradient, objective, select_model, standardize, stratified_folds, Design,
    LogisticParams, SelectionParams,
};
use semwalk::netbuild::build_batch_network;
use semwalk::network::Graph;
use semwalk::pipeline::{
    regress, run_sweep, train_batch, write_features_csv, Config, FeatureRow, SweepInput,
};
use semwalk::rng::rng_from_seed;
use semwalk::walker::{extract_retrievals, run_ensemble, WalkRecord};
use semwalk::{SemanticNetwork, DEFAULT_CUE};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: f64, elapsed: Duration) -> bool {
    elapsed.as_secs_f64() < limit
}

// ---- 1: learner --------------------------------------------------------

type Meanings = BTreeMap<String, BTreeMap<String, f64>>;

fn replay(pairs: &[UtteranceScenePair]) -> Meanings {
    let mut sums: Meanings = BTreeMap::new();
    for (t, pair) in pairs.iter().enumerate() {
        let before = if t == 0 {
            Meanings::new()
        } else {
            replay(&pairs[..t])
        };
        let seen: BTreeSet<&str> = pairs[..=t]
            .iter()
            .flat_map(|p| p.scene.iter().map(String::as_str))
            .collect();
        let prior = 1.0 / (seen.len() as f64 + 1.0);
        let p = |w: &str, f: &str| {
            before
                .get(w)
                .and_then(|m| m.get(f))
                .copied()
                .unwrap_or(prior)
        };
        for f in &pair.scene {
            let denom: f64 = pair.utterance.iter().map(|w| p(w, f)).sum();
            for w in &pair.utterance {
                *sums
                    .entry(w.clone())
                    .or_default()
                    .entry(f.clone())
                    .or_default() += p(w, f) / denom;
            }
        }
    }
    sums.into_iter()
        .map(|(w, row)| {
            let total: f64 = row.values().sum();
            (w, row.into_iter().map(|(f, a)| (f, a / total)).collect())
        })
        .collect()
}

fn random_corpus(seed: u64) -> Vec<UtteranceScenePair> {
    let mut rng = rng_from_seed(seed);
    let words: Vec<String> = (0..7).map(|i| format!("w{i}")).collect();
    let features: Vec<String> = (0..9).map(|i| format!("F{i}")).collect();
    let n = rng.gen_range(1..=20);
    (0..n)
        .map(|_| {
            let (nu, ns) = (rng.gen_range(1..=3), rng.gen_range(1..=4));
            let u: Vec<String> = words.choose_multiple(&mut rng, nu).cloned().collect();
            let s: Vec<String> = features.choose_multiple(&mut rng, ns).cloned().collect();
            UtteranceScenePair::new(u, s).unwrap()
        })
        .collect()
}

fn learner_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut worst, mut worst_sum, mut cells) = (0.0f64, 0.0f64, 0);
    for seed in 0..25 {
        let pairs = random_corpus(seed);
        let mut l = LearnerState::new();
        l.process_corpus(&pairs);
        let got = l.snapshot(None).meanings;
        let want = replay(&pairs);
        if got.keys().ne(want.keys()) {
            return Err(format!("corpus {seed}: vocabularies differ"));
        }
        for (w, row) in &want {
            if got[w].keys().ne(row.keys()) {
                return Err(format!("corpus {seed}: stored features of {w} differ"));
            }
            for (f, p) in row {
                worst = worst.max((got[w][f] - p).abs());
                cells += 1;
            }
            worst_sum = worst_sum.max((got[w].values().sum::<f64>() - 1.0).abs());
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-7 && worst_sum <= 1e-9 && within(5.0, elapsed),
        format!("25 corpora, {cells} cells, max |diff| {worst:.1e}, max |sum-1| {worst_sum:.1e}, {elapsed:.2?}"),
    )
}

// ---- 2: retrieval extraction -------------------------------------------

fn irt_example() -> Outcome {
    let r = extract_retrievals(&["cat", "dog", "cat", "rat"]);
    let words: Vec<&str> = r.iter().map(|x| x.word.as_str()).collect();
    let irts: Vec<usize> = r.iter().filter_map(|x| x.irt).collect();
    check(
        words == ["cat", "dog", "rat"] && irts == [1, 2] && r[0].irt.is_none(),
        format!("retrievals {words:?}, IRTs {irts:?}"),
    )
}

// ---- 3 and 4: walks on the synthetic network ---------------------------

struct WalkRun {
    net: SemanticNetwork,
    categories: usize,
    report: FluencyReport,
    by_retrieval: FluencyReport,
    elapsed: Duration,
}

fn walk_run() -> semwalk::Result<WalkRun> {
    let start = Instant::now();
    let corpus = generate_synthetic_corpus(&SynthConfig::default())?;
    let meanings = train_batch(&corpus.pairs, None);
    let net = build_batch_network(&meanings, corpus.norms.words(), DEFAULT_CUE, 0.8, 0.4)?;
    let walks: Vec<WalkRecord> = run_ensemble(&net, DEFAULT_CUE, 70, 300, 1)?;
    let params = AnalysisParams::default();
    let report = analyze_walks(&walks, &corpus.norms, Some(DEFAULT_CUE), None, &params)?;
    let elapsed = start.elapsed();
    let by_retrieval = analyze_walks(
        &walks,
        &corpus.norms,
        Some(DEFAULT_CUE),
        None,
        &AnalysisParams {
            quartile_basis: QuartileBasis::Retrieval,
            ..params
        },
    )?;
    let categories = corpus
        .norms
        .categories
        .values()
        .flatten()
        .collect::<BTreeSet<_>>()
        .len();
    Ok(WalkRun {
        net,
        categories,
        report,
        by_retrieval,
        elapsed,
    })
}

fn mvt_reproduction(run: &WalkRun) -> Outcome {
    let m = &run.report.mvt;
    let p = &run.report.profile.irt;
    let nodes = run.net.node_count();
    let pos1 = m.pos1_test.map_or(f64::NAN, |t| t.p);
    let inside: Vec<String> = p
        .range(2..)
        .map(|(k, s)| {
            format!(
                "{k}:{:.2} (p {:.2})",
                s.mean_ratio,
                m.position_tests.get(k).map_or(f64::NAN, |t| t.p)
            )
        })
        .collect();
    let exits: Vec<String> = p
        .range(..0)
        .map(|(k, s)| format!("{k}:{:.2}", s.mean_ratio))
        .collect();
    let inside_ok = m.position_tests.range(2..).all(|(_, t)| t.p >= 0.05);
    check(
        (60..=90).contains(&nodes)
            && (5..=8).contains(&run.categories)
            && p.get(&1).is_some_and(|s| s.mean_ratio > 1.0)
            && pos1 < 0.05
            && inside_ok
            && m.monotonicity_ok
            && m.adheres
            && within(10.0, run.elapsed),
        format!(
            "{nodes} nodes, {} categories, {} edges; pos 1 ratio {:.2} (p {pos1:.1e}); within {}; before switch {} (reported only); {:.2?}",
            run.categories,
            run.net.edge_count(),
            p.get(&1).map_or(f64::NAN, |s| s.mean_ratio),
            inside.join(", "),
            exits.join(", "),
            run.elapsed
        ),
    )
}

fn switch_analytics(run: &WalkRun) -> Outcome {
    let r = &run.report;
    let c = &r.switch_counts;
    let q = &r.quartiles;
    let trend = q.windows(2).all(|w| {
        w[1].associative_frac + w[1].associative_sem >= w[0].associative_frac - w[0].associative_sem
    });
    let d = &r.durations;
    let (Some(a), Some(co), Some(wi)) = (d.associative, d.categorical_only, d.within_patch) else {
        return Err(format!("missing switch type in durations: {d:?}"));
    };
    let fmt = |qs: &[semwalk::fluency::QuartileStat; 4]| {
        qs.iter()
            .map(|s| format!("{:.3}±{:.3}", s.associative_frac, s.associative_sem))
            .collect::<Vec<_>>()
            .join(" ")
    };
    check(
        c.associative > c.categorical_only && trend && a.mean > co.mean && co.mean > wi.mean,
        format!(
            "switches {} associative vs {} categorical-only; associative fraction by step quartile {} (by retrieval index {}); IRT associative {:.2} > categorical-only {:.2} > within {:.2}",
            c.associative,
            c.categorical_only,
            fmt(q),
            fmt(&run.by_retrieval.quartiles),
            a.mean,
            co.mean,
            wi.mean
        ),
    )
}

// ---- 5: graph metrics --------------------------------------------------

fn brute_c(n: usize, adj: &[Vec<bool>]) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        let nb: Vec<usize> = (0..n).filter(|&j| adj[i][j]).collect();
        if nb.len() >= 2 {
            let links: usize = nb
                .iter()
                .enumerate()
                .flat_map(|(a, &u)| nb[a + 1..].iter().map(move |&v| (u, v)))
                .filter(|&(u, v)| adj[u][v])
                .count();
            total += links as f64 / (nb.len() * (nb.len() - 1) / 2) as f64;
        }
    }
    total / n as f64
}

fn brute_l(n: usize, adj: &[Vec<bool>]) -> Option<f64> {
    const INF: usize = usize::MAX / 4;
    let mut d: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0
                    } else if adj[i][j] {
                        1
                    } else {
                        INF
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    if !adj.iter().flatten().any(|&e| e) {
        return None;
    }
    let mut best: Vec<usize> = Vec::new();
    for i in 0..n {
        let comp: Vec<usize> = (0..n).filter(|&j| d[i][j] < INF).collect();
        if comp.len() > best.len() {
            best = comp;
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

fn graph_metrics() -> Outcome {
    let mut rng = rng_from_seed(77);
    for k in 0..200 {
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
        let g = Graph::from_edges(n, &edges);
        if clustering_coefficient(&g) != brute_c(n, &adj) {
            return Err(format!("graph {k}: C differs from brute force"));
        }
        match (average_path_length(&g), brute_l(n, &adj)) {
            (Ok(l), Some(b)) if l == b => {}
            (Err(_), None) => {}
            (got, want) => return Err(format!("graph {k}: L {got:?} vs brute force {want:?}")),
        }
    }
    let sigma = |g: &Graph, seed: u64| -> semwalk::Result<f64> {
        let base = er_baseline(g.len(), g.edge_count(), 20, seed)?;
        Ok(small_worldness(clustering_coefficient(g), average_path_length(g)?, &base)?.sigma)
    };
    let ws = watts_strogatz(100, 6, 0.05, &mut rng_from_seed(1)).map_err(|e| e.to_string())?;
    let ws_sigma = sigma(&ws, 1).map_err(|e| e.to_string())?;
    let mut er = Vec::new();
    for seed in 0..20 {
        let g =
            erdos_renyi_gnm(100, 300, &mut rng_from_seed(500 + seed)).map_err(|e| e.to_string())?;
        er.push(sigma(&g, seed).map_err(|e| e.to_string())?);
    }
    let (lo, hi) = er
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| {
            (a.min(s), b.max(s))
        });
    check(
        ws_sigma > 1.0 && lo >= 0.5 && hi <= 1.5,
        format!("200 graphs exact; WS(100,6,0.05) sigma {ws_sigma:.2}; ER sigma over 20 seeds in [{lo:.3}, {hi:.3}]"),
    )
}

// ---- 6: HDBSCAN --------------------------------------------------------

fn hdbscan_blobs() -> Outcome {
    let mut rng = rng_from_seed(6);
    let centres = [(0.0, 0.0), (8.0, 1.0), (3.0, 9.0)];
    let mut pts = Vec::new();
    for &(x, y) in &centres {
        for _ in 0..10 {
            // Box-Muller
            let (u, v): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
            let r = 0.6 * (-2.0 * u.ln()).sqrt();
            let t = std::f64::consts::TAU * v;
            pts.push((x + r * t.cos(), y + r * t.sin()));
        }
    }
    let dist: Vec<Vec<f64>> = pts
        .iter()
        .map(|a: &(f64, f64)| {
            pts.iter()
                .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                .collect()
        })
        .collect();
    let res = hdbscan(&dist, &HdbscanParams::default()).map_err(|e| e.to_string())?;
    let expected: Vec<Vec<usize>> = (0..3).map(|b| (b * 10..b * 10 + 10).collect()).collect();
    let names: Vec<String> = (0..30).map(|i| format!("p{i}")).collect();
    let mut norms = CategoryNorms::default();
    for (i, n) in names.iter().enumerate() {
        norms.insert(n.clone(), format!("blob{}", i / 10));
    }
    let clusters: Vec<BTreeSet<String>> = res
        .clusters()
        .iter()
        .map(|c| c.iter().map(|&i| names[i].clone()).collect())
        .collect();
    let f = cluster_quality(&clusters, &norms, names.iter().map(String::as_str))
        .map(|q| q.weighted_fscore)
        .unwrap_or(0.0);
    check(
        res.clusters() == expected && res.noise().is_empty() && f == 1.0,
        format!(
            "{} clusters, {} noise points, weighted F {f}",
            res.n_clusters,
            res.noise().len()
        ),
    )
}

// ---- 7: regression machinery -------------------------------------------

fn regression_machinery() -> Outcome {
    let mut rng = rng_from_seed(7);
    let xs: Vec<Vec<f64>> = (0..150)
        .map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let ys: Vec<bool> = xs
        .iter()
        .map(|x| rng.gen::<f64>() < 1.0 / (1.0 + (-(0.5 + x[0] - 0.8 * x[2])).exp()))
        .collect();
    let params = LogisticParams::default();
    let model = fit_logistic(&xs, &ys, &params).map_err(|e| e.to_string())?;
    let w = model.params();
    let g_norm = gradient(&w, &xs, &ys, params.l2)
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();

    let probe: Vec<f64> = w.iter().map(|v| v + 0.3).collect();
    let g = gradient(&probe, &xs, &ys, params.l2);
    let mut fd_err = 0.0f64;
    for j in 0..probe.len() {
        let h = 1e-5;
        let (mut up, mut down) = (probe.clone(), probe.clone());
        up[j] += h;
        down[j] -= h;
        let fd = (objective(&up, &xs, &ys, params.l2) - objective(&down, &xs, &ys, params.l2))
            / (2.0 * h);
        fd_err = fd_err.max((fd - g[j]).abs() / g[j].abs().max(1.0));
    }

    let mut fold_spread = 0;
    for seed in 0..50u64 {
        let n = 20 + (seed as usize * 7) % 50;
        let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.35)).collect();
        let pos = labels.iter().filter(|&&y| y).count();
        if pos < 3 || n - pos < 3 {
            continue;
        }
        let folds = stratified_folds(&labels, 3, seed).map_err(|e| e.to_string())?;
        for class in [false, true] {
            let counts: Vec<usize> = (0..3)
                .map(|f| {
                    (0..n)
                        .filter(|&i| folds[i] == f && labels[i] == class)
                        .count()
                })
                .collect();
            fold_spread =
                fold_spread.max(counts.iter().max().unwrap() - counts.iter().min().unwrap());
        }
    }

    let labels: Vec<bool> = (0..60).map(|i| i % 2 == 1).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&y| {
            (0..8)
                .map(|j| {
                    let noise = rng.gen_range(-1.0..1.0);
                    if j == 3 {
                        noise + if y { 2.5 } else { -2.5 }
                    } else {
                        noise
                    }
                })
                .collect()
        })
        .collect();
    let names: Vec<String> = (0..8).map(|j| format!("x{j}")).collect();
    let design = standardize(&Design::new(names, rows, labels).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let sel = select_model(&design, 3, &SelectionParams::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(
        g_norm < 1e-6
            && fd_err < 1e-4
            && fold_spread <= 1
            && sel.best.features == ["x3"]
            && sel.subsets_evaluated == 255
            && within(30.0, elapsed),
        format!(
            "gradient at optimum {g_norm:.1e}; finite-difference error {fd_err:.1e}; fold spread {fold_spread}; best subset {:?} of {} in {elapsed:.2?}",
            sel.best.features, sel.subsets_evaluated
        ),
    )
}

// ---- 8: sweep ----------------------------------------------------------

fn sweep_once(seed: u64) -> semwalk::Result<(Vec<u8>, Vec<u8>, usize, usize, usize)> {
    let corpus = generate_synthetic_corpus(&SynthConfig::default())?;
    let config = Config::default();
    let meanings = train_batch(&corpus.pairs, None);
    let out = run_sweep(
        SweepInput::Meanings(&meanings),
        &corpus.norms,
        &config,
        seed,
    )?;
    let rows: Vec<FeatureRow> = out.points.iter().map(FeatureRow::from).collect();
    let mut csv = Vec::new();
    write_features_csv(&mut csv, &rows)?;
    let model = regress(&rows, &config, seed)?;
    let json = serde_json::to_vec_pretty(&model)?;
    let grid = config.sweep.points().len();
    if out
        .points
        .iter()
        .any(|p| p.reachable < config.sweep.min_reachable)
    {
        return Err(semwalk::Error::invalid(
            "a kept point is below the reachability filter",
        ));
    }
    let minority = rows
        .iter()
        .filter(|r| r.features.mvt_label)
        .count()
        .min(rows.iter().filter(|r| !r.features.mvt_label).count());
    if model.n_rows != 2 * minority {
        return Err(semwalk::Error::invalid(
            "regression rows are not class balanced",
        ));
    }
    Ok((csv, json, grid, rows.len(), out.skipped.len()))
}

fn sweep_procedure() -> Outcome {
    let start = Instant::now();
    let a = sweep_once(1).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let b = sweep_once(1).map_err(|e| e.to_string())?;
    let same = a.0 == b.0 && a.1 == b.1;
    check(
        a.2 == 121 && a.3 + a.4 <= 121 && same && within(300.0, elapsed),
        format!(
            "{} grid points, {} kept, {} skipped, reruns byte-identical: {same}, {elapsed:.2?} per run",
            a.2, a.3, a.4
        ),
    )
}

fn main() {
    let run = walk_run();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 learner equivalence", learner_equivalence()),
        ("2 retrieval extraction", irt_example()),
        (
            "3 MVT reproduction",
            run.as_ref()
                .map_err(|e| e.to_string())
                .and_then(mvt_reproduction),
        ),
        (
            "4 switch analytics",
            run.as_ref()
                .map_err(|e| e.to_string())
                .and_then(switch_analytics),
        ),
        ("5 graph metrics", graph_metrics()),
        ("6 HDBSCAN", hdbscan_blobs()),
        ("7 regression machinery", regression_machinery()),
        ("8 sweep procedure", sweep_procedure()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

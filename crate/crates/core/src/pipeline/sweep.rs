//! Threshold grid sweeps, the features CSV and the regression over it.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_incremental, Config, NetworkConfig};
use crate::corpus::{CategoryNorms, UtteranceScenePair};
use crate::fluency::{analyze_walks, FluencyReport};
use crate::graphstats::{extract_features, NetworkFeatures, FEATURE_NAMES};
use crate::learner::LearnedMeanings;
use crate::modelselect::{balanced_indices, select_model, standardize, Design, ModelReport};
use crate::netbuild::build_batch_network;
use crate::network::{NetworkMode, SemanticNetwork};
use crate::rng::{derive_seed, STAGE_SWEEP};
use crate::walker::run_ensemble;
use crate::{Error, Result};

pub const DEFAULT_MIN_REACHABLE: usize = 30;

fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub rho_grid: Vec<f64>,
    pub rho_animal_grid: Vec<f64>,
    /// Points whose cue reaches fewer words than this are skipped.
    pub min_reachable: usize,
    pub mode: NetworkMode,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            rho_grid: default_grid(),
            rho_animal_grid: default_grid(),
            min_reachable: DEFAULT_MIN_REACHABLE,
            mode: NetworkMode::Batch,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.min_reachable == 0 {
            return Err(Error::invalid("min_reachable must be at least 1"));
        }
        for v in self.rho_grid.iter().chain(&self.rho_animal_grid) {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::invalid(format!("grid value {v} outside [0, 1]")));
            }
        }
        if self.rho_grid.is_empty() || self.rho_animal_grid.is_empty() {
            return Err(Error::invalid("empty threshold grid"));
        }
        Ok(())
    }

    /// Grid points in row-major (rho, rho_animal) order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.rho_grid
            .iter()
            .flat_map(|&r| self.rho_animal_grid.iter().map(move |&a| (r, a)))
            .collect()
    }
}

/// Training input: learned meanings for batch sweeps, the corpus (and the
/// number of pairs to use) for incremental sweeps.
#[derive(Debug, Clone, Copy)]
pub enum SweepInput<'a> {
    Meanings(&'a LearnedMeanings),
    Corpus(&'a [UtteranceScenePair], Option<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub rho: f64,
    pub rho_animal: f64,
    pub mode: NetworkMode,
    pub reachable: usize,
    pub features: NetworkFeatures,
    pub report: FluencyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub rho: f64,
    pub rho_animal: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub points: Vec<SweepPoint>,
    pub skipped: Vec<SkippedPoint>,
    pub candidates: usize,
}

enum Outcome {
    Kept(Box<SweepPoint>),
    Skipped(SkippedPoint),
}

fn point_network(
    input: SweepInput<'_>,
    norms: &CategoryNorms,
    net_cfg: &NetworkConfig,
    mode: NetworkMode,
    seed: u64,
) -> Result<(SemanticNetwork, Option<LearnedMeanings>)> {
    match (mode, input) {
        (NetworkMode::Batch, SweepInput::Meanings(m)) => Ok((
            build_batch_network(
                m,
                norms.words(),
                &net_cfg.cue,
                net_cfg.rho,
                net_cfg.rho_animal,
            )?,
            None,
        )),
        (NetworkMode::Incremental, SweepInput::Corpus(pairs, limit)) => {
            let (m, net) = train_incremental(pairs, limit, net_cfg, Some(norms), seed)?;
            Ok((net, Some(m)))
        }
        (NetworkMode::Batch, SweepInput::Corpus(..)) => {
            Err(Error::invalid("batch sweeps take trained meanings"))
        }
        (NetworkMode::Incremental, SweepInput::Meanings(_)) => Err(Error::invalid(
            "incremental sweeps retrain from the corpus at every grid point",
        )),
    }
}

fn run_point(
    index: usize,
    (rho, rho_animal): (f64, f64),
    input: SweepInput<'_>,
    norms: &CategoryNorms,
    config: &Config,
    seed: u64,
) -> Result<Outcome> {
    let spec = &config.sweep;
    let point_seed = derive_seed(seed, STAGE_SWEEP, index as u64);
    let net_cfg = NetworkConfig {
        rho,
        rho_animal,
        ..config.network.clone()
    };
    let skip = |reason: String| {
        log::info!("skipping rho={rho} rho_animal={rho_animal}: {reason}");
        Ok(Outcome::Skipped(SkippedPoint {
            rho,
            rho_animal,
            reason,
        }))
    };
    let (net, own) = point_network(input, norms, &net_cfg, spec.mode, point_seed)?;
    let meanings = match (&own, input) {
        (Some(m), _) => m,
        (None, SweepInput::Meanings(m)) => m,
        (None, SweepInput::Corpus(..)) => {
            unreachable!("corpus input always trains its own meanings")
        }
    };
    let cue = net_cfg.cue.as_str();
    let reachable = if net.contains(cue) {
        net.reachable_count(cue)
    } else {
        0
    };
    if reachable < spec.min_reachable {
        return skip(format!(
            "{reachable} words reachable from the cue, fewer than {}",
            spec.min_reachable
        ));
    }
    let walks = run_ensemble(
        &net,
        cue,
        config.walks.steps,
        config.walks.walks,
        point_seed,
    )?;
    let vectors = meanings.vectors(net.nodes())?;
    let report = analyze_walks(&walks, norms, Some(cue), Some(&vectors), &config.analysis)?;
    let features = match extract_features(
        &net,
        Some(&vectors),
        norms,
        report.mvt.adheres,
        &config.features,
        point_seed,
    ) {
        Ok(f) => f,
        Err(e @ Error::Undefined(_)) => return skip(e.to_string()),
        Err(e) => return Err(e),
    };
    Ok(Outcome::Kept(Box::new(SweepPoint {
        rho,
        rho_animal,
        mode: spec.mode,
        reachable,
        features,
        report,
    })))
}

/// Evaluates every grid point: build, filter by cue reachability, walk,
/// label by MVT adherence and extract features. Point `i` (row-major) uses the
/// seed `derive_seed(seed, "sweep", i)` for all its stochastic stages.
pub fn run_sweep(
    input: SweepInput<'_>,
    norms: &CategoryNorms,
    config: &Config,
    seed: u64,
) -> Result<SweepOutput> {
    config.sweep.validate()?;
    let grid = config.sweep.points();
    let outcomes: Vec<Outcome> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &p)| run_point(i, p, input, norms, config, seed))
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Kept(p) => points.push(*p),
            Outcome::Skipped(s) => skipped.push(s),
        }
    }
    if points.is_empty() {
        return Err(Error::invalid(format!(
            "all {} grid points were filtered out; lower min_reachable or the thresholds, or use a larger corpus",
            grid.len()
        )));
    }
    Ok(SweepOutput {
        points,
        skipped,
        candidates: grid.len(),
    })
}

/// One row of the features CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub rho: f64,
    pub rho_animal: f64,
    pub mode: NetworkMode,
    pub features: NetworkFeatures,
}

impl From<&SweepPoint> for FeatureRow {
    fn from(p: &SweepPoint) -> Self {
        Self {
            rho: p.rho,
            rho_animal: p.rho_animal,
            mode: p.mode,
            features: p.features.clone(),
        }
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn header() -> Vec<&'static str> {
    let mut h = vec!["rho", "rho_animal", "mode"];
    h.extend(FEATURE_NAMES);
    h.push("mvt_label");
    h
}

/// Writes the features CSV; floats carry 17 significant digits.
pub fn write_features_csv<W: Write>(writer: W, rows: &[FeatureRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header())?;
    for r in rows {
        let f = &r.features;
        let record = vec![
            float(r.rho),
            float(r.rho_animal),
            r.mode.to_string(),
            f.n_vertices.to_string(),
            f.n_edges.to_string(),
            float(f.sparsity),
            float(f.c),
            float(f.l),
            float(f.gamma),
            float(f.lambda),
            float(f.sigma),
            float(f.weighted_precision),
            float(f.weighted_recall),
            float(f.weighted_fscore),
            f.n_hdbscan_clusters.to_string(),
            f.n_naive_clusters.to_string(),
            f.n_singletons.to_string(),
            f.mvt_label.to_string(),
        ];
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features_csv<R: Read>(reader: R) -> Result<Vec<FeatureRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let expected = header();
    let got: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if got != expected {
        return Err(Error::parse(1, format!("unexpected header {got:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .map_err(|e| Error::parse(line, format!("column {}: {e}", expected[k])))
        };
        let int = |k: usize| -> Result<usize> {
            rec[k]
                .parse::<usize>()
                .map_err(|e| Error::parse(line, format!("column {}: {e}", expected[k])))
        };
        let mode = rec[2]
            .parse::<NetworkMode>()
            .map_err(|e| Error::parse(line, e.to_string()))?;
        let mvt_label = match &rec[17] {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::parse(
                    line,
                    format!("mvt_label must be true or false, got {other}"),
                ))
            }
        };
        rows.push(FeatureRow {
            rho: num(0)?,
            rho_animal: num(1)?,
            mode,
            features: NetworkFeatures {
                n_vertices: int(3)?,
                n_edges: int(4)?,
                sparsity: num(5)?,
                c: num(6)?,
                l: num(7)?,
                gamma: num(8)?,
                lambda: num(9)?,
                sigma: num(10)?,
                weighted_precision: num(11)?,
                weighted_recall: num(12)?,
                weighted_fscore: num(13)?,
                n_hdbscan_clusters: int(14)?,
                n_naive_clusters: int(15)?,
                n_singletons: int(16)?,
                mvt_label,
            },
        });
    }
    Ok(rows)
}

/// Balances the rows by MVT label, standardises the features and runs the
/// exhaustive subset selection.
pub fn regress(rows: &[FeatureRow], config: &Config, seed: u64) -> Result<ModelReport> {
    let labels: Vec<bool> = rows.iter().map(|r| r.features.mvt_label).collect();
    let keep = balanced_indices(&labels, seed)?;
    let design = Design::new(
        FEATURE_NAMES.iter().map(|s| (*s).to_owned()).collect(),
        keep.iter()
            .map(|&i| rows[i].features.values().to_vec())
            .collect(),
        keep.iter().map(|&i| labels[i]).collect(),
    )?;
    let design = standardize(&design)?;
    let selection = select_model(&design, seed, &config.selection)?;
    Ok(ModelReport::new(&selection, &design))
}

//! Stage wiring and file formats shared by the command line and the bindings.

mod sweep;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

pub use sweep::{
    read_features_csv, regress, run_sweep, write_features_csv, FeatureRow, SkippedPoint,
    SweepInput, SweepOutput, SweepPoint, SweepSpec,
};

use crate::corpus::{parse_corpus, parse_norms, CategoryNorms, SynthConfig, UtteranceScenePair};
use crate::fluency::AnalysisParams;
use crate::graphstats::FeatureParams;
use crate::learner::{LearnedMeanings, LearnerState};
use crate::modelselect::SelectionParams;
use crate::netbuild::{
    build_batch_network, ClusterParams, IncrementalBuilder, DEFAULT_RHO, DEFAULT_RHO_ANIMAL,
};
use crate::network::{NetworkMode, SemanticNetwork};
use crate::walker::{DEFAULT_STEPS, DEFAULT_WALKS};
use crate::{Error, Result, DEFAULT_CUE};

pub const DEFAULT_BATCH_PAIRS: usize = 120_000;
pub const DEFAULT_INCREMENTAL_PAIRS: usize = 28_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub rho: f64,
    pub rho_animal: f64,
    pub cue: String,
    pub cluster: ClusterParams,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            rho: DEFAULT_RHO,
            rho_animal: DEFAULT_RHO_ANIMAL,
            cue: DEFAULT_CUE.to_owned(),
            cluster: ClusterParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    pub walks: usize,
    pub steps: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            walks: DEFAULT_WALKS,
            steps: DEFAULT_STEPS,
        }
    }
}

/// Optional TOML configuration; every section and field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct Config {
    pub synth: SynthConfig,
    pub network: NetworkConfig,
    pub walks: WalkConfig,
    pub analysis: AnalysisParams,
    pub features: FeatureParams,
    pub selection: SelectionParams,
    pub sweep: SweepSpec,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

pub fn read_corpus_file(path: &Path) -> Result<Vec<UtteranceScenePair>> {
    parse_corpus(BufReader::new(File::open(path)?))
}

pub fn read_norms_file(path: &Path) -> Result<CategoryNorms> {
    parse_norms(BufReader::new(File::open(path)?))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_network(path: &Path) -> Result<SemanticNetwork> {
    SemanticNetwork::from_json(&std::fs::read_to_string(path)?)
}

pub fn write_network(path: &Path, net: &SemanticNetwork) -> Result<()> {
    let mut text = net.to_json()?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Trains on the first `limit` pairs and returns the meanings tagged `batch`.
pub fn train_batch(pairs: &[UtteranceScenePair], limit: Option<usize>) -> LearnedMeanings {
    let mut learner = LearnerState::new();
    learner.process_corpus(&pairs[..limit.unwrap_or(pairs.len()).min(pairs.len())]);
    learner.snapshot(Some("batch"))
}

/// Trains while maintaining an incremental network over `vocab` plus the cue
/// (all words when `vocab` is `None`).
pub fn train_incremental(
    pairs: &[UtteranceScenePair],
    limit: Option<usize>,
    net: &NetworkConfig,
    vocab: Option<&CategoryNorms>,
    seed: u64,
) -> Result<(LearnedMeanings, SemanticNetwork)> {
    let tracked = vocab.map(|n| {
        let mut s: HashSet<String> = n.words().map(str::to_owned).collect();
        s.insert(net.cue.clone());
        s
    });
    let mut b = IncrementalBuilder::new(
        &net.cue,
        net.rho,
        net.rho_animal,
        net.cluster,
        tracked,
        seed,
    );
    b.process_corpus(&pairs[..limit.unwrap_or(pairs.len()).min(pairs.len())])?;
    let stats = b.stats();
    log::info!(
        "incremental build: {} steps, {} candidate comparisons (max {} per step), {} reweights",
        stats.steps,
        stats.total_comparisons,
        stats.max_comparisons,
        stats.total_reweights
    );
    Ok((b.learner().snapshot(Some("incremental")), b.network()))
}

/// Batch network over the norms vocabulary and the cue.
pub fn build_network(
    meanings: &LearnedMeanings,
    norms: &CategoryNorms,
    net: &NetworkConfig,
) -> Result<SemanticNetwork> {
    if meanings.mode.as_deref() == Some(NetworkMode::Incremental.to_string().as_str()) {
        return Err(Error::invalid(
            "meanings come from incremental training, whose network is built during training",
        ));
    }
    build_batch_network(meanings, norms.words(), &net.cue, net.rho, net.rho_animal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let c = Config::from_toml("[network]\nrho = 0.7\n[walks]\nwalks = 10\n").unwrap();
        assert_eq!(c.network.rho, 0.7);
        assert_eq!(c.network.rho_animal, DEFAULT_RHO_ANIMAL);
        assert_eq!(c.walks.walks, 10);
        assert_eq!(c.walks.steps, DEFAULT_STEPS);
        assert!(Config::from_toml("[network]\nrho = 'x'\n").is_err());
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn incremental_meanings_cannot_be_rebuilt() {
        let pairs = vec![UtteranceScenePair::new(["animal", "dog"], ["ANIMAL", "DOG"]).unwrap()];
        let mut norms = CategoryNorms::default();
        norms.insert("dog", "pets");
        let (m, _) =
            train_incremental(&pairs, None, &NetworkConfig::default(), Some(&norms), 0).unwrap();
        assert!(build_network(&m, &norms, &NetworkConfig::default()).is_err());
        let b = train_batch(&pairs, None);
        assert_eq!(
            build_network(&b, &norms, &NetworkConfig::default())
                .unwrap()
                .meta
                .mode,
            NetworkMode::Batch
        );
    }
}

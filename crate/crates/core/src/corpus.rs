//! Utterance/scene corpora, gold lexicons and category norms.
//!
//! Corpus files hold one record per utterance:
//!
//! ```text
//! # comment
//! U: look at the monkey
//! S: VERTEBRATE MAMMAL
//!
//! U: ...
//! ```
//!
//! Norm files are headerless `word,category` CSV; a word listed on several lines
//! belongs to every listed category.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{stage_rng, STAGE_CORPUS};
use crate::{Error, Result, DEFAULT_CUE};

pub const ROOT_FEATURE: &str = "ANIMAL";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceScenePair {
    pub utterance: Vec<String>,
    pub scene: BTreeSet<String>,
}

fn valid_token(tok: &str) -> bool {
    !tok.is_empty() && !tok.chars().any(char::is_whitespace)
}

impl UtteranceScenePair {
    pub fn new<U, S>(utterance: U, scene: S) -> Result<Self>
    where
        U: IntoIterator,
        U::Item: Into<String>,
        S: IntoIterator,
        S::Item: Into<String>,
    {
        let utterance: Vec<String> = utterance.into_iter().map(Into::into).collect();
        let scene: BTreeSet<String> = scene.into_iter().map(Into::into).collect();
        if utterance.is_empty() {
            return Err(Error::invalid("utterance is empty"));
        }
        if scene.is_empty() {
            return Err(Error::invalid("scene is empty"));
        }
        if let Some(bad) = utterance
            .iter()
            .chain(scene.iter())
            .find(|t| !valid_token(t))
        {
            return Err(Error::invalid(format!("invalid token {bad:?}")));
        }
        Ok(Self { utterance, scene })
    }
}

/// Parses a corpus in the `U:`/`S:` record format.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Vec<UtteranceScenePair>> {
    let mut pairs = Vec::new();
    let mut pending: Option<(usize, Vec<String>)> = None;
    let mut last_line = 0;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line?;
        let line = line.trim_end();
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if let Some((start, _)) = pending {
                return Err(Error::parse(
                    lineno,
                    format!("empty line inside record started at line {start}"),
                ));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("U:") {
            if let Some((start, _)) = pending {
                return Err(Error::parse(
                    lineno,
                    format!("utterance at line {start} has no scene"),
                ));
            }
            let tokens: Vec<String> = rest.split_whitespace().map(str::to_owned).collect();
            if tokens.is_empty() {
                return Err(Error::parse(lineno, "empty utterance"));
            }
            pending = Some((lineno, tokens));
        } else if let Some(rest) = line.strip_prefix("S:") {
            let Some((_, utterance)) = pending.take() else {
                return Err(Error::parse(lineno, "scene without a preceding utterance"));
            };
            let scene: BTreeSet<String> = rest.split_whitespace().map(str::to_owned).collect();
            if scene.is_empty() {
                return Err(Error::parse(lineno, "empty scene"));
            }
            pairs.push(UtteranceScenePair { utterance, scene });
        } else {
            return Err(Error::parse(lineno, format!("unrecognized line {line:?}")));
        }
    }
    if let Some((start, _)) = pending {
        return Err(Error::parse(
            last_line,
            format!("utterance at line {start} has no scene"),
        ));
    }
    Ok(pairs)
}

pub fn write_corpus<W: Write>(mut writer: W, pairs: &[UtteranceScenePair]) -> Result<()> {
    for pair in pairs {
        writeln!(writer, "U: {}", pair.utterance.join(" "))?;
        let scene: Vec<&str> = pair.scene.iter().map(String::as_str).collect();
        writeln!(writer, "S: {}", scene.join(" "))?;
        writeln!(writer)?;
    }
    Ok(())
}

/// Word to category-label sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryNorms {
    pub categories: BTreeMap<String, BTreeSet<String>>,
}

impl CategoryNorms {
    pub fn insert(&mut self, word: impl Into<String>, category: impl Into<String>) {
        self.categories
            .entry(word.into())
            .or_default()
            .insert(category.into());
    }

    pub fn get(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.categories.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.categories.contains_key(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    /// Members of each category label.
    pub fn extensions(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (word, cats) in &self.categories {
            for cat in cats {
                out.entry(cat.as_str()).or_default().insert(word.as_str());
            }
        }
        out
    }
}

pub fn parse_norms<R: BufRead>(reader: R) -> Result<CategoryNorms> {
    let mut norms = CategoryNorms::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                idx + 1,
                format!("expected 2 fields (word,category), found {}", fields.len()),
            ));
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(Error::parse(idx + 1, "empty word or category"));
        }
        norms.insert(fields[0], fields[1]);
    }
    Ok(norms)
}

pub fn write_norms<W: Write>(mut writer: W, norms: &CategoryNorms) -> Result<()> {
    for (word, cats) in &norms.categories {
        for cat in cats {
            writeln!(writer, "{word},{cat}")?;
        }
    }
    Ok(())
}

/// True meanings of the words a synthetic corpus was generated from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldLexicon {
    pub entries: BTreeMap<String, BTreeSet<String>>,
    pub animal_words: BTreeSet<String>,
    pub cue_word: String,
    pub root_feature: String,
}

impl GoldLexicon {
    pub fn features(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(word)
    }

    pub fn validate(&self) -> Result<()> {
        for (word, feats) in &self.entries {
            if feats.is_empty() {
                return Err(Error::invalid(format!("word {word} has no gold features")));
            }
        }
        for word in &self.animal_words {
            let feats = self
                .entries
                .get(word)
                .ok_or_else(|| Error::not_found("gold entry", word.clone()))?;
            if !feats.contains(&self.root_feature) {
                return Err(Error::invalid(format!(
                    "animal word {word} lacks root feature {}",
                    self.root_feature
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_categories: usize,
    pub words_per_category: usize,
    pub features_per_category: usize,
    pub word_specific_features: usize,
    /// Features shared by every animal word and by the cue; the first is the
    /// lexicon's root feature.
    pub root_features: usize,
    pub n_pairs: usize,
    pub utterance_len_range: (usize, usize),
    /// Probability that a scene also shows the referents of an unmentioned word.
    pub distractor_rate: f64,
    /// Per-feature drop probability, and probability of one spurious feature.
    pub scene_noise_rate: f64,
    pub seed: u64,
    /// Non-animal vocabulary size; each filler word owns a disjoint feature pool.
    pub filler_words: usize,
    pub filler_features: usize,
    /// Per-slot probability of the cue word.
    pub cue_rate: f64,
    /// Per-slot probability of an animal word, given the slot is not the cue.
    pub animal_rate: f64,
    /// Probability that an animal word carries a second category label in the norms.
    pub multi_membership_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_categories: 7,
            words_per_category: 10,
            features_per_category: 4,
            word_specific_features: 1,
            root_features: 3,
            n_pairs: 120_000,
            utterance_len_range: (1, 2),
            distractor_rate: 0.0,
            scene_noise_rate: 0.0,
            seed: 1,
            filler_words: 20,
            filler_features: 2,
            cue_rate: 0.05,
            animal_rate: 0.25,
            multi_membership_rate: 0.2,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_categories", self.n_categories),
            ("words_per_category", self.words_per_category),
            ("features_per_category", self.features_per_category),
            ("word_specific_features", self.word_specific_features),
            ("root_features", self.root_features),
            ("n_pairs", self.n_pairs),
            ("utterance_len_range.0", self.utterance_len_range.0),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        let rates = [
            ("distractor_rate", self.distractor_rate),
            ("scene_noise_rate", self.scene_noise_rate),
            ("cue_rate", self.cue_rate),
            ("animal_rate", self.animal_rate),
            ("multi_membership_rate", self.multi_membership_rate),
        ];
        for (name, v) in rates {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        let (lo, hi) = self.utterance_len_range;
        if lo > hi {
            return Err(Error::invalid("utterance_len_range min exceeds max"));
        }
        if self.filler_words > 0 && self.filler_features == 0 {
            return Err(Error::invalid("filler_features must be at least 1"));
        }
        let vocab = self.n_categories * self.words_per_category + self.filler_words + 1;
        if hi > vocab {
            return Err(Error::invalid(format!(
                "utterances of {hi} distinct words need a larger vocabulary than {vocab}"
            )));
        }
        if self.filler_words == 0 && self.animal_rate == 0.0 && self.cue_rate < 1.0 {
            return Err(Error::invalid(
                "no word source: animal_rate is 0 and there are no fillers",
            ));
        }
        if self.n_categories < 2 && self.multi_membership_rate > 0.0 {
            return Err(Error::invalid(
                "multi-membership needs at least 2 categories",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub lexicon: GoldLexicon,
    pub norms: CategoryNorms,
    pub pairs: Vec<UtteranceScenePair>,
}

pub fn category_label(category: usize) -> String {
    format!("group{category}")
}

/// Generates a corpus whose animal vocabulary has a three-tier feature hierarchy:
/// the root feature, per-category features, and per-word features.
pub fn generate_synthetic_corpus(config: &SynthConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = stage_rng(config.seed, STAGE_CORPUS, 0);

    let mut entries: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut animal_words = BTreeSet::new();
    let mut norms = CategoryNorms::default();
    let mut animals: Vec<String> = Vec::new();

    let roots: Vec<String> = (0..config.root_features)
        .map(|i| match i {
            0 => ROOT_FEATURE.to_owned(),
            _ => format!("{ROOT_FEATURE}_{i}"),
        })
        .collect();
    let width = digits(config.words_per_category);
    for cat in 0..config.n_categories {
        for idx in 0..config.words_per_category {
            let word = format!("a{cat}_{idx:0width$}");
            let mut feats: BTreeSet<String> = roots.iter().cloned().collect();
            for f in 0..config.features_per_category {
                feats.insert(format!("C{cat}_F{f}"));
            }
            for f in 0..config.word_specific_features {
                feats.insert(format!("W{cat}_{idx:0width$}_F{f}"));
            }
            entries.insert(word.clone(), feats);
            animal_words.insert(word.clone());
            norms.insert(word.clone(), category_label(cat));
            if rng.gen::<f64>() < config.multi_membership_rate {
                let other = (cat + rng.gen_range(1..config.n_categories)) % config.n_categories;
                norms.insert(word.clone(), category_label(other));
            }
            animals.push(word);
        }
    }

    let cue = DEFAULT_CUE.to_owned();
    entries.insert(cue.clone(), roots.iter().cloned().collect());

    let fwidth = digits(config.filler_words);
    let mut fillers = Vec::with_capacity(config.filler_words);
    for idx in 0..config.filler_words {
        let word = format!("x{idx:0fwidth$}");
        let feats = (0..config.filler_features)
            .map(|f| format!("X{idx:0fwidth$}_F{f}"))
            .collect();
        entries.insert(word.clone(), feats);
        fillers.push(word);
    }

    let feature_pool: Vec<String> = entries
        .values()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let distractor_pool: Vec<&String> = animals.iter().chain(fillers.iter()).collect();

    let (lo, hi) = config.utterance_len_range;
    let mut pairs = Vec::with_capacity(config.n_pairs);
    for _ in 0..config.n_pairs {
        let len = rng.gen_range(lo..=hi);
        let mut utterance: Vec<String> = Vec::with_capacity(len);
        while utterance.len() < len {
            let roll: f64 = rng.gen();
            let word = if roll < config.cue_rate {
                &cue
            } else if fillers.is_empty() || rng.gen::<f64>() < config.animal_rate {
                animals.choose(&mut rng).expect("at least one animal word")
            } else {
                fillers.choose(&mut rng).expect("fillers checked non-empty")
            };
            if !utterance.contains(word) {
                utterance.push(word.clone());
            }
        }

        let mut scene: BTreeSet<String> = utterance
            .iter()
            .flat_map(|w| entries[w].iter().cloned())
            .collect();
        if config.distractor_rate > 0.0 && rng.gen::<f64>() < config.distractor_rate {
            let candidates: Vec<&&String> = distractor_pool
                .iter()
                .filter(|w| !utterance.contains(w))
                .collect();
            if let Some(w) = candidates.choose(&mut rng) {
                scene.extend(entries[w.as_str()].iter().cloned());
            }
        }
        if config.scene_noise_rate > 0.0 {
            let original: Vec<String> = scene.iter().cloned().collect();
            scene.retain(|_| rng.gen::<f64>() >= config.scene_noise_rate);
            if rng.gen::<f64>() < config.scene_noise_rate {
                scene.insert(
                    feature_pool
                        .choose(&mut rng)
                        .expect("non-empty pool")
                        .clone(),
                );
            }
            if scene.is_empty() {
                scene.insert(original.choose(&mut rng).expect("non-empty scene").clone());
            }
        }
        pairs.push(UtteranceScenePair { utterance, scene });
    }

    let lexicon = GoldLexicon {
        entries,
        animal_words,
        cue_word: cue,
        root_feature: ROOT_FEATURE.to_owned(),
    };
    Ok(SyntheticCorpus {
        lexicon,
        norms,
        pairs,
    })
}

fn digits(n: usize) -> usize {
    n.saturating_sub(1).max(1).to_string().len()
}

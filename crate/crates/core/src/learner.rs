//! Incremental cross-situational word learner.
//!
//! For a pair processed at time `t`, each scene feature `f` is aligned to the
//! utterance words in proportion to the current meaning probabilities:
//!
//! ```text
//! align(f, w) = P_{t-1}(f|w) / sum_{w' in u} P_{t-1}(f|w')
//! ```
//!
//! Meanings are the normalised accumulated alignments:
//!
//! ```text
//! P_t(f|w) = sum_{pairs} align(f, w) / sum_{f' in M_t} sum_{pairs} align(f', w)
//! ```
//!
//! The numerator sums and their per-word totals are the only state kept; nothing
//! is recomputed from history. A word/feature cell that has never received
//! alignment mass uses the uniform prior `1 / (|M_t| + 1)`, where `M_t` includes
//! the features of the pair being processed.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::UtteranceScenePair;
use crate::vector::SparseVec;
use crate::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Default)]
pub struct Interner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(id) = self.ids.get(name) {
            return *id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Alignment probabilities for one pair: `probs[i][j]` aligns `features[i]` with `words[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentTable {
    pub words: Vec<String>,
    pub features: Vec<String>,
    pub probs: Vec<Vec<f64>>,
}

impl AlignmentTable {
    pub fn get(&self, feature: &str, word: &str) -> Option<f64> {
        let i = self.features.iter().position(|f| f == feature)?;
        let j = self.words.iter().position(|w| w == word)?;
        Some(self.probs[i][j])
    }
}

#[derive(Debug, Clone, Default)]
pub struct LearnerState {
    words: Interner,
    features: Interner,
    assoc: Vec<HashMap<u32, Compensated>>,
    totals: Vec<Compensated>,
    t: u64,
}

impl LearnerState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of pairs processed.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn words(&self) -> &Interner {
        &self.words
    }

    pub fn features(&self) -> &Interner {
        &self.features
    }

    pub fn knows(&self, word: &str) -> bool {
        self.words.get(word).is_some()
    }

    /// `P(f|w)` for a stored cell.
    pub fn prob(&self, word: &str, feature: &str) -> Option<f64> {
        let w = self.words.get(word)?;
        let f = self.features.get(feature)?;
        self.prob_ids(w, f)
    }

    fn prob_ids(&self, w: u32, f: u32) -> Option<f64> {
        let cell = self.assoc.get(w as usize)?.get(&f)?;
        Some(cell.value() / self.totals[w as usize].value())
    }

    /// Accumulated alignment mass for a word/feature cell.
    pub fn assoc(&self, word: &str, feature: &str) -> f64 {
        match (self.words.get(word), self.features.get(feature)) {
            (Some(w), Some(f)) => self.assoc[w as usize]
                .get(&f)
                .map_or(0.0, Compensated::value),
            _ => 0.0,
        }
    }

    pub fn assoc_total(&self, word: &str) -> f64 {
        self.words
            .get(word)
            .map_or(0.0, |w| self.totals[w as usize].value())
    }

    /// Computes alignments for `pair` from the current meanings without changing state.
    pub fn align(&self, pair: &UtteranceScenePair) -> AlignmentTable {
        let novel = pair
            .scene
            .iter()
            .filter(|f| self.features.get(f).is_none())
            .count();
        let prior = 1.0 / (self.features.len() + novel + 1) as f64;

        let word_ids: Vec<Option<u32>> = pair.utterance.iter().map(|w| self.words.get(w)).collect();
        let mut probs = Vec::with_capacity(pair.scene.len());
        for feature in &pair.scene {
            let f = self.features.get(feature);
            let row: Vec<f64> = word_ids
                .iter()
                .map(|w| match (w, f) {
                    (Some(w), Some(f)) => self.prob_ids(*w, f).unwrap_or(prior),
                    _ => prior,
                })
                .collect();
            let mut denom = Compensated::default();
            row.iter().for_each(|&p| denom.add(p));
            let denom = denom.value();
            probs.push(row.into_iter().map(|p| p / denom).collect());
        }
        AlignmentTable {
            words: pair.utterance.clone(),
            features: pair.scene.iter().cloned().collect(),
            probs,
        }
    }

    /// Adds the alignment mass of one pair to the stored sums.
    pub fn update_meanings(&mut self, table: &AlignmentTable) {
        let word_ids: Vec<u32> = table.words.iter().map(|w| self.intern_word(w)).collect();
        for (i, feature) in table.features.iter().enumerate() {
            let f = self.features.intern(feature);
            for (j, &w) in word_ids.iter().enumerate() {
                let a = table.probs[i][j];
                self.assoc[w as usize].entry(f).or_default().add(a);
                self.totals[w as usize].add(a);
            }
        }
        self.t += 1;
    }

    fn intern_word(&mut self, word: &str) -> u32 {
        let id = self.words.intern(word);
        if id as usize == self.assoc.len() {
            self.assoc.push(HashMap::new());
            self.totals.push(Compensated::default());
        }
        id
    }

    /// One online step: align, then update. Returns the ids of the words touched.
    pub fn process_pair(&mut self, pair: &UtteranceScenePair) -> Vec<u32> {
        let table = self.align(pair);
        self.update_meanings(&table);
        table
            .words
            .iter()
            .map(|w| self.words.get(w).expect("interned by update"))
            .collect()
    }

    pub fn process_corpus<'a, I>(&mut self, pairs: I)
    where
        I: IntoIterator<Item = &'a UtteranceScenePair>,
    {
        for pair in pairs {
            self.process_pair(pair);
        }
    }

    /// `P(.|w)` keyed by feature name.
    pub fn meaning(&self, word: &str) -> Result<BTreeMap<String, f64>> {
        let w = self
            .words
            .get(word)
            .ok_or_else(|| Error::not_found("word", word))?;
        let total = self.totals[w as usize].value();
        Ok(self.assoc[w as usize]
            .iter()
            .map(|(&f, a)| (self.features.name(f).to_owned(), a.value() / total))
            .collect())
    }

    /// Meaning of a word as a sparse vector over feature ids.
    pub fn sparse_vector(&self, word_id: u32) -> SparseVec {
        let total = self.totals[word_id as usize].value();
        SparseVec::from_entries(
            self.assoc[word_id as usize]
                .iter()
                .map(|(&f, a)| (f, a.value() / total))
                .collect(),
        )
    }

    /// Dense meaning vector over `feature_index`; features the word lacks are 0.
    pub fn meaning_vector(&self, word: &str, feature_index: &[String]) -> Result<Vec<f64>> {
        let meaning = self.meaning(word)?;
        Ok(feature_index
            .iter()
            .map(|f| meaning.get(f).copied().unwrap_or(0.0))
            .collect())
    }

    pub fn snapshot(&self, mode: Option<&str>) -> LearnedMeanings {
        let meanings = self
            .words
            .names()
            .iter()
            .map(|w| (w.clone(), self.meaning(w).expect("known word")))
            .collect();
        LearnedMeanings {
            t: self.t,
            mode: mode.map(str::to_owned),
            meanings,
        }
    }
}

/// Serializable learned meanings: `{t, mode, meanings: {word: {feature: prob}}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedMeanings {
    pub t: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub meanings: BTreeMap<String, BTreeMap<String, f64>>,
}

impl LearnedMeanings {
    pub fn contains(&self, word: &str) -> bool {
        self.meanings.contains_key(word)
    }

    pub fn meaning_vector(&self, word: &str, feature_index: &[String]) -> Result<Vec<f64>> {
        let meaning = self
            .meanings
            .get(word)
            .ok_or_else(|| Error::not_found("word", word))?;
        Ok(feature_index
            .iter()
            .map(|f| meaning.get(f).copied().unwrap_or(0.0))
            .collect())
    }

    /// Sparse vectors for `words` over a shared feature indexing.
    pub fn vectors<'a, I>(&self, words: I) -> Result<MeaningVectors>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut features = Interner::default();
        let mut out = MeaningVectors::default();
        let mut missing = Vec::new();
        for word in words {
            let Some(meaning) = self.meanings.get(word) else {
                missing.push(word.to_owned());
                continue;
            };
            let v = SparseVec::from_entries(
                meaning
                    .iter()
                    .map(|(f, &p)| (features.intern(f), p))
                    .collect(),
            );
            out.index.insert(word.to_owned(), out.vectors.len());
            out.vectors.push(v);
        }
        if !missing.is_empty() {
            return Err(Error::MissingWords(missing));
        }
        Ok(out)
    }
}

/// Word vectors sharing one feature indexing.
#[derive(Debug, Clone, Default)]
pub struct MeaningVectors {
    index: BTreeMap<String, usize>,
    vectors: Vec<SparseVec>,
}

impl MeaningVectors {
    pub fn get(&self, word: &str) -> Option<&SparseVec> {
        self.index.get(word).map(|&i| &self.vectors[i])
    }

    pub fn cosine(&self, a: &str, b: &str) -> Result<f64> {
        let va = self.get(a).ok_or_else(|| Error::not_found("word", a))?;
        let vb = self.get(b).ok_or_else(|| Error::not_found("word", b))?;
        va.cosine(vb)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pair(u: &[&str], s: &[&str]) -> UtteranceScenePair {
        UtteranceScenePair::new(u.iter().copied(), s.iter().copied()).unwrap()
    }

    /// State with P(f1|w1) = 0.3 and P(f1|w2) = 0.1.
    fn seeded_state() -> LearnerState {
        let mut st = LearnerState::new();
        st.update_meanings(&AlignmentTable {
            words: vec!["w1".into()],
            features: vec!["f1".into(), "g".into()],
            probs: vec![vec![0.3], vec![0.7]],
        });
        st.update_meanings(&AlignmentTable {
            words: vec!["w2".into()],
            features: vec!["f1".into(), "g".into()],
            probs: vec![vec![0.1], vec![0.9]],
        });
        st
    }

    #[test]
    fn single_candidate_takes_all() {
        let st = seeded_state();
        let table = st.align(&pair(&["w1"], &["f1"]));
        assert_eq!(table.probs, vec![vec![1.0]]);
        let table = LearnerState::new().align(&pair(&["zz"], &["qq"]));
        assert_eq!(table.probs, vec![vec![1.0]]);
    }

    #[test]
    fn equal_meanings_split_evenly() {
        let table = LearnerState::new().align(&pair(&["w1", "w2"], &["f1"]));
        assert_abs_diff_eq!(table.get("f1", "w1").unwrap(), 0.5);
        assert_abs_diff_eq!(table.get("f1", "w2").unwrap(), 0.5);
    }

    #[test]
    fn alignment_is_the_probability_quotient() {
        let st = seeded_state();
        assert_abs_diff_eq!(st.prob("w1", "f1").unwrap(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(st.prob("w2", "f1").unwrap(), 0.1, epsilon = 1e-15);
        let table = st.align(&pair(&["w1", "w2"], &["f1"]));
        assert_abs_diff_eq!(table.get("f1", "w1").unwrap(), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(table.get("f1", "w2").unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn unseen_cells_use_the_uniform_prior() {
        // |M_t| = 2 stored + 1 novel feature; prior = 1/4 against P(f1|w1) = 0.3
        let st = seeded_state();
        let table = st.align(&pair(&["w1", "new"], &["f1", "h"]));
        assert_abs_diff_eq!(table.get("f1", "w1").unwrap(), 0.3 / 0.55, epsilon = 1e-12);
        assert_abs_diff_eq!(table.get("h", "w1").unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn first_updates() {
        let mut st = LearnerState::new();
        st.process_pair(&pair(&["w1"], &["f1"]));
        assert_eq!(st.prob("w1", "f1"), Some(1.0));

        let mut st = LearnerState::new();
        st.process_pair(&pair(&["w1"], &["f1", "f2"]));
        assert_abs_diff_eq!(st.prob("w1", "f1").unwrap(), 0.5);
        assert_abs_diff_eq!(st.prob("w1", "f2").unwrap(), 0.5);
        assert_eq!(st.t(), 1);
    }

    #[test]
    fn two_pair_corpus_by_hand() {
        // pair 1: all four cells align 0.5, so P(f|w) = 0.5 everywhere.
        // pair 2: w1 alone with f1 adds 1.0 to (w1, f1).
        // P(f1|w1) = (0.5 + 1) / (0.5 + 0.5 + 1) = 0.75
        let mut st = LearnerState::new();
        st.process_pair(&pair(&["w1", "w2"], &["f1", "f2"]));
        st.process_pair(&pair(&["w1"], &["f1"]));
        assert_abs_diff_eq!(st.prob("w1", "f1").unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(st.prob("w1", "f2").unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn meaning_vector_contract() {
        let mut st = LearnerState::new();
        st.process_pair(&pair(&["w1"], &["f1"]));
        let idx = vec!["f1".to_string(), "f2".to_string()];
        assert_eq!(st.meaning_vector("w1", &idx).unwrap(), vec![1.0, 0.0]);
        let rev = vec!["f2".to_string(), "f1".to_string()];
        assert_eq!(st.meaning_vector("w1", &rev).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(
            st.meaning_vector("nope", &idx),
            Err(Error::NotFound { .. })
        ));
    }

    #[test]
    fn snapshot_round_trips_through_json() {
        let mut st = LearnerState::new();
        st.process_pair(&pair(&["a", "b"], &["x", "y"]));
        st.process_pair(&pair(&["a"], &["x"]));
        let snap = st.snapshot(Some("batch"));
        let json = serde_json::to_string(&snap).unwrap();
        let back: LearnedMeanings = serde_json::from_str(&json).unwrap();
        assert_eq!(back, snap);
        assert_eq!(back.t, 2);
        let vecs = back.vectors(["a", "b"]).unwrap();
        assert!(vecs.cosine("a", "b").unwrap() > 0.0);
        assert!(matches!(back.vectors(["a", "c"]), Err(Error::MissingWords(w)) if w == ["c"]));
    }
}

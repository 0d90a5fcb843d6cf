//! Patch-switch analysis of retrieval sequences.
//!
//! Two patch models are supported. Under the associative model a switch occurs
//! when a word shares no category with the previous word. Under the categorical
//! model a patch carries the intersection of its members' category sets, and a
//! switch occurs when the next word would empty that intersection. Every
//! associative switch is therefore also a categorical one; categorical switches
//! that are not associative are "categorical-only".
//!
//! Patch entry positions follow the usual convention: `1` is the IRT of the
//! first item of a patch (the switch), `2, 3, ...` are later items of the same
//! patch, and `-1, -2, ...` count backwards from the last item before a switch.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::CategoryNorms;
use crate::learner::MeaningVectors;
use crate::stats::{self, MeanSem, TTest};
use crate::walker::{Retrieval, WalkRecord};
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MAX_POSITION: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PatchModel {
    #[default]
    Associative,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchAnnotation {
    pub word: String,
    pub irt: Option<usize>,
    pub is_associative_switch: bool,
    pub is_categorical_switch: bool,
    pub is_categorical_only: bool,
    /// Patch index under the chosen model; `None` for the cue word.
    pub patch: Option<usize>,
    /// Walk step at which the word was first visited.
    pub step: usize,
}

/// Labels each retrieval with switch flags and a patch id.
///
/// The cue word takes no part in the patch logic, but its transitions still
/// count toward IRTs of the following retrievals.
pub fn annotate_switches(
    retrievals: &[Retrieval],
    norms: &CategoryNorms,
    model: PatchModel,
    cue: Option<&str>,
) -> Result<Vec<SwitchAnnotation>> {
    let mut out = Vec::with_capacity(retrievals.len());
    let mut step = 0usize;
    let mut prev: Option<&BTreeSet<String>> = None;
    let mut patch_cats: BTreeSet<String> = BTreeSet::new();
    let mut patch: Option<usize> = None;

    for r in retrievals {
        step += r.irt.unwrap_or(0);
        if Some(r.word.as_str()) == cue {
            out.push(SwitchAnnotation {
                word: r.word.clone(),
                irt: r.irt,
                is_associative_switch: false,
                is_categorical_switch: false,
                is_categorical_only: false,
                patch: None,
                step,
            });
            continue;
        }
        let cats = norms
            .get(&r.word)
            .ok_or_else(|| Error::not_found("word in norms", r.word.clone()))?;

        let (assoc, categorical) = match prev {
            None => (false, false),
            Some(p) => {
                let assoc = p.is_disjoint(cats);
                let shared: BTreeSet<String> = patch_cats.intersection(cats).cloned().collect();
                let categorical = shared.is_empty();
                if !categorical {
                    patch_cats = shared;
                }
                (assoc, categorical)
            }
        };
        if prev.is_none() || categorical {
            patch_cats = cats.clone();
        }
        let new_patch = match model {
            PatchModel::Associative => assoc,
            PatchModel::Categorical => categorical,
        };
        patch = match patch {
            None => Some(0),
            Some(p) if new_patch => Some(p + 1),
            same => same,
        };
        out.push(SwitchAnnotation {
            word: r.word.clone(),
            irt: r.irt,
            is_associative_switch: assoc,
            is_categorical_switch: categorical,
            is_categorical_only: categorical && !assoc,
            patch,
            step,
        });
        prev = Some(cats);
    }
    Ok(out)
}

pub fn annotate_walks(
    walks: &[WalkRecord],
    norms: &CategoryNorms,
    model: PatchModel,
    cue: Option<&str>,
) -> Result<Vec<Vec<SwitchAnnotation>>> {
    walks
        .iter()
        .map(|w| annotate_switches(&w.retrievals, norms, model, cue))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProfileValue {
    #[default]
    Irt,
    Cosine,
}

/// Raw per-position samples pooled over a walk set, plus the long-term mean of
/// the value over every transition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PositionSamples {
    pub long_term_mean: f64,
    pub samples: BTreeMap<i32, Vec<f64>>,
    /// Every transition value used for the long-term mean.
    pub all: Vec<f64>,
}

/// Patch entry positions of each annotated retrieval that has a predecessor.
fn positions(walk: &[SwitchAnnotation], max_position: usize) -> Vec<(usize, Vec<i32>)> {
    let items: Vec<usize> = (0..walk.len())
        .filter(|&i| walk[i].patch.is_some())
        .collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start < items.len() {
        let p = walk[items[start]].patch;
        let mut end = start;
        while end + 1 < items.len() && walk[items[end + 1]].patch == p {
            end += 1;
        }
        let len = end - start + 1;
        let entered_by_switch = start > 0;
        let closed_by_switch = end + 1 < items.len();
        for off in 0..len {
            let mut labels = Vec::new();
            if off == 0 {
                if entered_by_switch {
                    labels.push(1);
                }
            } else if off < max_position {
                labels.push(off as i32 + 1);
            }
            if closed_by_switch && off > 0 {
                let back = len - off;
                if back <= max_position {
                    labels.push(-(back as i32));
                }
            }
            if !labels.is_empty() {
                out.push((items[start + off], labels));
            }
        }
        start = end + 1;
    }
    out
}

/// Collects IRT or cosine samples by patch entry position.
pub fn position_samples(
    annotations: &[Vec<SwitchAnnotation>],
    value: ProfileValue,
    vectors: Option<&MeaningVectors>,
    max_position: usize,
) -> Result<PositionSamples> {
    let vectors = match (value, vectors) {
        (ProfileValue::Cosine, None) => {
            return Err(Error::invalid("cosine profile requires meaning vectors"))
        }
        (_, v) => v,
    };
    let mut out = PositionSamples::default();
    for walk in annotations {
        let values: Vec<Option<f64>> = match value {
            ProfileValue::Irt => walk.iter().map(|a| a.irt.map(|x| x as f64)).collect(),
            ProfileValue::Cosine => {
                let vectors = vectors.expect("checked above");
                let mut vals = vec![None; walk.len()];
                let mut prev: Option<&str> = None;
                for (i, a) in walk.iter().enumerate() {
                    if a.patch.is_none() {
                        continue;
                    }
                    if let Some(p) = prev {
                        vals[i] = Some(vectors.cosine(p, &a.word)?);
                    }
                    prev = Some(&a.word);
                }
                vals
            }
        };
        out.all.extend(values.iter().flatten());
        for (idx, labels) in positions(walk, max_position) {
            if let Some(v) = values[idx] {
                for l in labels {
                    out.samples.entry(l).or_default().push(v);
                }
            }
        }
    }
    out.long_term_mean = if out.all.is_empty() {
        0.0
    } else {
        stats::mean(&out.all)
    };
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionStat {
    pub mean_ratio: f64,
    pub sem: f64,
    pub n: usize,
}

pub type Profile = BTreeMap<i32, PositionStat>;

/// Per-position means normalised by the long-term mean; empty positions are omitted.
pub fn profile_from_samples(samples: &PositionSamples) -> Profile {
    let base = samples.long_term_mean;
    samples
        .samples
        .iter()
        .filter(|(_, xs)| !xs.is_empty() && base > 0.0)
        .map(|(&pos, xs)| {
            (
                pos,
                PositionStat {
                    mean_ratio: stats::mean(xs) / base,
                    sem: stats::sem(xs) / base,
                    n: xs.len(),
                },
            )
        })
        .collect()
}

pub fn patch_position_profile(
    annotations: &[Vec<SwitchAnnotation>],
    value: ProfileValue,
    vectors: Option<&MeaningVectors>,
    max_position: usize,
) -> Result<Profile> {
    Ok(profile_from_samples(&position_samples(
        annotations,
        value,
        vectors,
        max_position,
    )?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvtVerdict {
    pub adheres: bool,
    /// Too few samples at position 1 to run the test.
    pub indeterminate: bool,
    pub pos1_test: Option<TTest>,
    /// "Greater than the long-term mean" tests for every other position.
    /// Negative positions are reported but do not enter the verdict.
    pub position_tests: BTreeMap<i32, TTest>,
    pub monotonicity_ok: bool,
    pub long_term_mean: f64,
}

/// Checks the marginal-value-theorem pattern: position 1 significantly above
/// the long-term mean, no within-patch position `2..` significantly above it,
/// and non-decreasing means over those positions.
pub fn mvt_adherence(samples: &PositionSamples, alpha: f64) -> MvtVerdict {
    let mean_ref = samples.long_term_mean;
    let pos1 = samples
        .samples
        .get(&1)
        .filter(|xs| xs.len() >= 2)
        .and_then(|xs| stats::one_sided_t_test(xs, mean_ref).ok());

    let mut position_tests = BTreeMap::new();
    for (&pos, xs) in &samples.samples {
        if pos == 1 || xs.len() < 2 {
            continue;
        }
        if let Ok(t) = stats::one_sided_t_test(xs, mean_ref) {
            position_tests.insert(pos, t);
        }
    }

    let within: Vec<f64> = samples
        .samples
        .range(2..)
        .filter(|(_, xs)| xs.len() >= 2)
        .map(|(_, xs)| stats::mean(xs))
        .collect();
    let monotonicity_ok = within.windows(2).all(|w| w[1] >= w[0]);

    let indeterminate = pos1.is_none();
    let pos1_ok = pos1.is_some_and(|t| t.p < alpha);
    let others_ok = position_tests.range(2..).all(|(_, t)| t.p >= alpha);
    MvtVerdict {
        adheres: !indeterminate && pos1_ok && others_ok && monotonicity_ok,
        indeterminate,
        pos1_test: pos1,
        position_tests,
        monotonicity_ok,
        long_term_mean: mean_ref,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartileStat {
    pub associative_frac: f64,
    pub associative_sem: f64,
    pub categorical_only_frac: f64,
    pub categorical_only_sem: f64,
    pub categorical_frac: f64,
    /// Walks contributing at least one retrieval to this quartile.
    pub n_walks: usize,
}

/// How a walk is cut into quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum QuartileBasis {
    /// Four equal bins of the walk's steps.
    #[default]
    Step,
    /// Four equal bins of the walk's non-cue retrievals.
    Retrieval,
}

/// Per-quartile switch proportions: the fraction of non-cue retrievals in each
/// bin that are flagged as each switch type, averaged over walks.
/// `walk_lengths[i]` is the step count of walk `i` and is read only for
/// [`QuartileBasis::Step`].
pub fn quartile_switch_proportions(
    annotations: &[Vec<SwitchAnnotation>],
    walk_lengths: &[usize],
    basis: QuartileBasis,
) -> Result<[QuartileStat; 4]> {
    if basis == QuartileBasis::Step && walk_lengths.len() != annotations.len() {
        return Err(Error::invalid(format!(
            "{} walk lengths for {} annotated walks",
            walk_lengths.len(),
            annotations.len()
        )));
    }
    let mut assoc: [Vec<f64>; 4] = Default::default();
    let mut cat_only: [Vec<f64>; 4] = Default::default();
    let mut cat: [Vec<f64>; 4] = Default::default();
    for (w, walk) in annotations.iter().enumerate() {
        let items: Vec<&SwitchAnnotation> = walk.iter().filter(|a| a.patch.is_some()).collect();
        let n = items.len();
        let mut counts = [[0usize; 4]; 4];
        for (i, a) in items.iter().enumerate() {
            let q = match basis {
                QuartileBasis::Retrieval => i * 4 / n,
                QuartileBasis::Step => {
                    let len = walk_lengths[w];
                    if a.step >= len {
                        return Err(Error::invalid(format!(
                            "walk {w} has a retrieval beyond its {len} steps"
                        )));
                    }
                    a.step * 4 / len
                }
            };
            counts[q][0] += 1;
            counts[q][1] += usize::from(a.is_associative_switch);
            counts[q][2] += usize::from(a.is_categorical_only);
            counts[q][3] += usize::from(a.is_categorical_switch);
        }
        for q in 0..4 {
            let total = counts[q][0];
            if total == 0 {
                continue;
            }
            assoc[q].push(counts[q][1] as f64 / total as f64);
            cat_only[q].push(counts[q][2] as f64 / total as f64);
            cat[q].push(counts[q][3] as f64 / total as f64);
        }
    }
    Ok(std::array::from_fn(|q| {
        let or0 = |xs: &[f64]| if xs.is_empty() { 0.0 } else { stats::mean(xs) };
        QuartileStat {
            associative_frac: or0(&assoc[q]),
            associative_sem: stats::sem(&assoc[q]),
            categorical_only_frac: or0(&cat_only[q]),
            categorical_only_sem: stats::sem(&cat_only[q]),
            categorical_frac: or0(&cat[q]),
            n_walks: assoc[q].len(),
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchDurations {
    pub within_patch: Option<MeanSem>,
    pub associative: Option<MeanSem>,
    pub categorical_only: Option<MeanSem>,
}

/// Mean IRT by transition type. Only retrievals preceded by another non-cue
/// retrieval are classified; types without instances are reported as absent.
pub fn switch_type_durations(annotations: &[Vec<SwitchAnnotation>]) -> SwitchDurations {
    let (mut within, mut assoc, mut cat_only) = (Vec::new(), Vec::new(), Vec::new());
    for walk in annotations {
        let mut has_prev = false;
        for a in walk.iter().filter(|a| a.patch.is_some()) {
            if let (true, Some(irt)) = (has_prev, a.irt) {
                let irt = irt as f64;
                if a.is_associative_switch {
                    assoc.push(irt);
                } else if a.is_categorical_only {
                    cat_only.push(irt);
                } else {
                    within.push(irt);
                }
            }
            has_prev = true;
        }
    }
    SwitchDurations {
        within_patch: MeanSem::of(&within),
        associative: MeanSem::of(&assoc),
        categorical_only: MeanSem::of(&cat_only),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisParams {
    pub alpha: f64,
    pub max_position: usize,
    pub model: PatchModel,
    pub quartile_basis: QuartileBasis,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            max_position: DEFAULT_MAX_POSITION,
            model: PatchModel::Associative,
            quartile_basis: QuartileBasis::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub irt: Profile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cosine: Option<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchCounts {
    pub associative: usize,
    pub categorical_only: usize,
    pub categorical: usize,
    pub retrievals: usize,
}

/// Report JSON: `{mvt, profile: {irt, cosine}, quartiles, durations, ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluencyReport {
    pub mvt: MvtVerdict,
    pub profile: ProfileReport,
    pub quartile_basis: QuartileBasis,
    pub quartiles: [QuartileStat; 4],
    pub durations: SwitchDurations,
    pub switch_counts: SwitchCounts,
    pub mean_unique_words: f64,
    pub n_walks: usize,
}

pub fn count_switches(annotations: &[Vec<SwitchAnnotation>]) -> SwitchCounts {
    let flat = annotations.iter().flatten().filter(|a| a.patch.is_some());
    let mut c = SwitchCounts {
        associative: 0,
        categorical_only: 0,
        categorical: 0,
        retrievals: 0,
    };
    for a in flat {
        c.retrievals += 1;
        c.associative += usize::from(a.is_associative_switch);
        c.categorical_only += usize::from(a.is_categorical_only);
        c.categorical += usize::from(a.is_categorical_switch);
    }
    c
}

/// Full analysis of a walk set.
pub fn analyze_walks(
    walks: &[WalkRecord],
    norms: &CategoryNorms,
    cue: Option<&str>,
    vectors: Option<&MeaningVectors>,
    params: &AnalysisParams,
) -> Result<FluencyReport> {
    let annotations = annotate_walks(walks, norms, params.model, cue)?;
    let irt = position_samples(&annotations, ProfileValue::Irt, None, params.max_position)?;
    let cosine = match vectors {
        Some(v) => Some(profile_from_samples(&position_samples(
            &annotations,
            ProfileValue::Cosine,
            Some(v),
            params.max_position,
        )?)),
        None => None,
    };
    let lengths: Vec<usize> = walks.iter().map(|w| w.steps.len()).collect();
    let mean_unique_words = if walks.is_empty() {
        0.0
    } else {
        walks.iter().map(|w| w.unique_words() as f64).sum::<f64>() / walks.len() as f64
    };
    Ok(FluencyReport {
        mvt: mvt_adherence(&irt, params.alpha),
        profile: ProfileReport {
            irt: profile_from_samples(&irt),
            cosine,
        },
        quartile_basis: params.quartile_basis,
        quartiles: quartile_switch_proportions(&annotations, &lengths, params.quartile_basis)?,
        durations: switch_type_durations(&annotations),
        switch_counts: count_switches(&annotations),
        mean_unique_words,
        n_walks: walks.len(),
    })
}

/// MVT label for a walk set under the associative model.
pub fn mvt_label(
    walks: &[WalkRecord],
    norms: &CategoryNorms,
    cue: Option<&str>,
    alpha: f64,
) -> Result<bool> {
    let annotations = annotate_walks(walks, norms, PatchModel::Associative, cue)?;
    let samples = position_samples(&annotations, ProfileValue::Irt, None, DEFAULT_MAX_POSITION)?;
    Ok(mvt_adherence(&samples, alpha).adheres)
}

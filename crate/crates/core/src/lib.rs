//! Word learning, semantic networks and random-walk models of semantic fluency.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] reads utterance/scene corpora and category norms, and generates
//!   synthetic corpora with a known category structure.
//! * [`learner`] is an incremental cross-situational word learner.
//! * [`netbuild`] turns learned meanings into semantic networks, either after
//!   training ([`netbuild::build_batch_network`]) or during it
//!   ([`netbuild::IncrementalBuilder`]).
//! * [`walker`] runs weighted random walks from a cue word.
//! * [`fluency`] finds patch switches and checks retrieval-time profiles against
//!   the marginal value theorem.
//! * [`graphstats`] extracts structural and semantic network features.
//! * [`modelselect`] fits logistic regressions over feature subsets.
//! * [`pipeline`] wires the stages together for the command line.

pub mod corpus;
pub mod fluency;
pub mod graphstats;
pub mod learner;
pub mod modelselect;
pub mod netbuild;
pub mod network;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod vector;
pub mod walker;

mod error;

pub use error::{Error, Result};
pub use network::{NetworkMeta, NetworkMode, SemanticNetwork};

/// Word used to cue the fluency task and as the hypernym node in networks.
pub const DEFAULT_CUE: &str = "animal";

//! Event-specific ideology estimation and diversity-aware recommendation.
//!
//! The pipeline runs over a binary user–item share graph:
//!
//! 1. [`graph`] ingests share events and builds the graph.
//! 2. [`ideology`] places users and items on one standardized axis by
//!    correspondence analysis.
//! 3. [`recsys`] ranks unseen items with a popularity-penalized three-step
//!    random walk.
//! 4. [`diversify`] re-ranks the walk's pool for ideological spread inside a
//!    per-user acceptability window.
//! 5. [`eval`] measures accuracy and diversity on a holdout split, and
//!    [`synthgen`] produces polarized worlds with known positions to run it on.

pub mod diversify;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ideology;
pub mod recsys;
pub mod stats;
pub mod synthgen;

pub use diversify::{
    acceptability_filter, diversify_candidates, diversify_recommend, greedy_rerank, Candidate,
    DiversifyParams, Recommendation,
};
pub use error::{Error, Result};
pub use eval::{evaluate, holdout_split, MetricsReport, Split, SplitSpec};
pub use graph::{build_graph, parse_events, prune, InteractionEvent, InteractionGraph, ParsedEvents};
pub use ideology::{fit_ideology, AnchorSet, FitOptions, IdeologyModel, ModelFile};
pub use recsys::{p3_scores, recommend_topn, rp3b_scores, ScoredItem, WalkParams};
pub use synthgen::{generate, SynthDataset, SynthParams};

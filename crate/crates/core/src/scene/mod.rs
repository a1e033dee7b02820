//! Fuzzy-logic scene grounding: formulas over unary predicates evaluated on
//! object feature vectors, best-grounding search, predicate training and a
//! synthetic scene generator.

mod fuzzy;
mod generate;
mod ground;
mod model;
mod train;

use thiserror::Error;

use crate::algebra::ObjectId;

pub use fuzzy::{fuzzy_apply, Connective};
pub use generate::{
    evaluate_predicates, formula_grammar, generate_scene_corpus, random_scene, truth_predicates, truth_value,
    SceneGenConfig, FAITHFUL_THRESHOLD,
};
pub use ground::{
    corpus_objective, corpus_objective_capped, example_loss, formula_value, ground_best, scene_algebra,
    scene_signature, score_table, Attribute, Attributes, Formula, Scene, SceneExample, ATTRIBUTE_NAMES, OBJ, TRUTH,
};
pub use model::{logistic, PredicateModel, PredicateSet};
pub use train::{train, Compiled, TrainConfig, TrainResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("`{connective}` takes {expected} argument(s), found {found}")]
    ArityMismatch { connective: &'static str, expected: usize, found: usize },
    #[error("variable `{0}` is not grounded")]
    UnboundVariable(String),
    #[error("object {0} is not in the scene")]
    UnknownObject(ObjectId),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("no injective grounding exists")]
    NoGrounding,
    #[error("more than {cap} groundings")]
    CapExceeded { cap: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("loss is not finite")]
    NonFiniteLoss,
    #[error("generation stalled: {accepted} examples accepted after {attempts} attempts")]
    GenerationStalled { accepted: usize, attempts: usize },
    #[error("scene has no ground-truth labels")]
    MissingTruth,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("example {}: {source}", index + 1)]
    InExample {
        index: usize,
        #[source]
        source: Box<SceneError>,
    },
    #[error("{0}")]
    Invalid(String),
}

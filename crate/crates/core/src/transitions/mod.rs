//! Automatic transition labelling from score annotations, and its
//! validation against hand-labelled bars.

pub mod blacklist;
pub mod evaluate;
pub mod extract;

pub use blacklist::{classify_annotation, Blacklist};
pub use evaluate::{evaluate_labels, BarLabel, ConfusionMatrix, LabelEvaluation};
pub use extract::{
    extract_annotations, extract_transitions, tp_context_stats, ContextStats, ExtractConfig,
    ExtractError, Extraction,
};

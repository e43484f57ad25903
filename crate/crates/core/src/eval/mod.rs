//! Diversity and quality evaluation.

mod bleu;
mod easl;
mod quality;
mod stats;

pub use bleu::{modified_bleu, unigram_precision, BleuStats, MAX_ORDER};
pub use easl::{
    annotations_to_tsv, easl_aggregate, fluency_rate, parse_annotations, AnnotationRecord, EaslParams, EaslReport,
    FluencyFlag, ItemScore,
};
pub use quality::{
    featurize, train_regression, RegressionModel, ScorerContext, FEATURE_COUNT, FEATURE_NAMES,
};
pub use stats::{average_ranks, pearson, spearman};

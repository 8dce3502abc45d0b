//! Scoring ranked predictions and the analysis cuts built on top.

pub mod bins;
pub mod expert;
pub mod metrics;
pub mod report;
pub mod stability;

pub use bins::{bin_by_answer_length, LengthBin};
pub use expert::{
    expert_rescore, load_annotations, read_annotations, ConfusionRow, ConfusionTable, ExpertAnnotation, ExpertRescore,
};
pub use metrics::{aggregate, hit_at_k, score_predictions, EvalMetadata, EvalReport, QueryHits, RelationScore};
pub use report::{LayerSweepRow, MaskRatioRow};
pub use stability::{mean_std, stability_summary, step_curves, MacroCurveRow, MeanStd, StabilitySummary, StepCurveRow};

/// Default answer-length bin edges, in characters.
pub const DEFAULT_LENGTH_EDGES: [usize; 5] = [10, 20, 30, 40, 50];

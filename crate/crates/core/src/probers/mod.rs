//! Probing strategies. Each turns a cloze query into a ranked candidate list.
//!
//! | strategy | needs | search space |
//! |---|---|---|
//! | [`contrastive_probe`] | [`Encoder`](crate::encoders::Encoder) + [`EntityIndex`] | KG entities |
//! | [`mask_predict`] | [`MaskedLm`](crate::encoders::MaskedLm) | MLM vocabulary |
//! | [`mask_average_rank`] | [`MaskedLm`](crate::encoders::MaskedLm) + candidates | KG entities |
//! | [`generate_probe`] | [`Generator`](crate::encoders::Generator) | free text |

pub mod contrastive;
pub mod generate;
pub mod index;
pub mod mask_average;
pub mod mask_predict;
pub mod predictions;

pub use contrastive::{contrastive_probe, contrastive_probe_scoped, rank_by_cosine, relation_scopes, CandidateScope};
pub use generate::generate_probe;
pub use index::{build_entity_index, load_entities, EntityIndex};
pub use mask_average::{mask_average_rank, MaskAverageOutcome};
pub use mask_predict::{mask_predict, mask_predict_probe, FillStrategy, MaskPredictConfig, MaskPrediction};
pub use predictions::{load_predictions, read_predictions, save_predictions, write_predictions, RankedPrediction};

use std::str::FromStr;

use crate::error::ProbeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Contrastive,
    MaskPredict,
    MaskAverage,
    Generate,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Contrastive => "contrastive",
            Strategy::MaskPredict => "mask-predict",
            Strategy::MaskAverage => "mask-average",
            Strategy::Generate => "generate",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = ProbeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "contrastive" => Ok(Strategy::Contrastive),
            "mask-predict" => Ok(Strategy::MaskPredict),
            "mask-average" => Ok(Strategy::MaskAverage),
            "generate" => Ok(Strategy::Generate),
            other => Err(ProbeError::Config(format!("unknown strategy {other:?}"))),
        }
    }
}

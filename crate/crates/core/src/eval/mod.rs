//! Identification accuracy, verification scores and ROC / EER.

mod identify;
mod verify;

pub use identify::{
    identify, IdentificationProtocol, IdentificationReport, IdentifyClassifier, Prediction,
    ProtocolSplit,
};
pub use verify::{
    build_score_sets, feature_means, roc_and_eer, verification_score, MeanDivision, OperatingPoint,
    Roc, RocPoint, ScoreSets, VerificationSummary, MEAN_FLOOR,
};

//! Human-versus-model comparison metrics.

mod agreement;
mod dissimilarity;
mod performance;
mod roc;
mod stats;

pub use agreement::{jaccard, mean_agreement, targets_found_by_model, FoundVector};
pub use dissimilarity::{dissimilarity_records, scanpath_dissimilarity, DissimilarityRecord, ImageScanpaths, SkippedImage};
pub use performance::{performance_curve, weighted_distance, CurvePoint, PerformanceCurve};
pub use roc::{auc_from_scores, negative_scores, rank_auc, roc_auc, roc_curve, AucVariant, SortedMap, BORJI_RESAMPLES};
pub use stats::{mean_std, regression_slope_null_intercept, spearman};

//! Dataset ingestion, batch execution and report emission behind the CLI.

pub mod config;
pub mod dataset;
pub mod evaluate;
pub mod io;
pub mod run;
pub mod saliency_eval;

pub use config::{PriorSpec, RunConfig};
pub use dataset::{load_dataset, Dataset, HumanTrial, ImageEntry, LoadReport, Manifest};
pub use evaluate::{evaluate, MetricRow, ReportBundle};
pub use run::{run_experiment, ExperimentOutput, ModelRecord};
pub use saliency_eval::{eval_saliency, Aggregation, AucRow, RankBucket};

//! Bayesian visual-search simulation on natural-image grids.
//!
//! The observer keeps a log-domain posterior over which grid cell holds the
//! target, integrates visibility-degraded template responses after every
//! fixation, and picks the next fixation with one of four policies:
//! the ideal Bayesian searcher (IBS), its correlation-based variant (cIBS),
//! a greedy searcher, or a saliency-ranked searcher with inhibition of
//! return. The [`harness`] module runs policies over a stimulus set and
//! scores them against human scanpaths with the [`metrics`] suite.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod grid;
pub mod harness;
pub mod metrics;
pub mod posterior;
pub mod priors;
pub mod rng;
pub mod searchers;
pub mod synth;
pub mod template;
pub mod visibility;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{Cell, GridConfig, PixelPoint, Scanpath, TargetRegion, Trial};
pub use posterior::PosteriorState;
pub use priors::{PriorGrid, SaliencyMap};
pub use searchers::{run_search, Policy, SearchConfig, SearchInputs, SearchResult};
pub use template::{ResponseMode, TemplateParams};
pub use visibility::{VisibilityParams, VisibilityTable};

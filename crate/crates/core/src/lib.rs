//! Tabular classification with model-agnostic explanations.
//!
//! The pipeline runs schema-typed survey data through a hybrid categorical
//! encoder (label codes for ordered features, one-hot blocks for unordered
//! ones) into native tree, forest and k-NN classifiers, then explains the
//! fitted model two ways:
//!
//! * [`shapley`]: exact subset enumeration or antithetic permutation sampling
//!   of interventional Shapley values over original features.
//! * [`pgm`]: a perturbation-dependency graph. Records are resampled feature
//!   by feature (or group by group) and each node's perturbation indicator is
//!   tested against the prediction-change indicator with a 2x2 chi-square.
//!
//! [`synthetic`] generates populations with a planted logistic mechanism and
//! known ground truth, which is what the test suites validate against.

pub mod dataset;
pub mod encoding;
pub mod error;
pub mod learning;
pub mod model;
pub mod par;
pub mod pgm;
pub mod rng;
pub mod schema;
pub mod shapley;
pub mod synthetic;

pub use dataset::Dataset;
pub use encoding::{EncodedMatrix, EncoderMode, FittedEncoder};
pub use error::{Error, Result};
pub use learning::{FittedModel, Metrics, ModelKind, ModelParams};
pub use model::{BlackBox, Pipeline};
pub use schema::{FeatureKind, FeatureSchema, FeatureSpec, Group};

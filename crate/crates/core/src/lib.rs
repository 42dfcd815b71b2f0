//! Two-channel EMG finger-movement classification: time-domain features,
//! PCA/LDA projection, SMO-trained SVMs and backprop MLPs, plus the
//! evaluation protocols (component sweeps, train-size sweeps, grids).

pub mod classifiers;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod dimred;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod linalg;
pub mod rng;

pub use classifiers::{ClassifierKind, ClassifierModel, TrainConfig};
pub use config::RunConfig;
pub use dataset::{Dataset, Recording, SplitSpec, SynthConfig};
pub use dimred::{Projector, ProjectorKind};
pub use error::{EmgError, Result};
pub use evaluation::{ChannelSelection, EvaluationReport, PipelineConfig, Reducer};
pub use features::{FeatureConfig, FeatureVector};
pub use linalg::Matrix;

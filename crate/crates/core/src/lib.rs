//! Granular-ball twin support vector machines over random enhanced features.
//!
//! The crate is `no_std` with `alloc`. File formats, experiments and the
//! command-line front end live in the companion `gbtsvm` crate.

#![no_std]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod feature_map;
pub mod granular_ball;
pub mod model;
pub mod qp;
pub mod stats;

pub use dataset::{Dataset, DatasetMeta, Label};
pub use error::{Error, Result};
pub use feature_map::{Activation, FeatureSpace, RandomLayer};
pub use granular_ball::{generate_granular_balls, GranularBall, GranularBallSet};
pub use model::{fit, fit_variant, FittedModel, ModelConfig, RvflModel, TwinModel, Variant};
pub use qp::{solve_box_qp, BoxQp, QpSolution, SolverOptions};
pub use stats::{compute_metrics, Metrics};

//! Teacher-student machine unlearning.
//!
//! The crate removes the influence of a *forget set* from a trained classifier.
//! The main method, SCRUB, treats the original model as a frozen teacher and
//! trains a student initialized from it: max-epochs push the student's
//! predictions away from the teacher on forget examples, min-epochs pull them
//! back together on retain examples while also fitting the retain labels.
//! SCRUB+R adds a rewinding step that picks the epoch whose forget error best
//! matches an error level estimated on held-out data.
//!
//! Around that core the crate ships:
//!
//! - [`data`]: seeded synthetic datasets, CSV archives, retain/forget splits,
//!   label-confusion injection and matched validation sets.
//! - [`model`]: small MLP/CNN classifiers with hand-written backpropagation,
//!   SGD/Adam training and checkpoint files.
//! - [`unlearn`]: SCRUB, rewinding, and the baseline methods (Retrain,
//!   Finetune, NegGrad, CF-k, EU-k).
//! - [`metrics`]: error profiles, class-confusion metrics, a loss-based
//!   membership inference attack and the scale-up factor.
//! - [`harness`]: declarative experiment grids, reports and plots. The
//!   `scrub` binary is a thin CLI over it.
//!
//! Runnable walkthroughs for each capability live in the crate's `examples/`
//! directory:
//!
//! ```bash
//! cargo run --release -p scrub --example datasets
//! cargo run --release -p scrub --example train_classifier
//! cargo run --release -p scrub --example scrub_selective
//! cargo run --release -p scrub --example scrub_rewind
//! cargo run --release -p scrub --example baselines
//! cargo run --release -p scrub --example class_confusion
//! cargo run --release -p scrub --example membership_inference
//! cargo run --release -p scrub --example experiment_grid
//! ```

pub mod data;
mod error;
pub mod harness;
pub mod metrics;
pub mod model;
mod rng;
pub mod unlearn;

pub use error::{Error, Result};

pub use data::{
    build_matched_validation, inject_confusion, load_dataset, split_retain_forget, ConfusionSpec,
    DatasetSource, DatasetSplits, ForgetSpec, LabeledDataset,
};
pub use metrics::{
    confusion_matrix, fgt_err, ic_err, mia_score, scale_up_factor, ConfusionMatrix, MiaResult,
};
pub use model::{
    evaluate_error, init_model, per_example_loss, predict_proba, train, Architecture,
    ClassifierModel, ModelCheckpoint, OptimizerKind, TrainConfig,
};
pub use unlearn::{
    cf_k, do_max_epoch, do_min_epoch, eu_k, finetune, kl_distance, neggrad, retrain, rewind, scrub,
    CheckpointTrail, ScrubConfig, UnlearningTask,
};

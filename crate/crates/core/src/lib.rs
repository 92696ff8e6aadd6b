//! Bayesian relevance-feedback search over a fixed collection of feature
//! vectors.
//!
//! Each round the engine shows `k` items, the user picks the one closest to
//! what they want, and the engine folds that pick into its belief about the
//! target. Engines: Beta experts ([`be`]), Dirichlet search with a variational
//! or Gibbs posterior ([`ds`]), and the AL and PicHunter baselines
//! ([`baselines`]). [`simulator`] runs searches against a simulated user,
//! [`session`] drives searches from real choices.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

pub mod baselines;
pub mod be;
pub mod dataset;
pub mod ds;
pub mod engine;
pub mod error;
pub mod partition;
pub mod sampling;
pub mod scalar;
pub mod session;
pub mod simulator;
pub mod user_model;

pub use baselines::{AlState, PicHunterState};
pub use be::BetaState;
pub use dataset::{generate_synthetic, load_dataset, resolve_target_set, DataFormat, Dataset, TargetSpec};
pub use ds::{gibbs_posterior_sample, DirichletState, GibbsOptions, RoundHistory, RoundRecord};
pub use engine::{Algorithm, Engine, EngineParams};
pub use error::{Error, Result};
pub use partition::{assign_partitions, DisplaySet, PartitionAssignment};
pub use scalar::Scalar;
pub use session::{replay_transcript, Session, SessionConfig, SessionStatus, SessionSummary, TranscriptEntry};
pub use simulator::{
    export_report, parse_report_csv, run_experiment, run_search, DatasetSource, ExperimentConfig,
    ExperimentReport,
};
pub use user_model::{choice_distribution, simulate_choice, ChoiceOutcome, UserParams};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type DirichletState64 = DirichletState<f64>;
pub type BetaState64 = BetaState<f64>;
pub type AlState64 = AlState<f64>;
pub type PicHunterState64 = PicHunterState<f64>;
pub type Engine64 = Engine<f64>;
pub type ExperimentConfig64 = ExperimentConfig<f64>;
pub type ExperimentReport64 = ExperimentReport<f64>;
pub type Session64 = Session<f64>;

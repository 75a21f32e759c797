//! Symbol emergence between two agents as decentralized Bayesian inference.
//!
//! Each agent runs a multimodal Dirichlet mixture over its own observations.
//! The agents are coupled through a per-object sign that is either a parent
//! (`T2T`) or a child (`H2H`) of both agents' category variables, and they
//! infer that sign by playing a Metropolis-Hastings naming game.
//!
//! Module map:
//!
//! * [`stochastic`]: seeded streams, Dirichlet/categorical/multinomial draws.
//! * [`datagen`]: synthetic multimodal dataset.
//! * [`agent`]: per-agent model and Gibbs updates.
//! * [`game`]: MH naming game, all-rejection baseline, joint Gibbs topline.
//! * [`metrics`]: ARI, kappa, summaries.
//! * [`experiment`]: trial runner, CSV output, reference comparison.

pub mod agent;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod game;
pub mod metrics;
pub mod modality;
pub mod par;
pub mod stochastic;

pub use agent::{init_agent, AgentModel, AgentParts, Hyperparams, ModalityBeta, StochasticMatrix, Variant};
pub use datagen::{generate_dataset, generate_dataset_with_truth, Dataset, SyntheticConfig, TrueEmissions};
pub use error::{Error, Result};
pub use game::{
    acceptance_probability, acceptance_ratio_h2h, acceptance_ratio_t2t, gibbs_word, joint_word_distribution,
    mh_exchange, rejection_exchange, run_game, run_iteration, utter, CommunicationMode, GameState, Utterance,
};
pub use metrics::{adjusted_rand_index, kappa, summarize, MetricsRecord};
pub use modality::{AgentId, Modality, ModalityMask, PerAgent};
pub use stochastic::{CountHistogram, ProbVector, RngStream};

//! The two-agent naming game.
//!
//! One iteration alternates the agents: each in turn refreshes its parameters
//! and categories, then names every object to the other. How the listener
//! reacts depends on the [`CommunicationMode`]:
//!
//! * `MH`: accept the proposed sign with probability `min(1, a)`, where `a`
//!   only involves the listener's own parameters. The pair of agents then
//!   samples signs from the product of their two word distributions.
//! * `AllRejection`: the listener ignores every proposal. Each speaker redraws
//!   its own sign from its own word distribution instead.
//! * `GibbsTopline`: no speaking; after both turns one shared sign per object
//!   is drawn from the normalized product directly.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{init_agent, AgentModel, Hyperparams, Variant};
use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{adjusted_rand_index, kappa, MetricsRecord};
use crate::modality::AgentId;
use crate::stochastic::{floored_ln, normalize_log_weights, sample_categorical, RngStream};

const TAG_INIT: u64 = 0x11;
const TAG_ITERATION: u64 = 0x12;
const TAG_PARAMS: u64 = 0x21;
const TAG_CATEGORIES: u64 = 0x22;
const TAG_SPEAK: u64 = 0x23;
const TAG_GIBBS: u64 = 0x24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CommunicationMode {
    #[serde(rename = "mh")]
    MH,
    #[serde(rename = "reject")]
    AllRejection,
    #[serde(rename = "gibbs")]
    GibbsTopline,
}

impl CommunicationMode {
    pub const ALL: [CommunicationMode; 3] = [
        CommunicationMode::MH,
        CommunicationMode::AllRejection,
        CommunicationMode::GibbsTopline,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CommunicationMode::MH => "mh",
            CommunicationMode::AllRejection => "reject",
            CommunicationMode::GibbsTopline => "gibbs",
        }
    }
}

impl fmt::Display for CommunicationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CommunicationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mh" => Ok(CommunicationMode::MH),
            "reject" => Ok(CommunicationMode::AllRejection),
            "gibbs" => Ok(CommunicationMode::GibbsTopline),
            other => Err(Error::config(
                "method",
                format!("unknown method `{other}` (expected mh, reject or gibbs)"),
            )),
        }
    }
}

/// A speaker naming object `object` with sign `sign`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Utterance {
    pub object: usize,
    pub sign: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameState {
    pub agent_a: AgentModel,
    pub agent_b: AgentModel,
    pub iteration: usize,
    pub mode: CommunicationMode,
    pub variant: Variant,
}

impl GameState {
    pub fn new(agent_a: AgentModel, agent_b: AgentModel, mode: CommunicationMode) -> Result<Self> {
        if agent_a.variant() != agent_b.variant() {
            return Err(Error::param("agents use different model variants"));
        }
        if agent_a.num_objects() != agent_b.num_objects()
            || agent_a.hyperparams().categories != agent_b.hyperparams().categories
            || agent_a.hyperparams().signs != agent_b.hyperparams().signs
        {
            return Err(Error::param("agents disagree on D, K or L"));
        }
        Ok(GameState {
            variant: agent_a.variant(),
            agent_a,
            agent_b,
            iteration: 0,
            mode,
        })
    }

    pub fn agent(&self, id: AgentId) -> &AgentModel {
        match id {
            AgentId::A => &self.agent_a,
            AgentId::B => &self.agent_b,
        }
    }

    /// `(speaker, listener)` borrowed mutably at once.
    fn pair_mut(&mut self, speaker: AgentId) -> (&mut AgentModel, &mut AgentModel) {
        match speaker {
            AgentId::A => (&mut self.agent_a, &mut self.agent_b),
            AgentId::B => (&mut self.agent_b, &mut self.agent_a),
        }
    }

    /// Scores of the current assignments.
    pub fn metrics(&self, dataset: &Dataset) -> Result<MetricsRecord> {
        let kappa = match self.mode {
            CommunicationMode::GibbsTopline => None,
            _ => Some(kappa(
                self.agent_a.signs(),
                self.agent_b.signs(),
                self.agent_a.hyperparams().signs,
            )?),
        };
        Ok(MetricsRecord {
            iteration: self.iteration,
            ari_a: adjusted_rand_index(self.agent_a.categories(), &dataset.true_type)?,
            ari_b: adjusted_rand_index(self.agent_b.categories(), &dataset.true_type)?,
            kappa,
        })
    }
}

/// `ln theta[c_d][w_new] - ln theta[c_d][w_old]` for an H2H listener.
fn log_ratio_h2h(listener: &AgentModel, d: usize, w_new: usize, w_old: usize) -> f64 {
    let row = listener.theta().row(listener.categories()[d]);
    floored_ln(row[w_new]) - floored_ln(row[w_old])
}

/// `ln theta[w_new][c_d] - ln theta[w_old][c_d]` for a T2T listener.
fn log_ratio_t2t(listener: &AgentModel, d: usize, w_new: usize, w_old: usize) -> f64 {
    let c = listener.categories()[d];
    floored_ln(listener.theta().get(w_new, c)) - floored_ln(listener.theta().get(w_old, c))
}

fn log_acceptance(listener: &AgentModel, d: usize, w_new: usize, w_old: usize) -> f64 {
    if w_new == w_old {
        return 0.0;
    }
    match listener.variant() {
        Variant::H2H => log_ratio_h2h(listener, d, w_new, w_old),
        Variant::T2T => log_ratio_t2t(listener, d, w_new, w_old),
    }
}

/// MH ratio for an H2H listener; the speaker's terms cancel.
pub fn acceptance_ratio_h2h(listener: &AgentModel, d: usize, w_new: usize, w_old: usize) -> f64 {
    debug_assert_eq!(listener.variant(), Variant::H2H);
    if w_new == w_old {
        return 1.0;
    }
    log_ratio_h2h(listener, d, w_new, w_old).exp()
}

/// MH ratio for a T2T listener under a uniform sign prior.
pub fn acceptance_ratio_t2t(listener: &AgentModel, d: usize, w_new: usize, w_old: usize) -> f64 {
    debug_assert_eq!(listener.variant(), Variant::T2T);
    if w_new == w_old {
        return 1.0;
    }
    log_ratio_t2t(listener, d, w_new, w_old).exp()
}

/// `min(1, a)` for the listener's variant.
pub fn acceptance_probability(listener: &AgentModel, d: usize, w_new: usize, w_old: usize) -> f64 {
    log_acceptance(listener, d, w_new, w_old).min(0.0).exp()
}

/// The speaker draws a sign for object `d` from its own `P(w | c_d)`.
pub fn utter<R: Rng + ?Sized>(speaker: &AgentModel, d: usize, rng: &mut R) -> Utterance {
    let p = speaker.self_word_distribution(d);
    Utterance {
        object: d,
        sign: sample_categorical(&p, rng),
    }
}

/// One MH naming exchange about object `d`. Returns whether the listener
/// adopted the proposed sign.
///
/// The speaker's own sign copy is left alone: each agent's copy is its
/// current MH state and only moves when that agent listens.
pub fn mh_exchange<R: Rng + ?Sized>(speaker: &AgentModel, listener: &mut AgentModel, d: usize, rng: &mut R) -> bool {
    let proposal = utter(speaker, d, rng);
    let w_old = listener.signs[d];
    let log_a = log_acceptance(listener, d, proposal.sign, w_old);
    let accept = log_a >= 0.0 || rng.random::<f64>() < log_a.exp();
    if accept {
        listener.signs[d] = proposal.sign;
    }
    accept
}

/// The listener rejects unconditionally; the speaker keeps its fresh draw.
pub fn rejection_exchange<R: Rng + ?Sized>(speaker: &mut AgentModel, _listener: &AgentModel, d: usize, rng: &mut R) {
    let proposal = utter(speaker, d, rng);
    speaker.signs[d] = proposal.sign;
}

/// Normalized product of the two agents' word distributions for object `d`.
pub fn joint_word_distribution(agent_a: &AgentModel, agent_b: &AgentModel, d: usize) -> Result<crate::ProbVector> {
    if agent_a.variant() != agent_b.variant() {
        return Err(Error::param("agents use different model variants"));
    }
    let (ca, cb) = (agent_a.categories()[d], agent_b.categories()[d]);
    let signs = agent_a.hyperparams().signs;
    let logw: Vec<f64> = (0..signs)
        .map(|w| match agent_a.variant() {
            Variant::H2H => floored_ln(agent_a.theta().get(ca, w)) + floored_ln(agent_b.theta().get(cb, w)),
            Variant::T2T => floored_ln(agent_a.theta().get(w, ca)) + floored_ln(agent_b.theta().get(w, cb)),
        })
        .collect();
    normalize_log_weights(&logw).map_err(|e| Error::Inference(format!("joint sign weights for object {d}: {e}")))
}

/// Draw one sign from both agents' internals and give it to both.
pub fn gibbs_word<R: Rng + ?Sized>(
    agent_a: &mut AgentModel,
    agent_b: &mut AgentModel,
    d: usize,
    rng: &mut R,
) -> Result<usize> {
    let p = joint_word_distribution(agent_a, agent_b, d)?;
    let w = sample_categorical(&p, rng);
    agent_a.signs[d] = w;
    agent_b.signs[d] = w;
    Ok(w)
}

fn agent_turn(agent: &mut AgentModel, dataset: &Dataset, rng: &RngStream) -> Result<()> {
    let base = rng.fork(agent.id().tag());
    agent.update_parameters(dataset, &base.fork(TAG_PARAMS))?;
    agent.sample_categories(dataset, &base.fork(TAG_CATEGORIES))
}

fn speaking_phase(state: &mut GameState, speaker_id: AgentId, rng: &RngStream) {
    let mode = state.mode;
    let base = rng.fork_path(&[speaker_id.tag(), TAG_SPEAK]);
    let (speaker, listener) = state.pair_mut(speaker_id);
    for d in 0..speaker.num_objects() {
        let mut r = base.fork(d as u64);
        match mode {
            CommunicationMode::MH => {
                mh_exchange(speaker, listener, d, &mut r);
            }
            CommunicationMode::AllRejection => rejection_exchange(speaker, listener, d, &mut r),
            CommunicationMode::GibbsTopline => unreachable!("gibbs mode has no speaking phase"),
        }
    }
}

/// One full round: A's turn, A speaks, B's turn, B speaks (or the joint
/// Gibbs draw in topline mode).
pub fn run_iteration(state: &mut GameState, dataset: &Dataset, rng: &RngStream) -> Result<()> {
    agent_turn(&mut state.agent_a, dataset, rng)?;
    if state.mode != CommunicationMode::GibbsTopline {
        speaking_phase(state, AgentId::A, rng);
    }
    agent_turn(&mut state.agent_b, dataset, rng)?;
    if state.mode == CommunicationMode::GibbsTopline {
        let base = rng.fork(TAG_GIBBS);
        for d in 0..state.agent_a.num_objects() {
            gibbs_word(&mut state.agent_a, &mut state.agent_b, d, &mut base.fork(d as u64))?;
        }
    } else {
        speaking_phase(state, AgentId::B, rng);
    }
    state.iteration += 1;
    Ok(())
}

/// Initializes both agents and plays `iterations` rounds, recording metrics
/// after each.
pub fn run_game(
    variant: Variant,
    mode: CommunicationMode,
    hyper: &Hyperparams,
    dataset: &Dataset,
    iterations: usize,
    rng: &RngStream,
) -> Result<(GameState, Vec<MetricsRecord>)> {
    if iterations < 1 {
        return Err(Error::param("a game needs at least one iteration"));
    }
    let init = rng.fork(TAG_INIT);
    let agent_a = init_agent(variant, hyper, dataset, AgentId::A, &init.fork(AgentId::A.tag()))?;
    let agent_b = init_agent(variant, hyper, dataset, AgentId::B, &init.fork(AgentId::B.tag()))?;
    let mut state = GameState::new(agent_a, agent_b, mode)?;
    let iter_base = rng.fork(TAG_ITERATION);
    let mut records = Vec::with_capacity(iterations);
    for i in 0..iterations {
        run_iteration(&mut state, dataset, &iter_base.fork(i as u64))?;
        records.push(state.metrics(dataset)?);
    }
    Ok((state, records))
}

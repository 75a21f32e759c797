//! Synthetic multimodal dataset drawn from the model's own priors.
//!
//! Each object type gets one feature-emission distribution per modality,
//! drawn from `Dirichlet(beta_m)`. Every object of that type is then observed
//! by both agents as independent multinomial histograms. Modalities outside
//! an agent's mask are never stored.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::Hyperparams;
use crate::error::{Error, Result};
use crate::modality::{AgentId, Modality, ModalityMask, PerAgent};
use crate::stochastic::{sample_dirichlet, sample_multinomial, CountHistogram, ProbVector, RngStream};

const TAG_EMISSIONS: u64 = 0xE1;
const TAG_OBSERVATIONS: u64 = 0x0B;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub num_types: usize,
    pub objects_per_type: usize,
    pub feature_dim: usize,
    pub draws_per_modality: u32,
    pub hyperparams: Hyperparams,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            num_types: 15,
            objects_per_type: 10,
            feature_dim: 20,
            draws_per_modality: 20,
            hyperparams: Hyperparams::default(),
        }
    }
}

impl SyntheticConfig {
    pub fn num_objects(&self) -> usize {
        self.num_types * self.objects_per_type
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("num_types", self.num_types),
            ("objects_per_type", self.objects_per_type),
            ("feature_dim", self.feature_dim),
            ("draws_per_modality", self.draws_per_modality as usize),
        ];
        for (key, v) in dims {
            if v < 1 {
                return Err(Error::config(format!("synthetic.{key}"), "must be at least 1"));
            }
        }
        self.hyperparams.validate()
    }
}

/// Per-modality histograms for all objects, indexed by object.
pub type AgentObservations = BTreeMap<Modality, Vec<CountHistogram>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub true_type: Vec<usize>,
    pub observations: PerAgent<AgentObservations>,
    pub mask: PerAgent<ModalityMask>,
    pub config: SyntheticConfig,
}

/// Generating parameters, exposed for tests and diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct TrueEmissions {
    /// `per_modality[m][t]` is the feature distribution of type `t`.
    pub per_modality: BTreeMap<Modality, Vec<ProbVector>>,
}

impl Dataset {
    pub fn num_objects(&self) -> usize {
        self.true_type.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.config.feature_dim
    }

    /// Histograms of `agent` for modality `m`, if that agent perceives it.
    pub fn observations(&self, agent: AgentId, m: Modality) -> Option<&[CountHistogram]> {
        self.observations.get(agent).get(&m).map(Vec::as_slice)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dataset serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ds: Dataset = serde_json::from_str(text).map_err(|e| Error::param(format!("dataset json: {e}")))?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Dataset::from_json(&text)
    }

    /// Checks every structural invariant of a loaded dataset.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let d = self.num_objects();
        if d == 0 {
            return Err(Error::param("dataset has no objects"));
        }
        if let Some(&t) = self.true_type.iter().find(|&&t| t >= self.config.num_types) {
            return Err(Error::param(format!("true type {t} out of range")));
        }
        for agent in [AgentId::A, AgentId::B] {
            let mask = *self.mask.get(agent);
            for m in mask.iter() {
                let hists = self.observations(agent, m).ok_or_else(|| {
                    Error::param(format!("agent {agent:?} perceives {m} but has no observations for it"))
                })?;
                if hists.len() != d {
                    return Err(Error::param(format!(
                        "agent {agent:?} modality {m}: {} histograms for {d} objects",
                        hists.len()
                    )));
                }
                if hists.iter().any(|h| h.len() != self.config.feature_dim) {
                    return Err(Error::param(format!(
                        "agent {agent:?} modality {m}: wrong histogram width"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn generate_dataset(
    cfg: &SyntheticConfig,
    mask_a: ModalityMask,
    mask_b: ModalityMask,
    rng: &RngStream,
) -> Result<Dataset> {
    generate_dataset_with_truth(cfg, mask_a, mask_b, rng).map(|(ds, _)| ds)
}

/// As [`generate_dataset`], also returning the per-type emissions.
pub fn generate_dataset_with_truth(
    cfg: &SyntheticConfig,
    mask_a: ModalityMask,
    mask_b: ModalityMask,
    rng: &RngStream,
) -> Result<(Dataset, TrueEmissions)> {
    cfg.validate()?;
    let mut per_modality = BTreeMap::new();
    for m in Modality::ALL {
        let beta = vec![cfg.hyperparams.beta.get(m); cfg.feature_dim];
        let rows = (0..cfg.num_types)
            .map(|t| {
                let mut r = rng.fork_path(&[TAG_EMISSIONS, m.index() as u64, t as u64]);
                sample_dirichlet(&beta, &mut r)
            })
            .collect::<Result<Vec<_>>>()?;
        per_modality.insert(m, rows);
    }

    let true_type: Vec<usize> = (0..cfg.num_types)
        .flat_map(|t| std::iter::repeat_n(t, cfg.objects_per_type))
        .collect();

    let observe = |agent: AgentId, mask: ModalityMask| -> Result<AgentObservations> {
        mask.iter()
            .map(|m| {
                let hists = true_type
                    .iter()
                    .enumerate()
                    .map(|(d, &t)| {
                        let mut r = rng.fork_path(&[TAG_OBSERVATIONS, agent.tag(), m.index() as u64, d as u64]);
                        sample_multinomial(u64::from(cfg.draws_per_modality), &per_modality[&m][t], &mut r)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((m, hists))
            })
            .collect()
    };

    let observations = PerAgent::new(observe(AgentId::A, mask_a)?, observe(AgentId::B, mask_b)?);
    let dataset = Dataset {
        true_type,
        observations,
        mask: PerAgent::new(mask_a, mask_b),
        config: cfg.clone(),
    };
    Ok((dataset, TrueEmissions { per_modality }))
}

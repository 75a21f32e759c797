//! One agent's multimodal Dirichlet mixture.
//!
//! Both model variants keep explicit parameters and are updated by
//! uncollapsed Gibbs sweeps:
//!
//! * `H2H`: `c_d ~ Cat(pi)`, `w_d ~ Cat(theta[c_d])`, `theta` is `K x L`.
//! * `T2T`: `w_d` is the parent, `c_d ~ Cat(theta[w_d])`, `theta` is `L x K`.
//!
//! In both, `o_{m,d} ~ Mult(phi_m[c_d])`. The sign vector `w` is this agent's
//! own copy; the naming game is the only thing that moves signs between agents.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::modality::{AgentId, Modality, ModalityMask};
use crate::stochastic::{
    dot_counts_ln, normalize_log_weights, sample_categorical, sample_dirichlet, ProbVector, RngStream,
};

const TAG_INIT: u64 = 0x1_0000;
const TAG_PI: u64 = 0x2_0000;
const TAG_THETA: u64 = 0x3_0000;
const TAG_PHI: u64 = 0x4_0000;

/// Which way the shared sign connects the two agents' categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Sign is a parent of both category variables (tail-to-tail).
    T2T,
    /// Sign is a child of both category variables (head-to-head).
    H2H,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::T2T, Variant::H2H];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::T2T => "t2t",
            Variant::H2H => "h2h",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t2t" => Ok(Variant::T2T),
            "h2h" => Ok(Variant::H2H),
            other => Err(Error::config(
                "variant",
                format!("unknown variant `{other}` (expected t2t or h2h)"),
            )),
        }
    }
}

/// Feature-emission concentration, one per modality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalityBeta {
    pub v: f64,
    pub s: f64,
    pub h: f64,
}

impl ModalityBeta {
    pub fn splat(x: f64) -> Self {
        ModalityBeta { v: x, s: x, h: x }
    }

    pub fn get(&self, m: Modality) -> f64 {
        match m {
            Modality::Vision => self.v,
            Modality::Sound => self.s,
            Modality::Haptic => self.h,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparams {
    /// Sign-distribution concentration.
    pub alpha: f64,
    pub beta: ModalityBeta,
    /// Category-prior concentration.
    pub gamma: f64,
    /// Number of categories `K`.
    pub categories: usize,
    /// Number of signs `L`.
    pub signs: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 0.01,
            beta: ModalityBeta::splat(0.001),
            gamma: 0.01,
            categories: 15,
            signs: 15,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hyperparams.alpha", self.alpha),
            ("hyperparams.beta.v", self.beta.v),
            ("hyperparams.beta.s", self.beta.s),
            ("hyperparams.beta.h", self.beta.h),
            ("hyperparams.gamma", self.gamma),
        ];
        for (key, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::config(key, format!("must be a positive number, got {x}")));
            }
        }
        if self.categories < 1 {
            return Err(Error::config("hyperparams.categories", "must be at least 1"));
        }
        if self.signs < 1 {
            return Err(Error::config("hyperparams.signs", "must be at least 1"));
        }
        Ok(())
    }
}

/// Matrix whose rows are categorical distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StochasticMatrix {
    rows: Vec<ProbVector>,
}

impl StochasticMatrix {
    pub fn from_rows(rows: Vec<ProbVector>) -> Result<Self> {
        let width = rows
            .first()
            .map(ProbVector::len)
            .ok_or_else(|| Error::param("matrix has no rows"))?;
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::param("matrix rows have different lengths"));
        }
        Ok(StochasticMatrix { rows })
    }

    /// Convenience for tests and fixtures: validates each row.
    pub fn from_vecs(rows: Vec<Vec<f64>>) -> Result<Self> {
        StochasticMatrix::from_rows(rows.into_iter().map(ProbVector::new).collect::<Result<_>>()?)
    }

    pub fn uniform(n_rows: usize, n_cols: usize) -> Self {
        StochasticMatrix {
            rows: vec![ProbVector::uniform(n_cols); n_rows],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &ProbVector {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[ProbVector] {
        &self.rows
    }

    fn ln_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(ProbVector::ln_floored).collect()
    }
}

/// Full state of one agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentModel {
    pub(crate) id: AgentId,
    pub(crate) variant: Variant,
    pub(crate) hyper: Hyperparams,
    pub(crate) mask: ModalityMask,
    pub(crate) pi: Option<ProbVector>,
    pub(crate) theta: StochasticMatrix,
    pub(crate) phi: BTreeMap<Modality, StochasticMatrix>,
    pub(crate) categories: Vec<usize>,
    pub(crate) signs: Vec<usize>,
}

/// Parameters and assignments for [`AgentModel::from_parts`].
#[derive(Clone, Debug)]
pub struct AgentParts {
    pub id: AgentId,
    pub variant: Variant,
    pub hyper: Hyperparams,
    pub mask: ModalityMask,
    pub pi: Option<ProbVector>,
    pub theta: StochasticMatrix,
    pub phi: BTreeMap<Modality, StochasticMatrix>,
    pub categories: Vec<usize>,
    pub signs: Vec<usize>,
}

impl AgentModel {
    /// Assembles an agent from explicit values, checking every invariant.
    pub fn from_parts(parts: AgentParts) -> Result<Self> {
        let agent = AgentModel {
            id: parts.id,
            variant: parts.variant,
            hyper: parts.hyper,
            mask: parts.mask,
            pi: parts.pi,
            theta: parts.theta,
            phi: parts.phi,
            categories: parts.categories,
            signs: parts.signs,
        };
        agent.validate()?;
        Ok(agent)
    }

    pub fn validate(&self) -> Result<()> {
        let (k, l) = (self.hyper.categories, self.hyper.signs);
        let theta_shape = match self.variant {
            Variant::H2H => (k, l),
            Variant::T2T => (l, k),
        };
        if (self.theta.n_rows(), self.theta.n_cols()) != theta_shape {
            return Err(Error::param(format!(
                "theta is {}x{}, expected {}x{}",
                self.theta.n_rows(),
                self.theta.n_cols(),
                theta_shape.0,
                theta_shape.1
            )));
        }
        match (&self.pi, self.variant) {
            (Some(pi), Variant::H2H) if pi.len() == k => {}
            (None, Variant::T2T) => {}
            _ => return Err(Error::param("pi must be present (length K) exactly for H2H agents")),
        }
        let phi_keys: Vec<Modality> = self.phi.keys().copied().collect();
        if phi_keys != self.mask.iter().collect::<Vec<_>>() {
            return Err(Error::param("phi modalities do not match the agent's mask"));
        }
        if self.phi.values().any(|p| p.n_rows() != k) {
            return Err(Error::param("phi must have one row per category"));
        }
        if self.categories.len() != self.signs.len() {
            return Err(Error::param("category and sign vectors differ in length"));
        }
        if self.categories.iter().any(|&c| c >= k) || self.signs.iter().any(|&w| w >= l) {
            return Err(Error::param("assignment out of range"));
        }
        Ok(())
    }

    pub fn id(&self) -> AgentId {
        self.id
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn mask(&self) -> ModalityMask {
        self.mask
    }

    pub fn num_objects(&self) -> usize {
        self.categories.len()
    }

    pub fn pi(&self) -> Option<&ProbVector> {
        self.pi.as_ref()
    }

    pub fn theta(&self) -> &StochasticMatrix {
        &self.theta
    }

    pub fn phi(&self, m: Modality) -> Option<&StochasticMatrix> {
        self.phi.get(&m)
    }

    pub fn categories(&self) -> &[usize] {
        &self.categories
    }

    pub fn signs(&self) -> &[usize] {
        &self.signs
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("agent serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let agent: AgentModel =
            serde_json::from_str(text).map_err(|e| Error::param(format!("agent snapshot json: {e}")))?;
        agent.validate()?;
        Ok(agent)
    }

    /// `P(w | c_d)` under this agent's own model. For T2T the sign prior is
    /// uniform, so this is column `c_d` of theta renormalized.
    pub fn self_word_distribution(&self, d: usize) -> ProbVector {
        let c = self.categories[d];
        match self.variant {
            Variant::H2H => self.theta.row(c).clone(),
            Variant::T2T => {
                let column = (0..self.theta.n_rows()).map(|w| self.theta.get(w, c)).collect();
                ProbVector::from_weights(column).expect("theta entries are floored positive")
            }
        }
    }

    /// `P(c_d = l | o_d, w_d, params)` as a normalized vector.
    pub fn category_posterior(&self, d: usize, dataset: &Dataset) -> Result<ProbVector> {
        let tables = self.log_tables();
        let obs = self.observations(dataset)?;
        self.category_posterior_with(&tables, &obs, d)
    }

    /// Exact conditional draw of every `c_d` given the current parameters.
    pub fn sample_categories(&mut self, dataset: &Dataset, rng: &RngStream) -> Result<()> {
        let tables = self.log_tables();
        let obs = self.observations(dataset)?;
        let drawn = (0..self.num_objects())
            .map(|d| {
                let post = self.category_posterior_with(&tables, &obs, d)?;
                Ok(sample_categorical(&post, &mut rng.fork(d as u64)))
            })
            .collect::<Result<Vec<_>>>()?;
        self.categories = drawn;
        Ok(())
    }

    pub fn sample_categories_h2h(&mut self, dataset: &Dataset, rng: &RngStream) -> Result<()> {
        self.expect_variant(Variant::H2H)?;
        self.sample_categories(dataset, rng)
    }

    pub fn sample_categories_t2t(&mut self, dataset: &Dataset, rng: &RngStream) -> Result<()> {
        self.expect_variant(Variant::T2T)?;
        self.sample_categories(dataset, rng)
    }

    /// Resample `pi`, `theta` and `phi` from their Dirichlet posteriors given
    /// the current assignments.
    pub fn update_parameters(&mut self, dataset: &Dataset, rng: &RngStream) -> Result<()> {
        let (k, l) = (self.hyper.categories, self.hyper.signs);

        if self.variant == Variant::H2H {
            let mut conc = vec![self.hyper.gamma; k];
            for &c in &self.categories {
                conc[c] += 1.0;
            }
            self.pi = Some(sample_dirichlet(&conc, &mut rng.fork(TAG_PI))?);
        }

        // H2H: rows indexed by category, counting signs.
        // T2T: rows indexed by sign, counting categories.
        let (n_rows, n_cols) = match self.variant {
            Variant::H2H => (k, l),
            Variant::T2T => (l, k),
        };
        let mut conc = vec![vec![self.hyper.alpha; n_cols]; n_rows];
        for (&c, &w) in self.categories.iter().zip(&self.signs) {
            match self.variant {
                Variant::H2H => conc[c][w] += 1.0,
                Variant::T2T => conc[w][c] += 1.0,
            }
        }
        let theta_rng = rng.fork(TAG_THETA);
        let rows = conc
            .iter()
            .enumerate()
            .map(|(i, a)| sample_dirichlet(a, &mut theta_rng.fork(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        self.theta = StochasticMatrix::from_rows(rows)?;

        let phi_rng = rng.fork(TAG_PHI);
        let mut phi = BTreeMap::new();
        for m in self.mask.iter() {
            let m_rng = phi_rng.fork(m.index() as u64);
            let rows = (0..k)
                .map(|c| {
                    let conc = self.phi_posterior_concentration(dataset, m, c)?;
                    sample_dirichlet(&conc, &mut m_rng.fork(c as u64))
                })
                .collect::<Result<Vec<_>>>()?;
            phi.insert(m, StochasticMatrix::from_rows(rows)?);
        }
        self.phi = phi;
        Ok(())
    }

    /// `beta_m` plus the summed histograms of objects currently in category `c`.
    pub fn phi_posterior_concentration(&self, dataset: &Dataset, m: Modality, c: usize) -> Result<Vec<f64>> {
        let hists = dataset
            .observations(self.id, m)
            .ok_or_else(|| Error::param(format!("no {m} observations for agent {:?}", self.id)))?;
        let mut conc = vec![self.hyper.beta.get(m); dataset.feature_dim()];
        for (h, _) in hists.iter().zip(&self.categories).filter(|(_, &cd)| cd == c) {
            for (x, &n) in conc.iter_mut().zip(h.as_slice()) {
                *x += f64::from(n);
            }
        }
        Ok(conc)
    }

    fn expect_variant(&self, v: Variant) -> Result<()> {
        if self.variant != v {
            return Err(Error::param(format!(
                "operation requires a {v} agent, got {}",
                self.variant
            )));
        }
        Ok(())
    }

    fn observations<'a>(&self, dataset: &'a Dataset) -> Result<Vec<&'a [crate::stochastic::CountHistogram]>> {
        self.mask
            .iter()
            .map(|m| {
                let hs = dataset
                    .observations(self.id, m)
                    .ok_or_else(|| Error::param(format!("no {m} observations for agent {:?}", self.id)))?;
                if hs.len() != self.num_objects() {
                    return Err(Error::param("dataset size does not match agent"));
                }
                Ok(hs)
            })
            .collect()
    }

    fn log_tables(&self) -> LogTables {
        LogTables {
            ln_pi: self.pi.as_ref().map(ProbVector::ln_floored),
            ln_theta: self.theta.ln_rows(),
            ln_phi: self.phi.values().map(StochasticMatrix::ln_rows).collect(),
        }
    }

    fn category_posterior_with(
        &self,
        tables: &LogTables,
        obs: &[&[crate::stochastic::CountHistogram]],
        d: usize,
    ) -> Result<ProbVector> {
        let w = self.signs[d];
        let logw: Vec<f64> = (0..self.hyper.categories)
            .map(|l| {
                let prior = match self.variant {
                    Variant::H2H => tables.ln_pi.as_ref().expect("h2h has pi")[l] + tables.ln_theta[l][w],
                    Variant::T2T => tables.ln_theta[w][l],
                };
                let lik: f64 = obs
                    .iter()
                    .zip(&tables.ln_phi)
                    .map(|(hs, ln_phi)| dot_counts_ln(hs[d].as_slice(), &ln_phi[l]))
                    .sum();
                prior + lik
            })
            .collect();
        normalize_log_weights(&logw).map_err(|e| Error::Inference(format!("category weights for object {d}: {e}")))
    }
}

struct LogTables {
    ln_pi: Option<Vec<f64>>,
    ln_theta: Vec<Vec<f64>>,
    /// In mask order.
    ln_phi: Vec<Vec<Vec<f64>>>,
}

/// Creates an agent with uniformly random assignments and parameters drawn
/// from the posterior given those assignments.
pub fn init_agent(
    variant: Variant,
    hyper: &Hyperparams,
    dataset: &Dataset,
    id: AgentId,
    rng: &RngStream,
) -> Result<AgentModel> {
    hyper.validate()?;
    let (k, l) = (hyper.categories, hyper.signs);
    let n = dataset.num_objects();
    let mask = *dataset.mask.get(id);
    let mut r = rng.fork(TAG_INIT);
    let categories = (0..n).map(|_| r.random_range(0..k)).collect();
    let signs = (0..n).map(|_| r.random_range(0..l)).collect();
    let theta = match variant {
        Variant::H2H => StochasticMatrix::uniform(k, l),
        Variant::T2T => StochasticMatrix::uniform(l, k),
    };
    let mut agent = AgentModel {
        id,
        variant,
        hyper: hyper.clone(),
        mask,
        pi: (variant == Variant::H2H).then(|| ProbVector::uniform(k)),
        theta,
        phi: mask
            .iter()
            .map(|m| (m, StochasticMatrix::uniform(k, dataset.feature_dim())))
            .collect(),
        categories,
        signs,
    };
    agent.update_parameters(dataset, &rng.fork(TAG_INIT + 1))?;
    Ok(agent)
}

//! Seeded sampling and log-space probability arithmetic.
//!
//! Every stochastic routine in the crate draws from an explicit [`RngStream`].
//! Streams are identified by `(seed, stream_id)`; child streams are derived
//! with [`RngStream::fork`], so independent consumers (trials, agents,
//! objects) never share a draw sequence and can run in any order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound applied to probabilities before taking a logarithm.
pub const PROB_FLOOR: f64 = 1e-300;

const SUM_TOLERANCE: f64 = 1e-9;

/// `ln(max(p, PROB_FLOOR))`.
#[inline]
pub fn floored_ln(p: f64) -> f64 {
    p.max(PROB_FLOOR).ln()
}

/// A categorical distribution: non-negative entries summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::param("probability vector is empty"));
        }
        if let Some(bad) = entries.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::param(format!(
                "probability entry {bad} is not a finite non-negative number"
            )));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::param(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(ProbVector(entries))
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "uniform distribution needs at least one outcome");
        ProbVector(vec![1.0 / len as f64; len])
    }

    /// Normalizes non-negative weights. Fails when they are all zero.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("weight vector is empty"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::param("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Degenerate);
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(ProbVector(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Element-wise `floored_ln`.
    pub fn ln_floored(&self) -> Vec<f64> {
        self.0.iter().map(|&p| floored_ln(p)).collect()
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbVector::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Vec<f64> {
        p.0
    }
}

/// Feature counts for one observation (bag of features).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountHistogram(Vec<u32>);

impl CountHistogram {
    pub fn new(counts: Vec<u32>) -> Self {
        CountHistogram(counts)
    }

    pub fn zeros(len: usize) -> Self {
        CountHistogram(vec![0; len])
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derives a child stream. The child depends only on this stream's
    /// identity and `tag`, never on how many draws have been consumed.
    pub fn fork(&self, tag: u64) -> RngStream {
        let id = splitmix64(self.stream_id ^ splitmix64(tag).rotate_left(23));
        RngStream::new(self.seed, id)
    }

    /// `fork` applied along a path of tags.
    pub fn fork_path(&self, tags: &[u64]) -> RngStream {
        tags.iter().fold(self.clone_identity(), |s, &t| s.fork(t))
    }

    fn clone_identity(&self) -> RngStream {
        RngStream::new(self.seed, self.stream_id)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Draw from `Dirichlet(alpha)` as normalized Gamma variates.
///
/// Gamma draws are taken in log space so shapes far below one (0.001 and
/// smaller) do not underflow. The result is floored at [`PROB_FLOOR`] so
/// every entry is strictly positive.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<ProbVector> {
    if alpha.is_empty() {
        return Err(Error::param("dirichlet concentration is empty"));
    }
    if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::param(format!(
            "dirichlet concentration {a} is not strictly positive"
        )));
    }
    let log_gammas = alpha.iter().map(|&a| ln_gamma_variate(a, rng)).collect::<Vec<_>>();
    let p = normalize_log_weights(&log_gammas)?;
    let mut entries = p.into_inner();
    if entries.iter().any(|&x| x < PROB_FLOOR) {
        entries.iter_mut().for_each(|x| *x = x.max(PROB_FLOOR));
        let total: f64 = entries.iter().sum();
        entries.iter_mut().for_each(|x| *x /= total);
    }
    Ok(ProbVector(entries))
}

// ln G with G ~ Gamma(shape, 1). For shape < 1 uses G = G' * U^(1/shape),
// G' ~ Gamma(shape + 1, 1).
fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("shape validated").sample(rng);
        floored_ln(g)
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("shape validated").sample(rng);
        // (0, 1]
        let u = 1.0 - rng.random::<f64>();
        floored_ln(g) + u.ln() / shape
    }
}

/// Draw an index with probability `p[i]`.
pub fn sample_categorical<R: Rng + ?Sized>(p: &ProbVector, rng: &mut R) -> usize {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &pi) in p.0.iter().enumerate() {
        if pi > 0.0 {
            acc += pi;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    // rounding left u above the accumulated mass
    last_positive
}

/// Draw `n` items from `Mult(p)` by sequential conditional binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(n: u64, p: &ProbVector, rng: &mut R) -> Result<CountHistogram> {
    if n < 1 {
        return Err(Error::param("multinomial draw count must be at least 1"));
    }
    let n_u32 = u32::try_from(n).map_err(|_| Error::param("multinomial draw count exceeds u32"))?;
    let mut counts = vec![0u32; p.len()];
    let mut remaining = n;
    let mut mass_left = 1.0;
    for (i, &pi) in p.0.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == p.len() || mass_left <= 0.0 {
            counts[i] = remaining as u32;
            remaining = 0;
            break;
        }
        let q = (pi / mass_left).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q).expect("probability clamped").sample(rng);
        counts[i] = k as u32;
        remaining -= k;
        mass_left -= pi;
    }
    if remaining > 0 {
        // mass_left hit zero before the tail; place leftovers on the last positive entry
        let idx = p.0.iter().rposition(|&x| x > 0.0).unwrap_or(0);
        counts[idx] += remaining as u32;
    }
    debug_assert_eq!(counts.iter().map(|&c| u64::from(c)).sum::<u64>(), u64::from(n_u32));
    Ok(CountHistogram(counts))
}

/// `sum_f obs[f] * ln p[f]`.
///
/// The multinomial coefficient is left out: it depends only on the
/// observation, so it cancels whenever mixture components are compared.
pub fn log_multinomial_weight(obs: &CountHistogram, p: &ProbVector) -> Result<f64> {
    if obs.len() != p.len() {
        return Err(Error::param(format!(
            "histogram has {} bins but distribution has {} outcomes",
            obs.len(),
            p.len()
        )));
    }
    Ok(dot_counts_ln(obs.as_slice(), &p.ln_floored()))
}

/// Inner loop of [`log_multinomial_weight`] against precomputed log-probabilities.
#[inline]
pub(crate) fn dot_counts_ln(counts: &[u32], ln_p: &[f64]) -> f64 {
    counts
        .iter()
        .zip(ln_p)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &lp)| f64::from(c) * lp)
        .sum()
}

/// Normalize `exp(logw)` with the log-sum-exp shift.
pub fn normalize_log_weights(logw: &[f64]) -> Result<ProbVector> {
    if logw.is_empty() {
        return Err(Error::param("log weight vector is empty"));
    }
    if logw.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
        return Err(Error::param("log weights contain NaN or +inf"));
    }
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::Degenerate);
    }
    let mut out: Vec<f64> = logw.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
    Ok(ProbVector(out))
}

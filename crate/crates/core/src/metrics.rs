//! Categorization (ARI) and sign-sharing (Cohen's kappa) scores.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores of one game iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub iteration: usize,
    pub ari_a: f64,
    pub ari_b: f64,
    /// Absent when both agents share one sign vector by construction.
    pub kappa: Option<f64>,
}

fn pairs(n: usize) -> i128 {
    let n = n as i128;
    n * (n - 1) / 2
}

fn check_lengths(x: &[usize], y: &[usize]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::param(format!(
            "label vectors differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::param("label vectors are empty"));
    }
    Ok(())
}

// Same grouping up to a relabeling on each side.
fn same_partition(x: &[usize], y: &[usize]) -> bool {
    let mut fwd = HashMap::new();
    let mut back = HashMap::new();
    x.iter()
        .zip(y)
        .all(|(a, b)| *fwd.entry(a).or_insert(b) == b && *back.entry(b).or_insert(a) == a)
}

/// Adjusted Rand index from the pair-counting contingency table.
///
/// When the index is undefined (both partitions trivial) this returns 1.0
/// if they group objects identically and 0.0 otherwise.
pub fn adjusted_rand_index(labels_x: &[usize], labels_y: &[usize]) -> Result<f64> {
    check_lengths(labels_x, labels_y)?;
    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut rows: HashMap<usize, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    for (&a, &b) in labels_x.iter().zip(labels_y) {
        *table.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    // Exact integer form of (index - expected) / (max - expected), scaled by
    // 2 * total pairs.
    let index: i128 = table.values().map(|&n| pairs(n)).sum();
    let sum_rows: i128 = rows.values().map(|&n| pairs(n)).sum();
    let sum_cols: i128 = cols.values().map(|&n| pairs(n)).sum();
    let total = pairs(labels_x.len());
    let num = 2 * (index * total - sum_rows * sum_cols);
    let denom = (sum_rows + sum_cols) * total - 2 * sum_rows * sum_cols;
    if denom == 0 {
        return Ok(if same_partition(labels_x, labels_y) { 1.0 } else { 0.0 });
    }
    Ok(num as f64 / denom as f64)
}

/// Cohen's kappa between two sign vectors over a vocabulary of `num_signs`.
pub fn kappa(signs_a: &[usize], signs_b: &[usize], num_signs: usize) -> Result<f64> {
    check_lengths(signs_a, signs_b)?;
    if let Some(&w) = signs_a.iter().chain(signs_b).find(|&&w| w >= num_signs) {
        return Err(Error::param(format!("sign {w} outside vocabulary of {num_signs}")));
    }
    let n = signs_a.len() as f64;
    let mut freq_a = vec![0usize; num_signs];
    let mut freq_b = vec![0usize; num_signs];
    let mut agree = 0usize;
    for (&a, &b) in signs_a.iter().zip(signs_b) {
        freq_a[a] += 1;
        freq_b[b] += 1;
        agree += usize::from(a == b);
    }
    let observed = agree as f64 / n;
    let chance: f64 = freq_a
        .iter()
        .zip(&freq_b)
        .map(|(&x, &y)| (x as f64 / n) * (y as f64 / n))
        .sum();
    if (1.0 - chance).abs() < f64::EPSILON {
        return Ok(if observed == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((observed - chance) / (1.0 - chance))
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for one value).
pub fn summarize(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::param("cannot summarize an empty sample"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// Agreement label for a kappa value, for report annotations only.
pub fn kappa_band(k: f64) -> &'static str {
    match k {
        k if k < 0.0 => "no agreement",
        k if k <= 0.20 => "slight",
        k if k <= 0.40 => "fair",
        k if k <= 0.60 => "moderate",
        k if k <= 0.80 => "substantial",
        _ => "almost perfect",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ari_examples() {
        assert_eq!(adjusted_rand_index(&[3, 3, 1, 2], &[3, 3, 1, 2]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), -0.5);
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert!(adjusted_rand_index(&[0, 1], &[0]).is_err());
        assert!(adjusted_rand_index(&[], &[]).is_err());
    }

    #[test]
    fn ari_degenerate_cases() {
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[5, 5, 5]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[7], &[2]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 1, 2], &[4, 5, 6]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[0, 1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap(), 1.0);
        assert_eq!(kappa(&[0, 0, 1, 1], &[0, 1, 0, 1], 2).unwrap(), 0.0);
        assert_eq!(kappa(&[0, 0], &[1, 1], 2).unwrap(), 0.0);
        assert_eq!(kappa(&[1, 1], &[1, 1], 2).unwrap(), 1.0);
        assert!(kappa(&[0, 3], &[0, 1], 3).is_err());
        assert!(kappa(&[0], &[0, 1], 3).is_err());
    }

    #[test]
    fn kappa_is_not_relabeling_invariant() {
        let a = [0, 0, 1, 1, 2, 2];
        let relabeled = [1, 1, 2, 2, 0, 0];
        assert!(kappa(&a, &relabeled, 3).unwrap() < 0.0);
        assert_eq!(adjusted_rand_index(&a, &relabeled).unwrap(), 1.0);
    }

    #[test]
    fn summarize_examples() {
        assert_eq!(summarize(&[0.5, 0.5, 0.5]).unwrap(), (0.5, 0.0));
        let (m, sd) = summarize(&[0.0, 1.0]).unwrap();
        assert_eq!(m, 0.5);
        assert_abs_diff_eq!(sd, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_eq!(summarize(&[0.3]).unwrap(), (0.3, 0.0));
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn bands() {
        assert_eq!(kappa_band(0.95), "almost perfect");
        assert_eq!(kappa_band(0.004), "slight");
        assert_eq!(kappa_band(-0.01), "no agreement");
    }
}

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sorted;
use crate::error::{LabError, Result};

pub const DEFAULT_PERMUTATIONS: usize = 1000;

/// Two-sample KS distance with its permutation p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub distance: f64,
    pub p_value: f64,
    pub permutations: usize,
}

/// Sup-distance between empirical CDFs, evaluated at the end of each run of
/// tied values in the pooled sample. `labels[i]` marks membership of the
/// `i`-th pooled order statistic in the first sample.
fn pooled_distance(pool: &[f64], labels: &[bool], na: usize, nb: usize) -> f64 {
    let (wa, wb) = (1.0 / na as f64, 1.0 / nb as f64);
    let (mut ca, mut cb) = (0usize, 0usize);
    let mut best = 0.0f64;
    for i in 0..pool.len() {
        if labels[i] {
            ca += 1;
        } else {
            cb += 1;
        }
        if i + 1 == pool.len() || pool[i + 1] != pool[i] {
            best = best.max((ca as f64 * wa - cb as f64 * wb).abs());
        }
    }
    best
}

fn pool(a: &[f64], b: &[f64]) -> Result<(Vec<f64>, Vec<bool>)> {
    if a.is_empty() || b.is_empty() {
        return Err(LabError::Empty("two-sample KS needs two nonempty samples"));
    }
    let sa = sorted(a)?;
    let sb = sorted(b)?;
    let mut values = Vec::with_capacity(sa.len() + sb.len());
    let mut labels = Vec::with_capacity(sa.len() + sb.len());
    let (mut i, mut j) = (0, 0);
    while i < sa.len() || j < sb.len() {
        if j == sb.len() || (i < sa.len() && sa[i] <= sb[j]) {
            values.push(sa[i]);
            labels.push(true);
            i += 1;
        } else {
            values.push(sb[j]);
            labels.push(false);
            j += 1;
        }
    }
    Ok((values, labels))
}

/// Classical two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let (values, labels) = pool(a, b)?;
    Ok(pooled_distance(&values, &labels, a.len(), b.len()))
}

/// KS distance and a permutation p-value `(1 + #{D* >= D}) / (1 + P)`.
pub fn ks_two_sample_test<R: Rng + ?Sized>(a: &[f64], b: &[f64], permutations: usize, rng: &mut R) -> Result<KsTest> {
    let (values, mut labels) = pool(a, b)?;
    let (na, nb) = (a.len(), b.len());
    let distance = pooled_distance(&values, &labels, na, nb);
    let mut hits = 0usize;
    for _ in 0..permutations {
        labels.shuffle(rng);
        // guard against rounding in the comparison of equal statistics
        if pooled_distance(&values, &labels, na, nb) >= distance - 1e-12 {
            hits += 1;
        }
    }
    Ok(KsTest { distance, p_value: (1 + hits) as f64 / (1 + permutations) as f64, permutations })
}

/// `sup_x |F_n(x) - F(x)|` for a continuous CDF `F`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(LabError::Empty("one-sample KS needs a nonempty sample"));
    }
    let s = sorted(sample)?;
    let n = s.len() as f64;
    let mut best = 0.0f64;
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j + 1 < s.len() && s[j + 1] == s[i] {
            j += 1;
        }
        let f = cdf(s[i]);
        best = best.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    Ok(best)
}

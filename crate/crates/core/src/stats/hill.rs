use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

/// Hill estimate of a tail index with its asymptotic 95% interval
/// `alpha_hat (1 +- 1.96 / sqrt(k))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillEstimate {
    pub alpha: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Number of upper order statistics used.
    pub k: usize,
    /// The `(k+1)`-th largest value.
    pub threshold: f64,
}

pub const MIN_EXCEEDANCES: usize = 100;

/// Hill estimator over the top `top_fraction` of the sample.
pub fn hill_estimate(samples: &[f64], top_fraction: f64) -> Result<HillEstimate> {
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(invalid(format!("top fraction must lie in (0, 1), got {top_fraction}")));
    }
    let k = (top_fraction * samples.len() as f64).floor() as usize;
    if k < MIN_EXCEEDANCES {
        return Err(LabError::InsufficientData(format!("{k} exceedances, at least {MIN_EXCEEDANCES} needed")));
    }
    let mut v = super::sorted(samples)?;
    v.reverse();
    let threshold = v[k];
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(LabError::InsufficientData(format!("tail threshold {threshold} is not positive")));
    }
    let log_t = threshold.ln();
    let s: f64 = v[..k].iter().map(|x| x.ln() - log_t).sum();
    if !(s > 0.0) || !s.is_finite() {
        return Err(LabError::InsufficientData("upper order statistics show no tail".into()));
    }
    let alpha = k as f64 / s;
    let half = 1.96 * alpha / (k as f64).sqrt();
    Ok(HillEstimate { alpha, ci_low: alpha - half, ci_high: alpha + half, k, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    #[test]
    fn exact_pareto() {
        let mut rng = stream(8, Purpose::Reference, 0);
        let xs: Vec<f64> = (0..1_000_000).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / 0.8)).collect();
        let h = hill_estimate(&xs, 0.05).unwrap();
        assert!((0.78..=0.82).contains(&h.alpha), "{h:?}");
        assert!(h.ci_low < 0.8 && 0.8 < h.ci_high);
    }

    #[test]
    fn degenerate_samples() {
        assert!(hill_estimate(&vec![3.0; 10_000], 0.05).is_err());
        assert!(hill_estimate(&[1.0, 2.0, 3.0], 0.5).is_err());
        assert!(hill_estimate(&vec![1.0; 10_000], 1.5).is_err());
        let zeros: Vec<f64> = (0..10_000).map(|i| if i < 9_990 { 0.0 } else { i as f64 }).collect();
        assert!(hill_estimate(&zeros, 0.05).is_err());
    }
}

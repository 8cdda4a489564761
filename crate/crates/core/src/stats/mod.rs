//! Two-sample and one-sample Kolmogorov-Smirnov statistics, the Hill
//! tail-index estimator and independence diagnostics.

mod dependence;
mod hill;
mod ks;

pub use dependence::{distance_correlation, quantile_grid_factorization, ranks};
pub use hill::{hill_estimate, HillEstimate, MIN_EXCEEDANCES};
pub use ks::{ks_one_sample, ks_two_sample, ks_two_sample_test, KsTest, DEFAULT_PERMUTATIONS};

use crate::error::{LabError, Result};

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(LabError::Empty("mean of an empty sample"));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, f64::INFINITY));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Standard error of a Bernoulli proportion, `sqrt(p (1 - p) / n)`.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

pub(crate) fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(LabError::InvalidParameter("sample contains NaN".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

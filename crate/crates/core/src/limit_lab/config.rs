use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::gibbs_markov::Observable;

/// The dynamical system driving an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Dyadic,
    HeavySymmetric {
        alpha: f64,
    },
    HeavyOneSided {
        alpha: f64,
    },
    MarkovModulated {
        alpha: f64,
        gamma_plus: f64,
        gamma_minus: f64,
    },
    /// The two-cusp intermittent map with `T x - x ~ (2x)^p x` at both cusps.
    Intermittent {
        p: f64,
    },
}

/// Monte Carlo budgets. Every pass/fail line of a report quotes one of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Two-sample KS distance for marginals and increments.
    pub ks: f64,
    /// KS distance for the J1-continuous functionals.
    pub j1_ks: f64,
    pub arcsine_ks: f64,
    /// KS distance between the `m >= 1` and `m >= 0` occupation fractions.
    pub convention_ks: f64,
    pub excursion_marginal_ks: f64,
    pub dcor: f64,
    pub factorization: f64,
    /// Slack, in combined standard errors, for the maximal inequalities.
    pub mc_se: f64,
    /// Slack, in standard errors, for monotonicity in `delta`.
    pub monotone_se: f64,
    /// Bound on the exceedance probability at the smallest `delta`.
    pub tightness_small: f64,
    /// Half-width around `1/p` for the Hill estimates.
    pub hill: f64,
    pub side_ratio_low: f64,
    pub side_ratio_high: f64,
    /// Largest relative spread of the weighted-tail constants across `n`.
    pub weighted_spread: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ks: 0.03,
            j1_ks: 0.04,
            arcsine_ks: 0.05,
            convention_ks: 0.01,
            excursion_marginal_ks: 0.04,
            dcor: 0.05,
            factorization: 0.03,
            mc_se: 3.0,
            monotone_se: 2.0,
            tightness_small: 0.02,
            hill: 0.05,
            side_ratio_low: 0.9,
            side_ratio_high: 1.1,
            weighted_spread: 0.2,
        }
    }
}

/// Which function enters the exponentially weighted sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightedInput {
    /// The observable itself.
    Observable,
    /// Its cylinderwise Lipschitz constant `theta_f`.
    Theta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightedOptions {
    pub rho: f64,
    pub s_grid: Vec<f64>,
    pub ns: Vec<usize>,
    pub replicates: usize,
    pub input: WeightedInput,
}

impl Default for WeightedOptions {
    fn default() -> Self {
        Self {
            rho: 0.5,
            s_grid: vec![5.0, 10.0, 20.0, 50.0],
            ns: vec![10, 100, 1000],
            replicates: 20_000,
            input: WeightedInput::Theta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub permutations: usize,
    /// Reference draws per replicate in two-sample tests.
    pub reference_multiplier: usize,
    /// Grid of the reference Levy paths in the J1 probe.
    pub reference_grid: usize,
    pub deltas: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// Horizons of the maximal-inequality check.
    pub ns: Vec<usize>,
    /// `kappa = factor * B_n`.
    pub kappa_factors: Vec<f64>,
    /// Multiples of the observable in the arcsine experiment.
    pub scales: Vec<i64>,
    pub m0s: Vec<i64>,
    pub top_fraction: f64,
    /// Returns for the excursion tail estimates.
    pub returns: usize,
    pub burn_in: usize,
    pub thresholds: Vec<f64>,
    /// Induced-orbit returns used to calibrate the per-side tail constants.
    pub calibration_returns: usize,
    pub calibration_threshold: f64,
    /// Quantile levels of the factorization grid.
    pub grid_levels: Vec<f64>,
    /// Longest excursion simulated before censoring; `None` means no cap.
    pub cap: Option<f64>,
    pub weighted: WeightedOptions,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            permutations: 1000,
            reference_multiplier: 4,
            reference_grid: 2000,
            deltas: vec![0.1, 0.03, 0.01, 0.003, 0.001],
            epsilons: vec![0.5],
            ns: vec![100, 1000],
            kappa_factors: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            scales: vec![1, 2],
            m0s: vec![0, 1],
            top_fraction: 0.05,
            returns: 1_000_000,
            burn_in: 1000,
            thresholds: vec![1e2, 1e3, 1e4],
            calibration_returns: 20_000_000,
            calibration_threshold: 1e6,
            grid_levels: vec![0.25, 0.5, 0.75],
            cap: None,
            weighted: WeightedOptions::default(),
        }
    }
}

fn default_times() -> Vec<f64> {
    vec![1.0]
}

fn default_observable() -> Observable {
    Observable::Symbol { scale: 1 }
}

/// A fully resolved experiment. Reports embed this verbatim, so feeding it
/// back reproduces the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    #[serde(default = "default_observable")]
    pub observable: Observable,
    /// Time horizon: steps of the dynamics, or induced returns.
    pub n: usize,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub options: Options,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(system: SystemSpec, observable: Observable, n: usize, replicates: usize, seed: u64) -> Self {
        Self {
            system,
            observable,
            n,
            replicates,
            seed,
            times: default_times(),
            tolerances: Tolerances::default(),
            options: Options::default(),
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::Config(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.replicates < 2 {
            return bad(format!("at least two replicates are needed, got {}", self.replicates));
        }
        if self.times.is_empty() {
            return bad("times must be nonempty".into());
        }
        if self.times.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return bad(format!("times must lie in (0, 1], got {:?}", self.times));
        }
        if self.times.windows(2).any(|w| !(w[0] < w[1])) {
            return bad(format!("times must be strictly increasing, got {:?}", self.times));
        }
        let o = &self.options;
        if o.reference_multiplier == 0 {
            return bad("reference_multiplier must be at least 1".into());
        }
        if o.deltas.iter().any(|&d| !(d > 0.0 && d <= 1.0)) || o.deltas.windows(2).any(|w| !(w[0] > w[1])) {
            return bad(format!("deltas must be a decreasing grid in (0, 1], got {:?}", o.deltas));
        }
        if o.epsilons.iter().any(|&e| !(e > 0.0)) {
            return bad("epsilons must be positive".into());
        }
        if o.kappa_factors.iter().any(|&k| !(k > 0.0)) {
            return bad("kappa factors must be positive".into());
        }
        if !(o.top_fraction > 0.0 && o.top_fraction < 1.0) {
            return bad(format!("top_fraction must lie in (0, 1), got {}", o.top_fraction));
        }
        if o.grid_levels.is_empty() || o.grid_levels.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
            return bad("grid levels must lie in (0, 1)".into());
        }
        let w = &o.weighted;
        if !(w.rho > 0.0 && w.rho < 1.0) {
            return bad(format!("weighted rho must lie in (0, 1), got {}", w.rho));
        }
        if matches!(o.cap, Some(c) if !(c >= 2.0)) {
            return bad("the excursion cap must be at least 2".into());
        }
        Ok(())
    }
}

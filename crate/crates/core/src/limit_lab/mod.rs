//! Seeded Monte Carlo experiments turning the limit theorems, maximal
//! inequalities and excursion results into pass/fail reports.
//!
//! Replicate `i` of an experiment with master seed `s` always draws from
//! `stream(s, Dynamics, i)`; reference samples and permutations have their
//! own purposes. Replicates run on the rayon pool and are collected in index
//! order, so reports do not depend on the number of workers.

mod arcsine;
mod config;
mod excursions;
mod inequalities;
mod marginals;
mod report;
mod selftest;
mod system;

pub use arcsine::arcsine_test;
pub use config::{ExperimentConfig, Options, SystemSpec, Tolerances, WeightedInput, WeightedOptions};
pub use excursions::{directional_weights, excursion_test, independence_test, DirectionalWeights};
pub use inequalities::{
    exceedance_table, maximal_inequality_check, tightness_diagnostic, weighted_tail_check, ExceedanceTable,
};
pub use marginals::{fdd_test, j1_convergence_probe, marginal_test, path_functionals};
pub use report::{plot_script, Bound, Criterion, ExperimentReport, Table};
pub use selftest::{default_selftest_config, selftest};
pub use system::{partial_sums, IntermittentSystem, Normalization, System};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::{stream, Purpose};
use crate::stats::{ks_two_sample_test, KsTest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Marginal,
    Fdd,
    Tightness,
    Maxineq,
    Arcsine,
    Excursions,
    Independence,
    J1probe,
    Selftest,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Marginal => "marginal",
            ExperimentKind::Fdd => "fdd",
            ExperimentKind::Tightness => "tightness",
            ExperimentKind::Maxineq => "maxineq",
            ExperimentKind::Arcsine => "arcsine",
            ExperimentKind::Excursions => "excursions",
            ExperimentKind::Independence => "independence",
            ExperimentKind::J1probe => "j1probe",
            ExperimentKind::Selftest => "selftest",
        }
    }
}

pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match kind {
        ExperimentKind::Marginal => marginal_test(cfg),
        ExperimentKind::Fdd => fdd_test(cfg),
        ExperimentKind::Tightness => tightness_diagnostic(cfg),
        ExperimentKind::Maxineq => maximal_inequality_check(cfg),
        ExperimentKind::Arcsine => arcsine_test(cfg),
        ExperimentKind::Excursions => excursion_test(cfg),
        ExperimentKind::Independence => independence_test(cfg),
        ExperimentKind::J1probe => j1_convergence_probe(cfg),
        ExperimentKind::Selftest => selftest(cfg),
    }
}

/// Two-sample KS test whose permutations draw from the `index`-th
/// permutation stream of the experiment.
pub(crate) fn two_sample(a: &[f64], b: &[f64], cfg: &ExperimentConfig, index: u64) -> Result<KsTest> {
    let mut rng = stream(cfg.seed, Purpose::Permutation, index);
    ks_two_sample_test(a, b, cfg.options.permutations, &mut rng)
}

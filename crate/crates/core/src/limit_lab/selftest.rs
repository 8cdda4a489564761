//! The pathwise-exact invariants, each of which must hold with zero
//! violations on every sample.

use rand::Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, SystemSpec};
use super::inequalities::path_maxima;
use super::report::{Bound, Criterion, ExperimentReport};
use super::system::partial_sums;
use crate::cadlag::{j1_distance, sup_distance, CadlagPath};
use crate::error::Result;
use crate::gibbs_markov::{oscillation_check, DyadicRenewalMap, GibbsMarkov, HeavyBernoulliShift, Observable};
use crate::intermittent::{disjointness_violations, IntermittentMap, ReturnStructure};
use crate::rng::{child_seed, stream, Purpose};
use crate::zextension::{skew_orbit, SkewProductState};

pub const CYLINDERS: usize = 1000;
pub const PAIRS: usize = 100;
pub const MAX_WORD: usize = 12;
pub const J1_PAIRS: usize = 200;

/// Oscillation bound on random cylinders, the tail inclusion of the maximal
/// inequalities on every path, disjoint excursion supports along
/// `options.returns` returns, exact Z-extension levels, and the J1 distance
/// being symmetric and dominated by the sup distance.
///
/// Uses `cfg.seed`, `cfg.n` and `cfg.replicates` (path length and count for
/// the inclusion), `options.kappa_factors` and `options.returns`; the
/// system entries of the config are not used.
pub fn selftest(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = ExperimentReport::new("selftest", cfg);
    let seed = cfg.seed;

    let dyadic = DyadicRenewalMap::new();
    let observables =
        [Observable::Power { alpha: 0.8 }, Observable::Power { alpha: 1.5 }, Observable::Symbol { scale: 3 }];
    let osc: usize = (0..CYLINDERS as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(child_seed(seed, "oscillation"), Purpose::Cylinders, i);
            let len = rng.random_range(1..=MAX_WORD);
            let word: Vec<i64> = (0..len).map(|_| dyadic.sample_symbol(&mut rng)).collect();
            let f = &observables[i as usize % observables.len()];
            oscillation_check(&dyadic, f, &word, PAIRS, &mut rng)
        })
        .sum::<Result<usize>>()?;
    report.check(Criterion::new("oscillation_violations", osc as f64, Bound::Equal(0.0)));

    let f = Observable::Power { alpha: 0.8 };
    let kappas: Vec<f64> = cfg.options.kappa_factors.iter().map(|k| k * (cfg.n as f64).powf(1.25)).collect();
    let inclusion: u64 = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|i| {
            let orbit = dyadic.sample_orbit(cfg.n, &mut stream(child_seed(seed, "inclusion"), Purpose::Dynamics, i));
            let values: Vec<f64> = orbit.points.iter().zip(&orbit.symbols).map(|(&x, &k)| f.eval(x, k)).collect();
            let m = path_maxima(&partial_sums(&values));
            kappas.iter().filter(|&&kappa| m.max_tail > kappa && !(m.max_abs > kappa / 2.0)).count() as u64
        })
        .sum();
    report.check(Criterion::new("tail_inclusion_violations", inclusion as f64, Bound::Equal(0.0)));

    let map = IntermittentMap::new(3.0)?;
    let rs = ReturnStructure::find(&map)?;
    let disjoint = disjointness_violations(&map, &rs, cfg.options.returns, &mut stream(seed, Purpose::Misc, 1))?;
    report.check(Criterion::new("disjointness_violations", disjoint as f64, Bound::Equal(0.0)));

    // one skew step from each point of a sampled orbit moves the level by
    // the integer observable of that point's symbol
    let heavy = HeavyBernoulliShift::symmetric(0.75)?;
    let g = Observable::Symbol { scale: 2 };
    let mut level_mismatches = 0u64;
    let mut rng = stream(seed, Purpose::Misc, 2);
    for _ in 0..200 {
        let orbit = heavy.sample_orbit(40, &mut rng);
        let mut m = 5i128;
        for (&x, &sym) in orbit.points.iter().zip(&orbit.symbols) {
            let levels = skew_orbit(&heavy, &g, SkewProductState { x, m }, 1)?;
            m += 2 * sym as i128;
            if levels[1] != m {
                level_mismatches += 1;
            }
        }
    }
    report.check(Criterion::new("level_mismatches", level_mismatches as f64, Bound::Equal(0.0)));

    let mut j1_bad = 0u64;
    let mut rng = stream(seed, Purpose::Misc, 3);
    let random_path = |rng: &mut crate::rng::LabRng| -> Result<CadlagPath<f64>> {
        let jumps = rng.random_range(0..=3usize);
        let mut times = vec![0.0];
        let mut ts: Vec<f64> = (0..jumps).map(|_| rng.random::<f64>()).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        times.extend(ts.into_iter().filter(|&t| t > 0.0));
        let values: Vec<f64> = times.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
        CadlagPath::step_1d(1.0, &times, &values)
    };
    for _ in 0..J1_PAIRS {
        let x = random_path(&mut rng)?;
        let y = random_path(&mut rng)?;
        let dxy = j1_distance(&x, &y, 1.0)?;
        let dyx = j1_distance(&y, &x, 1.0)?;
        let sup = sup_distance(&x, &y)?;
        if dxy != dyx || dxy > sup || dxy < 0.0 || j1_distance(&x, &x, 1.0)? != 0.0 {
            j1_bad += 1;
        }
    }
    report.check(Criterion::new("j1_axiom_violations", j1_bad as f64, Bound::Equal(0.0)));
    Ok(report)
}

/// The configuration `selftest` runs with when none is given.
pub fn default_selftest_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(SystemSpec::Dyadic, Observable::Power { alpha: 0.8 }, 1000, 2000, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_selftest_passes() {
        let mut cfg = default_selftest_config(3);
        cfg.n = 100;
        cfg.replicates = 50;
        cfg.options.returns = 20_000;
        let r = selftest(&cfg).unwrap();
        assert!(r.passed, "{}", r.summary());
        assert_eq!(r.criteria.len(), 5);
    }
}

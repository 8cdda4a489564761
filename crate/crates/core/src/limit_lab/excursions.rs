//! Excursions of the intermittent map to its two neutral fixed points:
//! tail indices, disjoint supports, and the asymptotic independence of the
//! two excursion processes.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::{Bound, Criterion, ExperimentReport, Table};
use super::system::{IntermittentSystem, System};
use super::two_sample;
use crate::error::{LabError, Result};
use crate::intermittent::{disjointness_violations, excursion_tail_estimate, TailMode};
use crate::rng::{child_seed, stream, Purpose};
use crate::stable_laws::{StableParams, StableSampler};
use crate::stats::{distance_correlation, quantile_grid_factorization, ranks, MIN_EXCEEDANCES};

/// Conditional directions of `(phi^(0), phi^(1))` given its norm exceeds
/// each threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionalWeights {
    pub thresholds: Vec<f64>,
    pub exceedances: Vec<u64>,
    /// Exceedances pointing along `e_0` and `e_1`.
    pub axis: Vec<[u64; 2]>,
    pub off_axis: Vec<u64>,
}

impl DirectionalWeights {
    pub fn new(thresholds: &[f64]) -> Self {
        let k = thresholds.len();
        Self { thresholds: thresholds.to_vec(), exceedances: vec![0; k], axis: vec![[0; 2]; k], off_axis: vec![0; k] }
    }

    pub fn add(&mut self, v: [f64; 2]) {
        let norm = v[0].hypot(v[1]);
        for (i, &t) in self.thresholds.iter().enumerate() {
            if norm > t {
                self.exceedances[i] += 1;
                match (v[0] != 0.0, v[1] != 0.0) {
                    (true, false) => self.axis[i][0] += 1,
                    (false, true) => self.axis[i][1] += 1,
                    _ => self.off_axis[i] += 1,
                }
            }
        }
    }

    pub fn merge(mut self, o: &Self) -> Self {
        for i in 0..self.thresholds.len() {
            self.exceedances[i] += o.exceedances[i];
            self.off_axis[i] += o.off_axis[i];
            self.axis[i][0] += o.axis[i][0];
            self.axis[i][1] += o.axis[i][1];
        }
        self
    }

    /// Fractions of the exceedances along `e_0` and `e_1` per threshold.
    pub fn weights(&self) -> Result<Vec<[f64; 2]>> {
        self.exceedances
            .iter()
            .zip(&self.axis)
            .zip(&self.thresholds)
            .map(|((&e, a), t)| {
                if e < MIN_EXCEEDANCES as u64 {
                    return Err(LabError::InsufficientData(format!("{e} exceedances of {t}")));
                }
                Ok([a[0] as f64 / e as f64, a[1] as f64 / e as f64])
            })
            .collect()
    }
}

/// Directional weights of `(phi^(0), phi^(1))` along an induced orbit.
pub fn directional_weights<R: Rng + ?Sized>(
    sys: &IntermittentSystem,
    x0: f64,
    returns: usize,
    thresholds: &[f64],
    rng: &mut R,
) -> Result<DirectionalWeights> {
    let mut w = DirectionalWeights::new(thresholds);
    let mut x = x0;
    for _ in 0..returns {
        let r = sys.returns.first_return_dithered(&sys.map, x, None, rng)?;
        w.add(r.components());
        x = r.point;
    }
    Ok(w)
}

fn intermittent_of(cfg: &ExperimentConfig) -> Result<System> {
    let sys = System::build(&cfg.system)?;
    sys.intermittent()?;
    Ok(sys)
}

/// Hill estimates of both excursion tails, from independent uniform
/// draws and along burnt-in induced orbits, with the side count ratio; plus
/// the pathwise disjointness of the two excursion observables.
pub fn excursion_test(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sys = intermittent_of(cfg)?;
    let s = sys.intermittent()?;
    let o = &cfg.options;
    let tol = &cfg.tolerances;
    let target = s.returns.alpha();
    let mut report = ExperimentReport::new("excursions", cfg);
    report.stat("alpha", target);
    let mut table = Table::new(&["mode", "side", "alpha", "ci_low", "ci_high", "k", "exceedances"]);
    let modes = [("raw", TailMode::Raw), ("burn_in", TailMode::BurnIn { discard: o.burn_in })];
    for (m, (label, mode)) in modes.into_iter().enumerate() {
        let mut rng = stream(cfg.seed, Purpose::Dynamics, m as u64);
        let est = excursion_tail_estimate(&s.map, &s.returns, o.returns, mode, o.top_fraction, o.cap, &mut rng)?;
        report.censored += est.censored as u64;
        for (j, side) in est.sides.iter().enumerate() {
            let h = &side.hill;
            report.check(Criterion::new(
                format!("hill_{label}_side{j}"),
                h.alpha,
                Bound::Within([target - tol.hill, target + tol.hill]),
            ));
            table.push(vec![m as f64, j as f64, h.alpha, h.ci_low, h.ci_high, h.k as f64, side.exceedances as f64]);
        }
        report.check(Criterion::new(
            format!("side_ratio_{label}"),
            est.count_ratio,
            Bound::Within([tol.side_ratio_low, tol.side_ratio_high]),
        ));
        report.stat(label, &est);
    }
    let violations = disjointness_violations(&s.map, &s.returns, o.returns, &mut stream(cfg.seed, Purpose::Misc, 1))?;
    report.check(Criterion::new("disjointness_violations", violations as f64, Bound::Equal(0.0)));
    report.table = Some(table);
    Ok(report)
}

struct ReplicateSums {
    sums: [f64; 2],
    censored: u64,
    directions: DirectionalWeights,
}

/// Per-side sums over `n` returns after `burn_in` returns from a uniform
/// start. A censored excursion enters at the cap and restarts the orbit.
fn replicate_sums<R: Rng + ?Sized>(
    s: &IntermittentSystem,
    n: usize,
    burn_in: usize,
    cap: Option<f64>,
    thresholds: &[f64],
    rng: &mut R,
) -> Result<ReplicateSums> {
    let mut out = ReplicateSums { sums: [0.0; 2], censored: 0, directions: DirectionalWeights::new(thresholds) };
    let mut x = s.returns.sample_uniform(rng);
    for k in 0..burn_in + n {
        let comps = match s.returns.first_return_dithered(&s.map, x, cap, rng) {
            Ok(r) => {
                x = r.point;
                r.components()
            }
            Err(LabError::LongExcursion { cap }) => {
                out.censored += 1;
                let side = usize::from(x < 0.5);
                x = s.returns.sample_uniform(rng);
                let mut v = [0.0; 2];
                v[side] = cap;
                v
            }
            Err(e) => return Err(e),
        };
        if k >= burn_in {
            out.sums[0] += comps[0];
            out.sums[1] += comps[1];
            out.directions.add(comps);
        }
    }
    Ok(out)
}

/// Per-side tail constants `c_j` with `mu_Y(phi^(j) > t) ~ c_j t^-alpha`,
/// estimated from exceedances of `threshold` along burnt-in induced orbits.
fn calibrate(s: &IntermittentSystem, cfg: &ExperimentConfig) -> Result<[f64; 2]> {
    let o = &cfg.options;
    const CHAINS: usize = 20;
    let per_chain = o.calibration_returns.div_ceil(CHAINS);
    let seed = child_seed(cfg.seed, "calibration");
    let counts: Vec<[u64; 2]> = (0..CHAINS as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::Dynamics, i);
            let mut x = s.returns.sample_uniform(&mut rng);
            let mut c = [0u64; 2];
            for k in 0..o.burn_in + per_chain {
                let r = s.returns.first_return_dithered(&s.map, x, None, &mut rng)?;
                x = r.point;
                if k >= o.burn_in && r.phi > o.calibration_threshold {
                    c[r.side as usize] += 1;
                }
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let total = (per_chain * CHAINS) as f64;
    let alpha = s.returns.alpha();
    let mut c = [0.0; 2];
    for j in 0..2 {
        let hits: u64 = counts.iter().map(|v| v[j]).sum();
        if hits < MIN_EXCEEDANCES as u64 {
            return Err(LabError::InsufficientData(format!(
                "{hits} calibration exceedances on side {j}; raise calibration_returns"
            )));
        }
        c[j] = hits as f64 / total * o.calibration_threshold.powf(alpha);
    }
    Ok(c)
}

/// Asymptotic independence of the two excursion processes at time 1:
/// per-side sums over `n` returns, normalized by `(c_j n)^(1/alpha)` with
/// calibrated tail constants, tested by the bias-corrected distance
/// correlation of their ranks and by factorization of the joint CDF on a
/// quantile grid; each side is compared with the one-sided stable law, and
/// the directions of large returns must lie on the two axes.
pub fn independence_test(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sys = intermittent_of(cfg)?;
    let s = sys.intermittent()?;
    if !(s.returns.p() > 2.0) {
        return Err(LabError::Config(format!("independence needs p > 2, got {}", s.returns.p())));
    }
    let o = &cfg.options;
    let tol = &cfg.tolerances;
    let alpha = s.returns.alpha();
    let c = calibrate(s, cfg)?;
    let b: Vec<f64> = c.iter().map(|cj| (cj * cfg.n as f64).powf(1.0 / alpha)).collect();
    let seed = cfg.seed;
    let reps: Vec<ReplicateSums> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|i| replicate_sums(s, cfg.n, o.burn_in, o.cap, &o.thresholds, &mut stream(seed, Purpose::Dynamics, i)))
        .collect::<Result<_>>()?;
    let x: Vec<f64> = reps.iter().map(|r| r.sums[0] / b[0]).collect();
    let y: Vec<f64> = reps.iter().map(|r| r.sums[1] / b[1]).collect();

    let mut report = ExperimentReport::new("independence", cfg);
    report.censored = reps.iter().map(|r| r.censored).sum();
    report.stat("alpha", alpha);
    report.stat("tail_constants", c);
    report.stat("b_n", &b);
    let dcor = distance_correlation(&ranks(&x)?, &ranks(&y)?)?;
    report.check(Criterion::new("dcor", dcor, Bound::Below(tol.dcor)));
    let fact = quantile_grid_factorization(&x, &y, &o.grid_levels)?;
    report.check(Criterion::new("factorization", fact, Bound::Below(tol.factorization)));

    let limit = StableParams::new(alpha, 1.0, 0.0)?;
    let sampler = StableSampler::new(limit)?;
    for (j, side) in [&x, &y].into_iter().enumerate() {
        let mut rng = stream(child_seed(seed, "reference"), Purpose::Reference, j as u64);
        let refs: Vec<f64> =
            (0..cfg.replicates * o.reference_multiplier).map(|_| sampler.sample_f64(&mut rng)).collect();
        let ks = two_sample(side, &refs, cfg, j as u64)?;
        report.stat(&format!("marginal_ks_side{j}"), ks);
        report.check(Criterion::new(
            format!("marginal_ks_side{j}"),
            ks.distance,
            Bound::Below(tol.excursion_marginal_ks),
        ));
    }

    let directions = reps.iter().fold(DirectionalWeights::new(&o.thresholds), |acc, r| acc.merge(&r.directions));
    let weights = directions.weights()?;
    let off: u64 = directions.off_axis.iter().sum();
    report.check(Criterion::new("off_axis_exceedances", off as f64, Bound::Equal(0.0)));
    for (w, t) in weights.iter().zip(&o.thresholds) {
        report.check(Criterion::new(
            format!("direction_ratio_t{t}"),
            w[0] / w[1],
            Bound::Within([tol.side_ratio_low, tol.side_ratio_high]),
        ));
    }
    report.stat("directions", &directions);

    let mut table = Table::new(&["replicate", "side0", "side1"]);
    for (i, (a, bb)) in x.iter().zip(&y).enumerate() {
        table.push(vec![i as f64, *a, *bb]);
    }
    report.table = Some(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs_markov::Observable;
    use crate::limit_lab::config::SystemSpec;

    #[test]
    fn directions_of_axis_vectors() {
        let mut w = DirectionalWeights::new(&[1.0, 10.0]);
        w.add([5.0, 0.0]);
        w.add([0.0, 20.0]);
        w.add([3.0, 3.0]);
        w.add([0.5, 0.0]);
        assert_eq!(w.exceedances, vec![3, 1]);
        assert_eq!(w.axis, vec![[1, 1], [0, 1]]);
        assert_eq!(w.off_axis, vec![1, 0]);
        assert!(w.weights().is_err());
    }

    #[test]
    fn requires_a_superquadratic_cusp() {
        let cfg = ExperimentConfig::new(SystemSpec::Intermittent { p: 1.5 }, Observable::Symbol { scale: 1 }, 10, 4, 1);
        assert!(matches!(independence_test(&cfg), Err(LabError::Config(_))));
        let cfg = ExperimentConfig::new(SystemSpec::Dyadic, Observable::Symbol { scale: 1 }, 10, 4, 1);
        assert!(independence_test(&cfg).is_err());
    }

    #[test]
    fn small_independence_run() {
        let mut cfg =
            ExperimentConfig::new(SystemSpec::Intermittent { p: 3.0 }, Observable::Symbol { scale: 1 }, 2000, 200, 4);
        cfg.options.calibration_returns = 400_000;
        cfg.options.calibration_threshold = 1e4;
        cfg.options.permutations = 20;
        cfg.options.thresholds = vec![10.0, 100.0];
        let r = independence_test(&cfg).unwrap();
        assert_eq!(r.criterion("off_axis_exceedances").unwrap().statistic, 0.0);
        let c: [f64; 2] = serde_json::from_value(r.stats["tail_constants"].clone()).unwrap();
        assert!((c[0] / c[1] - 1.0).abs() < 0.1, "{c:?}");
        assert_eq!(r.table.as_ref().unwrap().rows.len(), 200);
    }

    #[test]
    fn capped_excursions_are_censored() {
        let sys = System::build(&SystemSpec::Intermittent { p: 3.0 }).unwrap();
        let s = sys.intermittent().unwrap();
        let r = replicate_sums(s, 5000, 0, Some(50.0), &[10.0], &mut stream(2, Purpose::Dynamics, 0)).unwrap();
        assert!(r.censored > 0);
        assert!(r.sums[0] + r.sums[1] <= 50.0 * 5000.0);
    }
}

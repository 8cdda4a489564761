//! Finite-dimensional marginals of the partial-sum process and the J1
//! probe through continuous functionals.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{Bound, Criterion, ExperimentReport, Table};
use super::system::{partial_sums, Normalization, System};
use super::two_sample;
use crate::cadlag::{occupation_fraction, CadlagPath};
use crate::error::{invalid, Result};
use crate::rng::{child_seed, stream, Purpose};
use crate::stable_laws::{arcsine_cdf, positivity_rho, reference_levy_path, ArcsineParams, StableSampler};
use crate::stats::{distance_correlation, ks_one_sample, ks_two_sample, ranks};

/// `(S_n(f) - A_n) / B_n` against the stable limit; the one-time case of
/// [`fdd_test`].
pub fn marginal_test(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut cfg = cfg.clone();
    cfg.times = vec![1.0];
    fdd("marginal", &cfg)
}

/// Joint law of the process at `cfg.times`: per-time two-sample KS against
/// `t^(1/alpha) S`, increments against `(t_2 - t_1)^(1/alpha) S`, and the
/// distance correlation of consecutive disjoint increments.
pub fn fdd_test(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    fdd("fdd", cfg)
}

fn fdd(name: &str, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sys = System::build(&cfg.system)?;
    let f = cfg.observable;
    let n = cfg.n;
    let norm = Normalization::canonical(&sys, &f, n)?;
    let alpha = norm.alpha();
    let steps: Vec<usize> = cfg.times.iter().map(|&t| (t * n as f64).floor() as usize).collect();
    if steps.windows(2).any(|w| w[0] == w[1]) || steps[0] == 0 {
        return Err(invalid(format!("times {:?} collapse on the grid k/{n}", cfg.times)));
    }
    let seed = cfg.seed;
    let rows: Vec<Vec<f64>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|i| {
            let values = sys.values(&f, n, &mut stream(seed, Purpose::Dynamics, i))?;
            let sums = partial_sums(&values);
            Ok(steps.iter().map(|&k| norm.scaled(&sums, k)).collect())
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new(name, cfg);
    report.stat("alpha", alpha);
    report.stat("c_plus", norm.tail.c_plus());
    report.stat("c_minus", norm.tail.c_minus());
    report.stat("a_n", norm.a_n);
    report.stat("b_n", norm.b_n);
    let sampler = StableSampler::new(norm.limit)?;
    let m_ref = cfg.replicates * cfg.options.reference_multiplier;
    let reference = |index: u64, scale: f64| -> Vec<f64> {
        let mut rng = stream(child_seed(seed, "reference"), Purpose::Reference, index);
        (0..m_ref).map(|_| scale * sampler.sample_f64(&mut rng)).collect()
    };
    let shift = norm.small_jump_shift();
    let mut tests = 0u64;
    let mut prev: Option<(f64, Vec<f64>)> = None;
    for (j, (&t, &k)) in cfg.times.iter().zip(&steps).enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let refs = reference(j as u64, t.powf(1.0 / alpha));
        let ks = two_sample(&col, &refs, cfg, tests)?;
        tests += 1;
        report.stat(&format!("ks_t{t}"), ks);
        report.check(Criterion::new(format!("ks_t{t}"), ks.distance, Bound::Below(cfg.tolerances.ks)));
        if alpha < 1.0 && shift != 0.0 {
            // diagnostic only: the same statistic with the missing small
            // jumps restored
            let frac = k as f64 / n as f64;
            let adjusted: Vec<f64> = col.iter().map(|v| v + frac * shift).collect();
            report.stat(&format!("diagnostic_small_jump_adjusted_ks_t{t}"), ks_two_sample(&adjusted, &refs)?);
        }
        if let Some((t0, prev_col)) = prev {
            let inc: Vec<f64> = col.iter().zip(&prev_col).map(|(a, b)| a - b).collect();
            let inc_ref = reference(1000 + j as u64, (t - t0).powf(1.0 / alpha));
            let ks = two_sample(&inc, &inc_ref, cfg, tests)?;
            tests += 1;
            let key = format!("increment_ks_{t0}_{t}");
            report.stat(&key, ks);
            report.check(Criterion::new(key, ks.distance, Bound::Below(cfg.tolerances.ks)));
            // the first increment of the pair starts where the previous one ended
            let earlier: Vec<f64> = match j {
                1 => prev_col.clone(),
                _ => prev_col.iter().zip(rows.iter().map(|r| r[j - 2])).map(|(a, b)| a - b).collect(),
            };
            let dcor = distance_correlation(&ranks(&earlier)?, &ranks(&inc)?)?;
            let key = format!("dcor_increments_{t0}_{t}");
            report.stat(&key, dcor);
            report.check(Criterion::new(key, dcor, Bound::Below(cfg.tolerances.dcor)));
        }
        prev = Some((t, col));
    }
    if alpha < 1.0 {
        report.stat("diagnostic_small_jump_shift", shift);
    }
    let mut header = vec!["replicate".to_string()];
    header.extend(cfg.times.iter().map(|t| format!("s_t{t}")));
    let mut table = Table { header, rows: Vec::with_capacity(rows.len()) };
    for (i, r) in rows.into_iter().enumerate() {
        let mut row = vec![i as f64];
        row.extend(r);
        table.push(row);
    }
    report.table = Some(table);
    Ok(report)
}

/// `[sup_t |x_t|, psi(x), largest jump]` of a path.
pub fn path_functionals(path: &CadlagPath<f64>) -> Result<[f64; 3]> {
    Ok([path.sup_norm(), occupation_fraction(path, 0)?, path.largest_jump()])
}

/// Compares the J1-continuous functionals sup, occupation fraction and
/// largest jump of the rescaled process with those of the limiting stable
/// Levy motion; also checks the occupation fraction against the arcsine
/// law `A_rho`.
pub fn j1_convergence_probe(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sys = System::build(&cfg.system)?;
    let f = cfg.observable;
    let norm = Normalization::canonical(&sys, &f, cfg.n)?;
    let seed = cfg.seed;
    let dynamic: Vec<[f64; 3]> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|i| {
            let values = sys.values(&f, cfg.n, &mut stream(seed, Purpose::Dynamics, i))?;
            let sums = partial_sums(&values);
            let path = CadlagPath::from_partial_sums(1, &sums, norm.b_n, &[norm.a_n])?;
            path_functionals(&path)
        })
        .collect::<Result<_>>()?;
    let g = cfg.options.reference_grid.max(1);
    let grid: Vec<f64> = (0..=g).map(|k| k as f64 / g as f64).collect();
    let m_ref = cfg.replicates * cfg.options.reference_multiplier;
    let reference: Vec<[f64; 3]> = (0..m_ref as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(child_seed(seed, "levy"), Purpose::Reference, i);
            path_functionals(&reference_levy_path(&norm.limit, &grid, &mut rng)?)
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new("j1probe", cfg);
    report.stat("alpha", norm.alpha());
    report.stat("b_n", norm.b_n);
    let rho = positivity_rho(&norm.limit, 200_000, &mut stream(seed, Purpose::Misc, 0))?;
    report.stat("rho", rho);
    // A one-sided limit has A_rho a point mass at rho; the KS distance
    // between two lattice approximations of a point mass is meaningless, so
    // the occupation fractions are only required to sit within one lattice
    // step of rho.
    let degenerate = rho <= 0.0 || rho >= 1.0;
    for (j, label) in ["sup", "occupation", "largest_jump"].into_iter().enumerate() {
        let a: Vec<f64> = dynamic.iter().map(|v| v[j]).collect();
        let b: Vec<f64> = reference.iter().map(|v| v[j]).collect();
        if j == 1 && degenerate {
            let off = |xs: &[f64], step: f64| {
                xs.iter().filter(|&&t| (t - rho).abs() > step * (1.0 + 1e-9)).count() as f64 / xs.len() as f64
            };
            let d = off(&a, 1.0 / cfg.n as f64).max(off(&b, 1.0 / g as f64));
            report.check(Criterion::new("occupation_point_mass", d, Bound::Below(cfg.tolerances.j1_ks)));
            continue;
        }
        let ks = two_sample(&a, &b, cfg, j as u64)?;
        report.stat(&format!("ks_{label}"), ks);
        report.check(Criterion::new(format!("ks_{label}"), ks.distance, Bound::Below(cfg.tolerances.j1_ks)));
    }
    if !degenerate {
        let psi: Vec<f64> = dynamic.iter().map(|v| v[1]).collect();
        let arcsine = ArcsineParams::new(rho)?;
        let d = ks_one_sample(&psi, |t| arcsine_cdf(&arcsine, t.clamp(0.0, 1.0)).unwrap_or(f64::NAN))?;
        report.check(Criterion::new("occupation_vs_arcsine", d, Bound::Below(cfg.tolerances.arcsine_ks)));
    }
    let mut table = Table::new(&["replicate", "sup", "occupation", "largest_jump"]);
    for (i, v) in dynamic.iter().enumerate() {
        table.push(vec![i as f64, v[0], v[1], v[2]]);
    }
    report.table = Some(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs_markov::Observable;
    use crate::limit_lab::config::SystemSpec;

    fn small(system: SystemSpec, f: Observable) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(system, f, 400, 300, 11);
        cfg.options.permutations = 50;
        cfg
    }

    #[test]
    fn one_time_fdd_is_the_marginal() {
        let cfg = small(SystemSpec::Dyadic, Observable::Power { alpha: 1.5 });
        let m = marginal_test(&cfg).unwrap();
        let f = fdd_test(&cfg).unwrap();
        assert_eq!(m.criteria, f.criteria);
        assert_eq!(m.stats, f.stats);
        assert_eq!(m.table, f.table);
    }

    #[test]
    fn fdd_reports_every_time_and_increment() {
        let mut cfg = small(SystemSpec::HeavySymmetric { alpha: 1.2 }, Observable::Symbol { scale: 1 });
        cfg.times = vec![0.25, 0.5, 1.0];
        let r = fdd_test(&cfg).unwrap();
        let names: Vec<&str> = r.criteria.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "ks_t0.25",
                "ks_t0.5",
                "increment_ks_0.25_0.5",
                "dcor_increments_0.25_0.5",
                "ks_t1",
                "increment_ks_0.5_1",
                "dcor_increments_0.5_1"
            ]
        );
        assert_eq!(r.table.as_ref().unwrap().rows.len(), 300);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let mut cfg = small(SystemSpec::Dyadic, Observable::Power { alpha: 0.8 });
        cfg.n = 2;
        cfg.times = vec![0.6, 0.9];
        assert!(fdd_test(&cfg).is_err());
        let cfg = small(SystemSpec::HeavySymmetric { alpha: 0.8 }, Observable::Constant { value: 0.0 });
        assert!(marginal_test(&cfg).is_err());
        let cfg = small(SystemSpec::HeavyOneSided { alpha: 1.0 }, Observable::Symbol { scale: 1 });
        assert!(marginal_test(&cfg).is_err());
    }

    #[test]
    fn functionals_of_a_known_path() {
        let p = CadlagPath::step_1d(1.0, &[0.0, 0.25, 0.5], &[0.0, 2.0, -1.0]).unwrap();
        assert_eq!(path_functionals(&p).unwrap(), [2.0, 0.25, 3.0]);
    }
}

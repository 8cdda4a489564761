use super::config::ExperimentConfig;
use super::report::{Bound, Criterion, ExperimentReport, Table};
use super::system::{with_gibbs, System};
use crate::error::{invalid, LabError, Result};
use crate::gibbs_markov::Observable;
use crate::rng::{child_seed, stream, Purpose};
use crate::stable_laws::arcsine_cdf;
use crate::stats::{ks_one_sample, ks_two_sample};
use crate::zextension::{arcsine_hypotheses, occupation_fraction_experiment, Occupation};

/// Occupation fractions of the upper half of the Z-extension by the
/// integer observable `scale * f`, started at level `m0`, for every
/// `(scale, m0)` of the options; each variant is compared with the
/// arcsine law `A_rho`, and the conventions `m >= 1` and `m >= 0` with each
/// other.
pub fn arcsine_test(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sys = System::build(&cfg.system)?;
    let base = match cfg.observable {
        Observable::Symbol { scale } => scale,
        _ => return Err(invalid("the arcsine experiment needs a symbol observable")),
    };
    if cfg.options.scales.is_empty() || cfg.options.m0s.is_empty() {
        return Err(invalid("the arcsine experiment needs scales and starting levels"));
    }
    let mut rng = stream(cfg.seed, Purpose::Misc, 0);
    let arcsine = with_gibbs!(&sys, s => arcsine_hypotheses(s, &cfg.observable, &mut rng)?)?;
    let cdf = |t: f64| arcsine_cdf(&arcsine, t).unwrap_or(f64::NAN);
    let mut report = ExperimentReport::new("arcsine", cfg);
    report.stat("rho", arcsine.rho());
    let tol = &cfg.tolerances;
    let mut table = Table::new(&["replicate", "scale", "m0", "positive", "nonnegative"]);
    for &scale in &cfg.options.scales {
        let f = Observable::Symbol { scale: base.checked_mul(scale).ok_or_else(|| LabError::Overflow)? };
        for &m0 in &cfg.options.m0s {
            let seed = child_seed(cfg.seed, &format!("arcsine-scale{scale}-m{m0}"));
            let occ: Vec<Occupation> = with_gibbs!(&sys, s => {
                occupation_fraction_experiment(s, &f, cfg.n, cfg.replicates, m0 as i128, seed)?
            })?;
            let pos: Vec<f64> = occ.iter().map(|o| o.positive).collect();
            let nonneg: Vec<f64> = occ.iter().map(|o| o.nonnegative).collect();
            let tag = format!("scale{scale}_m{m0}");
            let d_pos = ks_one_sample(&pos, cdf)?;
            let d_nonneg = ks_one_sample(&nonneg, cdf)?;
            let d_conv = ks_two_sample(&pos, &nonneg)?;
            report.stat(&format!("ks_nonnegative_{tag}"), d_nonneg);
            report.check(Criterion::new(format!("ks_{tag}"), d_pos, Bound::Below(tol.arcsine_ks)));
            report.check(Criterion::new(format!("convention_{tag}"), d_conv, Bound::Below(tol.convention_ks)));
            for (i, o) in occ.iter().enumerate() {
                table.push(vec![i as f64, scale as f64, m0 as f64, o.positive, o.nonnegative]);
            }
        }
    }
    report.table = Some(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit_lab::config::SystemSpec;

    #[test]
    fn variants_and_determinism() {
        let mut cfg = ExperimentConfig::new(
            SystemSpec::HeavySymmetric { alpha: 0.75 },
            Observable::Symbol { scale: 1 },
            500,
            40,
            9,
        );
        cfg.options.scales = vec![1, 2];
        cfg.options.m0s = vec![0, 1];
        let a = arcsine_test(&cfg).unwrap();
        let b = arcsine_test(&cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.criteria.len(), 8);
        assert_eq!(a.table.as_ref().unwrap().rows.len(), 160);
        assert_eq!(a.stats["rho"], 0.5);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let cfg = ExperimentConfig::new(SystemSpec::Dyadic, Observable::Power { alpha: 0.8 }, 10, 4, 1);
        assert!(arcsine_test(&cfg).is_err());
        // uncentered alpha > 1
        let cfg =
            ExperimentConfig::new(SystemSpec::HeavyOneSided { alpha: 1.5 }, Observable::Symbol { scale: 1 }, 10, 4, 1);
        assert!(arcsine_test(&cfg).is_err());
    }
}

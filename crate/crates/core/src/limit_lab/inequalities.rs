//! Tightness moduli, the maximal inequalities for ergodic sums and the
//! tails of exponentially weighted sums.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, WeightedInput};
use super::report::{Bound, Criterion, ExperimentReport, Table};
use super::system::{partial_sums, Normalization, System};
use crate::cadlag::{CadlagPath, Modulus};
use crate::error::{invalid, LabError, Result};
use crate::rng::{child_seed, stream, Purpose};
use crate::stats::proportion_se;

/// Exceedance counts of `Delta_delta^(j)(path) > eps` for `j = 1, 2, 3`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceedanceTable {
    pub deltas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub paths: u64,
    /// `counts[j - 1][d][e]`.
    pub counts: Vec<Vec<Vec<u64>>>,
}

impl ExceedanceTable {
    pub fn empty(deltas: &[f64], epsilons: &[f64]) -> Self {
        Self {
            deltas: deltas.to_vec(),
            epsilons: epsilons.to_vec(),
            paths: 0,
            counts: vec![vec![vec![0; epsilons.len()]; deltas.len()]; 3],
        }
    }

    pub fn add_path(&mut self, path: &CadlagPath<f64>) -> Result<()> {
        let m = Modulus::new(path);
        for j in 0..3 {
            for (d, &delta) in self.deltas.iter().enumerate() {
                let v = m.eval(delta, j as u8 + 1)?;
                for (e, &eps) in self.epsilons.iter().enumerate() {
                    self.counts[j][d][e] += u64::from(v > eps);
                }
            }
        }
        self.paths += 1;
        Ok(())
    }

    pub fn merge(mut self, other: &Self) -> Self {
        self.paths += other.paths;
        for (a, b) in self.counts.iter_mut().flatten().flatten().zip(other.counts.iter().flatten().flatten()) {
            *a += b;
        }
        self
    }

    /// Estimated `mu(Delta_delta^(j) > eps)`.
    pub fn prob(&self, j: usize, d: usize, e: usize) -> f64 {
        self.counts[j - 1][d][e] as f64 / self.paths.max(1) as f64
    }
}

pub fn exceedance_table(paths: &[CadlagPath<f64>], deltas: &[f64], epsilons: &[f64]) -> Result<ExceedanceTable> {
    let mut t = ExceedanceTable::empty(deltas, epsilons);
    for p in paths {
        t.add_path(p)?;
    }
    Ok(t)
}

/// Exceedance probabilities of the three tightness moduli of the rescaled
/// process over the `delta` and `epsilon` grids. Each probability must be
/// nonincreasing as `delta` shrinks, within `monotone_se` standard errors,
/// and small at the smallest `delta`.
pub fn tightness_diagnostic(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sys = System::build(&cfg.system)?;
    let f = cfg.observable;
    let norm = Normalization::canonical(&sys, &f, cfg.n)?;
    let (deltas, eps) = (&cfg.options.deltas, &cfg.options.epsilons);
    if deltas.is_empty() || eps.is_empty() {
        return Err(invalid("tightness needs nonempty delta and epsilon grids"));
    }
    let seed = cfg.seed;
    let table = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|i| {
            let values = sys.values(&f, cfg.n, &mut stream(seed, Purpose::Dynamics, i))?;
            let path = CadlagPath::from_partial_sums(1, &partial_sums(&values), norm.b_n, &[norm.a_n])?;
            let mut t = ExceedanceTable::empty(deltas, eps);
            t.add_path(&path)?;
            Ok::<_, LabError>(t)
        })
        .try_reduce(|| ExceedanceTable::empty(deltas, eps), |a, b| Ok(a.merge(&b)))?;

    let mut report = ExperimentReport::new("tightness", cfg);
    report.stat("b_n", norm.b_n);
    report.stat("a_n", norm.a_n);
    let n_paths = table.paths as usize;
    let tol = &cfg.tolerances;
    let last = deltas.len() - 1;
    let mut rows = Vec::new();
    for j in 1..=3 {
        for (e, &epsilon) in eps.iter().enumerate() {
            let p: Vec<f64> = (0..deltas.len()).map(|d| table.prob(j, d, e)).collect();
            let worst = p
                .windows(2)
                .map(|w| {
                    let se = (proportion_se(w[0], n_paths).powi(2) + proportion_se(w[1], n_paths).powi(2)).sqrt();
                    w[1] - w[0] - tol.monotone_se * se
                })
                .fold(f64::NEG_INFINITY, f64::max);
            if deltas.len() > 1 {
                report.check(
                    Criterion::new(format!("monotone_j{j}_eps{epsilon}"), worst, Bound::AtMost(0.0))
                        .with_slack(tol.monotone_se),
                );
            }
            report.check(Criterion::new(
                format!("small_delta_j{j}_eps{epsilon}"),
                p[last],
                Bound::Below(tol.tightness_small),
            ));
            for (d, &delta) in deltas.iter().enumerate() {
                rows.push(vec![j as f64, delta, epsilon, p[d], proportion_se(p[d], n_paths)]);
            }
        }
    }
    report.stat("exceedances", &table);
    let mut t = Table::new(&["j", "delta", "epsilon", "probability", "se"]);
    rows.into_iter().for_each(|r| t.push(r));
    report.table = Some(t);
    Ok(report)
}

/// Per-replicate maxima entering the maximal inequalities.
pub(crate) struct PathMaxima {
    /// `max_{1<=k<=n} |S_k|`
    pub max_abs: f64,
    /// `max_{1<=k<=n} |S_n - S_k|`
    pub max_tail: f64,
    /// `max_{1<=i<j<l<=n} |S_j - S_i| ^ |S_l - S_j|`
    pub max_two_sided: f64,
}

pub(crate) fn path_maxima(s: &[f64]) -> PathMaxima {
    let n = s.len() - 1;
    let max_abs = s[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_tail = s[1..].iter().fold(0.0f64, |m, v| m.max((s[n] - v).abs()));
    // the maximum over i and l separates: for fixed j it is
    // min(max_{i<j} |S_j - S_i|, max_{l>j} |S_l - S_j|)
    let mut max_two_sided = 0.0f64;
    if n >= 3 {
        let mut suf_min = vec![f64::INFINITY; n + 2];
        let mut suf_max = vec![f64::NEG_INFINITY; n + 2];
        for l in (1..=n).rev() {
            suf_min[l] = suf_min[l + 1].min(s[l]);
            suf_max[l] = suf_max[l + 1].max(s[l]);
        }
        let (mut pre_min, mut pre_max) = (s[1], s[1]);
        for j in 2..n {
            let left = (s[j] - pre_min).max(pre_max - s[j]);
            let right = (suf_max[j + 1] - s[j]).max(s[j] - suf_min[j + 1]);
            max_two_sided = max_two_sided.max(left.min(right));
            pre_min = pre_min.min(s[j]);
            pre_max = pre_max.max(s[j]);
        }
    }
    PathMaxima { max_abs, max_tail, max_two_sided }
}

#[derive(Clone)]
struct MaxCounts {
    lhs_one: Vec<u64>,
    lhs42: Vec<u64>,
    rhs42: Vec<u64>,
    pathwise42: u64,
    lhs_two: Vec<u64>,
    max_quarter: Vec<u64>,
    /// `[c][k]`: `|S_k| > kappa_c / 4`, `k = 1..=n`
    sk_quarter: Vec<Vec<u64>>,
    theta_quarter: Vec<Vec<u64>>,
}

impl MaxCounts {
    fn new(kappas: usize, n: usize) -> Self {
        Self {
            lhs_one: vec![0; kappas],
            lhs42: vec![0; kappas],
            rhs42: vec![0; kappas],
            pathwise42: 0,
            lhs_two: vec![0; kappas],
            max_quarter: vec![0; kappas],
            sk_quarter: vec![vec![0; n]; kappas],
            theta_quarter: vec![vec![0; n]; kappas],
        }
    }

    fn add(&mut self, sums: &[f64], theta: &[f64], kappas: &[f64]) {
        let m = path_maxima(sums);
        for (c, &kappa) in kappas.iter().enumerate() {
            let q = kappa / 4.0;
            self.lhs_one[c] += u64::from(m.max_abs > kappa);
            let (l42, r42) = (m.max_tail > kappa, m.max_abs > kappa / 2.0);
            self.lhs42[c] += u64::from(l42);
            self.rhs42[c] += u64::from(r42);
            self.pathwise42 += u64::from(l42 && !r42);
            self.lhs_two[c] += u64::from(m.max_two_sided > kappa);
            self.max_quarter[c] += u64::from(m.max_abs > q);
            for k in 1..sums.len() {
                self.sk_quarter[c][k - 1] += u64::from(sums[k].abs() > q);
                self.theta_quarter[c][k - 1] += u64::from(theta[k] > q);
            }
        }
    }

    fn merge(mut self, o: &Self) -> Self {
        let add = |a: &mut Vec<u64>, b: &Vec<u64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.lhs_one, &o.lhs_one);
        add(&mut self.lhs42, &o.lhs42);
        add(&mut self.rhs42, &o.rhs42);
        add(&mut self.lhs_two, &o.lhs_two);
        add(&mut self.max_quarter, &o.max_quarter);
        self.sk_quarter.iter_mut().zip(&o.sk_quarter).for_each(|(a, b)| add(a, b));
        self.theta_quarter.iter_mut().zip(&o.theta_quarter).for_each(|(a, b)| add(a, b));
        self.pathwise42 += o.pathwise42;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
struct InequalityRow {
    n: usize,
    kappa_factor: f64,
    kappa: f64,
    /// `mu(max |S_k| > kappa)`
    lhs_max: f64,
    rhs_max: f64,
    se_max: f64,
    /// `mu(max |S_n - S_k| > kappa)` and `mu(max |S_k| > kappa / 2)`
    lhs_tail: f64,
    rhs_tail: f64,
    lhs_two_sided: f64,
    rhs_two_sided: f64,
    se_two_sided: f64,
}

/// Estimates both sides of the maximal inequalities from one replicate
/// pool per horizon `n`, with `kappa = factor * B_n`. The first and third
/// may only fail beyond `mc_se` combined standard errors; the inclusion
/// `max |S_n - S_k| > kappa => max |S_k| > kappa / 2` is checked on every
/// path. The weighted-tail check is appended.
pub fn maximal_inequality_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sys = System::build(&cfg.system)?;
    let f = cfg.observable;
    let (r, flat) = sys.distortion_and_big_image()?;
    let c = r.exp() / flat;
    let mut report = ExperimentReport::new("maxineq", cfg);
    report.stat("distortion", r);
    report.stat("big_image", flat);
    let big = cfg.replicates;
    let se = |p: f64| proportion_se(p, big);
    let mut rows = Vec::new();
    let (mut v_one, mut v_two, mut pathwise) = (0u64, 0u64, 0u64);
    let mut table = Table::new(&[
        "n",
        "kappa_factor",
        "lhs_max",
        "rhs_max",
        "lhs_tail",
        "rhs_tail",
        "lhs_two_sided",
        "rhs_two_sided",
    ]);
    for &n in &cfg.options.ns {
        if n == 0 {
            return Err(invalid("maximal inequalities need n >= 1"));
        }
        let norm = Normalization::canonical(&sys, &f, n)?;
        let kappas: Vec<f64> = cfg.options.kappa_factors.iter().map(|k| k * norm.b_n).collect();
        let seed = child_seed(cfg.seed, &format!("maxineq-n{n}"));
        let counts = (0..big as u64)
            .into_par_iter()
            .map(|i| {
                let (values, theta) = sys.values_and_theta(&f, n, &mut stream(seed, Purpose::Dynamics, i))?;
                let mut m = MaxCounts::new(kappas.len(), n);
                m.add(&partial_sums(&values), &theta, &kappas);
                Ok::<_, LabError>(m)
            })
            .try_reduce(|| MaxCounts::new(kappas.len(), n), |a, b| Ok(a.merge(&b)))?;
        pathwise += counts.pathwise42;
        let nf = n as f64;
        let frac = |x: u64| x as f64 / big as f64;
        for (ci, (&factor, &kappa)) in cfg.options.kappa_factors.iter().zip(&kappas).enumerate() {
            let p_max = counts.sk_quarter[ci].iter().map(|&x| frac(x)).fold(0.0, f64::max);
            let q_max = counts.theta_quarter[ci].iter().map(|&x| frac(x)).fold(0.0, f64::max);
            let lhs_one = frac(counts.lhs_one[ci]);
            let rhs_one = 2.0 * c * p_max + nf * q_max;
            let se_one = (se(lhs_one).powi(2) + (2.0 * c * se(p_max)).powi(2) + (nf * se(q_max)).powi(2)).sqrt();
            let p4 = frac(counts.max_quarter[ci]);
            let lhs_two = frac(counts.lhs_two[ci]);
            let rhs_two = c * p4 * (p4 + nf * q_max);
            let se_two = (se(lhs_two).powi(2)
                + (c * (2.0 * p4 + nf * q_max) * se(p4)).powi(2)
                + (c * p4 * nf * se(q_max)).powi(2))
            .sqrt();
            v_one += u64::from(lhs_one > rhs_one + cfg.tolerances.mc_se * se_one);
            v_two += u64::from(lhs_two > rhs_two + cfg.tolerances.mc_se * se_two);
            let row = InequalityRow {
                n,
                kappa_factor: factor,
                kappa,
                lhs_max: lhs_one,
                rhs_max: rhs_one,
                se_max: se_one,
                lhs_tail: frac(counts.lhs42[ci]),
                rhs_tail: frac(counts.rhs42[ci]),
                lhs_two_sided: lhs_two,
                rhs_two_sided: rhs_two,
                se_two_sided: se_two,
            };
            table.push(vec![
                n as f64,
                factor,
                row.lhs_max,
                row.rhs_max,
                row.lhs_tail,
                row.rhs_tail,
                row.lhs_two_sided,
                row.rhs_two_sided,
            ]);
            rows.push(row);
        }
    }
    report.stat("grid", &rows);
    let slack = cfg.tolerances.mc_se;
    report.check(Criterion::new("max_violations", v_one as f64, Bound::Equal(0.0)).with_slack(slack));
    report.check(Criterion::new("two_sided_violations", v_two as f64, Bound::Equal(0.0)).with_slack(slack));
    report.check(Criterion::new("tail_inclusion_violations", pathwise as f64, Bound::Equal(0.0)));

    let weighted = weighted_tail_check(cfg)?;
    for (k, v) in weighted.stats {
        report.stats.insert(format!("weighted_{k}"), v);
    }
    for mut crit in weighted.criteria {
        crit.name = format!("weighted_{}", crit.name);
        report.check(crit);
    }
    report.table = Some(table);
    Ok(report)
}

/// Tails of `G_n = sum_{k<n} rho^(n-k) g o T^k`: the ratios
/// `mu(G_n > s) / tau(s)` over the `s` grid, their sup as an estimate of
/// the constant `zeta` for each `n`, and the relative spread of those sups
/// across `n`, which must stay below `weighted_spread`.
pub fn weighted_tail_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sys = System::build(&cfg.system)?;
    let f = cfg.observable;
    let w = &cfg.options.weighted;
    if w.ns.is_empty() || w.s_grid.is_empty() || w.replicates < 2 {
        return Err(invalid("the weighted-tail check needs n and s grids and two replicates"));
    }
    let tail = sys.tail(&f)?;
    let mut report = ExperimentReport::new("weighted", cfg);
    let mut zetas = Vec::with_capacity(w.ns.len());
    let mut ratios = Vec::with_capacity(w.ns.len());
    for &n in &w.ns {
        if n == 0 {
            return Err(invalid("weighted sums need n >= 1"));
        }
        let seed = child_seed(cfg.seed, &format!("weighted-n{n}"));
        let g: Vec<f64> = (0..w.replicates as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, Purpose::Dynamics, i);
                let inputs = match w.input {
                    WeightedInput::Observable => sys.values(&f, n, &mut rng)?,
                    WeightedInput::Theta => sys.theta_values(&f, n, &mut rng)?,
                };
                Ok(inputs.iter().fold(0.0, |acc, v| w.rho * (acc + v.abs())))
            })
            .collect::<Result<_>>()?;
        let r: Vec<f64> = w
            .s_grid
            .iter()
            .map(|&s| g.iter().filter(|&&v| v > s).count() as f64 / g.len() as f64 / tail.tau(s))
            .collect();
        zetas.push(r.iter().copied().fold(0.0, f64::max));
        ratios.push(r);
    }
    let hi = zetas.iter().copied().fold(0.0, f64::max);
    let lo = zetas.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
    report.stat("zeta", &zetas);
    report.stat("ratios", &ratios);
    report.check(Criterion::new("zeta_spread", spread, Bound::AtMost(cfg.tolerances.weighted_spread)));
    Ok(report)
}

//! Z-extensions `T_f(x, m) = (T x, m + f(x))` of Gibbs-Markov systems by
//! integer-valued observables, and the occupation fraction of the upper
//! half-space that obeys the generalized arcsine law.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::gibbs_markov::{GibbsMarkov, Observable};
use crate::rng::{stream, Purpose};
use crate::stable_laws::{positivity_rho, ArcsineParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewProductState {
    pub x: f64,
    pub m: i128,
}

fn increment(f: &Observable, symbol: i64) -> Result<i128> {
    f.integer_value(symbol).map(i128::from).ok_or_else(|| invalid("the Z-extension needs an integer-valued observable"))
}

/// Levels `m_0, ..., m_n` of the forward orbit of `start`, in exact integer
/// arithmetic.
pub fn skew_orbit<S: GibbsMarkov>(sys: &S, f: &Observable, start: SkewProductState, n: usize) -> Result<Vec<i128>> {
    let mut levels = Vec::with_capacity(n + 1);
    levels.push(start.m);
    let (mut x, mut m) = (start.x, start.m);
    for _ in 0..n {
        let k = sys.symbol_of(x)?;
        m = m.checked_add(increment(f, k)?).ok_or(LabError::Overflow)?;
        levels.push(m);
        x = sys.branch(k, x);
    }
    Ok(levels)
}

/// Levels along a typical orbit: `x_0` from the invariant law, orbit built
/// backwards (see [`GibbsMarkov::sample_orbit`]). Returns the orbit's
/// starting point with the levels.
pub fn sample_skew_orbit<S: GibbsMarkov, R: Rng + ?Sized>(
    sys: &S,
    f: &Observable,
    m0: i128,
    n: usize,
    rng: &mut R,
) -> Result<(f64, Vec<i128>)> {
    let orbit = sys.sample_orbit(n, rng);
    let mut levels = Vec::with_capacity(n + 1);
    let mut m = m0;
    levels.push(m);
    for &k in &orbit.symbols {
        m = m.checked_add(increment(f, k)?).ok_or(LabError::Overflow)?;
        levels.push(m);
    }
    Ok((orbit.points[0], levels))
}

/// Fractions of the times `k = 0..n-1` spent at levels `m >= 1` and
/// `m >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Occupation {
    pub positive: f64,
    pub nonnegative: f64,
}

/// Occupation fractions of one orbit whose increments are the observable
/// evaluated on i.i.d. symbols, which is the law of the symbol sequence of
/// the provided systems under their invariant measure. Only the symbols are
/// drawn, so no interval point is tracked.
pub fn occupation<S: GibbsMarkov, R: Rng + ?Sized>(
    sys: &S,
    f: &Observable,
    m0: i128,
    n: usize,
    rng: &mut R,
) -> Result<Occupation> {
    if n == 0 {
        return Err(invalid("occupation needs n >= 1"));
    }
    let (mut pos, mut nonneg) = (0u64, 0u64);
    let mut m = m0;
    for k in 0..n {
        pos += u64::from(m >= 1);
        nonneg += u64::from(m >= 0);
        if k + 1 < n {
            m = m.checked_add(increment(f, sys.sample_symbol(rng))?).ok_or(LabError::Overflow)?;
        }
    }
    Ok(Occupation { positive: pos as f64 / n as f64, nonnegative: nonneg as f64 / n as f64 })
}

/// `replicates` independent occupation fractions; replicate `i` uses the
/// stream `(seed, Dynamics, i)`, so the result does not depend on the
/// thread pool.
pub fn occupation_fraction_experiment<S: GibbsMarkov>(
    sys: &S,
    f: &Observable,
    n: usize,
    replicates: usize,
    m0: i128,
    seed: u64,
) -> Result<Vec<Occupation>> {
    if replicates == 0 {
        return Err(invalid("at least one replicate is needed"));
    }
    f.integer_value(1).ok_or_else(|| invalid("the Z-extension needs an integer-valued observable"))?;
    (0..replicates as u64)
        .into_par_iter()
        .map(|i| occupation(sys, f, m0, n, &mut stream(seed, Purpose::Dynamics, i)))
        .collect()
}

/// Positivity parameter `rho = Pr[S > 0]` of the stable limit of an
/// observable satisfying the arcsine-law hypotheses: integer-valued, in the
/// domain of attraction of a stable law, centered when `alpha > 1` and
/// symmetric when `alpha = 1`.
pub fn arcsine_hypotheses<S: GibbsMarkov, R: Rng + ?Sized>(
    sys: &S,
    f: &Observable,
    rng: &mut R,
) -> Result<ArcsineParams<f64>> {
    if !f.is_integer_valued() {
        return Err(invalid("the Z-extension needs an integer-valued observable"));
    }
    let tail = sys.tail(f)?;
    let alpha = tail.alpha();
    if alpha > 1.0 && sys.mean(f)? != 0.0 {
        return Err(invalid(format!("alpha = {alpha} > 1 needs a centered observable")));
    }
    if alpha == 1.0 && !tail.is_symmetric() {
        return Err(LabError::Unsupported("alpha = 1 needs a symmetric observable".into()));
    }
    let rho = positivity_rho(&tail.stable_params(), 200_000, rng)?;
    ArcsineParams::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cadlag::{occupation_fraction, CadlagPath};
    use crate::gibbs_markov::{ergodic_sum, DyadicRenewalMap, HeavyBernoulliShift};

    #[test]
    fn constant_drifts() {
        let h = HeavyBernoulliShift::symmetric(0.75).unwrap();
        let mut rng = stream(1, Purpose::Dynamics, 0);
        let one = Observable::Constant { value: 1.0 };
        let zero = Observable::Constant { value: 0.0 };
        let (_, lv) = sample_skew_orbit(&h, &one, 0, 10, &mut rng).unwrap();
        assert_eq!(lv, (0..=10).collect::<Vec<i128>>());
        let (_, lv) = sample_skew_orbit(&h, &zero, 7, 10, &mut rng).unwrap();
        assert!(lv.iter().all(|&m| m == 7));
        let o = occupation(&h, &one, 0, 1000, &mut rng).unwrap();
        assert_eq!(o.positive, 999.0 / 1000.0);
        assert_eq!(o.nonnegative, 1.0);
        let down = occupation(&h, &Observable::Constant { value: -1.0 }, 0, 1000, &mut rng).unwrap();
        assert_eq!(down.positive, 0.0);
        let two = occupation(&h, &Observable::Constant { value: 2.0 }, 0, 1000, &mut rng).unwrap();
        assert_eq!(two.positive, 999.0 / 1000.0);
        assert!(occupation(&h, &Observable::Power { alpha: 0.5 }, 0, 10, &mut rng).is_err());
    }

    #[test]
    fn levels_match_ergodic_sums() {
        let d = DyadicRenewalMap;
        let f = Observable::Symbol { scale: 3 };
        let mut rng = stream(2, Purpose::Start, 0);
        for _ in 0..50 {
            let x = d.sample_invariant(&mut rng);
            let levels = skew_orbit(&d, &f, SkewProductState { x, m: -4 }, 30).unwrap();
            for (k, &m) in levels.iter().enumerate() {
                assert_eq!((m + 4) as f64, ergodic_sum(&d, &f, x, k).unwrap());
            }
        }
    }

    #[test]
    fn overflow_is_rejected() {
        let d = DyadicRenewalMap;
        let f = Observable::Symbol { scale: i64::MAX };
        let start = SkewProductState { x: 0.75, m: i128::MAX - 10 };
        assert!(matches!(skew_orbit(&d, &f, start, 3), Err(LabError::Overflow)));
    }

    #[test]
    fn occupation_equals_path_functional() {
        let h = HeavyBernoulliShift::symmetric(0.75).unwrap();
        let f = Observable::Symbol { scale: 1 };
        for rep in 0..20 {
            let n = 500;
            let mut rng = stream(3, Purpose::Dynamics, rep);
            let (_, levels) = sample_skew_orbit(&h, &f, 0, n, &mut rng).unwrap();
            let pos = levels[..n].iter().filter(|&&m| m >= 1).count() as f64 / n as f64;
            let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
            let b = (n as f64).powf(1.0 / 0.75);
            let values: Vec<f64> = levels.iter().map(|&m| m as f64 / b).collect();
            let path = CadlagPath::step_1d(1.0, &times, &values).unwrap();
            let psi = occupation_fraction(&path, 0).unwrap();
            assert!((psi - pos).abs() <= 1.0 / n as f64 + 1e-12);
        }
    }

    #[test]
    fn replicates_are_reproducible() {
        let h = HeavyBernoulliShift::symmetric(1.5).unwrap();
        let f = Observable::Symbol { scale: 1 };
        let a = occupation_fraction_experiment(&h, &f, 200, 16, 0, 9).unwrap();
        let b = occupation_fraction_experiment(&h, &f, 200, 16, 0, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|o| (0.0..=1.0).contains(&o.positive) && o.positive <= o.nonnegative));
    }

    #[test]
    fn hypotheses() {
        let mut rng = stream(4, Purpose::Misc, 0);
        let h = HeavyBernoulliShift::symmetric(0.75).unwrap();
        let p = arcsine_hypotheses(&h, &Observable::Symbol { scale: 1 }, &mut rng).unwrap();
        assert_eq!(p.rho(), 0.5);
        let one_sided = HeavyBernoulliShift::one_sided(1.5).unwrap();
        assert!(arcsine_hypotheses(&one_sided, &Observable::Symbol { scale: 1 }, &mut rng).is_err());
        assert!(arcsine_hypotheses(&DyadicRenewalMap, &Observable::Power { alpha: 0.8 }, &mut rng).is_err());
        assert!(arcsine_hypotheses(&h, &Observable::Constant { value: 1.0 }, &mut rng).is_err());
    }
}

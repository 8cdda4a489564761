use rand::Rng;

use super::HeavyBernoulliShift;
use super::{GibbsMarkov, Observable};
use crate::error::{invalid, LabError, Result};
use crate::numeric::{hurwitz_zeta, zeta};
use crate::stable_laws::TailModel;

/// Symbolic Markov shift whose symbol magnitudes follow the symmetric heavy
/// law while the signs are modulated: from a symbol of sign `+` the next
/// symbol keeps its sign with probability `gamma_plus / (gamma_plus + 1)`,
/// and likewise for `-`. Given its sign, the next magnitude is drawn afresh,
/// so the transition is `P(a, b) = p(b) w(sgn a, sgn b) / Z(sgn a)` with
/// `w(s, s) = gamma_s`, `w(s, -s) = 1`.
///
/// The shift is not realized as an interval map; orbits are symbol
/// sequences.
#[derive(Debug, Clone)]
pub struct MarkovModulatedShift {
    base: HeavyBernoulliShift,
    gamma_plus: f64,
    gamma_minus: f64,
}

impl MarkovModulatedShift {
    pub fn new(alpha: f64, gamma_plus: f64, gamma_minus: f64) -> Result<Self> {
        for g in [gamma_plus, gamma_minus] {
            if !(g > 0.0 && g.is_finite()) {
                return Err(invalid(format!("sign weights must be positive and finite, got {g}")));
            }
        }
        Ok(Self { base: HeavyBernoulliShift::symmetric(alpha)?, gamma_plus, gamma_minus })
    }

    pub fn name(&self) -> &'static str {
        "markov_modulated"
    }

    pub fn alpha(&self) -> f64 {
        self.base.alpha()
    }

    pub fn base(&self) -> &HeavyBernoulliShift {
        &self.base
    }

    /// Probability that the sign is kept, from `+` (`positive`) or `-`.
    pub fn stay_prob(&self, positive: bool) -> f64 {
        let g = if positive { self.gamma_plus } else { self.gamma_minus };
        g / (g + 1.0)
    }

    /// Stationary masses `(Pi_+, Pi_-)` of the two signs.
    pub fn sign_masses(&self) -> (f64, f64) {
        let leave_plus = 1.0 - self.stay_prob(true);
        let leave_minus = 1.0 - self.stay_prob(false);
        let plus = leave_minus / (leave_plus + leave_minus);
        (plus, 1.0 - plus)
    }

    /// Stationary law by power iteration on the chain truncated to
    /// `|k| <= truncation`, the mass beyond the truncation carried by one
    /// atom per sign with the exact Pareto-type tail of the base law.
    /// Returns `pi(k)` for `k = 1..=truncation` and `k = -1..=-truncation`
    /// followed by the two tail atoms.
    pub fn stationary_by_iteration(&self, truncation: usize, tol: f64, max_iter: usize) -> Result<StationaryLaw> {
        if truncation == 0 {
            return Err(invalid("truncation must be positive"));
        }
        let b = &self.base;
        let p: Vec<f64> = (1..=truncation).map(|j| b.prob(j as i64)).collect();
        let tail = 0.5 * hurwitz_zeta(1.0 + b.alpha(), truncation as f64 + 1.0) / b.zeta_s();
        let z = |g: f64| 0.5 * (g + 1.0);
        let (gp, gm) = (self.gamma_plus, self.gamma_minus);
        let mut plus = p.clone();
        let mut minus = p.clone();
        let (mut tail_plus, mut tail_minus) = (tail, tail);
        for _ in 0..max_iter {
            let mp: f64 = plus.iter().sum::<f64>() + tail_plus;
            let mm: f64 = minus.iter().sum::<f64>() + tail_minus;
            // mass flowing into each sign, per unit of base probability
            let into_plus = mp * gp / z(gp) + mm / z(gm);
            let into_minus = mp / z(gp) + mm * gm / z(gm);
            let mut change = 0.0f64;
            for (j, &pj) in p.iter().enumerate() {
                let (np, nm) = (pj * into_plus, pj * into_minus);
                change = change.max((np - plus[j]).abs()).max((nm - minus[j]).abs());
                plus[j] = np;
                minus[j] = nm;
            }
            let (tp, tm) = (tail * into_plus, tail * into_minus);
            change = change.max((tp - tail_plus).abs()).max((tm - tail_minus).abs());
            tail_plus = tp;
            tail_minus = tm;
            if change < tol {
                return Ok(StationaryLaw { plus, minus, tail_plus, tail_minus });
            }
        }
        Err(invalid(format!("power iteration did not settle in {max_iter} steps")))
    }

    /// A stationary symbol sequence of length `n`.
    pub fn sample_symbols<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<i64> {
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        let (pi_plus, _) = self.sign_masses();
        let mut positive = rng.random::<f64>() < pi_plus;
        for _ in 0..n {
            let k = self.base.sample_magnitude(rng);
            out.push(if positive { k } else { -k });
            let stay = rng.random::<f64>() < self.stay_prob(positive);
            positive = if stay { positive } else { !positive };
        }
        out
    }

    /// Lipschitz constant of `log(d mu / d mu o T)` on rank-one cylinders:
    /// the Jacobian only depends on the signs of the first two symbols, and
    /// points of a common rank-one cylinder sit at distance at least
    /// `theta^2`.
    pub fn log_jacobian_lipschitz(&self, theta: f64) -> f64 {
        let (pp, pm) = self.sign_masses();
        let spread = |w_plus: f64, w_minus: f64| ((w_plus / pp) / (w_minus / pm)).ln().abs();
        spread(self.gamma_plus, 1.0).max(spread(1.0, self.gamma_minus)) / (theta * theta)
    }

    pub fn tail(&self, f: &Observable) -> Result<TailModel<f64>> {
        match *f {
            Observable::Symbol { scale } if scale != 0 => {
                let base = self.base.tail(f)?;
                let (pp, pm) = self.sign_masses();
                // the base splits mass evenly between signs
                let (wp, wm) = if scale > 0 { (2.0 * pp, 2.0 * pm) } else { (2.0 * pm, 2.0 * pp) };
                TailModel::power(self.alpha(), base.c_plus() * wp, base.c_minus() * wm)
            }
            Observable::Symbol { .. } | Observable::Constant { .. } => {
                Err(invalid("a constant observable has no heavy tail"))
            }
            Observable::Power { .. } => {
                Err(LabError::Unsupported("the modulated shift only carries symbol observables".into()))
            }
        }
    }

    pub fn mean(&self, f: &Observable) -> Result<f64> {
        match *f {
            Observable::Symbol { scale } => {
                let a = self.alpha();
                if a <= 1.0 {
                    return Err(invalid(format!("symbols have no mean for alpha = {a}")));
                }
                let (pp, pm) = self.sign_masses();
                Ok(scale as f64 * (pp - pm) * zeta(a) / zeta(1.0 + a))
            }
            Observable::Constant { value } => Ok(value),
            Observable::Power { .. } => {
                Err(LabError::Unsupported("the modulated shift only carries symbol observables".into()))
            }
        }
    }
}

/// Stationary law of a truncated modulated chain.
#[derive(Debug, Clone)]
pub struct StationaryLaw {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub tail_plus: f64,
    pub tail_minus: f64,
}

impl StationaryLaw {
    pub fn sign_masses(&self) -> (f64, f64) {
        (self.plus.iter().sum::<f64>() + self.tail_plus, self.minus.iter().sum::<f64>() + self.tail_minus)
    }
}

use rand::Rng;

use super::config::SystemSpec;
use crate::error::{LabError, Result};
use crate::gibbs_markov::{
    orbit_theta_f_n, DyadicRenewalMap, GibbsMarkov, HeavyBernoulliShift, MarkovModulatedShift, Observable, Orbit,
};
use crate::intermittent::{IntermittentMap, ReturnStructure};
use crate::stable_laws::{canonical_an, canonical_bn, StableParams, TailModel};

#[derive(Debug)]
pub struct IntermittentSystem {
    pub map: IntermittentMap<f64>,
    pub returns: ReturnStructure,
}

/// A built system, dispatching the per-system operations.
#[derive(Debug)]
pub enum System {
    Dyadic(DyadicRenewalMap),
    Heavy(HeavyBernoulliShift),
    Markov(MarkovModulatedShift),
    Intermittent(Box<IntermittentSystem>),
}

/// Runs `$body` with `$s` bound to the system as a concrete `GibbsMarkov`.
macro_rules! with_gibbs {
    ($sys:expr, $s:ident => $body:expr) => {
        match $sys {
            System::Dyadic($s) => Ok($body),
            System::Heavy($s) => Ok($body),
            System::Markov(_) => Err(LabError::Unsupported(
                "the modulated shift is symbolic; this operation needs an interval map".into(),
            )),
            System::Intermittent(_) => Err(LabError::Unsupported(
                "the intermittent map is not Gibbs-Markov; use its induced excursions".into(),
            )),
        }
    };
}
pub(crate) use with_gibbs;

impl System {
    pub fn build(spec: &SystemSpec) -> Result<Self> {
        Ok(match *spec {
            SystemSpec::Dyadic => System::Dyadic(DyadicRenewalMap::new()),
            SystemSpec::HeavySymmetric { alpha } => System::Heavy(HeavyBernoulliShift::symmetric(alpha)?),
            SystemSpec::HeavyOneSided { alpha } => System::Heavy(HeavyBernoulliShift::one_sided(alpha)?),
            SystemSpec::MarkovModulated { alpha, gamma_plus, gamma_minus } => {
                System::Markov(MarkovModulatedShift::new(alpha, gamma_plus, gamma_minus)?)
            }
            SystemSpec::Intermittent { p } => {
                let map = IntermittentMap::new(p)?;
                let returns = ReturnStructure::find(&map)?;
                System::Intermittent(Box::new(IntermittentSystem { map, returns }))
            }
        })
    }

    pub fn tail(&self, f: &Observable) -> Result<TailModel<f64>> {
        match self {
            System::Markov(m) => m.tail(f),
            other => with_gibbs!(other, s => s.tail(f)?),
        }
    }

    pub fn mean(&self, f: &Observable) -> Result<f64> {
        match self {
            System::Markov(m) => m.mean(f),
            other => with_gibbs!(other, s => s.mean(f)?),
        }
    }

    /// A typical orbit of length `n + 1` of an interval system.
    pub fn orbit<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Orbit> {
        with_gibbs!(self, s => s.sample_orbit(n, rng))
    }

    /// `f(x_0), ..., f(x_{n-1})` along a typical orbit.
    pub fn values<R: Rng + ?Sized>(&self, f: &Observable, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            System::Markov(m) => {
                if matches!(f, Observable::Power { .. }) {
                    return Err(LabError::Unsupported("the modulated shift only carries symbol observables".into()));
                }
                Ok(m.sample_symbols(n, rng).into_iter().map(|k| f.eval(0.5, k)).collect())
            }
            other => {
                let orbit = other.orbit(n, rng)?;
                Ok(orbit.points.iter().zip(&orbit.symbols).map(|(&x, &k)| f.eval(x, k)).collect())
            }
        }
    }

    /// Values and `theta_{f,k}`, `k = 0..=n`, along one orbit.
    pub fn values_and_theta<R: Rng + ?Sized>(
        &self,
        f: &Observable,
        n: usize,
        rng: &mut R,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let orbit = self.orbit(n, rng)?;
        let values = orbit.points.iter().zip(&orbit.symbols).map(|(&x, &k)| f.eval(x, k)).collect();
        let theta = with_gibbs!(self, s => orbit_theta_f_n(s, f, &orbit)?)?;
        Ok((values, theta))
    }

    /// `theta_f(x_0), ..., theta_f(x_{n-1})` along one orbit.
    pub fn theta_values<R: Rng + ?Sized>(&self, f: &Observable, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        let orbit = self.orbit(n, rng)?;
        with_gibbs!(self, s => {
            let mut out = Vec::with_capacity(n);
            for &k in &orbit.symbols {
                out.push(s.lipschitz(f, k)?);
            }
            out
        })
    }

    pub fn distortion_and_big_image(&self) -> Result<(f64, f64)> {
        with_gibbs!(self, s => (s.distortion_bound(), s.big_image()))
    }

    pub fn intermittent(&self) -> Result<&IntermittentSystem> {
        match self {
            System::Intermittent(s) => Ok(s),
            _ => Err(LabError::Config("this experiment needs an intermittent system".into())),
        }
    }
}

/// Partial sums `S_0 = 0, S_1, ..., S_n`.
pub fn partial_sums(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut s = 0.0;
    out.push(0.0);
    for v in values {
        s += v;
        out.push(s);
    }
    out
}

/// The canonical normalization of `S_n(f)` and its stable limit.
#[derive(Debug, Clone)]
pub struct Normalization {
    pub tail: TailModel<f64>,
    pub limit: StableParams<f64>,
    pub n: usize,
    pub a_n: f64,
    pub b_n: f64,
}

impl Normalization {
    pub fn canonical(sys: &System, f: &Observable, n: usize) -> Result<Self> {
        let tail = sys.tail(f)?;
        let mean = if tail.alpha() > 1.0 { Some(sys.mean(f)?) } else { None };
        let a_n = canonical_an(&tail, mean, n as u64)?;
        let b_n = canonical_bn(&tail, n as u64)?;
        Ok(Self { limit: tail.stable_params(), tail, n, a_n, b_n })
    }

    pub fn alpha(&self) -> f64 {
        self.tail.alpha()
    }

    /// `(S_k - (k/n) A_n) / B_n`.
    pub fn scaled(&self, sums: &[f64], k: usize) -> f64 {
        (sums[k] - k as f64 / self.n as f64 * self.a_n) / self.b_n
    }

    /// Mean of the jumps of the limit below the smallest normalized jump
    /// `t0 / B_n`, where the tails are pure powers from `t0` on
    /// (`c_+ tau(t0) = 1`). Omitting them shifts `(S_n - A_n) / B_n` by about
    /// minus this amount when `alpha < 1`; zero otherwise.
    pub fn small_jump_shift(&self) -> f64 {
        let a = self.alpha();
        if a >= 1.0 {
            return 0.0;
        }
        let (cp, cm) = (self.tail.c_plus(), self.tail.c_minus());
        let scale = match self.tail.ell() {
            crate::stable_laws::SlowlyVarying::Constant(c) => *c,
            _ => return f64::NAN,
        };
        let side = |c: f64| {
            if c == 0.0 {
                return 0.0;
            }
            let eps = (c * scale).powf(1.0 / a) / self.b_n;
            c * a / (1.0 - a) * eps.powf(1.0 - a)
        };
        side(cp) - side(cm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn dispatch_and_normalization() {
        let sys = System::build(&SystemSpec::Dyadic).unwrap();
        let f = Observable::Power { alpha: 0.8 };
        let norm = Normalization::canonical(&sys, &f, 10_000).unwrap();
        assert_eq!(norm.a_n, 0.0);
        assert!((norm.b_n - 1e5).abs() < 1e-6);
        // alpha / (1 - alpha) n^(1 - 1/alpha) = 4 * 10^-1
        assert!((norm.small_jump_shift() - 0.4).abs() < 1e-12);
        let v = sys.values(&f, 50, &mut stream(1, Purpose::Dynamics, 0)).unwrap();
        assert_eq!(v.len(), 50);
        assert!(v.iter().all(|&x| x >= 1.0));
        let s = partial_sums(&v);
        assert_eq!(s.len(), 51);
        assert!((s[50] - v.iter().sum::<f64>()).abs() < 1e-9);

        let f = Observable::Power { alpha: 1.5 };
        let norm = Normalization::canonical(&sys, &f, 100).unwrap();
        assert!((norm.a_n - 300.0).abs() < 1e-9);
        assert_eq!(norm.small_jump_shift(), 0.0);
    }

    #[test]
    fn unsupported_combinations() {
        let m = System::build(&SystemSpec::MarkovModulated { alpha: 0.7, gamma_plus: 1.0, gamma_minus: 2.0 }).unwrap();
        let mut rng = stream(1, Purpose::Dynamics, 0);
        assert!(m.orbit(3, &mut rng).is_err());
        assert!(m.values(&Observable::Power { alpha: 0.7 }, 3, &mut rng).is_err());
        assert_eq!(m.values(&Observable::Symbol { scale: 2 }, 5, &mut rng).unwrap().len(), 5);
        let i = System::build(&SystemSpec::Intermittent { p: 3.0 }).unwrap();
        assert!(i.tail(&Observable::Symbol { scale: 1 }).is_err());
        assert!(i.intermittent().is_ok());
        // the zero observable has no tail
        let d = System::build(&SystemSpec::HeavySymmetric { alpha: 0.8 }).unwrap();
        assert!(Normalization::canonical(&d, &Observable::Constant { value: 0.0 }, 10).is_err());
    }
}

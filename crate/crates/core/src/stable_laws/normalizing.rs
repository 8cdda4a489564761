use std::fmt;
use std::sync::Arc;

use super::StableParams;
use crate::error::{invalid, LabError, Result};
use crate::numeric::bisect;
use crate::scalar::Real;

/// Slowly varying factor `ell` of a regularly varying tail.
#[derive(Clone)]
pub enum SlowlyVarying<F> {
    Constant(F),
    /// `log(e + t)`.
    LogShift,
    Custom(Arc<dyn Fn(F) -> F + Send + Sync>),
}

impl<F: Real> SlowlyVarying<F> {
    pub fn eval(&self, t: F) -> F {
        match self {
            SlowlyVarying::Constant(c) => *c,
            SlowlyVarying::LogShift => (F::E() + t).ln(),
            SlowlyVarying::Custom(f) => f(t),
        }
    }
}

impl<F: fmt::Debug> fmt::Debug for SlowlyVarying<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlowlyVarying::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            SlowlyVarying::LogShift => f.write_str("LogShift"),
            SlowlyVarying::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Regularly varying two-sided tail
/// `mu(f > t) ~ c_plus t^-alpha ell(t)`, `mu(f < -t) ~ c_minus t^-alpha ell(t)`.
#[derive(Debug, Clone)]
pub struct TailModel<F> {
    alpha: F,
    c_plus: F,
    c_minus: F,
    ell: SlowlyVarying<F>,
}

impl<F: Real> TailModel<F> {
    pub fn new(alpha: F, c_plus: F, c_minus: F, ell: SlowlyVarying<F>) -> Result<Self> {
        // Reuse the stable-parameter validation for alpha and the constants.
        StableParams::new(alpha, c_plus, c_minus)?;
        if let SlowlyVarying::Constant(c) = ell {
            if !(c > F::zero() && c.is_finite()) {
                return Err(invalid(format!("constant slowly varying factor must be positive, got {c}")));
            }
        }
        Ok(Self { alpha, c_plus, c_minus, ell })
    }

    /// Pure power tails, `ell == 1`.
    pub fn power(alpha: F, c_plus: F, c_minus: F) -> Result<Self> {
        Self::new(alpha, c_plus, c_minus, SlowlyVarying::Constant(F::one()))
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn c_plus(&self) -> F {
        self.c_plus
    }

    pub fn c_minus(&self) -> F {
        self.c_minus
    }

    pub fn ell(&self) -> &SlowlyVarying<F> {
        &self.ell
    }

    pub fn is_symmetric(&self) -> bool {
        self.c_plus == self.c_minus
    }

    /// The limiting stable law of `(S_n - A_n) / B_n`.
    pub fn stable_params(&self) -> StableParams<F> {
        StableParams::new(self.alpha, self.c_plus, self.c_minus).expect("validated in new")
    }

    /// Normalized tail `tau(t) = t^-alpha ell(t)`.
    pub fn tau(&self, t: F) -> F {
        t.powf(-self.alpha) * self.ell.eval(t)
    }

    pub fn right_tail(&self, t: F) -> F {
        self.c_plus * self.tau(t)
    }

    pub fn left_tail(&self, t: F) -> F {
        self.c_minus * self.tau(t)
    }
}

/// Centering and scaling sequences `A_n`, `B_n` for `n = 1..=len`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizingSeq {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl NormalizingSeq {
    pub fn canonical<F: Real>(model: &TailModel<F>, mean: Option<F>, len: usize) -> Result<Self> {
        let mut a = Vec::with_capacity(len);
        let mut b = Vec::with_capacity(len);
        for n in 1..=len as u64 {
            a.push(canonical_an(model, mean, n)?.as_f64());
            b.push(canonical_bn(model, n)?.as_f64());
        }
        Ok(Self { a, b })
    }

    /// `A_n` for `n >= 1`.
    pub fn a_n(&self, n: usize) -> f64 {
        self.a[n - 1]
    }

    /// `B_n` for `n >= 1`.
    pub fn b_n(&self, n: usize) -> f64 {
        self.b[n - 1]
    }
}

/// The scaling `B_n` solving `n ell(B_n) = B_n^alpha`.
///
/// Closed form `(c n)^(1/alpha)` for constant `ell == c`; otherwise bisection
/// in `log B` to relative tolerance `1e-10` over `B in [1e-300, 1e300]`.
pub fn canonical_bn<F: Real>(model: &TailModel<F>, n: u64) -> Result<F> {
    if n == 0 {
        return Err(invalid("canonical_bn needs n >= 1"));
    }
    let alpha = model.alpha.as_f64();
    let nf = n as f64;
    if let SlowlyVarying::Constant(c) = model.ell {
        return Ok(F::lit((c.as_f64() * nf).powf(1.0 / alpha)));
    }
    // g(y) = alpha y - ln n - ln ell(e^y); the root in y = ln B.
    let g = |y: f64| alpha * y - nf.ln() - model.ell.eval(F::lit(y.exp())).as_f64().ln();
    let (lo, hi) = (-690.0, 690.0);
    let y = bisect(g, lo, hi, 1e-11).map_err(|_| LabError::NoBracket { lo: lo.exp(), hi: hi.exp() })?;
    Ok(F::lit(y.exp()))
}

/// The centering `A_n`: zero for `alpha < 1`, `n * mean` for `alpha > 1`,
/// zero for symmetric `alpha = 1`.
pub fn canonical_an<F: Real>(model: &TailModel<F>, mean: Option<F>, n: u64) -> Result<F> {
    let one = F::one();
    if model.alpha < one {
        Ok(F::zero())
    } else if model.alpha > one {
        let m = mean.ok_or_else(|| invalid("alpha > 1 needs the observable mean for centering"))?;
        Ok(F::lit(n as f64) * m)
    } else if model.is_symmetric() {
        Ok(F::zero())
    } else {
        Err(LabError::Unsupported("centering for asymmetric alpha = 1".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        let m = TailModel::power(0.5, 1.0, 0.0).unwrap();
        assert_relative_eq!(canonical_bn(&m, 100).unwrap(), 10_000.0, max_relative = 1e-14);
        for &a in &[0.3, 0.8, 1.0, 1.5, 1.99] {
            let m = TailModel::power(a, 1.0, 1.0).unwrap();
            assert_eq!(canonical_bn(&m, 1).unwrap(), 1.0);
        }
        let m = TailModel::new(0.8, 1.0, 0.0, SlowlyVarying::Constant(3.0)).unwrap();
        assert_relative_eq!(canonical_bn(&m, 7).unwrap(), 21f64.powf(1.25), max_relative = 1e-14);
    }

    #[test]
    fn log_slowly_varying_residual() {
        let m = TailModel::new(1.2, 1.0, 1.0, SlowlyVarying::LogShift).unwrap();
        let n = 10_000u64;
        let b = canonical_bn(&m, n).unwrap();
        let resid = (n as f64 * (std::f64::consts::E + b).ln() - b.powf(1.2)).abs();
        assert!(resid < 1e-6 * b.powf(1.2), "residual {resid}");
    }

    #[test]
    fn unbracketed_root_fails() {
        let m = TailModel::new(1.0, 1.0, 1.0, SlowlyVarying::Custom(Arc::new(|t: f64| 2.0 * t))).unwrap();
        assert!(matches!(canonical_bn(&m, 10), Err(LabError::NoBracket { .. })));
    }

    #[test]
    fn centering_rules() {
        let m = TailModel::power(0.7, 1.0, 0.0).unwrap();
        assert_eq!(canonical_an(&m, None, 500).unwrap(), 0.0);
        let m = TailModel::power(1.5, 1.0, 0.0).unwrap();
        assert_eq!(canonical_an(&m, Some(2.0), 10).unwrap(), 20.0);
        assert!(canonical_an(&m, None, 10).is_err());
        let m = TailModel::power(1.0, 1.0, 1.0).unwrap();
        assert_eq!(canonical_an(&m, None, 1_000_000).unwrap(), 0.0);
        let m = TailModel::power(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(canonical_an(&m, None, 3), Err(LabError::Unsupported(_))));
    }

    #[test]
    fn normalization_facts_on_power_tails() {
        // n tau(B_n) = 1 exactly and A_n / (n B_n) -> 0.
        let m = TailModel::power(1.5, 1.0, 0.0).unwrap();
        for &n in &[10u64, 1_000, 100_000] {
            let b = canonical_bn(&m, n).unwrap();
            assert_relative_eq!(n as f64 * m.tau(b), 1.0, max_relative = 1e-12);
        }
        let ratio = |n: u64| canonical_an(&m, Some(3.0), n).unwrap() / (n as f64 * canonical_bn(&m, n).unwrap());
        assert!(ratio(1_000_000) < ratio(1_000));
        assert!(ratio(1_000_000) < 1e-3);
    }

    #[test]
    fn sequence_is_nondecreasing() {
        let m = TailModel::power(0.8, 1.0, 1.0).unwrap();
        let s = NormalizingSeq::canonical(&m, None, 200).unwrap();
        assert!(s.b.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.a.iter().all(|&a| a == 0.0));
    }

    proptest! {
        #[test]
        fn regular_variation_of_bn(alpha in 0.1f64..1.99, c in 0.1f64..10.0, n in 1u64..1_000_000) {
            let m = TailModel::new(alpha, 1.0, 0.0, SlowlyVarying::Constant(c)).unwrap();
            let b1 = canonical_bn(&m, n).unwrap();
            let b2 = canonical_bn(&m, 2 * n).unwrap();
            prop_assert!((b1 - (c * n as f64).powf(1.0 / alpha)).abs() <= 1e-12 * b1);
            prop_assert!((b2 / b1 - 2f64.powf(1.0 / alpha)).abs() < 1e-10 * 2f64.powf(1.0 / alpha));
        }
    }
}

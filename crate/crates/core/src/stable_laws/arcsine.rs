use crate::error::{invalid, Result};
use crate::numeric::integrate;
use crate::scalar::Real;

/// Generalized arcsine law `A_rho` on `[0, 1]` with density
/// `(sin(rho pi) / pi) s^(rho-1) (1-s)^(-rho)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcsineParams<F> {
    rho: F,
}

impl<F: Real> ArcsineParams<F> {
    pub fn new(rho: F) -> Result<Self> {
        if !(rho > F::zero() && rho < F::one()) {
            return Err(invalid(format!("rho must lie in (0,1), got {rho}")));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> F {
        self.rho
    }

    pub fn cdf(&self, t: F) -> Result<F> {
        arcsine_cdf(self, t)
    }
}

const TOL: f64 = 1e-10;

/// CDF of `A_rho`, by adaptive quadrature after the substitutions
/// `v = s^rho` on `[0, 1/2]` and `w = (1-s)^(1-rho)` on `[1/2, 1]`, which
/// remove both endpoint singularities.
pub fn arcsine_cdf<F: Real>(params: &ArcsineParams<F>, t: F) -> Result<F> {
    let t = t.as_f64();
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("arcsine_cdf needs t in [0,1], got {t}")));
    }
    let rho = params.rho.as_f64();
    let k = (rho * std::f64::consts::PI).sin() / std::f64::consts::PI;
    if t == 0.0 {
        return Ok(F::zero());
    }
    if t == 1.0 {
        return Ok(F::one());
    }
    let value = if t <= 0.5 {
        let q = integrate(|v| (1.0 - v.powf(1.0 / rho)).powf(-rho), 0.0, t.powf(rho), TOL);
        k / rho * q.value
    } else {
        let r = 1.0 - rho;
        let q = integrate(|w| (1.0 - w.powf(1.0 / r)).powf(-r), 0.0, (1.0 - t).powf(r), TOL);
        1.0 - k / r * q.value
    };
    Ok(F::lit(value.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cdf(rho: f64, t: f64) -> f64 {
        arcsine_cdf(&ArcsineParams::new(rho).unwrap(), t).unwrap()
    }

    #[test]
    fn half_rho_closed_form() {
        assert_relative_eq!(cdf(0.5, 0.5), 0.5, epsilon = 1e-10);
        assert_relative_eq!(cdf(0.5, 0.25), 1.0 / 3.0, epsilon = 1e-10);
        for k in 1..100 {
            let t = k as f64 / 100.0;
            let exact = 2.0 / PI * t.sqrt().asin();
            assert_relative_eq!(cdf(0.5, t), exact, epsilon = 1e-9);
        }
    }

    #[test]
    fn matches_regularized_incomplete_beta() {
        for &rho in &[0.1, 0.3, 0.43, 0.7, 0.95] {
            for k in 1..50 {
                let t = k as f64 / 50.0;
                let oracle = statrs::function::beta::beta_reg(rho, 1.0 - rho, t);
                assert_relative_eq!(cdf(rho, t), oracle, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn endpoints_and_domain() {
        assert_eq!(cdf(0.3, 0.0), 0.0);
        assert_eq!(cdf(0.3, 1.0), 1.0);
        assert!(ArcsineParams::new(1.0).is_err());
        assert!(arcsine_cdf(&ArcsineParams::new(0.5).unwrap(), 1.5).is_err());
    }

    #[test]
    fn f32_version() {
        let p = ArcsineParams::<f32>::new(0.5).unwrap();
        assert!((arcsine_cdf(&p, 0.25f32).unwrap() - 1.0 / 3.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn monotone_and_reflected(rho in 0.02f64..0.98, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(cdf(rho, lo) <= cdf(rho, hi) + 1e-12);
            prop_assert!((cdf(rho, a) + cdf(1.0 - rho, 1.0 - a) - 1.0).abs() < 1e-9);
        }
    }
}

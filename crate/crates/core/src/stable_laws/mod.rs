//! Stable laws in the `(alpha, c_plus, c_minus)` coordinates: characteristic
//! function, exact sampling, canonical normalizing sequences, generalized
//! arcsine laws and reference stable Levy paths.

mod arcsine;
mod levy;
mod normalizing;
mod sampler;

pub use arcsine::{arcsine_cdf, ArcsineParams};
pub use levy::reference_levy_path;
pub use normalizing::{canonical_an, canonical_bn, NormalizingSeq, SlowlyVarying, TailModel};
pub use sampler::{positivity_rho, sample_stable, StableSampler};

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Stable law with characteristic function
/// `exp(-c_alpha (c_plus + c_minus) |t|^alpha (1 - i beta sgn(t) omega(alpha, t)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams<F> {
    alpha: F,
    c_plus: F,
    c_minus: F,
}

impl<F: Real> StableParams<F> {
    pub fn new(alpha: F, c_plus: F, c_minus: F) -> Result<Self> {
        if !(alpha > F::zero() && alpha < F::two()) {
            return Err(invalid(format!("alpha must lie in (0,2), got {alpha}")));
        }
        if !(c_plus >= F::zero() && c_minus >= F::zero()) || !(c_plus + c_minus > F::zero()) {
            return Err(invalid(format!(
                "tail constants must be nonnegative with positive sum, got c+={c_plus}, c-={c_minus}"
            )));
        }
        if !(c_plus + c_minus).is_finite() {
            return Err(invalid("tail constants must be finite"));
        }
        Ok(Self { alpha, c_plus, c_minus })
    }

    pub fn symmetric(alpha: F, c: F) -> Result<Self> {
        Self::new(alpha, c, c)
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

    /// `c_plus + c_minus`.
    pub fn beta_lower(&self) -> F {
        self.c_plus + self.c_minus
    }

    /// `c_plus - c_minus`.
    pub fn beta_upper(&self) -> F {
        self.c_plus - self.c_minus
    }

    /// Skewness `(c_plus - c_minus) / (c_plus + c_minus)` in `[-1, 1]`.
    pub fn beta(&self) -> F {
        self.beta_upper() / self.beta_lower()
    }

    pub fn is_symmetric(&self) -> bool {
        self.c_plus == self.c_minus
    }

    /// `Gamma(1 - alpha) cos(alpha pi / 2)`, continuously extended by `pi/2`
    /// at `alpha = 1`.
    pub fn c_alpha(&self) -> F {
        c_alpha(self.alpha.as_f64()).map(F::lit).unwrap_or_else(|_| F::nan())
    }

    /// `tan(alpha pi / 2)` for `alpha != 1`, `-(2/pi) log|t|` at `alpha = 1`.
    pub fn omega(&self, t: F) -> F {
        if self.alpha == F::one() {
            if t == F::zero() {
                return F::zero();
            }
            -(F::two() / F::PI()) * t.abs().ln()
        } else {
            (self.alpha * F::FRAC_PI_2()).tan()
        }
    }

    /// Scale of the law in the usual `S(alpha, beta, sigma, 0)` notation:
    /// `sigma^alpha = c_alpha (c_plus + c_minus)`.
    pub fn sigma(&self) -> F {
        (self.c_alpha() * self.beta_lower()).powf(self.alpha.recip())
    }

    /// Characteristic function `E exp(i t S)`.
    pub fn char_fn(&self, t: F) -> Complex<F> {
        if t == F::zero() {
            return Complex::new(F::one(), F::zero());
        }
        let mag = self.c_alpha() * self.beta_lower() * t.abs().powf(self.alpha);
        let sgn = t.signum();
        let exponent = Complex::new(-mag, mag * self.beta() * sgn * self.omega(t));
        exponent.exp()
    }
}

/// Free-function form of [`StableParams::char_fn`].
pub fn char_fn<F: Real>(params: &StableParams<F>, t: F) -> Complex<F> {
    params.char_fn(t)
}

pub(crate) fn c_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid(format!("alpha must lie in (0,2), got {alpha}")));
    }
    if alpha == 1.0 {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    // Gamma(1-a) cos(a pi/2) has a removable singularity at a = 1; near it
    // use Gamma(2-a)/(1-a) * cos(a pi/2) = Gamma(2-a) * sin((1-a) pi/2)/(1-a).
    let e = 1.0 - alpha;
    let s = (e * std::f64::consts::FRAC_PI_2).sin() / e;
    Ok(statrs::function::gamma::gamma(2.0 - alpha) * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_parameters() {
        assert!(StableParams::new(0.0, 1.0, 1.0).is_err());
        assert!(StableParams::new(2.0, 1.0, 1.0).is_err());
        assert!(StableParams::new(1.5, -1.0, 1.0).is_err());
        assert!(StableParams::new(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn derived_coordinates() {
        let p = StableParams::new(1.5, 2.0, 1.0).unwrap();
        assert_eq!(p.beta_lower(), 3.0);
        assert_eq!(p.beta_upper(), 1.0);
        assert_relative_eq!(p.beta(), 1.0 / 3.0);
    }

    #[test]
    fn c_alpha_matches_gamma_cosine() {
        for &a in &[0.3, 0.5, 0.8, 1.2, 1.5, 1.9] {
            let direct = statrs::function::gamma::gamma(1.0 - a) * (a * PI / 2.0).cos();
            assert_relative_eq!(c_alpha(a).unwrap(), direct, max_relative = 1e-12);
        }
        assert_relative_eq!(c_alpha(1.0 - 1e-9).unwrap(), PI / 2.0, max_relative = 1e-8);
        assert_relative_eq!(c_alpha(1.0 + 1e-9).unwrap(), PI / 2.0, max_relative = 1e-8);
    }

    #[test]
    fn char_fn_trivial_values() {
        let p = StableParams::new(0.9, 1.0, 1.0).unwrap();
        assert_eq!(p.char_fn(0.0), Complex::new(1.0, 0.0));
        for &t in &[-3.0, -0.2, 0.7, 5.0] {
            assert_eq!(p.char_fn(t).im, 0.0);
        }
    }

    #[test]
    fn char_fn_one_sided_half() {
        // c_{1/2} = Gamma(1/2) cos(pi/4) = sqrt(pi/2), beta = 1, tan(pi/4) = 1.
        let p = StableParams::new(0.5, 1.0, 0.0).unwrap();
        let k = (PI / 2.0).sqrt();
        let expected = Complex::new(-k, k).exp();
        let got = p.char_fn(1.0);
        assert_relative_eq!(got.re, expected.re, max_relative = 1e-13);
        assert_relative_eq!(got.im, expected.im, max_relative = 1e-13);
    }

    #[test]
    fn char_fn_cauchy() {
        let p = StableParams::new(1.0, 0.5, 0.5).unwrap();
        assert_relative_eq!(p.char_fn(2.0).re, (-PI).exp(), max_relative = 1e-13);
    }

    #[test]
    fn f32_char_fn_agrees_with_f64() {
        let p64 = StableParams::new(1.3, 1.0, 0.25).unwrap();
        let p32 = StableParams::<f32>::new(1.3, 1.0, 0.25).unwrap();
        for &t in &[-2.0f32, -0.5, 0.25, 1.0, 2.5] {
            let a = p32.char_fn(t);
            let b = p64.char_fn(t as f64);
            assert!((a.re as f64 - b.re).abs() < 1e-5);
            assert!((a.im as f64 - b.im).abs() < 1e-5);
        }
    }

    proptest! {
        #[test]
        fn char_fn_modulus_and_conjugacy(
            alpha in 0.05f64..1.95,
            cp in 0.0f64..3.0,
            cm in 0.0f64..3.0,
            t in -20.0f64..20.0,
        ) {
            prop_assume!(cp + cm > 1e-3);
            prop_assume!((alpha - 1.0).abs() > 1e-6 || cp == cm);
            let p = StableParams::new(alpha, cp, cm).unwrap();
            let z = p.char_fn(t);
            let w = p.char_fn(-t);
            prop_assert!(z.norm() <= 1.0 + 1e-12);
            prop_assert!((z.re - w.re).abs() < 1e-12);
            prop_assert!((z.im + w.im).abs() < 1e-12);
        }
    }
}

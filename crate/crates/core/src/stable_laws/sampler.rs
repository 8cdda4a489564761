use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};

use super::StableParams;
use crate::error::{LabError, Result};
use crate::scalar::Real;

/// Chambers-Mallows-Stuck sampler for [`StableParams`].
///
/// Draws are computed in `f64` and converted to `F` at the end, so the `f32`
/// sampler is the rounded `f64` sampler.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler<F> {
    params: StableParams<F>,
    alpha: f64,
    sigma: f64,
    // arctan(beta tan(pi alpha/2)) / alpha
    b: f64,
    // (1 + beta^2 tan^2(pi alpha/2))^(1/(2 alpha))
    s: f64,
}

impl<F: Real> StableSampler<F> {
    pub fn new(params: StableParams<F>) -> Result<Self> {
        let alpha = params.alpha().as_f64();
        let beta = params.beta().as_f64();
        if alpha == 1.0 && !params.is_symmetric() {
            return Err(LabError::Unsupported(
                "sampling an asymmetric alpha = 1 law needs a non-canonical centering".into(),
            ));
        }
        let beta_lower = params.beta_lower().as_f64();
        let ca = super::c_alpha(alpha)?;
        let sigma = (ca * beta_lower).powf(1.0 / alpha);
        let (b, s) = if alpha == 1.0 {
            (0.0, 1.0)
        } else {
            let z = beta * (alpha * FRAC_PI_2).tan();
            (z.atan() / alpha, (1.0 + z * z).powf(0.5 / alpha))
        };
        Ok(Self { params, alpha, sigma, b, s })
    }

    pub fn params(&self) -> &StableParams<F> {
        &self.params
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> F {
        F::lit(self.sample_f64(rng))
    }

    pub(crate) fn sample_f64<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = Open01.sample(rng);
        let v = PI * (u - 0.5);
        if self.alpha == 1.0 {
            return self.sigma * v.tan();
        }
        let w: f64 = Exp1.sample(rng);
        let a = self.alpha;
        let av = a * (v + self.b);
        let x = self.s * av.sin() / v.cos().powf(1.0 / a) * ((v - av).cos() / w).powf((1.0 - a) / a);
        self.sigma * x
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<F> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

impl<F: Real> Distribution<F> for StableSampler<F> {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> F {
        StableSampler::sample(self, rng)
    }
}

/// One draw from the stable law with the given parameters.
pub fn sample_stable<F: Real, R: Rng + ?Sized>(params: &StableParams<F>, rng: &mut R) -> Result<F> {
    Ok(StableSampler::new(*params)?.sample(rng))
}

/// `Pr[S > 0]`. Exact for the symmetric and one-sided (`alpha < 1`) cases,
/// otherwise a Monte Carlo estimate from `n` draws (standard error at most
/// `1/(2 sqrt n)`).
pub fn positivity_rho<F: Real, R: Rng + ?Sized>(params: &StableParams<F>, n: usize, rng: &mut R) -> Result<f64> {
    let sampler = StableSampler::new(*params)?;
    if params.is_symmetric() {
        return Ok(0.5);
    }
    if params.alpha() < F::one() {
        if params.c_minus() == F::zero() {
            return Ok(1.0);
        }
        if params.c_plus() == F::zero() {
            return Ok(0.0);
        }
    }
    if n == 0 {
        return Err(LabError::Empty("positivity_rho needs at least one draw"));
    }
    let hits = (0..n).filter(|_| sampler.sample_f64(rng) > 0.0).count();
    Ok(hits as f64 / n as f64)
}

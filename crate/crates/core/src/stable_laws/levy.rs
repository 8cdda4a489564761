use rand::Rng;

use super::{StableParams, StableSampler};
use crate::cadlag::CadlagPath;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Strictly stable Levy motion sampled on `grid` (`0 = t_0 < ... < t_m = T`)
/// and held constant between grid points. The increment over
/// `[t_i, t_{i+1}]` is `(t_{i+1} - t_i)^(1/alpha) S` with independent `S`.
///
/// Only laws whose canonical centering makes the motion strictly stable are
/// supported, which excludes asymmetric `alpha = 1`.
pub fn reference_levy_path<F: Real, R: Rng + ?Sized>(
    params: &StableParams<F>,
    grid: &[F],
    rng: &mut R,
) -> Result<CadlagPath<F>> {
    let sampler = StableSampler::new(*params)?;
    if grid.len() < 2 || grid[0] != F::zero() {
        return Err(invalid("Levy path grid must start at 0 and have at least two points"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("Levy path grid must be strictly increasing"));
    }
    let inv_alpha = 1.0 / params.alpha().as_f64();
    let mut values = Vec::with_capacity(grid.len());
    let mut level = 0.0f64;
    values.push(F::zero());
    for w in grid.windows(2) {
        let dt = (w[1] - w[0]).as_f64();
        level += dt.powf(inv_alpha) * sampler.sample_f64(rng);
        values.push(F::lit(level));
    }
    let horizon = *grid.last().unwrap();
    CadlagPath::step(1, horizon, grid.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn starts_at_zero_on_grid() {
        let p = StableParams::new(1.5, 1.0, 1.0).unwrap();
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let path = reference_levy_path(&p, &grid, &mut stream(1, Purpose::Reference, 0)).unwrap();
        assert_eq!(path.eval(0.0), vec![0.0]);
        assert_eq!(path.horizon(), 1.0);
        assert_eq!(path.breakpoints(), 11);
    }

    #[test]
    fn rejects_bad_grids_and_asymmetric_cauchy() {
        let p = StableParams::new(1.5, 1.0, 1.0).unwrap();
        let mut rng = stream(1, Purpose::Reference, 0);
        assert!(reference_levy_path(&p, &[0.0], &mut rng).is_err());
        assert!(reference_levy_path(&p, &[0.1, 1.0], &mut rng).is_err());
        assert!(reference_levy_path(&p, &[0.0, 0.5, 0.5], &mut rng).is_err());
        let q = StableParams::new(1.0, 1.0, 0.0).unwrap();
        assert!(reference_levy_path(&q, &[0.0, 1.0], &mut rng).is_err());
    }
}

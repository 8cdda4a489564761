use rand::Rng;
use rand_distr::{Distribution, Zeta};

use super::{GibbsMarkov, Observable};
use crate::error::{invalid, LabError, Result};
use crate::numeric::{hurwitz_zeta, zeta};
use crate::stable_laws::TailModel;

/// Symbols are rejected above this magnitude, so that `scale * symbol` and
/// the running levels of a Z-extension stay far from overflow. The discarded
/// mass is `zeta(s, 2^61) / zeta(s)`, about `2^(-61 alpha)`.
pub const MAX_MAGNITUDE: i64 = 1 << 61;

/// Magnitudes below this have their cylinder boundaries tabulated.
const TABLE: usize = 4096;

/// Bernoulli shift on `[0, 1)` with heavy-tailed integer symbols.
///
/// Symmetric: `p(+j) = p(-j) = j^-s / (2 zeta(s))`; one-sided:
/// `p(j) = j^-s / zeta(s)`, with `s = 1 + alpha` and `j >= 1`. Cylinders are
/// laid out left to right as `+1, -1, +2, -2, ...` (one-sided: `1, 2, ...`)
/// and every branch is the increasing affine map onto `[0, 1)`.
#[derive(Debug, Clone)]
pub struct HeavyBernoulliShift {
    alpha: f64,
    symmetric: bool,
    s: f64,
    zeta_s: f64,
    /// `tail[j] = zeta(s, j) / zeta(s)`, the mass of `|symbol| >= j`.
    tail: Vec<f64>,
    magnitude: Zeta<f64>,
}

impl HeavyBernoulliShift {
    pub fn new(alpha: f64, symmetric: bool) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(invalid(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        let s = 1.0 + alpha;
        let zeta_s = zeta(s);
        let mut tail = vec![1.0; TABLE + 2];
        for (j, t) in tail.iter_mut().enumerate().skip(2) {
            *t = hurwitz_zeta(s, j as f64) / zeta_s;
        }
        let magnitude = Zeta::new(s).map_err(|e| invalid(format!("zeta law: {e}")))?;
        Ok(Self { alpha, symmetric, s, zeta_s, tail, magnitude })
    }

    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, true)
    }

    pub fn one_sided(alpha: f64) -> Result<Self> {
        Self::new(alpha, false)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `zeta(1 + alpha)`.
    pub fn zeta_s(&self) -> f64 {
        self.zeta_s
    }

    /// Probability of a symbol.
    pub fn prob(&self, symbol: i64) -> f64 {
        if symbol == 0 || (!self.symmetric && symbol < 0) || symbol.unsigned_abs() > MAX_MAGNITUDE as u64 {
            return 0.0;
        }
        let p = (symbol.unsigned_abs() as f64).powf(-self.s) / self.zeta_s;
        if self.symmetric {
            0.5 * p
        } else {
            p
        }
    }

    /// Mass of `|symbol| >= j`.
    fn tail_mass(&self, j: u64) -> f64 {
        if (j as usize) < self.tail.len() {
            self.tail[j as usize]
        } else {
            hurwitz_zeta(self.s, j as f64) / self.zeta_s
        }
    }

    /// A magnitude from the law of `|symbol|`.
    pub fn sample_magnitude<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        loop {
            let k = self.magnitude.sample(rng);
            if k < MAX_MAGNITUDE as f64 {
                return k as i64;
            }
        }
    }

    /// `E[|symbol|; symbol > 0]` for the symmetric layout (total for the
    /// one-sided one); finite for `alpha > 1`.
    fn positive_first_moment(&self) -> Result<f64> {
        if self.alpha <= 1.0 {
            return Err(invalid(format!("symbols have no mean for alpha = {}", self.alpha)));
        }
        let m = zeta(self.alpha) / self.zeta_s;
        Ok(if self.symmetric { 0.5 * m } else { m })
    }

    /// Tail constants `(c_plus, c_minus)` of the symbol itself:
    /// `mu(symbol > t) ~ t^-alpha / (2 alpha zeta(s))` in the symmetric case.
    pub fn symbol_tail_constants(&self) -> (f64, f64) {
        let c = 1.0 / (self.alpha * self.zeta_s);
        if self.symmetric {
            (0.5 * c, 0.5 * c)
        } else {
            (c, 0.0)
        }
    }
}

impl GibbsMarkov for HeavyBernoulliShift {
    fn name(&self) -> &'static str {
        if self.symmetric {
            "heavy_symmetric"
        } else {
            "heavy_one_sided"
        }
    }

    fn distortion_bound(&self) -> f64 {
        0.0
    }

    fn big_image(&self) -> f64 {
        1.0
    }

    fn symbol_of(&self, x: f64) -> Result<i64> {
        if !(0.0..1.0).contains(&x) {
            return Err(LabError::Boundary { x });
        }
        // r = mass to the right of x; the magnitude j satisfies
        // tail(j + 1) < r <= tail(j)
        let r = 1.0 - x;
        let j = if r > self.tail[TABLE + 1] {
            // tail is decreasing: count the entries >= r
            self.tail[1..=TABLE + 1].partition_point(|&t| t >= r) as u64
        } else {
            let mut lo = TABLE as u64 + 1;
            let mut hi = 2 * lo;
            while self.tail_mass(hi) >= r {
                lo = hi;
                hi = hi.checked_mul(2).filter(|&h| h <= MAX_MAGNITUDE as u64).ok_or(LabError::Boundary { x })?;
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if self.tail_mass(mid) >= r {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let j = j.max(1) as i64;
        if !self.symmetric {
            return Ok(j);
        }
        let p = self.prob(j);
        Ok(if r > self.tail_mass(j as u64) - p { j } else { -j })
    }

    fn cylinder(&self, symbol: i64) -> Result<(f64, f64)> {
        if self.prob(symbol) == 0.0 {
            return Err(invalid(format!("symbol {symbol} has no cylinder")));
        }
        let j = symbol.unsigned_abs();
        let start = 1.0 - self.tail_mass(j);
        let next = 1.0 - self.tail_mass(j + 1);
        if !self.symmetric {
            return Ok((start, next));
        }
        let mid = start + self.prob(j as i64);
        Ok(if symbol > 0 { (start, mid) } else { (mid, next) })
    }

    fn branch(&self, symbol: i64, x: f64) -> f64 {
        let (lo, hi) = self.cylinder(symbol).unwrap_or((0.0, 1.0));
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    fn inverse_branch(&self, symbol: i64, y: f64) -> f64 {
        let (lo, hi) = self.cylinder(symbol).unwrap_or((0.0, 1.0));
        lo + (hi - lo) * y
    }

    fn sample_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let k = self.sample_magnitude(rng);
        if self.symmetric && rng.random::<bool>() {
            -k
        } else {
            k
        }
    }

    fn sample_invariant<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random::<f64>()
    }

    fn lipschitz(&self, f: &Observable, _symbol: i64) -> Result<f64> {
        match f {
            Observable::Symbol { .. } | Observable::Constant { .. } => Ok(0.0),
            Observable::Power { .. } => {
                Err(LabError::Unsupported("the heavy shift only carries symbol observables".into()))
            }
        }
    }

    fn tail(&self, f: &Observable) -> Result<TailModel<f64>> {
        match *f {
            Observable::Symbol { scale } if scale != 0 => {
                let (cp, cm) = self.symbol_tail_constants();
                let k = (scale.unsigned_abs() as f64).powf(self.alpha);
                let (cp, cm) = if scale > 0 { (cp * k, cm * k) } else { (cm * k, cp * k) };
                TailModel::power(self.alpha, cp, cm)
            }
            Observable::Symbol { .. } | Observable::Constant { .. } => {
                Err(invalid("a constant observable has no heavy tail"))
            }
            Observable::Power { .. } => {
                Err(LabError::Unsupported("the heavy shift only carries symbol observables".into()))
            }
        }
    }

    fn mean(&self, f: &Observable) -> Result<f64> {
        match *f {
            Observable::Symbol { scale } => {
                let m = self.positive_first_moment()?;
                Ok(if self.symmetric { 0.0 } else { scale as f64 * m })
            }
            Observable::Constant { value } => Ok(value),
            Observable::Power { .. } => {
                Err(LabError::Unsupported("the heavy shift only carries symbol observables".into()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::rng::{stream, Purpose};
    use approx::assert_relative_eq;

    #[test]
    fn cylinders_tile_the_interval() {
        for sym in [true, false] {
            let h = HeavyBernoulliShift::new(0.75, sym).unwrap();
            let order: Vec<i64> = if sym { (1..6000).flat_map(|j| [j, -j]).collect() } else { (1..12000).collect() };
            let mut prev = 0.0;
            for &k in &order {
                let (lo, hi) = h.cylinder(k).unwrap();
                assert!((lo - prev).abs() < 1e-15, "gap before {k}");
                assert!(hi > lo);
                assert_relative_eq!(hi - lo, h.prob(k), max_relative = 1e-8);
                prev = hi;
            }
        }
    }

    #[test]
    fn symbol_lookup_inverts_cylinders() {
        let h = HeavyBernoulliShift::symmetric(0.6).unwrap();
        let mut rng = stream(11, Purpose::Cylinders, 0);
        for _ in 0..3000 {
            let k = h.sample_symbol(&mut rng);
            // narrower cylinders sit below the spacing of doubles near 1
            if k.unsigned_abs() > 1_000_000 {
                continue;
            }
            let x = h.inverse_branch(k, 0.25 + 0.5 * rng.random::<f64>());
            assert_eq!(h.symbol_of(x).unwrap(), k, "x={x}");
        }
        assert_eq!(h.symbol_of(0.0).unwrap(), 1);
        assert!(h.symbol_of(1.0).is_err());
        assert!(h.symbol_of(-0.1).is_err());
    }

    #[test]
    fn magnitudes_follow_zeta_law() {
        let h = HeavyBernoulliShift::symmetric(1.5).unwrap();
        let mut rng = stream(12, Purpose::Dynamics, 0);
        let n = 200_000;
        let mut counts = [0usize; 4];
        let mut neg = 0usize;
        for _ in 0..n {
            let k = h.sample_symbol(&mut rng);
            if k < 0 {
                neg += 1;
            }
            let j = k.unsigned_abs() as usize;
            if j <= 3 {
                counts[j] += 1;
            }
        }
        for j in 1..=3 {
            let p = 2.0 * h.prob(j as i64);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((counts[j] as f64 / n as f64 - p).abs() < 5.0 * se, "j={j}");
        }
        assert!((neg as f64 / n as f64 - 0.5).abs() < 5.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn tail_constants_match_hurwitz_tail() {
        let h = HeavyBernoulliShift::one_sided(0.8).unwrap();
        let t = h.tail(&Observable::Symbol { scale: 1 }).unwrap();
        for &x in &[1e4, 1e6] {
            let exact = h.tail_mass(x as u64 + 1);
            assert_relative_eq!(exact, t.right_tail(x), max_relative = 2.0 / x);
        }
        let s = HeavyBernoulliShift::symmetric(0.8).unwrap();
        let t = s.tail(&Observable::Symbol { scale: -2 }).unwrap();
        assert_relative_eq!(t.c_plus(), t.c_minus());
        assert_relative_eq!(t.c_plus(), 2f64.powf(0.8) / (2.0 * 0.8 * zeta(1.8)), max_relative = 1e-12);
    }

    #[test]
    fn means() {
        let s = HeavyBernoulliShift::symmetric(1.5).unwrap();
        assert_eq!(s.mean(&Observable::Symbol { scale: 3 }).unwrap(), 0.0);
        let o = HeavyBernoulliShift::one_sided(1.5).unwrap();
        assert_relative_eq!(o.mean(&Observable::Symbol { scale: 1 }).unwrap(), zeta(1.5) / zeta(2.5));
        assert!(HeavyBernoulliShift::one_sided(0.9).unwrap().mean(&Observable::Symbol { scale: 1 }).is_err());
        assert!(HeavyBernoulliShift::symmetric(2.0).is_err());
    }

    #[test]
    fn orbits_and_checks() {
        let h = HeavyBernoulliShift::symmetric(0.75).unwrap();
        let mut rng = stream(13, Purpose::Dynamics, 0);
        let o = h.sample_orbit(50, &mut rng);
        for j in 0..50 {
            if o.symbols[j].unsigned_abs() < 1 << 30 {
                assert_eq!(h.symbol_of(o.points[j]).unwrap(), o.symbols[j]);
            }
        }
        let f = Observable::Symbol { scale: 1 };
        assert_eq!(oscillation_check(&h, &f, &[1, -2, 5], 200, &mut rng).unwrap(), 0);
        assert!(distortion_check(&h, 2, 300, &mut rng).unwrap() < 1e-6);
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::IntermittentMap;
use crate::error::{LabError, Result};
use crate::numeric::bisect;
use crate::Real;

/// Default cap on a single excursion for the direct iteration.
pub const DEFAULT_CAP: f64 = 1e9;

/// Number of tabulated preimages `a_j` of `y0` under the cusp model map.
const TABLE: usize = 1 << 16;

/// Deep excursions are transported to this depth by the Fatou coordinate
/// and iterated exactly from there.
const DEPTH: usize = 32;

/// One return to `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstReturn {
    /// `phi_Y(x)`, exact below `2^53`.
    pub phi: f64,
    /// Index `j` of the cusp region `Z_j` visited by the excursion.
    pub side: u8,
    /// `T_Y x`.
    pub point: f64,
}

impl FirstReturn {
    /// `(phi^(0), phi^(1))`.
    pub fn components(&self) -> [f64; 2] {
        if self.side == 0 {
            [self.phi, 0.0]
        } else {
            [0.0, self.phi]
        }
    }
}

/// First-return structure of a symmetric two-cusp map on `Y = (y0, y1)`,
/// where `y0` is the period-two point in `Z0` and `y1 = T y0 = 1 - y0`.
///
/// In the distance coordinate `u` to the nearer fixed point both cusps act
/// as `g(u) = u (1 + (2u)^p)`. An excursion entering at distance `z` takes
/// `N(z) = min{k >= 1 : g^k(z) > y0}` steps, and `N(z) = j + 1` exactly when
/// `a_{j+1} < z <= a_j` for the backward orbit `a_0 = y0`,
/// `a_{j+1} = g^-1(a_j)`. The first `2^16` preimages are tabulated; beyond
/// them the Fatou coordinate, in `q = kappa u^p`,
/// `Phi(u) = 1 / (p q) - (p+1)/2 ln u + c1 q + c2 q^2 + c3 q^3` with
/// `c1 = (p+1)(2p+1) / (12p)`, `c2 = -(p+1)^2 (3p+1) / (48p)`,
/// `c3 = (p+1)(4p+1)(19p^2 + 40p + 19) / (2160p)`,
/// which satisfies `Phi(g u) = Phi(u) - 1 + O(q^5)`, counts the steps.
/// The landing point is obtained by moving `z` to the fundamental domain
/// `(a_33, a_32]` at the same relative Fatou position and iterating `g`.
#[derive(Debug, Clone)]
pub struct ReturnStructure {
    p: f64,
    kappa: f64,
    int_p: Option<i32>,
    fatou_coef: [f64; 4],
    y0: f64,
    y1: f64,
    a: Vec<f64>,
    phi_a: Vec<f64>,
    fatou_offset: f64,
}

impl ReturnStructure {
    /// Locates `Y`: `T y0 = 1 - y0` on `Z0`, by bisection to `1e-14`.
    pub fn find<F: Real>(map: &IntermittentMap<F>) -> Result<Self> {
        let p = map.p().as_f64();
        let m = IntermittentMap::<f64>::new(p)?;
        let y0 = bisect(|y| m.left(y) - (1.0 - y), 1e-300, 0.5, 1e-14)?;
        let y1 = 1.0 - y0;
        let back = m.right(y1);
        if (back - y0).abs() > 1e-10 {
            return Err(LabError::InvalidParameter(format!("T(y1) = {back} misses y0 = {y0}")));
        }
        let int_p = (p.fract() == 0.0 && p <= 64.0).then_some(p as i32);
        let fatou_coef = [
            0.5 * (p + 1.0),
            (p + 1.0) * (2.0 * p + 1.0) / (12.0 * p),
            -(p + 1.0) * (p + 1.0) * (3.0 * p + 1.0) / (48.0 * p),
            (p + 1.0) * (4.0 * p + 1.0) * (19.0 * p * p + 40.0 * p + 19.0) / (2160.0 * p),
        ];
        let mut rs = Self {
            p,
            kappa: 2f64.powf(p),
            int_p,
            fatou_coef,
            y0,
            y1,
            a: Vec::new(),
            phi_a: Vec::new(),
            fatou_offset: 0.0,
        };
        let mut a = Vec::with_capacity(TABLE + 2);
        a.push(y0);
        for j in 0..=TABLE {
            let next = rs.g_inverse(a[j]);
            a.push(next);
        }
        rs.phi_a = a.iter().map(|&u| rs.fatou(u)).collect();
        rs.fatou_offset = rs.phi_a[TABLE + 1] - (TABLE + 1) as f64;
        rs.a = a;
        Ok(rs)
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.p
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.y0 && x < self.y1
    }

    #[inline]
    fn pow_p(&self, v: f64) -> f64 {
        match self.int_p {
            Some(k) => v.powi(k),
            None => v.powf(self.p),
        }
    }

    /// Cusp model map in the distance coordinate.
    #[inline]
    pub(crate) fn g(&self, u: f64) -> f64 {
        u * (1.0 + self.pow_p(2.0 * u))
    }

    /// Inverse of `g` by Newton's method from the right, where the convex
    /// increasing `g` makes the iterates decrease monotonically to the root.
    pub(crate) fn g_inverse(&self, target: f64) -> f64 {
        let mut u = target;
        for _ in 0..200 {
            let t = self.pow_p(2.0 * u);
            let f = u * (1.0 + t) - target;
            let df = 1.0 + (1.0 + self.p) * t;
            let next = u - f / df;
            if !(next < u) || u - next <= 1e-17 * u {
                return next.min(u);
            }
            u = next;
        }
        u
    }

    /// Asymptotic Fatou coordinate of `g` at 0; decreasing in `u`.
    pub fn fatou(&self, u: f64) -> f64 {
        let q = self.kappa * self.pow_p(u);
        let [b, c1, c2, c3] = self.fatou_coef;
        1.0 / (self.p * q) - b * u.ln() + q * (c1 + q * (c2 + q * c3))
    }

    fn fatou_derivative(&self, u: f64) -> f64 {
        let q = self.kappa * self.pow_p(u);
        let [b, c1, c2, c3] = self.fatou_coef;
        (-1.0 / q - b + self.p * q * (c1 + q * (2.0 * c2 + 3.0 * q * c3))) / u
    }

    /// Point of `[lo, hi]` where the Fatou coordinate takes the value
    /// `target`, by safeguarded Newton steps.
    fn fatou_solve(&self, target: f64, mut lo: f64, mut hi: f64) -> f64 {
        let mut u = 0.5 * (lo + hi);
        for _ in 0..60 {
            let f = self.fatou(u) - target;
            if f == 0.0 {
                return u;
            }
            // fatou decreases: f > 0 means u is too small
            if f > 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let newton = u - f / self.fatou_derivative(u);
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - u).abs() <= 1e-16 * u || hi - lo <= 1e-16 * hi {
                return next;
            }
            u = next;
        }
        u
    }

    /// Steps `N(z)` of `g` needed to exceed `y0` from `z`, with the landing
    /// point in `(y0, y1]`.
    ///
    /// Far from the fixed point the Fatou coordinate is a large number and
    /// its fractional part keeps only `ulp(phi_z)` of resolution. `dither`
    /// in `[-1/2, 1/2)` places the fractional part within that rounding cell;
    /// 0 gives the nearest-representable value.
    fn escape(&self, z: f64, dither: f64) -> (f64, f64) {
        if z > self.y0 {
            return (0.0, z);
        }
        if z > self.a[DEPTH] {
            return self.iterate_out(z, 0.0);
        }
        // z in (a_{j+1}, a_j] at relative Fatou position theta
        let phi_z = self.fatou(z);
        let cell = dither * ulp(phi_z);
        let (j, theta) = if z > self.a[TABLE + 1] {
            let j = self.a.partition_point(|&v| v >= z) - 1;
            let theta = (phi_z - self.phi_a[j] + cell) / (self.phi_a[j + 1] - self.phi_a[j]);
            (j as f64, theta)
        } else {
            let t = phi_z - self.fatou_offset;
            let j = t.floor().max((TABLE + 1) as f64);
            let theta = t - j + cell;
            // the dither may carry into the neighbouring fundamental domain
            if theta < 0.0 && j > (TABLE + 1) as f64 {
                (j - 1.0, theta + 1.0)
            } else if theta >= 1.0 {
                (j + 1.0, theta - 1.0)
            } else {
                (j, theta.clamp(0.0, 1.0))
            }
        };
        let (lo, hi) = (self.a[DEPTH + 1], self.a[DEPTH]);
        let target = self.phi_a[DEPTH] + theta.clamp(0.0, 1.0) * (self.phi_a[DEPTH + 1] - self.phi_a[DEPTH]);
        let w = self.fatou_solve(target, lo, hi).clamp(lo, hi);
        // g^(DEPTH + 1) carries (a_17, a_16] onto (y0, y1]
        let (steps, landing) = self.iterate_out(w, 0.0);
        (j - DEPTH as f64 + steps, landing)
    }

    /// Direct iteration of `g` until the orbit exceeds `y0`.
    fn iterate_out(&self, mut z: f64, mut steps: f64) -> (f64, f64) {
        loop {
            z = self.g(z);
            steps += 1.0;
            if z > self.y0 {
                break;
            }
        }
        // rounding may push the landing just past y1
        (steps, z.min(prev_float(self.y1)))
    }

    /// `phi_Y`, the visited side and `T_Y x`; excursions longer than `cap`
    /// are reported as [`LabError::LongExcursion`].
    pub fn first_return(&self, map: &IntermittentMap<f64>, x: f64, cap: Option<f64>) -> Result<FirstReturn> {
        self.first_return_at(map, x, cap, 0.0)
    }

    /// [`first_return`](Self::first_return) with the landing point drawn
    /// uniformly from the rounding cell of long excursions. Iterating the
    /// plain induced map in `f64` collapses onto periodic orbits within a
    /// few `10^5` returns, because every long excursion rounds its landing
    /// point to a coarse grid; long induced orbits should use this.
    pub fn first_return_dithered<R: Rng + ?Sized>(
        &self,
        map: &IntermittentMap<f64>,
        x: f64,
        cap: Option<f64>,
        rng: &mut R,
    ) -> Result<FirstReturn> {
        self.first_return_at(map, x, cap, rng.random::<f64>() - 0.5)
    }

    fn first_return_at(
        &self,
        map: &IntermittentMap<f64>,
        x: f64,
        cap: Option<f64>,
        dither: f64,
    ) -> Result<FirstReturn> {
        if !self.contains(x) || x == 0.5 {
            return Err(LabError::Boundary { x });
        }
        // distance of T x to the fixed point it approaches
        let (side, z) = if x > 0.5 { (0u8, map.near_half(x - 0.5)) } else { (1u8, map.near_half(0.5 - x)) };
        if !(z > 0.0) {
            return Err(LabError::Boundary { x });
        }
        let (n, landing) = self.escape(z, dither);
        let phi = 1.0 + n;
        if !phi.is_finite() {
            return Err(LabError::Overflow);
        }
        if let Some(cap) = cap {
            if phi > cap {
                return Err(LabError::LongExcursion { cap });
            }
        }
        let point = if side == 0 { landing } else { 1.0 - landing };
        Ok(FirstReturn { phi, side, point })
    }

    /// First return by plain iteration of `T`, for cross-checks.
    pub fn first_return_naive(&self, map: &IntermittentMap<f64>, x: f64, cap: u64) -> Result<FirstReturn> {
        if !self.contains(x) || x == 0.5 {
            return Err(LabError::Boundary { x });
        }
        let mut y = map.apply(x)?;
        let side = u8::from(y > 0.5);
        let mut n = 1u64;
        while !self.contains(y) {
            if n >= cap {
                return Err(LabError::LongExcursion { cap: cap as f64 });
            }
            y = map.apply(y)?;
            n += 1;
        }
        Ok(FirstReturn { phi: n as f64, side, point: y })
    }

    /// A draw from the uniform law on `Y`, away from the breakpoint.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = self.y0 + (self.y1 - self.y0) * rng.random::<f64>();
            if self.contains(x) && x != 0.5 {
                return x;
            }
        }
    }

    /// Returns along the induced orbit of `x0`.
    pub fn induced_orbit(
        &self,
        map: &IntermittentMap<f64>,
        x0: f64,
        n: usize,
        cap: Option<f64>,
    ) -> Result<Vec<FirstReturn>> {
        let mut out = Vec::with_capacity(n);
        let mut x = x0;
        for _ in 0..n {
            let r = self.first_return(map, x, cap)?;
            x = r.point;
            out.push(r);
        }
        Ok(out)
    }

    /// `(sum phi^(0), sum phi^(1))` over `n` induced steps from `x0`,
    /// without storing the orbit.
    pub fn side_sums(&self, map: &IntermittentMap<f64>, x0: f64, n: usize, cap: Option<f64>) -> Result<[f64; 2]> {
        let mut sums = [0.0; 2];
        let mut x = x0;
        for _ in 0..n {
            let r = self.first_return(map, x, cap)?;
            sums[r.side as usize] += r.phi;
            x = r.point;
        }
        Ok(sums)
    }

    /// Number of tabulated return times; cylinders `{phi = m}` are
    /// available for `2 <= m <= max_tabulated_phi()`.
    pub fn max_tabulated_phi(&self) -> u64 {
        TABLE as u64 + 2
    }

    /// Closure of the rank-one cylinder `{phi_Y = m, side}` of the induced
    /// partition.
    pub fn cylinder(&self, map: &IntermittentMap<f64>, m: u64, side: u8) -> Result<(f64, f64)> {
        if m < 2 || m > self.max_tabulated_phi() || side > 1 {
            return Err(LabError::InvalidParameter(format!("no tabulated cylinder for phi = {m}, side {side}")));
        }
        // phi = m  <=>  a_{m-1} < z <= a_{m-2}
        let near = self.near_half_inverse(map, self.a[m as usize - 1])?;
        let far = self.near_half_inverse(map, self.a[m as usize - 2])?;
        Ok(if side == 0 { (0.5 + near, 0.5 + far) } else { (0.5 - far, 0.5 - near) })
    }

    /// Inverse branch of `T_Y` from `Y` onto the cylinder `{phi = m, side}`.
    pub fn induced_inverse(&self, map: &IntermittentMap<f64>, m: u64, side: u8, y: f64) -> Result<f64> {
        if m < 2 || side > 1 {
            return Err(LabError::InvalidParameter(format!("no cylinder for phi = {m}, side {side}")));
        }
        let mut u = if side == 0 { y } else { 1.0 - y };
        for _ in 0..m - 1 {
            u = self.g_inverse(u);
        }
        let d = self.near_half_inverse(map, u)?;
        Ok(if side == 0 { 0.5 + d } else { 0.5 - d })
    }

    fn near_half_inverse(&self, map: &IntermittentMap<f64>, w: f64) -> Result<f64> {
        bisect(|d| map.near_half(d) - w, 0.0, 0.5, 1e-17)
    }
}

fn ulp(v: f64) -> f64 {
    let a = v.abs();
    f64::from_bits(a.to_bits() + 1) - a
}

fn prev_float(x: f64) -> f64 {
    x.next_down()
}

#[cfg(test)]
mod tests {
    use super::super::make_lsv2;
    use super::*;
    use crate::rng::{stream, Purpose};
    use approx::assert_relative_eq;

    #[test]
    fn period_two_point() {
        let m = make_lsv2(1.0).unwrap();
        let rs = ReturnStructure::find(&m).unwrap();
        assert_relative_eq!(rs.y0(), (3f64.sqrt() - 1.0) / 2.0, epsilon = 1e-13);
        for &p in &[0.5, 2.0, 3.0, 5.5] {
            let rs = ReturnStructure::find(&make_lsv2(p).unwrap()).unwrap();
            assert_eq!(rs.y1(), 1.0 - rs.y0());
            assert!(rs.y0() < 0.5 && 0.5 < rs.y1());
        }
    }

    #[test]
    fn fatou_coordinate_conjugates() {
        let rs = ReturnStructure::find(&make_lsv2(3.0).unwrap()).unwrap();
        for &u in &[0.1, 0.05, 0.02, 0.01] {
            let defect = rs.fatou(rs.g(u)) - rs.fatou(u) + 1.0;
            let q = 8.0 * u.powi(3);
            assert!(defect.abs() < 200.0 * q.powi(5) + 1e-15 * rs.fatou(u), "u={u}: {defect}");
        }
        let table_end = rs.phi_a[TABLE + 1] - (TABLE + 1) as f64;
        let mid = rs.phi_a[TABLE / 2] - (TABLE / 2) as f64;
        assert!((table_end - mid).abs() < 1e-8);
    }

    #[test]
    fn fast_matches_naive() {
        for &p in &[0.7, 1.0, 3.0] {
            let m = make_lsv2(p).unwrap();
            let rs = ReturnStructure::find(&m).unwrap();
            let mut rng = stream(31, Purpose::Start, 0);
            let mut deep = 0;
            for _ in 0..3000 {
                let x = rs.sample_uniform(&mut rng);
                let naive = match rs.first_return_naive(&m, x, 200_000) {
                    Ok(r) => r,
                    Err(_) => continue,
                };
                let fast = rs.first_return(&m, x, None).unwrap();
                assert_eq!(fast.side, naive.side);
                // an orbit ending within rounding of an edge of Y may be counted
                // differently by the two iterations
                let edge = (naive.point - rs.y0()).abs().min((naive.point - rs.y1()).abs());
                if edge > 1e-6 {
                    assert_eq!(fast.phi, naive.phi, "p={p} x={x} {fast:?} {naive:?}");
                    assert!(
                        (fast.point - naive.point).abs() < 1e-6 + 1e-9 * naive.phi,
                        "p={p} x={x} {fast:?} {naive:?}"
                    );
                }
                if fast.phi > (DEPTH + 2) as f64 {
                    deep += 1;
                }
            }
            assert!(deep > 30, "p={p}: only {deep} deep excursions");
        }
    }

    #[test]
    fn returns_never_take_one_step() {
        let m = make_lsv2(3.0).unwrap();
        let rs = ReturnStructure::find(&m).unwrap();
        let mut rng = stream(32, Purpose::Start, 0);
        for _ in 0..10_000 {
            let r = rs.first_return(&m, rs.sample_uniform(&mut rng), None).unwrap();
            assert!(r.phi >= 2.0);
            assert!(rs.contains(r.point));
        }
    }

    #[test]
    fn table_boundaries_are_exact() {
        let m = make_lsv2(3.0).unwrap();
        let rs = ReturnStructure::find(&m).unwrap();
        for &mm in &[2u64, 3, 17, 18, 19, 1000, rs.max_tabulated_phi()] {
            for side in 0..2 {
                let (lo, hi) = rs.cylinder(&m, mm, side).unwrap();
                let inner = lo + 0.5 * (hi - lo);
                let r = rs.first_return(&m, inner, None).unwrap();
                assert_eq!((r.phi, r.side), (mm as f64, side));
                let back = rs.induced_inverse(&m, mm, side, r.point).unwrap();
                assert!(
                    (back - inner).abs() <= 1e-9 * (hi - lo).max(1e-300) + 1e-15,
                    "m={mm} {back} {inner} {lo} {hi} {r:?}"
                );
            }
        }
        assert!(rs.cylinder(&m, 1, 0).is_err());
    }

    #[test]
    fn beyond_the_table() {
        let m = make_lsv2(3.0).unwrap();
        let rs = ReturnStructure::find(&m).unwrap();
        // phi grows like z^-p / (p kappa) for small entry distances
        let d = 1e-7;
        let r = rs.first_return(&m, 0.5 + d, None).unwrap();
        let z = m.near_half(d);
        assert_relative_eq!(r.phi, rs.fatou(z) - rs.fatou(rs.y0()) + 1.0, max_relative = 1e-6);
        assert!(r.phi > 1e15);
        assert!(rs.contains(r.point));
        assert!(matches!(rs.first_return(&m, 0.5 + d, Some(1e9)), Err(LabError::LongExcursion { .. })));
        assert!(rs.first_return(&m, rs.y1(), None).is_err());
    }

    #[test]
    fn mirror_symmetry_of_returns() {
        let m = make_lsv2(3.0).unwrap();
        let rs = ReturnStructure::find(&m).unwrap();
        let mut rng = stream(33, Purpose::Start, 0);
        for _ in 0..2000 {
            // dyadic points keep 1 - x exact
            let x = (rs.sample_uniform(&mut rng) * 1048576.0).round() / 1048576.0;
            if !rs.contains(x) || x == 0.5 {
                continue;
            }
            let a = rs.first_return(&m, x, None).unwrap();
            let b = rs.first_return(&m, 1.0 - x, None).unwrap();
            assert_eq!(a.phi, b.phi);
            assert_eq!(a.side, 1 - b.side);
            assert_eq!(a.components()[0], b.components()[1]);
            assert!((a.point - (1.0 - b.point)).abs() < 1e-15);
        }
    }

    #[test]
    fn dithered_orbits_do_not_cycle() {
        let m = make_lsv2(3.0).unwrap();
        let rs = ReturnStructure::find(&m).unwrap();
        let mut rng = stream(5, Purpose::Dynamics, 0);
        let mut x = rs.sample_uniform(&mut rng);
        let mut seen = std::collections::HashSet::new();
        let mut long = [0u32; 2];
        for _ in 0..1_000_000 {
            assert!(seen.insert(x.to_bits()));
            let r = rs.first_return_dithered(&m, x, None, &mut rng).unwrap();
            if r.phi > 1e8 {
                long[r.side as usize] += 1;
            }
            x = r.point;
        }
        // about 730 per side
        let (a, b) = (long[0] as f64, long[1] as f64);
        assert!((a - b).abs() < 4.0 * (a + b).sqrt(), "{long:?}");
    }

    #[test]
    fn zero_dither_is_the_plain_return() {
        let m = make_lsv2(3.0).unwrap();
        let rs = ReturnStructure::find(&m).unwrap();
        let mut rng = stream(6, Purpose::Dynamics, 0);
        for _ in 0..1000 {
            let x = rs.sample_uniform(&mut rng);
            let a = rs.first_return(&m, x, None).unwrap();
            let b = rs.first_return_at(&m, x, None, 0.0).unwrap();
            assert_eq!(a, b);
            // short excursions are exact, so dithering cannot move them
            let c = rs.first_return_dithered(&m, x, None, &mut rng).unwrap();
            if a.phi < 1e6 {
                assert_eq!(a.phi, c.phi);
                assert!((a.point - c.point).abs() < 1e-9);
            }
        }
    }
}

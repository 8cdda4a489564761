//! Tightness moduli and the occupation functional.

use super::{dist, CadlagPath};
use crate::error::{invalid, LabError, Result};
use crate::scalar::Real;

/// Precomputed data for evaluating the moduli of one path at many `delta`.
///
/// * `which = 1`: `sup_{0 <= t <= delta} |x_t - x_0|`
/// * `which = 2`: `sup_{T - delta <= t <= T} |x_T - x_t|`
/// * `which = 3`: `sup |x_t - x_t'| ^ |x_t'' - x_t|` over
///   `t - delta <= t' < t < t'' <= t + delta` inside `[0, T]`
///
/// The third modulus is implemented for step paths only: on each segment the
/// left term is nonincreasing and the right term nondecreasing in `t`, so the
/// supremum is attained at a segment start or at a time `s_j +- delta`, and
/// there are at most three such times per breakpoint.
pub struct Modulus<'a, F> {
    path: &'a CadlagPath<F>,
    times: Vec<f64>,
    horizon: f64,
    // sparse tables of range minima and maxima for scalar step paths
    mins: Vec<Vec<f64>>,
    maxs: Vec<Vec<f64>>,
}

impl<'a, F: Real> Modulus<'a, F> {
    pub fn new(path: &'a CadlagPath<F>) -> Self {
        let times: Vec<f64> = path.times().iter().map(|t| t.as_f64()).collect();
        let (mut mins, mut maxs) = (Vec::new(), Vec::new());
        if path.dim() == 1 && path.is_step() {
            let v: Vec<f64> = path.raw_values().iter().map(|x| x.as_f64()).collect();
            mins.push(v.clone());
            maxs.push(v);
            let mut w = 1;
            while 2 * w <= times.len() {
                let (pm, px) = (mins.last().unwrap(), maxs.last().unwrap());
                let m: Vec<f64> = (0..pm.len() - w).map(|i| pm[i].min(pm[i + w])).collect();
                let x: Vec<f64> = (0..px.len() - w).map(|i| px[i].max(px[i + w])).collect();
                mins.push(m);
                maxs.push(x);
                w *= 2;
            }
        }
        Self { path, times, horizon: path.horizon().as_f64(), mins, maxs }
    }

    fn check_delta(&self, delta: f64) -> Result<()> {
        if !(delta > 0.0 && delta <= self.horizon) {
            return Err(invalid(format!("delta must lie in (0, T], got {delta}")));
        }
        Ok(())
    }

    pub fn eval(&self, delta: f64, which: u8) -> Result<F> {
        match which {
            1 => self.initial(delta),
            2 => self.terminal(delta),
            3 => self.two_sided(delta),
            _ => Err(invalid(format!("modulus index must be 1, 2 or 3, got {which}"))),
        }
    }

    pub fn initial(&self, delta: f64) -> Result<F> {
        self.check_delta(delta)?;
        let p = self.path;
        let x0 = p.segment_value(0).to_vec();
        let mut m = F::zero();
        for i in 0..self.times.len() {
            if self.times[i] > delta {
                break;
            }
            m = m.max(dist(p.segment_value(i), &x0));
            if !p.is_step() {
                let end = self.times.get(i + 1).copied().unwrap_or(self.horizon).min(delta);
                m = m.max(dist(&p.left_limit_in(i, F::lit(end)), &x0));
            }
        }
        Ok(m)
    }

    pub fn terminal(&self, delta: f64) -> Result<F> {
        self.check_delta(delta)?;
        let p = self.path;
        let xt = p.eval(p.horizon());
        let from = F::lit(self.horizon - delta);
        let first = p.segment_index(from);
        let mut m = dist(&p.eval(from), &xt);
        for i in first..self.times.len() {
            if i > first {
                m = m.max(dist(p.segment_value(i), &xt));
            }
            if !p.is_step() {
                m = m.max(dist(&p.segment_end_value(i), &xt));
            }
        }
        Ok(m)
    }

    fn range_spread(&self, lo: usize, hi: usize, k: usize) -> f64 {
        // max_{j in [lo, hi]} |v_k - v_j|
        if lo > hi {
            return 0.0;
        }
        if !self.mins.is_empty() {
            let len = hi - lo + 1;
            let lvl = (usize::BITS - 1 - len.leading_zeros()) as usize;
            let w = 1usize << lvl;
            let mn = self.mins[lvl][lo].min(self.mins[lvl][hi + 1 - w]);
            let mx = self.maxs[lvl][lo].max(self.maxs[lvl][hi + 1 - w]);
            let v = self.mins[0][k];
            return (v - mn).max(mx - v);
        }
        let vk = self.path.segment_value(k);
        (lo..=hi).fold(0.0, |m, j| m.max(dist(vk, self.path.segment_value(j)).as_f64()))
    }

    /// Largest index `i` with `pred(i)`, for a predicate true on a prefix.
    fn last_true(&self, pred: impl Fn(f64) -> bool) -> Option<usize> {
        let n = self.times.partition_point(|&s| pred(s));
        n.checked_sub(1)
    }

    pub fn two_sided(&self, delta: f64) -> Result<F> {
        self.check_delta(delta)?;
        if !self.path.is_step() {
            return Err(LabError::Unsupported("two-sided modulus of an affine path".into()));
        }
        let s = &self.times;
        let t_end = self.horizon;
        let m = s.len();
        let mut best = 0.0f64;
        let mut consider = |j_lo: usize, k: usize, l_hi: usize| {
            let left = self.range_spread(j_lo, k, k);
            if left <= best {
                return;
            }
            let right = self.range_spread(k, l_hi, k);
            best = best.max(left.min(right));
        };
        for b in 0..m {
            let sb = s[b];
            // t = s_b
            if sb > 0.0 && sb < t_end {
                let j = self.last_true(|x| sb - x >= delta).unwrap_or(0);
                let l = self.last_true(|x| x - sb <= delta).unwrap();
                consider(j, b, l);
            }
            // t = s_b - delta, so that t + delta = s_b
            if sb - delta > 0.0 {
                let k = self.last_true(|x| sb - x >= delta).unwrap();
                let j = self.last_true(|x| sb - x >= 2.0 * delta).unwrap_or(0);
                consider(j, k, b);
            }
            // t = s_b + delta, so that t - delta = s_b
            if t_end - sb > delta {
                let k = self.last_true(|x| x - sb <= delta).unwrap();
                let l = self.last_true(|x| x - sb <= 2.0 * delta).unwrap();
                consider(b, k, l);
            }
        }
        Ok(F::lit(best))
    }
}

impl<F: Real> CadlagPath<F> {
    /// Value of segment `i` extended to time `t` (a left limit when `t` is
    /// the segment end).
    pub(crate) fn left_limit_in(&self, i: usize, t: F) -> Vec<F> {
        let v = self.segment_value(i);
        match self.segment_slope(i) {
            None => v.to_vec(),
            Some(sl) => v.iter().zip(sl).map(|(&a, &b)| a + b * (t - self.times()[i])).collect(),
        }
    }
}

/// `Delta_delta^(which)(x)` for `which` in `{1, 2, 3}` and `delta` in `(0, T]`.
pub fn modulus<F: Real>(x: &CadlagPath<F>, delta: f64, which: u8) -> Result<F> {
    Modulus::new(x).eval(delta, which)
}

/// Lebesgue measure of `{s in [0, 1] : x_s^(component) > 0}`, with the path
/// continued as a constant past its horizon.
pub fn occupation_fraction<F: Real>(x: &CadlagPath<F>, component: usize) -> Result<F> {
    if component >= x.dim() {
        return Err(LabError::DimensionMismatch { left: component, right: x.dim() });
    }
    let times = x.times();
    let horizon = x.horizon().as_f64();
    let mut total = 0.0f64;
    for i in 0..times.len() {
        let a = times[i].as_f64();
        let b = times.get(i + 1).map(|t| t.as_f64()).unwrap_or(horizon);
        let (a, b) = (a.min(1.0), b.min(1.0));
        if b <= a {
            continue;
        }
        let v = x.segment_value(i)[component].as_f64();
        let slope = x.segment_slope(i).map(|s| s[component].as_f64()).unwrap_or(0.0);
        total += positive_length(v, slope, times[i].as_f64(), a, b);
    }
    if horizon < 1.0 {
        let last = x.eval(x.horizon());
        if last[component] > F::zero() {
            total += 1.0 - horizon;
        }
    }
    Ok(F::lit(total.clamp(0.0, 1.0)))
}

/// Length of `{t in [a, b] : v + slope (t - t0) > 0}`.
fn positive_length(v: f64, slope: f64, t0: f64, a: f64, b: f64) -> f64 {
    if slope == 0.0 {
        return if v > 0.0 { b - a } else { 0.0 };
    }
    let root = t0 - v / slope;
    if slope > 0.0 {
        (b - root.clamp(a, b)).max(0.0)
    } else {
        (root.clamp(a, b) - a).max(0.0)
    }
}

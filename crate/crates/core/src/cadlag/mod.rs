//! Finitely represented cadlag paths on `[0, T]` with values in `R^d`, the
//! Skorohod J1 distances, the tightness moduli and the occupation functional.
//!
//! A path is a list of breakpoints `0 = t_0 < t_1 < ... < t_m <= T`; on
//! `[t_i, t_{i+1})` (with `t_{m+1} = T`) it is constant, or affine when
//! slopes are present. A final breakpoint `t_m = T` gives a degenerate last
//! segment that carries the value at `T`, which is how a jump at the
//! horizon is stored. Beyond `T` paths are continued as constants. Norms on
//! `R^d` are Euclidean.

mod j1;
mod modulus;

pub use j1::{j1_distance, j1_distance_infinite, J1Infinite, DEFAULT_S_CUT};
pub use modulus::{modulus, occupation_fraction, Modulus};

use crate::error::{invalid, LabError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath<F> {
    dim: usize,
    horizon: F,
    times: Vec<F>,
    values: Vec<F>,
    slopes: Option<Vec<F>>,
}

pub(crate) fn norm<F: Real>(v: &[F]) -> F {
    if v.len() == 1 {
        return v[0].abs();
    }
    v.iter().fold(F::zero(), |acc, &x| acc + x * x).sqrt()
}

pub(crate) fn dist<F: Real>(a: &[F], b: &[F]) -> F {
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt()
}

impl<F: Real> CadlagPath<F> {
    fn validate(dim: usize, horizon: F, times: &[F], values: &[F], slopes: Option<&[F]>) -> Result<()> {
        if dim == 0 {
            return Err(invalid("path dimension must be at least 1"));
        }
        if !(horizon > F::zero() && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive and finite, got {horizon}")));
        }
        if times.is_empty() {
            return Err(LabError::Empty("path needs at least one breakpoint"));
        }
        if times[0] != F::zero() {
            return Err(invalid("first breakpoint must be 0"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("breakpoints must be strictly increasing"));
        }
        if !(*times.last().unwrap() <= horizon) {
            return Err(invalid("breakpoints must not exceed the horizon"));
        }
        if values.len() != times.len() * dim {
            return Err(LabError::DimensionMismatch { left: values.len(), right: times.len() * dim });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("path values must be finite"));
        }
        if let Some(s) = slopes {
            if s.len() != values.len() {
                return Err(LabError::DimensionMismatch { left: s.len(), right: values.len() });
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(invalid("path slopes must be finite"));
            }
        }
        Ok(())
    }

    /// Piecewise-constant path; `values` holds one row of length `dim` per
    /// breakpoint.
    pub fn step(dim: usize, horizon: F, times: Vec<F>, values: Vec<F>) -> Result<Self> {
        Self::validate(dim, horizon, &times, &values, None)?;
        Ok(Self { dim, horizon, times, values, slopes: None })
    }

    /// Piecewise-affine path: on segment `i` the value is
    /// `values[i] + slopes[i] (t - t_i)`.
    pub fn affine(dim: usize, horizon: F, times: Vec<F>, values: Vec<F>, slopes: Vec<F>) -> Result<Self> {
        Self::validate(dim, horizon, &times, &values, Some(&slopes))?;
        Ok(Self { dim, horizon, times, values, slopes: Some(slopes) })
    }

    pub fn constant(horizon: F, value: &[F]) -> Result<Self> {
        Self::step(value.len(), horizon, vec![F::zero()], value.to_vec())
    }

    /// Scalar step path from jump times and the values after each jump.
    pub fn step_1d(horizon: F, times: &[F], values: &[F]) -> Result<Self> {
        Self::step(1, horizon, times.to_vec(), values.to_vec())
    }

    /// Partial sum process `t -> (S_{floor(tn)} - (floor(tn)/n) A) / B` on
    /// `[0, 1]` from `sums = S_0, ..., S_n` (rows of length `dim`, flattened).
    pub fn from_partial_sums(dim: usize, sums: &[F], b: F, a: &[F]) -> Result<Self> {
        if dim == 0 || sums.len() < 2 * dim || sums.len() % dim != 0 {
            return Err(LabError::Empty("partial sums need S_0 and at least one more term"));
        }
        if a.len() != dim {
            return Err(LabError::DimensionMismatch { left: a.len(), right: dim });
        }
        if !(b > F::zero()) {
            return Err(invalid(format!("scaling B must be positive, got {b}")));
        }
        if sums[..dim].iter().any(|&s| s != F::zero()) {
            return Err(invalid("partial sums must start at S_0 = 0"));
        }
        let n = sums.len() / dim - 1;
        let nf = F::lit(n as f64);
        let mut times = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity((n + 1) * dim);
        for k in 0..=n {
            let kf = F::lit(k as f64);
            times.push(if k == n { F::one() } else { kf / nf });
            let frac = kf / nf;
            for c in 0..dim {
                values.push((sums[k * dim + c] - frac * a[c]) / b);
            }
        }
        Self::step(dim, F::one(), times, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> F {
        self.horizon
    }

    pub fn times(&self) -> &[F] {
        &self.times
    }

    pub fn is_step(&self) -> bool {
        self.slopes.is_none()
    }

    /// Number of breakpoints, including a degenerate terminal one.
    pub fn breakpoints(&self) -> usize {
        self.times.len()
    }

    /// Number of segments of positive length.
    pub fn segment_count(&self) -> usize {
        if *self.times.last().unwrap() == self.horizon {
            self.times.len() - 1
        } else {
            self.times.len()
        }
    }

    /// Value at the start of segment `i`.
    pub fn segment_value(&self, i: usize) -> &[F] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn segment_slope(&self, i: usize) -> Option<&[F]> {
        self.slopes.as_ref().map(|s| &s[i * self.dim..(i + 1) * self.dim])
    }

    pub(crate) fn raw_values(&self) -> &[F] {
        &self.values
    }

    /// Index of the segment containing `t` (the last breakpoint `<= t`).
    pub fn segment_index(&self, t: F) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    fn eval_segment_into(&self, i: usize, t: F, out: &mut [F]) {
        let v = self.segment_value(i);
        match self.segment_slope(i) {
            None => out.copy_from_slice(v),
            Some(s) => {
                let dt = t - self.times[i];
                for c in 0..self.dim {
                    out[c] = v[c] + s[c] * dt;
                }
            }
        }
    }

    /// Value at `t`; times beyond the horizon see the value at the horizon.
    pub fn eval(&self, t: F) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        self.eval_into(t, &mut out);
        out
    }

    pub fn eval_into(&self, t: F, out: &mut [F]) {
        let t = if t > self.horizon { self.horizon } else { t };
        let t = if t < F::zero() { F::zero() } else { t };
        let i = self.segment_index(t);
        self.eval_segment_into(i, t, out);
    }

    /// Left limit at `t > 0` (the value at 0 for `t = 0`).
    pub fn left_limit(&self, t: F) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        let t = if t > self.horizon { self.horizon } else { t };
        let i = self.times.partition_point(|&s| s < t).saturating_sub(1);
        self.eval_segment_into(i, t, &mut out);
        out
    }

    /// Value at the end of segment `i`, approached from the left.
    pub(crate) fn segment_end_value(&self, i: usize) -> Vec<F> {
        let end = if i + 1 < self.times.len() { self.times[i + 1] } else { self.horizon };
        let mut out = vec![F::zero(); self.dim];
        self.eval_segment_into(i, end, &mut out);
        out
    }

    /// Jumps `(time, size)` with positive size, at breakpoints in `(0, T]`.
    pub fn jumps(&self) -> Vec<(F, F)> {
        let mut out = Vec::new();
        for i in 1..self.times.len() {
            let before = self.segment_end_value(i - 1);
            let size = dist(&before, self.segment_value(i));
            if size > F::zero() {
                out.push((self.times[i], size));
            }
        }
        out
    }

    pub fn largest_jump(&self) -> F {
        self.jumps().into_iter().fold(F::zero(), |m, (_, s)| m.max(s))
    }

    /// `sup_{t <= T} |x_t|`.
    pub fn sup_norm(&self) -> F {
        let mut m = F::zero();
        for i in 0..self.times.len() {
            m = m.max(norm(self.segment_value(i)));
            if !self.is_step() {
                m = m.max(norm(&self.segment_end_value(i)));
            }
        }
        m
    }

    /// Scalar component `c` as a path.
    pub fn component(&self, c: usize) -> Result<Self> {
        if c >= self.dim {
            return Err(LabError::DimensionMismatch { left: c, right: self.dim });
        }
        let pick = |v: &Vec<F>| v.iter().skip(c).step_by(self.dim).copied().collect::<Vec<_>>();
        Ok(Self {
            dim: 1,
            horizon: self.horizon,
            times: self.times.clone(),
            values: pick(&self.values),
            slopes: self.slopes.as_ref().map(pick),
        })
    }

    /// The path on `[0, s]`. For `s` beyond the horizon the path is continued
    /// as a constant.
    pub fn restrict(&self, s: F) -> Result<Self> {
        if !(s > F::zero() && s.is_finite()) {
            return Err(invalid(format!("restriction horizon must be positive, got {s}")));
        }
        let d = self.dim;
        if s > self.horizon {
            let mut out = self.clone();
            out.horizon = s;
            let last = self.times.len() - 1;
            if !self.is_step() && self.times[last] < self.horizon {
                // freeze the affine tail at its value at the old horizon
                let v = self.segment_end_value(last);
                out.times.push(self.horizon);
                out.values.extend_from_slice(&v);
                out.slopes.as_mut().unwrap().extend(std::iter::repeat(F::zero()).take(d));
            } else if let Some(sl) = out.slopes.as_mut() {
                for x in &mut sl[last * d..] {
                    *x = F::zero();
                }
            }
            return Ok(out);
        }
        let keep = self.times.partition_point(|&t| t < s);
        let mut times = self.times[..keep].to_vec();
        let mut values = self.values[..keep * d].to_vec();
        let mut slopes = self.slopes.as_ref().map(|sl| sl[..keep * d].to_vec());
        if keep < self.times.len() && self.times[keep] == s {
            // a breakpoint sits exactly at the new horizon
            times.push(s);
            values.extend_from_slice(self.segment_value(keep));
            if let Some(sl) = slopes.as_mut() {
                sl.extend(std::iter::repeat(F::zero()).take(d));
            }
        }
        Ok(Self { dim: d, horizon: s, times, values, slopes })
    }

    /// The composition `x o lambda` for a step path.
    pub fn compose(&self, lambda: &TimeChange<F>) -> Result<Self> {
        if !self.is_step() {
            return Err(LabError::Unsupported("time change of an affine path".into()));
        }
        if lambda.horizon() != self.horizon {
            return Err(invalid("time change and path must share the horizon"));
        }
        let times = self.times.iter().map(|&u| lambda.inverse(u)).collect::<Vec<_>>();
        let mut times = times;
        // the inverse fixes 0 and T exactly; guard rounding elsewhere
        times[0] = F::zero();
        if *self.times.last().unwrap() == self.horizon {
            *times.last_mut().unwrap() = self.horizon;
        }
        Self::step(self.dim, self.horizon, times, self.values.clone())
    }

    /// CSV with columns `t, v1, ..., vd`, one row per breakpoint.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|c| format!("v{c}")));
        w.write_record(&header).expect("in-memory write");
        for i in 0..self.times.len() {
            let mut row = vec![self.times[i].to_string()];
            row.extend(self.segment_value(i).iter().map(|v| v.to_string()));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Supremum distance `sup_{t <= T} |x_t - y_t|` over the shorter horizon.
pub fn sup_distance<F: Real>(x: &CadlagPath<F>, y: &CadlagPath<F>) -> Result<F> {
    if x.dim != y.dim {
        return Err(LabError::DimensionMismatch { left: x.dim, right: y.dim });
    }
    let s = x.horizon.min(y.horizon);
    let mut grid: Vec<F> = x.times.iter().chain(y.times.iter()).copied().filter(|&t| t <= s).collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let mut m = F::zero();
    let affine = !x.is_step() || !y.is_step();
    for (k, &t) in grid.iter().enumerate() {
        m = m.max(dist(&x.eval(t), &y.eval(t)));
        if affine {
            let end = grid.get(k + 1).copied().unwrap_or(s);
            if end > t {
                m = m.max(dist(&x.left_limit(end), &y.left_limit(end)));
            }
        }
    }
    m = m.max(dist(&x.eval(s), &y.eval(s)));
    Ok(m)
}

/// Increasing piecewise-linear homeomorphism of `[0, T]` through the knots
/// `(t_k, lambda(t_k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChange<F> {
    t: Vec<F>,
    u: Vec<F>,
}

impl<F: Real> TimeChange<F> {
    /// Knots must include `(0, 0)` and `(T, T)` and increase strictly in both
    /// coordinates.
    pub fn new(t: Vec<F>, u: Vec<F>) -> Result<Self> {
        if t.len() < 2 || t.len() != u.len() {
            return Err(invalid("time change needs at least two matching knots"));
        }
        let last = t.len() - 1;
        if t[0] != F::zero() || u[0] != F::zero() || t[last] != u[last] || !(t[last] > F::zero()) {
            return Err(invalid("time change must fix 0 and the horizon"));
        }
        if t.windows(2).any(|w| !(w[0] < w[1])) || u.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("time change must be strictly increasing"));
        }
        Ok(Self { t, u })
    }

    pub fn identity(horizon: F) -> Result<Self> {
        Self::new(vec![F::zero(), horizon], vec![F::zero(), horizon])
    }

    pub fn horizon(&self) -> F {
        *self.t.last().unwrap()
    }

    fn interp(xs: &[F], ys: &[F], x: F) -> F {
        let last = xs.len() - 1;
        if x <= xs[0] {
            return ys[0];
        }
        if x >= xs[last] {
            return ys[last];
        }
        let k = xs.partition_point(|&s| s <= x) - 1;
        if x == xs[k] {
            return ys[k];
        }
        ys[k] + (ys[k + 1] - ys[k]) * (x - xs[k]) / (xs[k + 1] - xs[k])
    }

    pub fn eval(&self, t: F) -> F {
        Self::interp(&self.t, &self.u, t)
    }

    pub fn inverse(&self, u: F) -> F {
        Self::interp(&self.u, &self.t, u)
    }

    /// `sup |lambda(t) - t|`, attained at a knot.
    pub fn sup_deviation(&self) -> F {
        self.t.iter().zip(&self.u).fold(F::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

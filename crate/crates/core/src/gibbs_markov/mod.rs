//! Gibbs-Markov interval systems, observables and the pathwise
//! inequalities of the cylinder structure.
//!
//! The concrete systems are full-branch affine maps preserving Lebesgue
//! measure, so their symbol sequences are i.i.d. under the invariant law.
//! Typical orbits are generated backwards: draw the symbols `k_0..k_{n-1}`
//! and `x_n` from the invariant law, then set `x_j = v_{k_j}(x_{j+1})`.
//! Forward iteration in floating point loses one mantissa bit per unit of
//! expansion (the dyadic map reaches its fixed point after about 53 doublings),
//! while the inverse branches contract and keep the orbit accurate.

mod dyadic;
mod heavy;
mod markov;

pub use dyadic::DyadicRenewalMap;
pub use heavy::HeavyBernoulliShift;
pub use markov::MarkovModulatedShift;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::stable_laws::TailModel;

/// Scalar observables of the provided systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    /// `x^(-1/alpha)`, with `mu(f > t) = t^-alpha` under Lebesgue measure.
    Power {
        alpha: f64,
    },
    /// `scale * (symbol of the cylinder containing x)`.
    Symbol {
        scale: i64,
    },
    Constant {
        value: f64,
    },
}

impl Observable {
    pub fn eval(&self, x: f64, symbol: i64) -> f64 {
        match *self {
            Observable::Power { alpha } => x.powf(-1.0 / alpha),
            Observable::Symbol { scale } => (scale * symbol) as f64,
            Observable::Constant { value } => value,
        }
    }

    /// Integer value, for observables that drive a Z-extension.
    pub fn integer_value(&self, symbol: i64) -> Option<i64> {
        match *self {
            Observable::Symbol { scale } => scale.checked_mul(symbol),
            Observable::Constant { value } if value.fract() == 0.0 && value.abs() < 9.0e15 => Some(value as i64),
            _ => None,
        }
    }

    pub fn is_integer_valued(&self) -> bool {
        match *self {
            Observable::Symbol { .. } => true,
            Observable::Constant { value } => value.fract() == 0.0,
            Observable::Power { .. } => false,
        }
    }
}

/// Separation time `s(x, y) = inf{n >= 1 : xi_n(x) != xi_n(y)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationTime {
    Exact(u32),
    AtLeast(u32),
}

impl SeparationTime {
    /// `d_theta(x, y) = theta^s`, with the capped case as an upper bound.
    pub fn distance(&self, theta: f64) -> f64 {
        match *self {
            SeparationTime::Exact(s) | SeparationTime::AtLeast(s) => theta.powi(s as i32),
        }
    }
}

/// An orbit `x_0, ..., x_n` with the symbols of `x_0, ..., x_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub points: Vec<f64>,
    pub symbols: Vec<i64>,
}

/// Initial law of an orbit.
#[derive(Clone, Copy)]
pub enum InitialLaw<'a> {
    Invariant,
    /// Density with respect to the invariant law, bounded by `bound`.
    Density {
        density: &'a (dyn Fn(f64) -> f64 + Sync),
        bound: f64,
    },
}

impl std::fmt::Debug for InitialLaw<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialLaw::Invariant => f.write_str("Invariant"),
            InitialLaw::Density { bound, .. } => write!(f, "Density {{ bound: {bound} }}"),
        }
    }
}

/// A Gibbs-Markov map on an interval with full affine branches.
pub trait GibbsMarkov: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &'static str;

    /// Base of the symbolic metric `d_theta`.
    fn theta(&self) -> f64 {
        0.5
    }

    /// Distortion constant `R`.
    fn distortion_bound(&self) -> f64;

    /// Big-image constant: a lower bound for `mu(T Z)` over all cylinders.
    fn big_image(&self) -> f64;

    /// Symbol of the rank-one cylinder containing `x`; boundary points and
    /// points outside the domain are rejected.
    fn symbol_of(&self, x: f64) -> Result<i64>;

    /// Closure `[lo, hi]` of the rank-one cylinder of `symbol`.
    fn cylinder(&self, symbol: i64) -> Result<(f64, f64)>;

    /// `T` restricted to the cylinder of `symbol`.
    fn branch(&self, symbol: i64, x: f64) -> f64;

    /// Inverse branch `v_Z` from the whole space onto the cylinder.
    fn inverse_branch(&self, symbol: i64, y: f64) -> f64;

    /// Invariant measure of the interval `[lo, hi]`.
    fn measure(&self, lo: f64, hi: f64) -> f64 {
        (hi - lo).max(0.0)
    }

    fn sample_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> i64
    where
        Self: Sized;

    /// A draw from the invariant law (Lebesgue on the domain).
    fn sample_invariant<R: Rng + ?Sized>(&self, rng: &mut R) -> f64
    where
        Self: Sized;

    /// Per-cylinder Lipschitz constant `D_Z(f)` with respect to `d_theta`.
    fn lipschitz(&self, f: &Observable, symbol: i64) -> Result<f64>;

    /// Tail model of `f` under the invariant law.
    fn tail(&self, f: &Observable) -> Result<TailModel<f64>>;

    /// Mean of `f` under the invariant law, when finite.
    fn mean(&self, f: &Observable) -> Result<f64>;

    fn apply(&self, x: f64) -> Result<f64> {
        let k = self.symbol_of(x)?;
        Ok(self.branch(k, x))
    }

    /// A typical orbit of length `n + 1`, built backwards.
    fn sample_orbit<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Orbit
    where
        Self: Sized,
    {
        let symbols: Vec<i64> = (0..n).map(|_| self.sample_symbol(rng)).collect();
        let mut points = vec![0.0; n + 1];
        points[n] = self.sample_invariant(rng);
        for j in (0..n).rev() {
            points[j] = self.inverse_branch(symbols[j], points[j + 1]);
        }
        Orbit { points, symbols }
    }

    /// Orbit whose initial point has the given law; densities are handled by
    /// rejection on the whole orbit, so the orbit stays exact.
    fn sample_orbit_from<R: Rng + ?Sized>(&self, law: InitialLaw<'_>, n: usize, rng: &mut R) -> Result<Orbit>
    where
        Self: Sized,
    {
        match law {
            InitialLaw::Invariant => Ok(self.sample_orbit(n, rng)),
            InitialLaw::Density { density, bound } => {
                if !(bound > 0.0 && bound.is_finite()) {
                    return Err(invalid("initial density needs a finite positive bound"));
                }
                for _ in 0..1_000_000 {
                    let orbit = self.sample_orbit(n, rng);
                    let u: f64 = rng.random();
                    if u * bound < density(orbit.points[0]) {
                        return Ok(orbit);
                    }
                }
                Err(invalid("initial density rejected a million proposals"))
            }
        }
    }
}

/// Forward orbit `x, Tx, ..., T^n x`.
pub fn iterate<S: GibbsMarkov>(sys: &S, x: f64, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(x);
    let mut cur = x;
    for _ in 0..n {
        cur = sys.apply(cur)?;
        out.push(cur);
    }
    Ok(out)
}

/// `S_n(f)(x) = sum_{k<n} f(T^k x)` along the forward orbit.
pub fn ergodic_sum<S: GibbsMarkov>(sys: &S, f: &Observable, x: f64, n: usize) -> Result<f64> {
    let mut cur = x;
    let mut sum = 0.0;
    for _ in 0..n {
        let k = sys.symbol_of(cur)?;
        sum += f.eval(cur, k);
        cur = sys.branch(k, cur);
    }
    Ok(sum)
}

/// Ergodic sums `S_0, ..., S_n` along a precomputed orbit.
pub fn orbit_sums(f: &Observable, orbit: &Orbit) -> Vec<f64> {
    let mut out = Vec::with_capacity(orbit.symbols.len() + 1);
    let mut s = 0.0;
    out.push(0.0);
    for (x, &k) in orbit.points.iter().zip(&orbit.symbols) {
        s += f.eval(*x, k);
        out.push(s);
    }
    out
}

pub fn separation_time<S: GibbsMarkov>(sys: &S, x: f64, y: f64, n_max: u32) -> Result<SeparationTime> {
    let (mut a, mut b) = (x, y);
    for j in 0..n_max {
        let ka = sys.symbol_of(a)?;
        let kb = sys.symbol_of(b)?;
        if ka != kb {
            return Ok(SeparationTime::Exact(j + 1));
        }
        if j + 1 == n_max {
            break;
        }
        a = sys.branch(ka, a);
        b = sys.branch(kb, b);
    }
    Ok(SeparationTime::AtLeast(n_max))
}

/// `theta_f(x) = D_{xi(x)}(f)`.
pub fn theta_f<S: GibbsMarkov>(sys: &S, f: &Observable, x: f64) -> Result<f64> {
    sys.lipschitz(f, sys.symbol_of(x)?)
}

/// `theta_{f,n}(x) = sum_{k<n} theta^{n-k} theta_f(T^k x)`.
pub fn theta_f_n<S: GibbsMarkov>(sys: &S, f: &Observable, x: f64, n: usize) -> Result<f64> {
    let th = sys.theta();
    let mut cur = x;
    let mut total = 0.0;
    for k in 0..n {
        let sym = sys.symbol_of(cur)?;
        total += th.powi((n - k) as i32) * sys.lipschitz(f, sym)?;
        cur = sys.branch(sym, cur);
    }
    Ok(total)
}

/// `theta_{f,n}` along a precomputed orbit, for every `n <= len`:
/// `out[n] = theta * (out[n-1] + D_{k_{n-1}}(f))`.
pub fn orbit_theta_f_n<S: GibbsMarkov>(sys: &S, f: &Observable, orbit: &Orbit) -> Result<Vec<f64>> {
    let th = sys.theta();
    let mut out = Vec::with_capacity(orbit.symbols.len() + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for &k in &orbit.symbols {
        acc = th * (acc + sys.lipschitz(f, k)?);
        out.push(acc);
    }
    Ok(out)
}

/// Point of the cylinder `[w_0, ..., w_{n-1}]` with `T^n`-image `y`, and its
/// forward orbit.
fn point_in_word<S: GibbsMarkov>(sys: &S, word: &[i64], y: f64) -> Vec<f64> {
    let n = word.len();
    let mut pts = vec![0.0; n + 1];
    pts[n] = y;
    for j in (0..n).rev() {
        pts[j] = sys.inverse_branch(word[j], pts[j + 1]);
    }
    pts
}

/// Checks `|S_n f(x) - S_n f(y)| <= theta_{f,n}(Z)` on `pairs` random pairs
/// from the rank-`n` cylinder `Z = [word]`; returns the number of violations.
pub fn oscillation_check<S: GibbsMarkov, R: Rng + ?Sized>(
    sys: &S,
    f: &Observable,
    word: &[i64],
    pairs: usize,
    rng: &mut R,
) -> Result<usize> {
    if word.is_empty() {
        return Err(LabError::Empty("oscillation_check needs a nonempty word"));
    }
    if pairs == 0 {
        return Err(invalid("oscillation_check needs at least one pair"));
    }
    let n = word.len();
    let th = sys.theta();
    let mut bound = 0.0;
    for (k, &w) in word.iter().enumerate() {
        bound += th.powi((n - k) as i32) * sys.lipschitz(f, w)?;
    }
    let sum = |pts: &[f64]| -> f64 { word.iter().enumerate().map(|(k, &w)| f.eval(pts[k], w)).sum() };
    let mut violations = 0;
    for _ in 0..pairs {
        let a = point_in_word(sys, word, sys.sample_invariant(rng));
        let b = point_in_word(sys, word, sys.sample_invariant(rng));
        let (sa, sb) = (sum(&a), sum(&b));
        let rounding = 1e-12 * (sa.abs() + sb.abs());
        if (sa - sb).abs() > bound + rounding {
            violations += 1;
        }
    }
    Ok(violations)
}

/// Largest observed `|log|` of the ratio between
/// `mu(Z cap T^-n E) / mu(Z)` and `mu(T^n Z cap E) / mu(T^n Z)` over random
/// rank-`n` cylinders `Z` and intervals `E`; bounded distortion asserts it
/// never exceeds `R`.
pub fn distortion_check<S: GibbsMarkov, R: Rng + ?Sized>(sys: &S, n: usize, trials: usize, rng: &mut R) -> Result<f64> {
    if n == 0 {
        return Err(invalid("distortion_check needs n >= 1"));
    }
    // both provided systems live on the unit interval
    let (dom_lo, dom_hi) = (0.0, 1.0);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let word: Vec<i64> = (0..n).map(|_| sys.sample_symbol(rng)).collect();
        let u: f64 = rng.random_range(dom_lo..dom_hi);
        let v: f64 = rng.random_range(dom_lo..dom_hi);
        let (e_lo, e_hi) = if u < v { (u, v) } else { (v, u) };
        if e_hi <= e_lo {
            continue;
        }
        // full branches: T^n Z is the whole domain
        let img = sys.measure(dom_lo, dom_hi);
        let rhs = sys.measure(e_lo, e_hi) / img;
        let z_a = point_in_word(sys, &word, dom_lo)[0];
        let z_b = point_in_word(sys, &word, dom_hi)[0];
        let p_a = point_in_word(sys, &word, e_lo)[0];
        let p_b = point_in_word(sys, &word, e_hi)[0];
        let mz = sys.measure(z_a.min(z_b), z_a.max(z_b));
        let me = sys.measure(p_a.min(p_b), p_a.max(p_b));
        if mz <= 0.0 || me <= 0.0 {
            continue;
        }
        worst = worst.max(((me / mz) / rhs).ln().abs());
    }
    Ok(worst)
}

/// A point drawn from the initial law; boundary points have probability zero.
pub fn sample_initial<S: GibbsMarkov, R: Rng + ?Sized>(sys: &S, law: InitialLaw<'_>, rng: &mut R) -> Result<f64> {
    Ok(sys.sample_orbit_from(law, 0, rng)?.points[0])
}

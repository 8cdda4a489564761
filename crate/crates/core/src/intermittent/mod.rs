//! Two-cusp intermittent maps of the unit interval, their first-return
//! structure on `Y = (y0, y1)` and the heavy-tailed excursion times.
//!
//! The concrete family mirrors the Liverani-Saussol-Vaienti map at both
//! endpoints:
//! `T x = x (1 + (2x)^p)` on `Z0 = (0, 1/2)` and
//! `T x = 1 - (1 - x)(1 + (2(1 - x))^p)` on `Z1 = (1/2, 1)`,
//! so `r_j(x) = 2^p x^(1+p)` exactly near each neutral fixed point and
//! `T(1 - x) = 1 - T x`.

mod excursions;
mod returns;

pub use excursions::{
    disjointness_violations, excursion_tail_estimate, induced_distortion, ExcursionTails, SideTail, TailMode,
};
pub use returns::{FirstReturn, ReturnStructure, DEFAULT_CAP};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::numeric::integrate;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntermittentMap<F> {
    p: F,
    kappa: F,
}

/// The mirrored LSV map with cusp exponent `p`.
pub fn make_lsv2<F: Real>(p: F) -> Result<IntermittentMap<F>> {
    IntermittentMap::new(p)
}

impl<F: Real> IntermittentMap<F> {
    pub fn new(p: F) -> Result<Self> {
        if !(p > F::zero() && p.is_finite()) {
            return Err(invalid(format!("cusp exponent must be positive, got {p}")));
        }
        Ok(Self { p, kappa: F::two().powf(p) })
    }

    pub fn p(&self) -> F {
        self.p
    }

    /// `kappa_j`: `r_j(x) ~ kappa_j x^(1+p)` at the fixed point of `Z_j`.
    pub fn kappa(&self, _side: u8) -> F {
        self.kappa
    }

    pub fn breakpoint(&self) -> F {
        F::half()
    }

    /// Tail exponent `1/p` of the excursion times.
    pub fn alpha(&self) -> F {
        F::one() / self.p
    }

    /// Index `j` of the branch domain `Z_j` containing `x`.
    pub fn symbol_of(&self, x: F) -> Result<u8> {
        if !(x > F::zero() && x < F::one()) || x == F::half() {
            return Err(LabError::Boundary { x: x.as_f64() });
        }
        Ok(u8::from(x > F::half()))
    }

    /// Left branch `x (1 + (2x)^p)`, also the model map near either cusp in
    /// the distance-to-fixed-point coordinate.
    pub fn left(&self, x: F) -> F {
        x * (F::one() + (F::two() * x).powf(self.p))
    }

    /// Right branch, written in `d = x - 1/2` to keep full relative accuracy
    /// where it is close to 0:
    /// `T x = 2d - (1/2 - d) expm1(p ln(1 - 2d))`.
    pub fn right(&self, x: F) -> F {
        self.near_half(x - F::half())
    }

    /// `h(d) = T(1/2 + d) = 1 - T(1/2 - d)`, for `d` in `(0, 1/2)`.
    pub(crate) fn near_half(&self, d: F) -> F {
        let two = F::two();
        two * d - (F::half() - d) * (self.p * (-two * d).ln_1p()).exp_m1()
    }

    pub fn apply(&self, x: F) -> Result<F> {
        Ok(match self.symbol_of(x)? {
            0 => self.left(x),
            _ => self.right(x),
        })
    }

    /// `r_j(x) = T x - x` near 0 and `x - T x` near 1, in the distance
    /// coordinate `u` to the fixed point of `Z_j`.
    pub fn r(&self, _side: u8, u: F) -> F {
        u * (F::two() * u).powf(self.p)
    }
}

/// Whether the invariant measure of the map is finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finiteness {
    /// Value of `int_0^c x / r_0(x) dx`.
    Finite {
        integral: f64,
    },
    Infinite,
}

/// Decides finiteness of the invariant measure from
/// `int_0^c x / r_0(x) dx`: below `EPS` the integrand is replaced by its
/// exact power form `x^-p / kappa`, the rest is integrated numerically.
pub fn measure_finiteness<F: Real>(map: &IntermittentMap<F>) -> Finiteness {
    const EPS: f64 = 1e-3;
    let p = map.p().as_f64();
    if p >= 1.0 {
        return Finiteness::Infinite;
    }
    let kappa = map.kappa(0).as_f64();
    let head = EPS.powf(1.0 - p) / ((1.0 - p) * kappa);
    let m64 = IntermittentMap::<f64>::new(p).expect("validated exponent");
    let body = integrate(|x| x / (m64.left(x) - x), EPS, 0.5, 1e-12);
    Finiteness::Finite { integral: head + body.value }
}

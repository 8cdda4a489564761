use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FirstReturn, IntermittentMap, ReturnStructure};
use crate::error::{LabError, Result};
use crate::stats::{hill_estimate, HillEstimate};

/// How excursion times are collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailMode {
    /// Independent uniform draws on `Y`, one return each.
    Raw,
    /// Successive returns along one induced orbit from a uniform start,
    /// the first `discard` returns dropped.
    BurnIn { discard: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideTail {
    pub hill: HillEstimate,
    /// Returns of this side above the common threshold.
    pub exceedances: usize,
}

/// Tail report for `phi^(0)` and `phi^(1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionTails {
    pub mode: TailMode,
    pub returns: usize,
    pub top_fraction: f64,
    /// Common threshold: the `1 - top_fraction` quantile of `phi`.
    pub threshold: f64,
    pub sides: [SideTail; 2],
    /// `exceedances[0] / exceedances[1]`.
    pub count_ratio: f64,
    /// Returns longer than the cap, kept at the cap value.
    pub censored: usize,
}

fn one_return<R: Rng + ?Sized>(
    map: &IntermittentMap<f64>,
    rs: &ReturnStructure,
    x: f64,
    cap: Option<f64>,
    censored: &mut usize,
    rng: &mut R,
) -> Result<Option<FirstReturn>> {
    match rs.first_return_dithered(map, x, cap, rng) {
        Ok(r) => Ok(Some(r)),
        Err(LabError::LongExcursion { .. }) => {
            *censored += 1;
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Collects `n` excursion times and fits the tail index of each side by
/// the Hill estimator over the top `top_fraction` of that side's values
/// (returns to the other side count as zeros).
///
/// A censored return (longer than `cap`) enters at the value `cap` on the
/// side it would have visited; along an orbit it also ends the orbit, which
/// restarts from a fresh uniform draw.
pub fn excursion_tail_estimate<R: Rng + ?Sized>(
    map: &IntermittentMap<f64>,
    rs: &ReturnStructure,
    n: usize,
    mode: TailMode,
    top_fraction: f64,
    cap: Option<f64>,
    rng: &mut R,
) -> Result<ExcursionTails> {
    if n < 10_000 {
        return Err(LabError::InsufficientData(format!("{n} returns, at least 10^4 needed")));
    }
    let mut comps = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut censored = 0usize;
    let push = |side: u8, phi: f64, comps: &mut [Vec<f64>; 2]| {
        comps[side as usize].push(phi);
        comps[1 - side as usize].push(0.0);
    };
    match mode {
        TailMode::Raw => {
            while comps[0].len() < n {
                let x = rs.sample_uniform(rng);
                match one_return(map, rs, x, cap, &mut censored, rng)? {
                    Some(r) => push(r.side, r.phi, &mut comps),
                    None => push(u8::from(x < 0.5), cap.unwrap_or(f64::INFINITY), &mut comps),
                }
            }
        }
        TailMode::BurnIn { discard } => {
            let mut x = rs.sample_uniform(rng);
            let mut skipped = 0usize;
            while comps[0].len() < n {
                let r = one_return(map, rs, x, cap, &mut censored, rng)?;
                let keep = skipped >= discard;
                if !keep {
                    skipped += 1;
                }
                match r {
                    Some(r) => {
                        if keep {
                            push(r.side, r.phi, &mut comps);
                        }
                        x = r.point;
                    }
                    None => {
                        if keep {
                            push(u8::from(x < 0.5), cap.unwrap_or(f64::INFINITY), &mut comps);
                        }
                        x = rs.sample_uniform(rng);
                    }
                }
            }
        }
    }
    let mut pooled: Vec<f64> = comps[0].iter().zip(&comps[1]).map(|(a, b)| a + b).collect();
    pooled.sort_by(f64::total_cmp);
    let threshold = pooled[((1.0 - top_fraction) * n as f64) as usize];
    let side = |j: usize| -> Result<SideTail> {
        Ok(SideTail {
            hill: hill_estimate(&comps[j], top_fraction)?,
            exceedances: comps[j].iter().filter(|&&v| v > threshold).count(),
        })
    };
    let sides = [side(0)?, side(1)?];
    let count_ratio = sides[0].exceedances as f64 / sides[1].exceedances as f64;
    Ok(ExcursionTails { mode, returns: n, top_fraction, threshold, sides, count_ratio, censored })
}

/// Checks that `phi^(0) = 1_{T^-1 Z0} phi` and `phi^(1) = 1_{T^-1 Z1} phi`
/// have disjoint supports covering every return, deciding the side from
/// `T x` directly rather than from the return engine, along the induced
/// orbit of a uniform start. Returns the number of violations.
pub fn disjointness_violations<R: Rng + ?Sized>(
    map: &IntermittentMap<f64>,
    rs: &ReturnStructure,
    n: usize,
    rng: &mut R,
) -> Result<usize> {
    let mut x = rs.sample_uniform(rng);
    let mut violations = 0usize;
    for _ in 0..n {
        let r = rs.first_return_dithered(map, x, None, rng)?;
        let tx = map.apply(x)?;
        let phi0 = if tx < map.breakpoint() { r.phi } else { 0.0 };
        let phi1 = if tx > map.breakpoint() { r.phi } else { 0.0 };
        if (phi0 > 0.0) == (phi1 > 0.0) || r.components() != [phi0, phi1] {
            violations += 1;
        }
        x = r.point;
    }
    Ok(violations)
}

/// Largest observed `|log|` of
/// `(leb(v E) / leb(v Y)) / (leb(E) / leb(Y))` over random rank-one
/// cylinders `{phi_Y = m, side}` with `m <= max_phi`, random intervals
/// `E` in `Y`, and `v` the inverse branch of `T_Y` on the cylinder.
/// Cylinders are drawn through the return time of a uniform point.
pub fn induced_distortion<R: Rng + ?Sized>(
    map: &IntermittentMap<f64>,
    rs: &ReturnStructure,
    trials: usize,
    max_phi: u64,
    rng: &mut R,
) -> Result<f64> {
    let (y0, y1) = (rs.y0(), rs.y1());
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < trials {
        let r = rs.first_return(map, rs.sample_uniform(rng), None)?;
        if r.phi > max_phi as f64 {
            continue;
        }
        let m = r.phi as u64;
        let u = y0 + (y1 - y0) * rng.random::<f64>();
        let v = y0 + (y1 - y0) * rng.random::<f64>();
        let (e_lo, e_hi) = (u.min(v), u.max(v));
        if e_hi - e_lo < 1e-6 {
            continue;
        }
        let inv = |y: f64| rs.induced_inverse(map, m, r.side, y);
        let (z_lo, z_hi) = rs.cylinder(map, m, r.side)?;
        let me = (inv(e_hi)? - inv(e_lo)?).abs();
        let ratio = (me / (z_hi - z_lo)) / ((e_hi - e_lo) / (y1 - y0));
        worst = worst.max(ratio.ln().abs());
        done += 1;
    }
    Ok(worst)
}

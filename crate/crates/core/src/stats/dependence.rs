use crate::error::{LabError, Result};

/// Average ranks `1..=n`, ties sharing their mean rank.
pub fn ranks(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(LabError::InvalidParameter("sample contains NaN".into()));
    }
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    Ok(out)
}

/// Row sums `sum_j |x_i - x_j|` in `O(n log n)`.
fn distance_row_sums(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let total: f64 = xs.iter().sum();
    let mut below = 0.0;
    let mut out = vec![0.0; n];
    for (r, &i) in idx.iter().enumerate() {
        let v = xs[i];
        let above = total - below - v;
        out[i] = v * r as f64 - below + above - v * (n - 1 - r) as f64;
        below += v;
    }
    out
}

/// Bias-corrected distance correlation `R*` of two real samples, from the
/// U-centred distance matrices. Unlike the V-statistic it has mean zero
/// under independence and can be slightly negative; the reported value is
/// `sign(R*) sqrt(|R*|)`, on the same scale as the usual distance
/// correlation. Memory is `O(n)`; time `O(n^2)`. Zero when either sample is
/// constant.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(LabError::DimensionMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    if n < 4 {
        return Err(LabError::InsufficientData("bias-corrected distance correlation needs four points".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(LabError::InvalidParameter("distance correlation needs finite data".into()));
    }
    let (ra, rb) = (distance_row_sums(x), distance_row_sums(y));
    let (ga, gb) = (ra.iter().sum::<f64>(), rb.iter().sum::<f64>());
    let nf = n as f64;
    let (c1, c2) = (1.0 / (nf - 2.0), 1.0 / ((nf - 1.0) * (nf - 2.0)));
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (ai, bi) = (ra[i] * c1 - ga * c2, rb[i] * c1 - gb * c2);
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = (x[i] - x[j]).abs() - ai - ra[j] * c1;
            let b = (y[i] - y[j]).abs() - bi - rb[j] * c1;
            ab += a * b;
            aa += a * a;
            bb += b * b;
        }
    }
    if aa <= 0.0 || bb <= 0.0 {
        return Ok(0.0);
    }
    let r = ab / (aa * bb).sqrt();
    Ok(r.signum() * r.abs().sqrt())
}

/// `max |F(s, t) - F_x(s) F_y(t)|` over the grid of empirical quantiles of
/// `x` and `y` at the given levels.
pub fn quantile_grid_factorization(x: &[f64], y: &[f64], levels: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(LabError::DimensionMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(LabError::Empty("factorization check needs data"));
    }
    let sx = super::sorted(x)?;
    let sy = super::sorted(y)?;
    let q = |s: &[f64], p: f64| s[((p * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
    let n = x.len() as f64;
    let mut worst = 0.0f64;
    for &p in levels {
        let qx = q(&sx, p);
        let fx = x.iter().filter(|&&v| v <= qx).count() as f64 / n;
        for &r in levels {
            let qy = q(&sy, r);
            let fy = y.iter().filter(|&&v| v <= qy).count() as f64 / n;
            let joint = x.iter().zip(y).filter(|(&u, &v)| u <= qx && v <= qy).count() as f64 / n;
            worst = worst.max((joint - fx * fy).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    #[test]
    fn rank_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]).unwrap(), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn dcor_extremes() {
        let x: Vec<f64> = (0..50).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        assert!((distance_correlation(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(distance_correlation(&x, &[1.0; 50]).unwrap(), 0.0);
        assert!(distance_correlation(&x, &x[..10]).is_err());
        // nonlinear dependence is detected where Pearson correlation vanishes
        let sym: Vec<f64> = (-25..25).map(f64::from).collect();
        let sq: Vec<f64> = sym.iter().map(|v| v * v).collect();
        assert!(distance_correlation(&sym, &sq).unwrap() > 0.3);
    }

    /// Direct U-centring with the full matrices.
    fn dcor_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let u = |v: &[f64]| {
            let d: Vec<Vec<f64>> = v.iter().map(|p| v.iter().map(|q| (p - q).abs()).collect()).collect();
            let row: Vec<f64> = d.iter().map(|r| r.iter().sum()).collect();
            let g: f64 = row.iter().sum();
            let mut m = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        m[i][j] = d[i][j] - row[i] / (n - 2) as f64 - row[j] / (n - 2) as f64
                            + g / ((n - 1) * (n - 2)) as f64;
                    }
                }
            }
            m
        };
        let (a, b) = (u(x), u(y));
        let dot = |p: &Vec<Vec<f64>>, q: &Vec<Vec<f64>>| -> f64 {
            p.iter().zip(q).map(|(r, s)| r.iter().zip(s).map(|(u, v)| u * v).sum::<f64>()).sum()
        };
        let r = dot(&a, &b) / (dot(&a, &a) * dot(&b, &b)).sqrt();
        r.signum() * r.abs().sqrt()
    }

    #[test]
    fn matches_full_matrix_oracle() {
        let mut rng = stream(4, Purpose::Misc, 0);
        for n in [4usize, 7, 60] {
            let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let y: Vec<f64> = x.iter().map(|v| v * v + 0.3 * rng.random::<f64>()).collect();
            let fast = distance_correlation(&x, &y).unwrap();
            assert!((fast - dcor_oracle(&x, &y)).abs() < 1e-10, "n = {n}");
        }
        let t = [1.0, 1.0, 2.0, 5.0, 5.0];
        let s = [0.0, 3.0, 1.0, 1.0, 2.0];
        assert!((distance_correlation(&t, &s).unwrap() - dcor_oracle(&t, &s)).abs() < 1e-10);
    }

    #[test]
    fn independent_samples() {
        let mut rng = stream(9, Purpose::Reference, 0);
        let x: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        assert!(distance_correlation(&x, &y).unwrap().abs() < 0.1);
        assert!(quantile_grid_factorization(&x, &y, &[0.25, 0.5, 0.75]).unwrap() < 0.04);
        let grid = quantile_grid_factorization(&x, &x, &[0.25, 0.5, 0.75]).unwrap();
        assert!((grid - 0.25).abs() < 0.01);
    }
}

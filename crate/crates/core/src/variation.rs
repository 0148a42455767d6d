//! p-variation sums, exact suprema over sub-partitions, jump sums, local
//! p-variation diagnostics, and estimation of the p-variation index.

use crate::error::Error;
use crate::paths::{NestedPartitionSequence, RegulatedPath, Side};
use crate::Result;
use serde::Serialize;

/// Per-level variation sums together with the exact supremum, the jump sum,
/// and the finite-resolution local estimate.
#[derive(Debug, Clone, Serialize)]
pub struct VariationProfile {
    pub p: f64,
    /// `(level, s_p(f; λ(level)))`.
    pub per_level: Vec<(u32, f64)>,
    /// Supremum of s_p over sub-partitions of the finest level.
    pub v_p: f64,
    /// Sum of |jump part|^p over both sides of every jump.
    pub jump_sum_p: f64,
    /// Min over levels of the sup over refinements containing that level.
    pub local_estimate: f64,
}

/// Result of probing the growth of s_p across refinement levels.
#[derive(Debug, Clone, Serialize)]
pub struct IndexEstimate {
    pub upsilon_hat: f64,
    pub p_grid: Vec<f64>,
    /// `(p, per-level log2 growth slope of s_p)`.
    pub diagnostics: Vec<(f64, f64)>,
    /// `2 - 1/(1 ∨ υ̂)`, the graph box-dimension this index implies.
    pub hb_dimension: f64,
    /// True when no slope sign change bracketed the tolerance and the
    /// estimate sits on a grid boundary.
    pub clamped: bool,
}

pub const DEFAULT_SLOPE_TOL: f64 = 0.05;

/// 1.0, 1.25, ..., 2.5.
pub fn default_p_grid() -> Vec<f64> {
    (0..=6).map(|k| 1.0 + 0.25 * k as f64).collect()
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!("p must be a positive real, got {p}")));
    }
    Ok(())
}

fn check_partition(path: &RegulatedPath, partition: &[f64]) -> Result<()> {
    let t_end = path.t_end();
    for &t in partition {
        if !t.is_finite() || t < 0.0 || t > t_end {
            return Err(Error::domain(format!("partition time {t} outside [0, {t_end}]")));
        }
    }
    if partition.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("partition must be strictly increasing"));
    }
    Ok(())
}

/// `Σ_i |f(x_i) - f(x_{i-1})|^p` over consecutive partition points.
pub fn sp_sum(path: &RegulatedPath, partition: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    check_partition(path, partition)?;
    let vals = path.eval_sorted(partition, Side::At);
    Ok(increment_power_sum(&vals, p))
}

fn increment_power_sum(vals: &[f64], p: f64) -> f64 {
    vals.windows(2).map(|w| (w[1] - w[0]).abs().powf(p)).sum()
}

/// Collapses monotone runs to their endpoints and drops zero increments.
///
/// For p >= 1 an optimal sub-partition never needs an interior point of a
/// monotone run, since merging same-direction increments cannot decrease
/// |sum|^p; the supremum over the compressed values equals the original.
fn compress_extrema(vals: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(vals.len().min(64));
    for &x in vals {
        match out.len() {
            0 => out.push(x),
            1 => {
                if x != out[0] {
                    out.push(x);
                }
            }
            n => {
                if x == out[n - 1] {
                    continue;
                }
                let prev_up = out[n - 1] > out[n - 2];
                let next_up = x > out[n - 1];
                if prev_up == next_up {
                    out[n - 1] = x;
                } else {
                    out.push(x);
                }
            }
        }
    }
    out
}

fn dp_supremum(vals: &[f64], p: f64) -> f64 {
    let v = compress_extrema(vals);
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let mut best = vec![0.0f64; n];
    for j in 1..n {
        let mut b = f64::NEG_INFINITY;
        for i in 0..j {
            let cand = best[i] + (v[j] - v[i]).abs().powf(p);
            if cand > b {
                b = cand;
            }
        }
        best[j] = b;
    }
    best[n - 1]
}

/// Exact supremum of s_p over sub-partitions of `resolution`.
///
/// For p <= 1 splitting increments can only grow the sum, so the full
/// resolution wins. For p > 1 a quadratic dynamic program over the
/// alternating extrema finds the optimum.
pub fn p_variation(path: &RegulatedPath, p: f64, resolution: &[f64]) -> Result<f64> {
    check_p(p)?;
    check_partition(path, resolution)?;
    let vals = path.eval_sorted(resolution, Side::At);
    if p <= 1.0 {
        Ok(increment_power_sum(&vals, p))
    } else {
        Ok(dp_supremum(&vals, p))
    }
}

pub const ORACLE_MAX_POINTS: usize = 20;

/// Brute-force maximum of s_p over all sub-partitions keeping the endpoints.
pub fn p_variation_oracle(path: &RegulatedPath, p: f64, resolution: &[f64]) -> Result<f64> {
    check_p(p)?;
    check_partition(path, resolution)?;
    let n = resolution.len();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::OracleTooLarge { n, max: ORACLE_MAX_POINTS });
    }
    let vals = path.eval_sorted(resolution, Side::At);
    if n < 2 {
        return Ok(0.0);
    }
    let interior = n - 2;
    let mut best = 0.0f64;
    for mask in 0u32..(1u32 << interior) {
        let mut sum = 0.0;
        let mut last = vals[0];
        for b in 0..interior {
            if mask & (1 << b) != 0 {
                sum += (vals[b + 1] - last).abs().powf(p);
                last = vals[b + 1];
            }
        }
        sum += (vals[n - 1] - last).abs().powf(p);
        if sum > best {
            best = sum;
        }
    }
    Ok(best)
}

/// `Σ (|left|^p + |right|^p)` over the jump list (the p-th power of the jump
/// variation, not its root).
pub fn jump_sum(path: &RegulatedPath, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(path
        .jumps()
        .iter()
        .map(|j| {
            let l = if j.left == 0.0 { 0.0 } else { j.left.abs().powf(p) };
            let r = if j.right == 0.0 { 0.0 } else { j.right.abs().powf(p) };
            l + r
        })
        .sum())
}

fn level_indices_in_finest(seq: &NestedPartitionSequence, m: usize) -> Vec<usize> {
    let finest = seq.finest();
    let level = seq.level(m);
    let mut idx = Vec::with_capacity(level.len());
    let mut j = 0;
    for &x in level {
        while finest[j] != x {
            j += 1;
        }
        idx.push(j);
        j += 1;
    }
    idx
}

/// Finite-resolution stand-in for the local p-variation: for each level, the
/// sup of s_p over refinements (within the finest level) that contain the
/// level's points; returns the minimum across levels.
pub fn local_p_variation_estimate(
    path: &RegulatedPath,
    p: f64,
    seq: &NestedPartitionSequence,
) -> Result<f64> {
    check_p(p)?;
    let finest = seq.finest();
    check_partition(path, finest)?;
    let vals = path.eval_sorted(finest, Side::At);
    if p <= 1.0 {
        // Refining maximizes, so every level's constrained sup is the full
        // finest sum and the min equals it.
        return Ok(increment_power_sum(&vals, p));
    }
    let mut best = f64::INFINITY;
    for m in 0..seq.num_levels() {
        let anchors = level_indices_in_finest(seq, m);
        let mut total = 0.0;
        for w in anchors.windows(2) {
            total += dp_supremum(&vals[w[0]..=w[1]], p);
        }
        if total < best {
            best = total;
        }
    }
    Ok(best)
}

/// Per-level sums plus the supremum, jump sum, and local estimate in one
/// record.
pub fn variation_profile(
    path: &RegulatedPath,
    p: f64,
    seq: &NestedPartitionSequence,
) -> Result<VariationProfile> {
    check_p(p)?;
    let mut per_level = Vec::with_capacity(seq.num_levels());
    for m in 0..seq.num_levels() {
        per_level.push((m as u32, sp_sum(path, seq.level(m), p)?));
    }
    Ok(VariationProfile {
        p,
        per_level,
        v_p: p_variation(path, p, seq.finest())?,
        jump_sum_p: jump_sum(path, p)?,
        local_estimate: local_p_variation_estimate(path, p, seq)?,
    })
}

fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        num += (x - xm) * (y - ym);
        den += (x - xm) * (x - xm);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Estimates the p-variation index with the default stabilization tolerance.
pub fn estimate_index(
    path: &RegulatedPath,
    seq: &NestedPartitionSequence,
    p_grid: &[f64],
) -> Result<IndexEstimate> {
    estimate_index_with(path, seq, p_grid, DEFAULT_SLOPE_TOL)
}

/// For each probed p, regresses log2 s_p(f; λ(m)) on m over the top half of
/// the levels. The index estimate is the smallest p whose growth slope drops
/// to `slope_tol` per level, linearly interpolated between bracketing grid
/// points; without a bracket the estimate clamps to the grid boundary and is
/// flagged.
pub fn estimate_index_with(
    path: &RegulatedPath,
    seq: &NestedPartitionSequence,
    p_grid: &[f64],
    slope_tol: f64,
) -> Result<IndexEstimate> {
    if p_grid.len() < 3 {
        return Err(Error::domain("p grid needs at least 3 points"));
    }
    if p_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("p grid must be strictly increasing"));
    }
    for &p in p_grid {
        check_p(p)?;
    }
    if seq.num_levels() < 4 {
        return Err(Error::domain("index estimation needs at least 4 levels"));
    }

    let abs_increments: Vec<Vec<f64>> = (0..seq.num_levels())
        .map(|m| {
            let vals = path.eval_sorted(seq.level(m), Side::At);
            vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
        })
        .collect();

    let start = seq.num_levels() / 2;
    let slopes: Vec<f64> = p_grid
        .iter()
        .map(|&p| {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (m, incs) in abs_increments.iter().enumerate().skip(start) {
                let s: f64 = incs.iter().map(|d| d.powf(p)).sum();
                if s > 0.0 {
                    xs.push(m as f64);
                    ys.push(s.log2());
                }
            }
            if xs.len() < 2 {
                0.0
            } else {
                regression_slope(&xs, &ys)
            }
        })
        .collect();

    let first_stable = slopes.iter().position(|&s| s <= slope_tol);
    let (upsilon_hat, clamped) = match first_stable {
        None => (*p_grid.last().unwrap(), true),
        Some(0) => (p_grid[0], true),
        Some(i) => {
            let (p0, p1) = (p_grid[i - 1], p_grid[i]);
            let (s0, s1) = (slopes[i - 1], slopes[i]);
            let t = (s0 - slope_tol) / (s0 - s1);
            (p0 + (p1 - p0) * t, false)
        }
    };
    let hb_dimension = 2.0 - 1.0 / upsilon_hat.max(1.0);
    Ok(IndexEstimate {
        upsilon_hat,
        p_grid: p_grid.to_vec(),
        diagnostics: p_grid.iter().copied().zip(slopes).collect(),
        hb_dimension,
        clamped,
    })
}

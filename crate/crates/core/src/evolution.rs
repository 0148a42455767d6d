//! The sum-ratio and product limit operators, their closed forms, quadratic
//! variation along a sequence, price/return duality round trips, and a
//! two-sided chain-rule evaluator for left integrals.

use crate::error::Error;
use crate::integrate::{regularized_rs_closure, RsParams};
use crate::paths::{CrashTime, NestedPartitionSequence, RegulatedPath, Side};
use crate::report::{ConvergenceReport, IntegralResult, Tolerance};
use crate::Result;
use serde::Serialize;

fn check_time_window(t: f64, path: &RegulatedPath, seq: &NestedPartitionSequence) -> Result<()> {
    let t_max = path.t_end().min(seq.t_end());
    if !t.is_finite() || t < 0.0 || t > t_max {
        return Err(Error::domain(format!("time {t} outside [0, {t_max}]")));
    }
    Ok(())
}

fn min_on_prefix(path: &RegulatedPath, t: f64) -> f64 {
    let mut m = path.eval(t).unwrap_or(f64::NAN).min(path.eval_left(t).unwrap_or(f64::NAN));
    for &g in path.grid().iter().filter(|&&g| g <= t) {
        m = m.min(path.value(g, Side::At));
    }
    for j in path.jumps().iter().filter(|j| j.time <= t) {
        m = m.min(path.value(j.time, Side::Left));
        m = m.min(path.value(j.time, Side::At));
        if j.time < t {
            m = m.min(path.value(j.time, Side::Right));
        }
    }
    m
}

/// First jump of -1 or below on either side, in time order.
fn first_fatal_jump(g: &RegulatedPath) -> Option<CrashTime> {
    for j in g.jumps() {
        if j.left <= -1.0 {
            return Some(CrashTime::At { time: j.time });
        }
        if j.right <= -1.0 {
            return Some(CrashTime::JustAfter { time: j.time });
        }
    }
    None
}

/// Sum-ratio operator: level values `Σ Δf / f_prev` over clamped partition
/// points. Requires `f` bounded away from zero on `[0, t]`.
pub fn l_lambda(
    f: &RegulatedPath,
    t: f64,
    seq: &NestedPartitionSequence,
) -> Result<IntegralResult> {
    l_lambda_with(f, t, seq, Tolerance::default())
}

pub fn l_lambda_with(
    f: &RegulatedPath,
    t: f64,
    seq: &NestedPartitionSequence,
    tol: Tolerance,
) -> Result<IntegralResult> {
    check_time_window(t, f, seq)?;
    let floor = min_on_prefix(f, t);
    if !(floor > 0.0) {
        return Err(Error::precondition(format!(
            "path reaches {floor:.3e} on [0, {t}]; the ratio sums need values bounded away from 0"
        )));
    }
    let mut raw = Vec::with_capacity(seq.num_levels());
    for m in 0..seq.num_levels() {
        let clamped: Vec<f64> = seq.level(m).iter().map(|&x| x.min(t)).collect();
        let vals = f.eval_sorted(&clamped, Side::At);
        let mut acc = 0.0;
        for w in vals.windows(2) {
            acc += (w[1] - w[0]) / w[0];
        }
        raw.push(acc);
    }
    Ok(IntegralResult::new(ConvergenceReport::from_values(&raw, tol)))
}

/// Product operator: level values `Π (1 + Δg)` over clamped partition
/// points.
///
/// A nonpositive factor at the finest level caused by a jump of -1 or below
/// is a horizon error naming the return crash; nonpositive factors without
/// such a jump (coarse meshes over wild continuous motion) just flow into
/// the level values.
pub fn e_lambda(
    g: &RegulatedPath,
    t: f64,
    seq: &NestedPartitionSequence,
) -> Result<IntegralResult> {
    e_lambda_with(g, t, seq, Tolerance::default())
}

pub fn e_lambda_with(
    g: &RegulatedPath,
    t: f64,
    seq: &NestedPartitionSequence,
    tol: Tolerance,
) -> Result<IntegralResult> {
    check_time_window(t, g, seq)?;
    let mut raw = Vec::with_capacity(seq.num_levels());
    let mut finest_nonpositive = false;
    for m in 0..seq.num_levels() {
        let clamped: Vec<f64> = seq.level(m).iter().map(|&x| x.min(t)).collect();
        let vals = g.eval_sorted(&clamped, Side::At);
        let mut acc = 1.0;
        let mut nonpositive = false;
        for w in vals.windows(2) {
            let factor = 1.0 + (w[1] - w[0]);
            nonpositive |= factor <= 0.0;
            acc *= factor;
        }
        if m + 1 == seq.num_levels() {
            finest_nonpositive = nonpositive;
        }
        raw.push(acc);
    }
    if finest_nonpositive {
        if let Some(crash) = first_fatal_jump(g) {
            let fatal_before_t = match crash {
                CrashTime::At { time } => time <= t,
                CrashTime::JustAfter { time } => time < t,
                CrashTime::Never { .. } => false,
            };
            if fatal_before_t {
                return Err(Error::Horizon {
                    reason: "product factor vanishes: a return jump of -1 or below lies in the window".into(),
                    crash,
                });
            }
        }
    }
    Ok(IntegralResult::new(ConvergenceReport::from_values(&raw, tol)))
}

/// Closed form of the product operator: `e^{g(t)-g(0)}` times one factor
/// `(1+Δg) e^{-Δg}` per jump part, left parts counted on `(0, t]` and right
/// parts on `[0, t)`.
pub fn product_integral_closed(g: &RegulatedPath, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 || t > g.t_end() {
        return Err(Error::domain(format!("time {t} outside [0, {}]", g.t_end())));
    }
    let mut product = (g.eval(t)? - g.eval(0.0)?).exp();
    for j in g.jumps() {
        if j.time <= t && j.time > 0.0 && j.left != 0.0 {
            if j.left <= -1.0 {
                return Err(Error::domain(format!(
                    "left jump {} at {} is -1 or below; the product has no positive closed form",
                    j.left, j.time
                )));
            }
            product *= (1.0 + j.left) * (-j.left).exp();
        }
        if j.time < t && j.right != 0.0 {
            if j.right <= -1.0 {
                return Err(Error::domain(format!(
                    "right jump {} at {} is -1 or below; the product has no positive closed form",
                    j.right, j.time
                )));
            }
            product *= (1.0 + j.right) * (-j.right).exp();
        }
    }
    Ok(product)
}

/// Closed form of the sum-ratio operator for positive paths:
/// `log(f(t)/f(0))` minus one correction `log(f/f_-) - Δf/f_-` per left jump
/// part on `(0, t]` and the right-sided analogue on `[0, t)`.
pub fn ly_logreturn_closed(f: &RegulatedPath, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 || t > f.t_end() {
        return Err(Error::domain(format!("time {t} outside [0, {}]", f.t_end())));
    }
    if !(f.min_value() > 0.0) {
        return Err(Error::domain("path must stay strictly positive"));
    }
    let mut acc = (f.eval(t)? / f.eval(0.0)?).ln();
    for j in f.jumps() {
        if j.time <= t && j.time > 0.0 && j.left != 0.0 {
            let before = f.value(j.time, Side::Left);
            let at = f.value(j.time, Side::At);
            acc -= (at / before).ln() - j.left / before;
        }
        if j.time < t && j.right != 0.0 {
            let at = f.value(j.time, Side::At);
            let after = f.value(j.time, Side::Right);
            acc -= (after / at).ln() - j.right / at;
        }
    }
    Ok(acc)
}

/// Quadratic variation along the sequence: level values `Σ (Δg)²`. Requires
/// a continuous path.
pub fn b_lambda(
    g: &RegulatedPath,
    t: f64,
    seq: &NestedPartitionSequence,
) -> Result<IntegralResult> {
    b_lambda_with(g, t, seq, Tolerance::default())
}

pub fn b_lambda_with(
    g: &RegulatedPath,
    t: f64,
    seq: &NestedPartitionSequence,
    tol: Tolerance,
) -> Result<IntegralResult> {
    check_time_window(t, g, seq)?;
    if !g.jumps().is_empty() {
        return Err(Error::precondition(
            "quadratic bracket along a sequence is defined here for continuous paths only",
        ));
    }
    let mut raw = Vec::with_capacity(seq.num_levels());
    for m in 0..seq.num_levels() {
        let clamped: Vec<f64> = seq.level(m).iter().map(|&x| x.min(t)).collect();
        let vals = g.eval_sorted(&clamped, Side::At);
        raw.push(vals.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum());
    }
    Ok(IntegralResult::new(ConvergenceReport::from_values(&raw, tol)))
}

/// Result of testing `ℰ = exp(g - g(0) - b/2)` along one sequence.
#[derive(Debug, Clone, Serialize)]
pub struct RelationCheck {
    /// False when either limit failed its Cauchy test at the given
    /// tolerance; `agrees` is then meaningless.
    pub applicable: bool,
    pub agrees: bool,
    pub residual: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub bracket: f64,
}

/// Checks the exponential relation between the product operator and the
/// quadratic bracket at relative tolerance `tol`.
pub fn exp_relation_check(
    g: &RegulatedPath,
    t: f64,
    seq: &NestedPartitionSequence,
    tol: f64,
) -> Result<RelationCheck> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let tolerance = Tolerance::of(tol);
    let e = e_lambda_with(g, t, seq, tolerance)?;
    let b = b_lambda_with(g, t, seq, tolerance)?;
    let lhs = e.value;
    let bracket = b.value;
    let rhs = (g.eval(t)? - g.eval(0.0)? - 0.5 * bracket).exp();
    let residual = (lhs - rhs).abs();
    let applicable = e.is_converged() && b.is_converged();
    Ok(RelationCheck {
        applicable,
        agrees: applicable && residual <= tol * lhs.abs(),
        residual,
        lhs,
        rhs,
        bracket,
    })
}

/// A price/return pair tied to one partition sequence, with the price crash
/// time as its horizon. `P(0) = 1` and `R(0) = 0` exactly.
#[derive(Debug, Clone)]
pub struct EvolutionPair {
    pub price_path: RegulatedPath,
    pub return_path: RegulatedPath,
    pub sequence: NestedPartitionSequence,
    pub horizon: CrashTime,
}

impl EvolutionPair {
    pub fn new(
        price_path: RegulatedPath,
        return_path: RegulatedPath,
        sequence: NestedPartitionSequence,
    ) -> Result<Self> {
        if price_path.eval(0.0)? != 1.0 {
            return Err(Error::domain("price path must start at exactly 1"));
        }
        if return_path.eval(0.0)? != 0.0 {
            return Err(Error::domain("return path must start at exactly 0"));
        }
        if price_path.t_end() != return_path.t_end() || price_path.t_end() != sequence.t_end() {
            return Err(Error::domain("price, return, and sequence must share one horizon"));
        }
        let horizon = crate::paths::crash_time_price(&price_path)?;
        Ok(EvolutionPair { price_path, return_path, sequence, horizon })
    }

    /// Builds the pair from a positive price path alone: the price is
    /// normalized to start at 1 and the return is its ratio-increment sum
    /// along the finest level (frozen past the crash, where it no longer
    /// carries meaning).
    pub fn from_price(price: RegulatedPath, sequence: NestedPartitionSequence) -> Result<Self> {
        let p0 = price.eval(0.0)?;
        if !(p0 > 0.0) {
            return Err(Error::precondition("price path must start positive"));
        }
        if price.t_end() != sequence.t_end() {
            return Err(Error::domain("price and sequence must share one horizon"));
        }
        let normalized = price.map(|x| x / p0)?;
        let horizon = crate::paths::crash_time_price(&normalized)?;
        let finest = sequence.finest();
        let vals = normalized.eval_sorted(finest, Side::At);
        let mut returns = Vec::with_capacity(finest.len());
        returns.push(0.0);
        let mut acc = 0.0;
        for i in 1..finest.len() {
            if horizon.admits(finest[i]) && vals[i - 1] > 0.0 {
                acc += (vals[i] - vals[i - 1]) / vals[i - 1];
            }
            returns.push(acc);
        }
        let return_path = RegulatedPath::new(finest.to_vec(), returns, Vec::new())?;
        Ok(EvolutionPair { price_path: normalized, return_path, sequence, horizon })
    }
}

/// Both composition round trips on the finest-level points below the
/// horizon.
#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    /// Max relative residual of the product composition against `P/P(0)`.
    pub price_residual: f64,
    /// Max residual of the ratio-sum composition against `R - R(0)`,
    /// relative to the sweep of `R`.
    pub return_residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub horizon: CrashTime,
    pub checked_points: usize,
    pub price_report: ConvergenceReport,
    pub return_report: ConvergenceReport,
}

/// Verifies the duality round trips for one pair: composing the product
/// operator over the return extracted from the price reproduces `P/P(0)`,
/// and the ratio sums over the price built from the return reproduce
/// `R - R(0)`, at every finest-level point below the horizon.
pub fn duality_check(pair: &EvolutionPair, tol: f64) -> Result<DualityReport> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let finest = pair.sequence.finest();
    let admissible = finest.iter().take_while(|&&x| pair.horizon.admits(x)).count();
    if admissible < 2 {
        return Err(Error::Horizon {
            reason: "the horizon leaves no interval to check".into(),
            crash: pair.horizon,
        });
    }
    let pts = &finest[..admissible];
    let t_cut = pts[admissible - 1];

    // Price side: ratio increments of P, re-multiplied.
    let p = pair.price_path.eval_sorted(pts, Side::At);
    if p.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::precondition("price must stay positive below its crash time"));
    }
    let mut price_residual = 0.0f64;
    let mut ratio_path_vals = Vec::with_capacity(pts.len());
    ratio_path_vals.push(0.0);
    let mut prod = 1.0f64;
    let mut acc = 0.0f64;
    for i in 1..pts.len() {
        let r = (p[i] - p[i - 1]) / p[i - 1];
        acc += r;
        ratio_path_vals.push(acc);
        prod *= 1.0 + r;
        let target = p[i] / p[0];
        price_residual = price_residual.max((prod - target).abs() / target);
    }
    let ratio_path = RegulatedPath::new(pts.to_vec(), ratio_path_vals, Vec::new())?;
    let price_report = e_lambda_with(&ratio_path, t_cut, &pair.sequence, Tolerance::of(tol))?.report;

    // Return side: product factors of R, re-summed.
    let r_vals = pair.return_path.eval_sorted(pts, Side::At);
    let mut usable = pts.len();
    for i in 1..pts.len() {
        if 1.0 + (r_vals[i] - r_vals[i - 1]) <= 0.0 {
            usable = i;
            break;
        }
    }
    let mut return_residual = 0.0f64;
    let mut exp_path_vals = Vec::with_capacity(usable);
    exp_path_vals.push(1.0);
    let mut prod_r = 1.0f64;
    let mut sum_back = 0.0f64;
    let sweep = r_vals[..usable]
        .iter()
        .fold(0.0f64, |m, &v| m.max((v - r_vals[0]).abs()))
        .max(1.0);
    for i in 1..usable {
        prod_r *= 1.0 + (r_vals[i] - r_vals[i - 1]);
        exp_path_vals.push(prod_r);
        sum_back += prod_r / exp_path_vals[i - 1] - 1.0;
        return_residual = return_residual.max((sum_back - (r_vals[i] - r_vals[0])).abs() / sweep);
    }
    let return_report = if usable >= 2 {
        let exp_path = RegulatedPath::new(pts[..usable].to_vec(), exp_path_vals, Vec::new())?;
        l_lambda_with(&exp_path, pts[usable - 1], &pair.sequence, Tolerance::of(tol))?.report
    } else {
        ConvergenceReport::from_values(&[0.0], Tolerance::of(tol))
    };

    Ok(DualityReport {
        price_residual,
        return_residual,
        tol,
        pass: price_residual <= tol && return_residual <= tol,
        horizon: pair.horizon,
        checked_points: admissible,
        price_report,
        return_report,
    })
}

/// Both sides of the chain-rule identity for left integrals, with the jump
/// corrections broken out.
#[derive(Debug, Clone, Serialize)]
pub struct ChainRuleReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// False when any component integral failed its Cauchy test; the
    /// residual is then a diagnostic, not a verdict on the identity.
    pub applicable: bool,
    /// Result of the sampling falsifier for the smoothness hypothesis on the
    /// map: finite Lipschitz quotients of the gradient over the range box
    /// and finite-difference consistency of `grad` with `map`.
    pub gradient_check: bool,
    pub left_corrections: f64,
    pub right_corrections: f64,
}

/// Evaluates `∫ h d(map∘f)` against the sum of per-coordinate integrals
/// `∫ h (∂_l map∘f) df_l` plus the two-sided jump corrections, and returns
/// both sides with their difference. Extrapolated refinement sums are used
/// throughout (see [`RsParams`]); pass a branching factor matching the
/// sample-grid structure for the cleanest convergence.
pub fn chain_rule_eval<F, G>(
    map: F,
    grad: G,
    components: &[&RegulatedPath],
    h: &RegulatedPath,
    a: f64,
    b: f64,
) -> Result<ChainRuleReport>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let params = RsParams { extrapolate: true, max_depth: 14, ..RsParams::default() };
    chain_rule_eval_with(map, grad, components, h, a, b, &params)
}

pub fn chain_rule_eval_with<F, G>(
    map: F,
    grad: G,
    components: &[&RegulatedPath],
    h: &RegulatedPath,
    a: f64,
    b: f64,
    params: &RsParams,
) -> Result<ChainRuleReport>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    if components.is_empty() {
        return Err(Error::domain("need at least one coordinate path"));
    }
    let nu = components.len();
    let t_min = components.iter().map(|c| c.t_end()).fold(h.t_end(), f64::min);
    if !(a < b) || a < 0.0 || b > t_min || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("bad interval [{a}, {b}] within [0, {t_min}]")));
    }

    let mut events: Vec<f64> = h.jumps().iter().map(|j| j.time).collect();
    for c in components {
        events.extend(c.jumps().iter().map(|j| j.time));
    }
    events.sort_by(f64::total_cmp);
    events.dedup();

    // Every integral below reads its sides through closures over the stored
    // paths, so compositions with the map and gradient are exact at every
    // refinement point; a materialized composition path would only be pinned
    // on its own grid and the interpolation error between grid points would
    // put a depth-independent floor under the residual.
    let comp_rows = |pts: &[f64], side: Side| -> Vec<Vec<f64>> {
        components.iter().map(|c| c.eval_sorted(pts, side)).collect()
    };
    let composite_at = |pts: &[f64], side: Side| -> Vec<f64> {
        let rows = comp_rows(pts, side);
        let mut buf = vec![0.0; nu];
        (0..pts.len())
            .map(|i| {
                for (k, row) in rows.iter().enumerate() {
                    buf[k] = row[i];
                }
                map(&buf)
            })
            .collect()
    };
    let h_at = |pts: &[f64], side: Side| h.eval_sorted(pts, side);

    // Boundary and cross-jump terms of the Left Young integral for a
    // closure-defined pair: `v(a) Δ⁺w(a) + Σ_(a,b) Δ⁻v Δ⁺w`.
    let ly_correction = |v_at: &dyn Fn(&[f64], Side) -> Vec<f64>,
                         w_at: &dyn Fn(&[f64], Side) -> Vec<f64>|
     -> f64 {
        let mut corr = v_at(&[a], Side::At)[0]
            * (w_at(&[a], Side::Right)[0] - w_at(&[a], Side::At)[0]);
        for &u in &events {
            if u > a && u < b {
                let dv = v_at(&[u], Side::At)[0] - v_at(&[u], Side::Left)[0];
                let dw = w_at(&[u], Side::Right)[0] - w_at(&[u], Side::At)[0];
                corr += dv * dw;
            }
        }
        corr
    };

    let lhs_res = regularized_rs_closure(&h_at, &composite_at, &events, a, b, params)?;
    let lhs = lhs_res.value + ly_correction(&h_at, &composite_at);
    let mut applicable = lhs_res.is_converged();

    let mut rhs = 0.0;
    for l in 0..nu {
        let integrand_at = |pts: &[f64], side: Side| -> Vec<f64> {
            let hv = h.eval_sorted(pts, side);
            let rows = comp_rows(pts, side);
            let mut buf = vec![0.0; nu];
            (0..pts.len())
                .map(|i| {
                    for (k, row) in rows.iter().enumerate() {
                        buf[k] = row[i];
                    }
                    hv[i] * grad(&buf)[l]
                })
                .collect()
        };
        let f_at = |pts: &[f64], side: Side| components[l].eval_sorted(pts, side);
        let part = regularized_rs_closure(&integrand_at, &f_at, &events, a, b, params)?;
        applicable &= part.is_converged();
        rhs += part.value + ly_correction(&integrand_at, &f_at);
    }

    let mut jump_times: Vec<f64> = components
        .iter()
        .flat_map(|c| c.jumps().iter().map(|j| j.time))
        .collect();
    jump_times.sort_by(f64::total_cmp);
    jump_times.dedup();
    let mut left_corrections = 0.0;
    let mut right_corrections = 0.0;
    for &u in &jump_times {
        let before: Vec<f64> = components.iter().map(|c| c.value(u, Side::Left)).collect();
        let at: Vec<f64> = components.iter().map(|c| c.value(u, Side::At)).collect();
        let after: Vec<f64> = components.iter().map(|c| c.value(u, Side::Right)).collect();
        if u > a && u <= b {
            let grad_before = grad(&before);
            let linear: f64 =
                (0..nu).map(|l| grad_before[l] * (at[l] - before[l])).sum();
            left_corrections += h.value(u, Side::Left) * (map(&at) - map(&before) - linear);
        }
        if u >= a && u < b {
            let grad_at = grad(&at);
            let linear: f64 = (0..nu).map(|l| grad_at[l] * (after[l] - at[l])).sum();
            right_corrections += h.value(u, Side::At) * (map(&after) - map(&at) - linear);
        }
    }
    rhs += left_corrections + right_corrections;

    let gradient_check = gradient_sampling_check(&map, &grad, components);
    Ok(ChainRuleReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        applicable,
        gradient_check,
        left_corrections,
        right_corrections,
    })
}

/// Sampling falsifier for the smoothness hypothesis: evaluates the gradient
/// on a deterministic scatter of the range box, requiring finite values,
/// finite pairwise Lipschitz quotients, and central-difference agreement
/// with the map. A pass is evidence, not proof.
fn gradient_sampling_check<F, G>(map: &F, grad: &G, components: &[&RegulatedPath]) -> bool
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let nu = components.len();
    let max_value = |c: &RegulatedPath| {
        let flipped = c.map(|x| -x).expect("negation preserves path validity");
        -flipped.min_value()
    };
    let lo: Vec<f64> = components.iter().map(|c| c.min_value()).collect();
    let hi: Vec<f64> = components.iter().map(|c| max_value(c)).collect();
    let span: Vec<f64> = lo.iter().zip(hi.iter()).map(|(&l, &h)| (h - l).max(1e-9)).collect();
    let samples = 16;
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(samples);
    for s in 0..samples {
        let mut x = Vec::with_capacity(nu);
        for l in 0..nu {
            // Low-discrepancy stride keeps the scatter deterministic.
            let frac = ((s as f64 + 1.0) * 0.6180339887498949 * (l as f64 + 1.0)).fract();
            x.push(lo[l] + span[l] * frac);
        }
        points.push(x);
    }
    let grads: Vec<Vec<f64>> = points.iter().map(|x| grad(x)).collect();
    if grads.iter().flatten().any(|v| !v.is_finite()) {
        return false;
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let dist: f64 = points[i]
                .iter()
                .zip(points[j].iter())
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            if dist < 1e-12 {
                continue;
            }
            let gdist: f64 = grads[i]
                .iter()
                .zip(grads[j].iter())
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            if !(gdist / dist).is_finite() {
                return false;
            }
        }
    }
    // Central differences of the map against the reported gradient.
    for (x, g) in points.iter().zip(grads.iter()).take(6) {
        for l in 0..nu {
            let step = 1e-5 * span[l];
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[l] += step;
            xm[l] -= step;
            let fd = (map(&xp) - map(&xm)) / (2.0 * step);
            let scale = 1.0 + g[l].abs() + fd.abs();
            if (fd - g[l]).abs() > 1e-3 * scale {
                return false;
            }
        }
    }
    true
}

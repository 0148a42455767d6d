//! Convergence reporting for limit operators.

use serde::Serialize;

/// Absolute-plus-relative tolerance used by every convergence test.
///
/// A residual `r` against a value `v` passes when
/// `|r| <= abs + rel * |v|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-8, rel: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    /// Symmetric tolerance with equal absolute and relative parts.
    pub fn of(eps: f64) -> Self {
        Tolerance { abs: eps, rel: eps }
    }

    pub fn accepts(&self, residual: f64, value: f64) -> bool {
        residual.abs() <= self.abs + self.rel * value.abs()
    }
}

/// Outcome of a two-level Cauchy test on the tail of the level values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    Diverged,
}

/// Minimum number of levels before a convergence verdict may be claimed.
pub const MIN_LEVELS_FOR_VERDICT: usize = 4;

/// Per-level values of a refinement limit, with the final residual and the
/// verdict of the two-level Cauchy test.
///
/// The verdict is stored even when it is `Diverged`; callers that need the
/// value regardless (an agreement check, a diagnostic sweep) read `value()`
/// and ignore it.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// `(level index, value at that level)`, coarsest first.
    pub per_level: Vec<(u32, f64)>,
    /// `|last - second to last|`; infinite when only one level exists.
    pub residual: f64,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    /// Builds a report from raw level values (index i becomes level i).
    pub fn from_values(values: &[f64], tol: Tolerance) -> Self {
        let per_level: Vec<(u32, f64)> =
            values.iter().enumerate().map(|(i, &v)| (i as u32, v)).collect();
        Self::from_levels(per_level, tol)
    }

    pub fn from_levels(per_level: Vec<(u32, f64)>, tol: Tolerance) -> Self {
        let n = per_level.len();
        let residual = if n >= 2 {
            (per_level[n - 1].1 - per_level[n - 2].1).abs()
        } else {
            f64::INFINITY
        };
        let value = per_level.last().map(|&(_, v)| v).unwrap_or(f64::NAN);
        let verdict = if n >= MIN_LEVELS_FOR_VERDICT
            && residual.is_finite()
            && value.is_finite()
            && tol.accepts(residual, value)
        {
            Verdict::Converged
        } else {
            Verdict::Diverged
        };
        ConvergenceReport { per_level, residual, verdict }
    }

    /// Value at the finest level.
    pub fn value(&self) -> f64 {
        self.per_level.last().map(|&(_, v)| v).unwrap_or(f64::NAN)
    }

    pub fn is_converged(&self) -> bool {
        self.verdict == Verdict::Converged
    }

    /// Accelerated estimate of the limit of the level values.
    ///
    /// Applies up to two Shanks transformations to the tail of the sequence.
    /// When the level error is a sum of geometric terms in the mesh (the case
    /// for piecewise-linear paths under dyadic refinement) this removes the
    /// two leading terms and the result is accurate far beyond the last raw
    /// level. Falls back to the raw final value when the sequence is too
    /// short or the differences degenerate.
    pub fn extrapolated(&self) -> f64 {
        let vals: Vec<f64> = self.per_level.iter().map(|&(_, v)| v).collect();
        extrapolate_tail(&vals)
    }
}

/// One Shanks step: `s[i+1] - (Δs[i+1])^2 / (Δs[i+1] - Δs[i])`.
fn shanks_once(s: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for w in s.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        let d1 = b - a;
        let d2 = c - b;
        let denom = d2 - d1;
        // A vanishing second difference means the tail is already flat;
        // keep the newest value rather than dividing by noise.
        if denom.abs() <= f64::EPSILON * (c.abs() + b.abs() + 1.0) {
            out.push(c);
        } else {
            out.push(c - d2 * d2 / denom);
        }
    }
    out
}

/// Extrapolates the limit of a convergent sequence from its tail.
pub fn extrapolate_tail(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    if values.len() < 3 {
        return *values.last().unwrap();
    }
    // Use at most the last 7 values: deep-tail entries are the accurate ones
    // and early levels can carry transients that poison the transform.
    let tail_start = values.len().saturating_sub(7);
    let mut cur: Vec<f64> = values[tail_start..].to_vec();
    for _ in 0..2 {
        if cur.len() < 3 {
            break;
        }
        let next = shanks_once(&cur);
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        cur = next;
    }
    *cur.last().unwrap()
}

/// Extrapolation for level values whose error shrinks by a known factor per
/// level: `x_m = L + c1 q^m + c2 q^2m + ...` with `q = ratio`.
///
/// Three Richardson stages eliminate the `q`, `q^2` and `q^3` terms exactly,
/// which Shanks cannot do for a mixture of geometric terms. Piecewise-linear
/// paths refined by a matching branching factor have exactly this error
/// shape, so the result is limited only by rounding and by genuinely
/// higher-order terms. Falls back to [`extrapolate_tail`] when the ratio is
/// out of range or the stages degenerate.
pub fn richardson_tail(values: &[f64], ratio: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    if !(ratio > 0.0 && ratio < 1.0) || values.len() < 2 {
        return extrapolate_tail(values);
    }
    // Five tail values feed three stages; older levels only add transients.
    let tail_start = values.len().saturating_sub(5);
    let mut cur: Vec<f64> = values[tail_start..].to_vec();
    let mut q = ratio;
    for _ in 0..3 {
        if cur.len() < 2 {
            break;
        }
        let next: Vec<f64> =
            cur.windows(2).map(|w| (w[1] - q * w[0]) / (1.0 - q)).collect();
        if next.iter().any(|v| !v.is_finite()) {
            return extrapolate_tail(values);
        }
        cur = next;
        q *= ratio;
    }
    *cur.last().unwrap()
}

/// A limit value together with how it was approached.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralResult {
    /// Value at the finest level of the report.
    pub value: f64,
    pub report: ConvergenceReport,
}

impl IntegralResult {
    pub fn new(report: ConvergenceReport) -> Self {
        IntegralResult { value: report.value(), report }
    }

    /// Result whose `value` is the accelerated limit estimate instead of the
    /// raw final level.
    pub fn new_extrapolated(report: ConvergenceReport) -> Self {
        IntegralResult { value: report.extrapolated(), report }
    }

    pub fn is_converged(&self) -> bool {
        self.report.is_converged()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_requires_minimum_levels() {
        let r = ConvergenceReport::from_values(&[1.0, 1.0], Tolerance::default());
        assert_eq!(r.verdict, Verdict::Diverged);
        assert_eq!(r.residual, 0.0);
        let r = ConvergenceReport::from_values(&[1.0, 1.0, 1.0, 1.0], Tolerance::default());
        assert_eq!(r.verdict, Verdict::Converged);
    }

    #[test]
    fn residual_is_last_gap() {
        let r = ConvergenceReport::from_values(&[0.0, 0.5, 0.75, 0.875], Tolerance::default());
        assert!((r.residual - 0.125).abs() < 1e-15);
        assert_eq!(r.verdict, Verdict::Diverged);
        assert_eq!(r.value(), 0.875);
    }

    #[test]
    fn shanks_nails_single_geometric() {
        // x_m = 3 - 2^-m converges to 3; one transform is exact.
        let vals: Vec<f64> = (0..6).map(|m| 3.0 - 0.5f64.powi(m)).collect();
        let lim = extrapolate_tail(&vals);
        assert!((lim - 3.0).abs() < 1e-12, "got {lim}");
    }

    #[test]
    fn shanks_improves_on_two_geometric_terms() {
        // x_m = 1 + 3*2^-m - 5*4^-m. Shanks estimates the decay ratios from
        // the data, so a two-term mixture is damped, not eliminated; the raw
        // tail error here is 5.6e-3 and the transform buys about three more
        // digits.
        let vals: Vec<f64> =
            (0..10).map(|m| 1.0 + 3.0 * 0.5f64.powi(m) - 5.0 * 0.25f64.powi(m)).collect();
        let lim = extrapolate_tail(&vals);
        assert!((lim - 1.0).abs() < 1e-5, "got {lim}");
    }

    #[test]
    fn richardson_kills_known_ratio_terms_exactly() {
        let vals: Vec<f64> = (0..10)
            .map(|m| {
                1.0 + 3.0 * 0.5f64.powi(m) - 5.0 * 0.25f64.powi(m)
                    + 7.0 * 0.125f64.powi(m)
            })
            .collect();
        let lim = richardson_tail(&vals, 0.5);
        assert!((lim - 1.0).abs() < 1e-12, "got {lim}");
        // Unknown ratio degrades gracefully to the generic transform.
        let fallback = richardson_tail(&vals, 1.5);
        assert!((fallback - 1.0).abs() < 1e-2);
    }

    #[test]
    fn extrapolation_of_flat_sequence_is_identity() {
        let vals = vec![2.0; 8];
        assert_eq!(extrapolate_tail(&vals), 2.0);
    }
}

//! Portfolio mathematics over regulated price paths: values, refinement-sum
//! gains, self-financing verification, discounting, the explicit arbitrage
//! construction for rough deterministic prices, and simple-strategy
//! approximation of continuous strategies.

use crate::error::Error;
use crate::integrate::lcs_integral_with;
use crate::paths::{Jump, NestedPartitionSequence, RegulatedPath, Side};
use crate::report::{ConvergenceReport, IntegralResult, Tolerance, Verdict};
use crate::variation::{default_p_grid, estimate_index};
use crate::Result;
use serde::Serialize;

/// Strictly positive asset paths `P_0 … P_ν` on one horizon.
#[derive(Debug, Clone)]
pub struct PriceSystem {
    assets: Vec<RegulatedPath>,
}

impl PriceSystem {
    pub fn new(assets: Vec<RegulatedPath>) -> Result<Self> {
        if assets.is_empty() {
            return Err(Error::domain("a price system needs at least one asset"));
        }
        let t_end = assets[0].t_end();
        for (k, p) in assets.iter().enumerate() {
            if p.t_end() != t_end {
                return Err(Error::domain("all assets must share one horizon"));
            }
            let floor = p.min_value();
            if !(floor > 0.0) {
                return Err(Error::domain(format!(
                    "asset {k} reaches {floor:.3e}; prices must stay strictly positive"
                )));
            }
        }
        Ok(PriceSystem { assets })
    }

    pub fn assets(&self) -> &[RegulatedPath] {
        &self.assets
    }

    pub fn num_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn t_end(&self) -> f64 {
        self.assets[0].t_end()
    }
}

/// Holdings `φ_0 … φ_ν`, one path per asset of the targeted system.
#[derive(Debug, Clone)]
pub struct Strategy {
    holdings: Vec<RegulatedPath>,
}

impl Strategy {
    pub fn new(holdings: Vec<RegulatedPath>) -> Result<Self> {
        if holdings.is_empty() {
            return Err(Error::domain("a strategy needs at least one holding path"));
        }
        let t_end = holdings[0].t_end();
        if holdings.iter().any(|h| h.t_end() != t_end) {
            return Err(Error::domain("all holdings must share one horizon"));
        }
        Ok(Strategy { holdings })
    }

    pub fn holdings(&self) -> &[RegulatedPath] {
        &self.holdings
    }

    pub fn t_end(&self) -> f64 {
        self.holdings[0].t_end()
    }
}

fn check_compatible(strategy: &Strategy, prices: &PriceSystem) -> Result<()> {
    if strategy.holdings.len() != prices.assets.len() {
        return Err(Error::domain(format!(
            "strategy has {} holdings for {} assets",
            strategy.holdings.len(),
            prices.assets.len()
        )));
    }
    if strategy.t_end() != prices.t_end() {
        return Err(Error::domain("strategy and prices must share one horizon"));
    }
    Ok(())
}

/// `V(t) = Σ φ_k(t) P_k(t)`.
pub fn portfolio_value(strategy: &Strategy, prices: &PriceSystem, t: f64) -> Result<f64> {
    check_compatible(strategy, prices)?;
    let mut v = 0.0;
    for (h, p) in strategy.holdings.iter().zip(&prices.assets) {
        v += h.eval(t)? * p.eval(t)?;
    }
    Ok(v)
}

/// The portfolio value as one path, with jumps combined exactly.
pub fn portfolio_value_path(strategy: &Strategy, prices: &PriceSystem) -> Result<RegulatedPath> {
    check_compatible(strategy, prices)?;
    let nu = prices.num_assets();
    let mut parts: Vec<&RegulatedPath> = strategy.holdings.iter().collect();
    parts.extend(prices.assets.iter());
    RegulatedPath::combine_many(&parts, |v| (0..nu).map(|k| v[k] * v[nu + k]).sum())
}

/// `G(t) = Σ_k ∫ φ_k dP_k` as left refinement sums along the shared
/// sequence. The verdict is the conjunction of the per-asset verdicts.
pub fn portfolio_gain(
    strategy: &Strategy,
    prices: &PriceSystem,
    t: f64,
    seq: &NestedPartitionSequence,
) -> Result<IntegralResult> {
    portfolio_gain_with(strategy, prices, t, seq, Tolerance::default())
}

pub fn portfolio_gain_with(
    strategy: &Strategy,
    prices: &PriceSystem,
    t: f64,
    seq: &NestedPartitionSequence,
    tol: Tolerance,
) -> Result<IntegralResult> {
    check_compatible(strategy, prices)?;
    let mut summed: Vec<f64> = Vec::new();
    let mut all_converged = true;
    for (h, p) in strategy.holdings.iter().zip(&prices.assets) {
        let part = lcs_integral_with(h, p, t, seq, tol)?;
        all_converged &= part.is_converged();
        if summed.is_empty() {
            summed = vec![0.0; part.report.per_level.len()];
        }
        for (acc, &(_, v)) in summed.iter_mut().zip(&part.report.per_level) {
            *acc += v;
        }
    }
    let mut report = ConvergenceReport::from_values(&summed, tol);
    if !all_converged {
        report.verdict = Verdict::Diverged;
    }
    Ok(IntegralResult::new(report))
}

/// Value path, finest-level gain samples, and the self-financing residual
/// `sup |V - V(0) - G|` over the finest partition points. The gain path
/// interpolates linearly between samples for display; residuals use the
/// sample values only.
#[derive(Debug, Clone)]
pub struct PortfolioLedger {
    pub value: RegulatedPath,
    pub gain: RegulatedPath,
    pub self_financing_residual: f64,
}

pub fn portfolio_ledger(
    strategy: &Strategy,
    prices: &PriceSystem,
    seq: &NestedPartitionSequence,
) -> Result<PortfolioLedger> {
    check_compatible(strategy, prices)?;
    if seq.t_end() != prices.t_end() {
        return Err(Error::domain("sequence and prices must share one horizon"));
    }
    let pts = seq.finest();
    let n = pts.len();
    let mut values = vec![0.0f64; n];
    let mut gains = vec![0.0f64; n];
    for (h, p) in strategy.holdings.iter().zip(&prices.assets) {
        let hv = h.eval_sorted(pts, Side::At);
        let pv = p.eval_sorted(pts, Side::At);
        let mut acc = 0.0;
        for i in 0..n {
            values[i] += hv[i] * pv[i];
            if i > 0 {
                acc += hv[i - 1] * (pv[i] - pv[i - 1]);
                gains[i] += acc;
            }
        }
    }
    let mut residual = 0.0f64;
    for i in 0..n {
        residual = residual.max((values[i] - values[0] - gains[i]).abs());
    }
    Ok(PortfolioLedger {
        value: portfolio_value_path(strategy, prices)?,
        gain: RegulatedPath::new(pts.to_vec(), gains, Vec::new())?,
        self_financing_residual: residual,
    })
}

/// Self-financing residual with a convergence gate: errors when the gain
/// sums fail a coarse Cauchy test, since the residual would then compare
/// against a number that does not settle.
pub fn self_financing_residual(
    strategy: &Strategy,
    prices: &PriceSystem,
    seq: &NestedPartitionSequence,
) -> Result<f64> {
    let gate = portfolio_gain_with(strategy, prices, prices.t_end(), seq, Tolerance::new(1e-9, 1e-2))?;
    if !gate.is_converged() {
        return Err(Error::Hypothesis(format!(
            "gain sums do not settle (last gap {:.3e}); the self-financing residual is undefined",
            gate.report.residual
        )));
    }
    Ok(portfolio_ledger(strategy, prices, seq)?.self_financing_residual)
}

/// `(1, P_1/P_0, …, P_ν/P_0)`. Idempotent: discounting a discounted system
/// reproduces it bit for bit.
pub fn discounted(prices: &PriceSystem) -> Result<PriceSystem> {
    let p0 = &prices.assets[0];
    let mut assets = Vec::with_capacity(prices.assets.len());
    for p in &prices.assets {
        assets.push(RegulatedPath::combine(p, p0, |a, b| a / b)?);
    }
    PriceSystem::new(assets)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscountInvarianceReport {
    pub residual_original: f64,
    pub residual_discounted: f64,
    pub tol: f64,
    pub original_within: bool,
    pub discounted_within: bool,
    /// Both residuals on the same side of the tolerance: the two systems
    /// agree on whether the strategy is self-financing.
    pub biconditional_holds: bool,
}

/// Compares the self-financing residual under the original and the
/// discounted prices at one absolute tolerance. Every price and holding
/// path must have an estimated variation index below 2.
pub fn discount_invariance_check(
    strategy: &Strategy,
    prices: &PriceSystem,
    seq: &NestedPartitionSequence,
    tol: f64,
) -> Result<DiscountInvarianceReport> {
    check_compatible(strategy, prices)?;
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    for (label, path) in strategy
        .holdings
        .iter()
        .enumerate()
        .map(|(k, h)| (format!("holding {k}"), h))
        .chain(prices.assets.iter().enumerate().map(|(k, p)| (format!("asset {k}"), p)))
    {
        let est = estimate_index(path, seq, &default_p_grid())?;
        if est.upsilon_hat >= 2.0 {
            return Err(Error::precondition(format!(
                "{label} has estimated variation index {:.3}; the invariance statement needs \
                 indices below 2",
                est.upsilon_hat
            )));
        }
    }
    let residual_original = portfolio_ledger(strategy, prices, seq)?.self_financing_residual;
    let bar = discounted(prices)?;
    let residual_discounted = portfolio_ledger(strategy, &bar, seq)?.self_financing_residual;
    let original_within = residual_original <= tol;
    let discounted_within = residual_discounted <= tol;
    Ok(DiscountInvarianceReport {
        residual_original,
        residual_discounted,
        tol,
        original_within,
        discounted_within,
        biconditional_holds: original_within == discounted_within,
    })
}

/// The explicit two-asset arbitrage built on a continuous rough path `f`
/// with `f(0) = 0` and `f(T) ≠ 0`: money market `e^{rt}`, risky asset
/// `e^{rt + σf}`, and holdings `(1 - e^{2σf}, 2(e^{σf} - 1))`, which give
/// portfolio value `e^{rt}(e^{σf} - 1)²`.
#[derive(Debug, Clone)]
pub struct ArbitrageConstruction {
    pub prices: PriceSystem,
    pub strategy: Strategy,
    /// σ = 0: holdings and value identically zero, nothing to exploit.
    pub degenerate: bool,
}

pub fn arbitrage_strategy(f: &RegulatedPath, r: f64, sigma: f64) -> Result<ArbitrageConstruction> {
    if !r.is_finite() || !sigma.is_finite() {
        return Err(Error::domain("rate and volatility must be finite"));
    }
    if !f.jumps().is_empty() {
        return Err(Error::precondition("the construction needs a continuous path"));
    }
    if f.eval(0.0)? != 0.0 {
        return Err(Error::precondition("the path must start at exactly 0"));
    }
    if f.eval(f.t_end())? == 0.0 {
        return Err(Error::precondition(
            "the path must end away from 0, else the terminal value vanishes",
        ));
    }
    let thinned = NestedPartitionSequence::thinned_from_grid(f.grid())?;
    if thinned.num_levels() < 4 {
        return Err(Error::precondition(
            "sample grid too coarse to estimate the variation index",
        ));
    }
    let est = estimate_index(f, &thinned, &default_p_grid())?;
    if est.upsilon_hat >= 2.0 {
        return Err(Error::precondition(format!(
            "estimated variation index {:.3} is not below 2",
            est.upsilon_hat
        )));
    }

    let ramp = RegulatedPath::new(f.grid().to_vec(), f.grid().to_vec(), Vec::new())?;
    let p0 = ramp.map(|t| (r * t).exp())?;
    let p1 = RegulatedPath::combine(&ramp, f, |t, x| (r * t + sigma * x).exp())?;
    let phi0 = f.map(|x| -(2.0 * sigma * x).exp_m1())?;
    let phi1 = f.map(|x| 2.0 * (sigma * x).exp_m1())?;
    Ok(ArbitrageConstruction {
        prices: PriceSystem::new(vec![p0, p1])?,
        strategy: Strategy::new(vec![phi0, phi1])?,
        degenerate: sigma == 0.0,
    })
}

const TOL_ZERO: f64 = 1e-12;
const TOL_POS_FACTOR: f64 = 1e-9;

/// True when the strategy starts from (numerically) nothing and ends with
/// something: `|V(0)| ≤ 1e-12` and `V(T) > 1e-9 · sup|V|`. The strategy
/// must first be self-financing within `tol` relative to `sup|V|`, else the
/// question is ill-posed and an error names the residual.
pub fn is_arbitrage(
    strategy: &Strategy,
    prices: &PriceSystem,
    seq: &NestedPartitionSequence,
    tol: f64,
) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let ledger = portfolio_ledger(strategy, prices, seq)?;
    let scale = ledger.value.max_abs_value();
    if ledger.self_financing_residual > tol * scale {
        return Err(Error::Hypothesis(format!(
            "not self-financing: residual {:.3e} exceeds {:.3e}",
            ledger.self_financing_residual,
            tol * scale
        )));
    }
    let v0 = portfolio_value(strategy, prices, 0.0)?;
    let vt = portfolio_value(strategy, prices, prices.t_end())?;
    Ok(v0.abs() <= TOL_ZERO && vt > TOL_POS_FACTOR * scale)
}

/// One simple self-financing strategy rebalanced on a partition level, with
/// its matched initial value and terminal value.
#[derive(Debug, Clone)]
pub struct SimpleStrategyLevel {
    pub level: u32,
    pub points: usize,
    pub strategy: Strategy,
    pub initial_value: f64,
    pub terminal_value: f64,
    /// Self-financing residual of the simple strategy over its own
    /// rebalance points; rounding-sized by construction.
    pub residual: f64,
}

/// Builds, for each requested partition level, the piecewise-constant
/// strategy that holds `φ(0)` on the first step and then rescales the
/// target holdings by the ratio of realized to target value:
/// `φ^N_k = φ_k(t_i) V^N(t_i) / V(t_i)` on `[t_i, t_{i+1})`. The realized
/// start value matches `V(0)` exactly, and each simple strategy is
/// self-financing by telescoping. Requires the target value bounded away
/// from zero.
pub fn simple_approximation(
    strategy: &Strategy,
    prices: &PriceSystem,
    seq: &NestedPartitionSequence,
    levels: &[u32],
) -> Result<Vec<SimpleStrategyLevel>> {
    check_compatible(strategy, prices)?;
    if seq.t_end() != prices.t_end() {
        return Err(Error::domain("sequence and prices must share one horizon"));
    }
    let value_path = portfolio_value_path(strategy, prices)?;
    let floor = value_path.min_value();
    if !(floor > 0.0) {
        return Err(Error::precondition(format!(
            "target portfolio value reaches {floor:.3e}; the rescaling needs it bounded away \
             from 0"
        )));
    }
    let nu = prices.num_assets();
    let t_end = prices.t_end();
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        if level as usize >= seq.num_levels() {
            return Err(Error::domain(format!(
                "level {level} outside the sequence's {} levels",
                seq.num_levels()
            )));
        }
        let pts = seq.level(level as usize);
        let k_steps = pts.len() - 1;
        let hv: Vec<Vec<f64>> =
            strategy.holdings.iter().map(|h| h.eval_sorted(pts, Side::At)).collect();
        let pv: Vec<Vec<f64>> =
            prices.assets.iter().map(|p| p.eval_sorted(pts, Side::At)).collect();
        let target: Vec<f64> =
            (0..pts.len()).map(|i| (0..nu).map(|k| hv[k][i] * pv[k][i]).sum()).collect();

        let mut constants: Vec<Vec<f64>> = vec![Vec::with_capacity(k_steps); nu];
        for k in 0..nu {
            constants[k].push(hv[k][0]);
        }
        let initial_value: f64 = (0..nu).map(|k| constants[k][0] * pv[k][0]).sum();
        let mut realized = vec![initial_value];
        for i in 1..k_steps {
            let v_n: f64 = (0..nu).map(|k| constants[k][i - 1] * pv[k][i]).sum();
            realized.push(v_n);
            let ratio = v_n / target[i];
            for k in 0..nu {
                constants[k].push(hv[k][i] * ratio);
            }
        }
        let terminal_value: f64 = (0..nu).map(|k| constants[k][k_steps - 1] * pv[k][k_steps]).sum();
        realized.push(terminal_value);

        let mut residual = 0.0f64;
        let mut gains = vec![0.0f64; nu];
        for i in 1..=k_steps {
            for k in 0..nu {
                gains[k] += constants[k][i - 1] * (pv[k][i] - pv[k][i - 1]);
            }
            let g: f64 = gains.iter().sum();
            residual = residual.max((realized[i] - initial_value - g).abs());
        }

        let mut holdings = Vec::with_capacity(nu);
        for k in 0..nu {
            let mut jumps = Vec::new();
            for i in 1..k_steps {
                let d = constants[k][i] - constants[k][i - 1];
                if d != 0.0 {
                    jumps.push(Jump::new(pts[i], d, 0.0));
                }
            }
            holdings.push(RegulatedPath::new(
                vec![0.0, t_end],
                vec![constants[k][0], constants[k][0]],
                jumps,
            )?);
        }
        out.push(SimpleStrategyLevel {
            level,
            points: pts.len(),
            strategy: Strategy::new(holdings)?,
            initial_value,
            terminal_value,
            residual,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_weierstrass;

    fn unit_bond(t_end: f64) -> RegulatedPath {
        RegulatedPath::constant(t_end, 1.0)
    }

    #[test]
    fn value_of_pure_bond_position() {
        let prices = PriceSystem::new(vec![unit_bond(1.0)]).unwrap();
        let strat = Strategy::new(vec![RegulatedPath::constant(1.0, 1.0)]).unwrap();
        assert_eq!(portfolio_value(&strat, &prices, 0.7).unwrap(), 1.0);
        let two = Strategy::new(vec![
            RegulatedPath::constant(1.0, 1.0),
            RegulatedPath::constant(1.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(portfolio_value(&two, &prices, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn constant_strategy_gain_telescopes() {
        let p1 = RegulatedPath::sampled(1.0, 128, |t| (0.5 * t).exp() + 0.2).unwrap();
        let prices = PriceSystem::new(vec![unit_bond(1.0), p1.clone()]).unwrap();
        let strat = Strategy::new(vec![
            RegulatedPath::constant(1.0, 2.0),
            RegulatedPath::constant(1.0, 3.0),
        ])
        .unwrap();
        let seq = NestedPartitionSequence::dyadic(1.0, 8);
        let g = portfolio_gain(&strat, &prices, 1.0, &seq).unwrap();
        assert!(g.is_converged());
        let expect = 3.0 * (p1.eval(1.0).unwrap() - p1.eval(0.0).unwrap());
        assert!((g.value - expect).abs() < 1e-12);
        for &(_, v) in &g.report.per_level {
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn buy_and_hold_gain_is_price_increment() {
        let p1 = RegulatedPath::sampled(1.0, 256, f64::exp).unwrap();
        let prices = PriceSystem::new(vec![unit_bond(1.0), p1.clone()]).unwrap();
        let strat = Strategy::new(vec![
            RegulatedPath::constant(1.0, 0.0),
            RegulatedPath::constant(1.0, 1.0),
        ])
        .unwrap();
        let seq = NestedPartitionSequence::dyadic(1.0, 9);
        let g = portfolio_gain(&strat, &prices, 1.0, &seq).unwrap();
        assert!((g.value - (p1.eval(1.0).unwrap() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn broken_strategy_leaves_a_residual() {
        let p1 = RegulatedPath::sampled(1.0, 256, f64::exp).unwrap();
        let prices = PriceSystem::new(vec![unit_bond(1.0), p1]).unwrap();
        let seq = NestedPartitionSequence::dyadic(1.0, 10);

        let hold = Strategy::new(vec![
            RegulatedPath::constant(1.0, 0.0),
            RegulatedPath::constant(1.0, 1.0),
        ])
        .unwrap();
        assert!(self_financing_residual(&hold, &prices, &seq).unwrap() < 1e-12);

        let stepped = RegulatedPath::new(
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![Jump::new(0.5, 1.0, 0.0)],
        )
        .unwrap();
        let broken = Strategy::new(vec![RegulatedPath::constant(1.0, 0.0), stepped]).unwrap();
        let res = self_financing_residual(&broken, &prices, &seq).unwrap();
        assert!(res > 1.0, "unfunded doubling at t=0.5 should cost about e^0.5, got {res}");
    }

    #[test]
    fn discounting_flattens_and_is_idempotent() {
        let growth = RegulatedPath::sampled(1.0, 64, |t| (0.3 * t).exp()).unwrap();
        let prices = PriceSystem::new(vec![growth.clone(), growth]).unwrap();
        let bar = discounted(&prices).unwrap();
        for asset in bar.assets() {
            for &v in asset.base_values() {
                assert_eq!(v, 1.0);
            }
        }
        let bar2 = discounted(&bar).unwrap();
        for (a, b) in bar.assets().iter().zip(bar2.assets()) {
            assert_eq!(a.base_values(), b.base_values());
            assert_eq!(a.grid(), b.grid());
        }
    }

    #[test]
    fn discount_invariance_for_good_and_broken_strategies() {
        let f = gen_weierstrass(1.0, 1 << 9, 0.5, 3.0).unwrap();
        let built = arbitrage_strategy(&f, 0.05, 0.3).unwrap();
        let seq = NestedPartitionSequence::dyadic(1.0, 14);
        let good =
            discount_invariance_check(&built.strategy, &built.prices, &seq, 1e-2).unwrap();
        assert!(good.original_within && good.discounted_within, "{good:?}");
        assert!(good.biconditional_holds);

        let stepped = RegulatedPath::new(
            vec![0.0, 1.0],
            vec![0.0, 0.0],
            vec![Jump::new(0.5, 1.0, 0.0)],
        )
        .unwrap();
        let broken = Strategy::new(vec![
            built.strategy.holdings()[0].clone(),
            RegulatedPath::combine(&built.strategy.holdings()[1], &stepped, |a, b| a + b)
                .unwrap(),
        ])
        .unwrap();
        let bad = discount_invariance_check(&broken, &built.prices, &seq, 1e-2).unwrap();
        assert!(!bad.original_within && !bad.discounted_within, "{bad:?}");
        assert!(bad.biconditional_holds);
    }

    #[test]
    fn arbitrage_construction_matches_its_closed_form() {
        let f = gen_weierstrass(1.0, 1 << 10, 0.5, 3.0).unwrap();
        let built = arbitrage_strategy(&f, 0.05, 0.3).unwrap();
        assert!(!built.degenerate);
        assert_eq!(portfolio_value(&built.strategy, &built.prices, 0.0).unwrap(), 0.0);
        for &t in f.grid() {
            let v = portfolio_value(&built.strategy, &built.prices, t).unwrap();
            let y = 0.3 * f.eval(t).unwrap();
            let closed = (0.05 * t).exp() * y.exp_m1() * y.exp_m1();
            assert!(
                (v - closed).abs() <= 1e-10 * closed.abs() + 1e-15,
                "t={t}: value {v} vs closed {closed}"
            );
        }
    }

    #[test]
    fn arbitrage_preconditions() {
        let zero = RegulatedPath::sampled(1.0, 64, |_| 0.0).unwrap();
        assert!(matches!(arbitrage_strategy(&zero, 0.0, 1.0), Err(Error::Precondition(_))));
        let jumpy = RegulatedPath::new(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![Jump::new(0.5, 0.2, 0.0)],
        )
        .unwrap();
        assert!(matches!(arbitrage_strategy(&jumpy, 0.0, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn arbitrage_detection_and_degenerate_case() {
        let f = gen_weierstrass(1.0, 1 << 10, 0.5, 3.0).unwrap();
        let built = arbitrage_strategy(&f, 0.05, 0.3).unwrap();
        let seq = NestedPartitionSequence::dyadic(1.0, 16);
        assert!(is_arbitrage(&built.strategy, &built.prices, &seq, 0.01).unwrap());

        let hold = Strategy::new(vec![
            RegulatedPath::constant(1.0, 0.0),
            RegulatedPath::constant(1.0, 1.0),
        ])
        .unwrap();
        assert!(!is_arbitrage(&hold, &built.prices, &seq, 0.01).unwrap());

        let flat = arbitrage_strategy(&f, 0.05, 0.0).unwrap();
        assert!(flat.degenerate);
        assert!(!is_arbitrage(&flat.strategy, &flat.prices, &seq, 0.01).unwrap());
    }

    #[test]
    fn linear_path_arbitrage_terminal_value() {
        let f = RegulatedPath::sampled(1.0, 64, |t| t).unwrap();
        let built = arbitrage_strategy(&f, 0.0, 1.0).unwrap();
        let vt = portfolio_value(&built.strategy, &built.prices, 1.0).unwrap();
        let expect = (1.0f64.exp() - 1.0).powi(2);
        assert!((vt - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn simple_approximation_fixes_constant_strategies() {
        let p1 = RegulatedPath::sampled(1.0, 128, |t| (0.4 * t).exp()).unwrap();
        let prices = PriceSystem::new(vec![unit_bond(1.0), p1]).unwrap();
        let strat = Strategy::new(vec![
            RegulatedPath::constant(1.0, 2.0),
            RegulatedPath::constant(1.0, 1.0),
        ])
        .unwrap();
        let seq = NestedPartitionSequence::dyadic(1.0, 8);
        let levels = simple_approximation(&strat, &prices, &seq, &[3, 5]).unwrap();
        let v_t = portfolio_value(&strat, &prices, 1.0).unwrap();
        for lvl in &levels {
            assert_eq!(lvl.initial_value, portfolio_value(&strat, &prices, 0.0).unwrap());
            assert_eq!(lvl.terminal_value, v_t);
            for h in lvl.strategy.holdings() {
                assert!(h.jumps().is_empty());
            }
            assert!(lvl.residual < 1e-14);
        }
    }

    #[test]
    fn simple_approximation_converges_for_smooth_strategies() {
        let n = 1 << 10;
        let p1 = RegulatedPath::sampled(1.0, n, f64::exp).unwrap();
        let prices = PriceSystem::new(vec![unit_bond(1.0), p1.clone()]).unwrap();
        let seq = NestedPartitionSequence::dyadic(1.0, 10);
        let phi1 = RegulatedPath::sampled(1.0, n, |t| 2.0 - t).unwrap();

        // Fund phi0 from the finest-level gains so the target is exactly
        // self-financing with start value 5.
        let pts = seq.finest().to_vec();
        let hv = phi1.eval_sorted(&pts, Side::At);
        let pv = p1.eval_sorted(&pts, Side::At);
        let mut phi0_vals = Vec::with_capacity(pts.len());
        let mut gain = 0.0;
        phi0_vals.push(5.0 - hv[0] * pv[0]);
        for i in 1..pts.len() {
            gain += hv[i - 1] * (pv[i] - pv[i - 1]);
            phi0_vals.push(5.0 + gain - hv[i] * pv[i]);
        }
        let phi0 = RegulatedPath::new(pts, phi0_vals, Vec::new()).unwrap();
        let strat = Strategy::new(vec![phi0, phi1]).unwrap();
        assert!(self_financing_residual(&strat, &prices, &seq).unwrap() < 1e-12);

        let levels = simple_approximation(&strat, &prices, &seq, &[3, 5, 7]).unwrap();
        let v_t = portfolio_value(&strat, &prices, 1.0).unwrap();
        let errs: Vec<f64> =
            levels.iter().map(|l| (l.terminal_value - v_t).abs()).collect();
        println!("simple-strategy terminal errors: {errs:?}");
        assert!(errs[2] < errs[0]);
        assert!(errs[2] < 1e-3 * v_t);
        for lvl in &levels {
            assert_eq!(lvl.initial_value, 5.0);
            assert!(lvl.residual < 1e-12);
            assert!(lvl.strategy.holdings()[1].is_one_sided());
        }
    }

    #[test]
    fn simple_approximation_needs_positive_value() {
        let f = gen_weierstrass(1.0, 1 << 8, 0.5, 3.0).unwrap();
        let built = arbitrage_strategy(&f, 0.05, 0.3).unwrap();
        let seq = NestedPartitionSequence::dyadic(1.0, 8);
        assert!(matches!(
            simple_approximation(&built.strategy, &built.prices, &seq, &[4]),
            Err(Error::Precondition(_))
        ));
    }
}

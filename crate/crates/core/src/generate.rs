//! Path generators: Brownian and fractional Brownian sample paths, symmetric
//! stable walks with explicit jump records, Weierstrass curves, deterministic
//! exponentials, and the pointwise exponential price transform.

use crate::error::Error;
use crate::paths::{uniform_grid, CrashTime, Jump, RegulatedPath, Side};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Exp1, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// One stream per component: the global seed is mixed with an FNV hash of
/// the component label, then finalized with a splitmix64 round. The same
/// (seed, label) always yields the same stream, and distinct labels decouple
/// the streams drawn from one global seed.
pub fn split_seed(seed: u64, label: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in label.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(seed ^ h)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn rng_for(seed: u64, label: &str) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(split_seed(seed, label))
}

/// Which path family to generate and with what parameters. Serialized into
/// run configs and reports, so every random artifact names its recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Brownian {
        t_end: f64,
        n: usize,
    },
    Fbm {
        t_end: f64,
        n: usize,
        hurst: f64,
    },
    StableLevy {
        t_end: f64,
        n: usize,
        alpha: f64,
        #[serde(default = "default_threshold_factor")]
        threshold_factor: f64,
    },
    Weierstrass {
        t_end: f64,
        n: usize,
        a: f64,
        b: f64,
    },
    DeterministicExp {
        t_end: f64,
        n: usize,
        rate: f64,
    },
    CustomJump {
        t_end: f64,
        n: usize,
        slope: f64,
        jumps: Vec<(f64, f64, f64)>,
    },
}

fn default_threshold_factor() -> f64 {
    4.0
}

impl GeneratorSpec {
    pub fn generate(&self, seed: u64) -> Result<RegulatedPath> {
        match *self {
            GeneratorSpec::Brownian { t_end, n } => gen_brownian(t_end, n, seed),
            GeneratorSpec::Fbm { t_end, n, hurst } => gen_fbm(t_end, n, hurst, seed),
            GeneratorSpec::StableLevy { t_end, n, alpha, threshold_factor } => {
                gen_stable_levy_with(t_end, n, alpha, threshold_factor, seed)
            }
            GeneratorSpec::Weierstrass { t_end, n, a, b } => gen_weierstrass(t_end, n, a, b),
            GeneratorSpec::DeterministicExp { t_end, n, rate } => {
                check_grid_params(t_end, n)?;
                if !rate.is_finite() {
                    return Err(Error::domain("rate must be finite"));
                }
                RegulatedPath::sampled(t_end, n, |t| (rate * t).exp())
            }
            GeneratorSpec::CustomJump { t_end, n, slope, ref jumps } => {
                check_grid_params(t_end, n)?;
                if !slope.is_finite() {
                    return Err(Error::domain("slope must be finite"));
                }
                let grid = uniform_grid(t_end, n);
                let base = grid.iter().map(|&t| slope * t).collect();
                let jumps = jumps.iter().map(|&(t, l, r)| Jump::new(t, l, r)).collect();
                RegulatedPath::new(grid, base, jumps)
            }
        }
    }
}

fn check_grid_params(t_end: f64, n: usize) -> Result<()> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::domain("horizon must be positive and finite"));
    }
    if n < 2 {
        return Err(Error::domain("need at least 2 sample steps"));
    }
    Ok(())
}

/// Gaussian random walk on the uniform grid: n increments of variance
/// `t_end/n`, continuous, starting at 0.
pub fn gen_brownian(t_end: f64, n: usize, seed: u64) -> Result<RegulatedPath> {
    check_grid_params(t_end, n)?;
    let mut rng = rng_for(seed, "brownian");
    let step = (t_end / n as f64).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        acc += step * z;
        values.push(acc);
    }
    RegulatedPath::new(uniform_grid(t_end, n), values, Vec::new())
}

/// Fractional Brownian sample path with exact increment covariance, via
/// circulant embedding of the fractional Gaussian noise covariance; falls
/// back to a dense factorization for small n if the embedding fails.
pub fn gen_fbm(t_end: f64, n: usize, hurst: f64, seed: u64) -> Result<RegulatedPath> {
    check_grid_params(t_end, n)?;
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::domain(format!("hurst index {hurst} outside (0, 1)")));
    }
    let mut rng = rng_for(seed, "fbm");
    let noise = match fgn_circulant(n, hurst, &mut rng) {
        Ok(x) => x,
        Err(_) if n <= 1 << 12 => {
            let mut rng = rng_for(seed, "fbm-dense");
            fgn_cholesky(n, hurst, &mut rng)?
        }
        Err(e) => return Err(e),
    };
    let scale = (t_end / n as f64).powf(hurst);
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for x in noise {
        acc += scale * x;
        values.push(acc);
    }
    RegulatedPath::new(uniform_grid(t_end, n), values, Vec::new())
}

/// Autocovariance of unit-spacing fractional Gaussian noise at lag k.
fn fgn_autocov(k: usize, hurst: f64) -> f64 {
    let k = k as f64;
    let two_h = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

fn fgn_circulant(n: usize, hurst: f64, rng: &mut ChaCha12Rng) -> Result<Vec<f64>> {
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(m);
    for k in 0..=n {
        row.push(Complex::new(fgn_autocov(k, hurst), 0.0));
    }
    for k in 1..n {
        row.push(Complex::new(fgn_autocov(n - k, hurst), 0.0));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);

    let lambda_max = row.iter().map(|c| c.re).fold(0.0f64, f64::max);
    let mut lambda = Vec::with_capacity(m);
    for c in &row {
        if c.re < -1e-8 * lambda_max {
            return Err(Error::Generator(format!(
                "circulant embedding has eigenvalue {:.3e}; not nonnegative definite",
                c.re
            )));
        }
        lambda.push(c.re.max(0.0));
    }

    let mf = m as f64;
    let mut z = vec![Complex::new(0.0, 0.0); m];
    let g0: f64 = rng.sample(StandardNormal);
    z[0] = Complex::new((lambda[0] / mf).sqrt() * g0, 0.0);
    let gn: f64 = rng.sample(StandardNormal);
    z[n] = Complex::new((lambda[n] / mf).sqrt() * gn, 0.0);
    for k in 1..n {
        let a = (lambda[k] / (2.0 * mf)).sqrt();
        let u: f64 = rng.sample(StandardNormal);
        let v: f64 = rng.sample(StandardNormal);
        z[k] = Complex::new(a * u, a * v);
        z[m - k] = Complex::new(a * u, -a * v);
    }
    fft.process(&mut z);
    Ok(z.into_iter().take(n).map(|c| c.re).collect())
}

fn fgn_cholesky(n: usize, hurst: f64, rng: &mut ChaCha12Rng) -> Result<Vec<f64>> {
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = fgn_autocov(i - j, hurst);
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Generator(format!(
                        "dense factorization pivot {s:.3e} at row {i}"
                    )));
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Ok((0..n).map(|i| (0..=i).map(|k| l[i][k] * z[k]).sum()).collect())
}

/// Symmetric stable random walk: i.i.d. increments with stability index
/// alpha, scale `(t_end/n)^{1/alpha}`. Increments beyond
/// `threshold_factor` scale units are recorded as left-side jumps at the
/// step's right endpoint, so the path is one-sided (right-continuous).
pub fn gen_stable_levy(t_end: f64, n: usize, alpha: f64, seed: u64) -> Result<RegulatedPath> {
    gen_stable_levy_with(t_end, n, alpha, default_threshold_factor(), seed)
}

pub fn gen_stable_levy_with(
    t_end: f64,
    n: usize,
    alpha: f64,
    threshold_factor: f64,
    seed: u64,
) -> Result<RegulatedPath> {
    check_grid_params(t_end, n)?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("stability index {alpha} outside (0, 2)")));
    }
    if !(threshold_factor > 0.0) {
        return Err(Error::domain("jump threshold factor must be positive"));
    }
    let mut rng = rng_for(seed, "stable");
    let scale = (t_end / n as f64).powf(1.0 / alpha);
    let threshold = threshold_factor * scale;
    let grid = uniform_grid(t_end, n);
    let mut base = Vec::with_capacity(n + 1);
    base.push(0.0);
    let mut jumps = Vec::new();
    let mut acc = 0.0;
    for i in 1..=n {
        let u = std::f64::consts::PI * (rng.random::<f64>() - 0.5);
        let w: f64 = rng.sample(Exp1);
        let x = (alpha * u).sin() / u.cos().powf(1.0 / alpha)
            * (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha);
        let inc = scale * x;
        if inc.abs() > threshold {
            jumps.push(Jump::new(grid[i], inc, 0.0));
        } else {
            acc += inc;
        }
        base.push(acc);
    }
    RegulatedPath::new(grid, base, jumps)
}

/// Weierstrass curve `Σ a^k cos(b^k π t)` shifted to start at 0, truncated
/// once the amplitudes fall below 1e-12. Deterministic and continuous with
/// Hoelder exponent `log(1/a)/log b`.
pub fn gen_weierstrass(t_end: f64, n: usize, a: f64, b: f64) -> Result<RegulatedPath> {
    check_grid_params(t_end, n)?;
    if !(a > 0.0 && a < 1.0 && b > 1.0 && a * b > 1.0) {
        return Err(Error::domain(format!(
            "weierstrass parameters need 0 < a < 1 < b with ab > 1; got a={a}, b={b}"
        )));
    }
    let mut terms = 1usize;
    let mut amp = a;
    while amp >= 1e-12 && terms < 200 {
        amp *= a;
        terms += 1;
    }
    let amps: Vec<f64> = (0..terms).map(|k| a.powi(k as i32)).collect();
    let freqs: Vec<f64> = (0..terms).map(|k| b.powi(k as i32) * std::f64::consts::PI).collect();
    let offset: f64 = amps.iter().sum();
    RegulatedPath::sampled(t_end, n, |t| {
        let s: f64 = amps.iter().zip(&freqs).map(|(&amp, &w)| amp * (w * t).cos()).sum();
        s - offset
    })
}

/// The exponential price of a one-sided return path, evaluated pointwise by
/// the closed product form and frozen at the return crash time: after the
/// first jump to -1 or below the price stays at its last meaningful value.
/// Strictly positive before the crash; starts at 1.
pub fn gen_exponential_prices(ret: &RegulatedPath) -> Result<RegulatedPath> {
    let crash = crate::paths::crash_time_return(ret)?;
    let jump_times: Vec<f64> = ret.jumps().iter().map(|j| j.time).collect();
    let grid = crate::paths::merge_sorted(ret.grid(), &jump_times);
    let values: Vec<f64> = grid.iter().map(|&t| frozen_price(ret, &crash, t, Side::At)).collect();
    let mut jumps = Vec::new();
    for j in ret.jumps() {
        let l = frozen_price(ret, &crash, j.time, Side::At)
            - frozen_price(ret, &crash, j.time, Side::Left);
        let r = frozen_price(ret, &crash, j.time, Side::Right)
            - frozen_price(ret, &crash, j.time, Side::At);
        jumps.push(Jump::new(j.time, l, r));
    }
    RegulatedPath::from_values(grid, values, jumps)
}

fn frozen_price(ret: &RegulatedPath, crash: &CrashTime, t: f64, side: Side) -> f64 {
    let (cut, cut_side) = match *crash {
        CrashTime::At { time } => (time, Side::Left),
        CrashTime::JustAfter { time } => (time, Side::At),
        CrashTime::Never { time } => (time, Side::Right),
    };
    let frozen = match (t.total_cmp(&cut), side, cut_side) {
        (std::cmp::Ordering::Greater, _, _) => true,
        (std::cmp::Ordering::Equal, Side::At | Side::Right, Side::Left) => true,
        (std::cmp::Ordering::Equal, Side::Right, Side::At) => true,
        _ => false,
    };
    let (t, side) = if frozen { (cut, cut_side) } else { (t, side) };
    closed_price(ret, t, side)
}

fn closed_price(ret: &RegulatedPath, t: f64, side: Side) -> f64 {
    let mut p = (ret.value(t, side) - ret.value(0.0, Side::At)).exp();
    for j in ret.jumps() {
        let left_in = match side {
            Side::Left => j.time > 0.0 && j.time < t,
            Side::At | Side::Right => j.time > 0.0 && j.time <= t,
        };
        let right_in = match side {
            Side::Left | Side::At => j.time < t,
            Side::Right => j.time <= t,
        };
        if left_in && j.left != 0.0 {
            p *= (1.0 + j.left) * (-j.left).exp();
        }
        if right_in && j.right != 0.0 {
            p *= (1.0 + j.right) * (-j.right).exp();
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_is_deterministic_per_seed() {
        let a = gen_brownian(1.0, 64, 7).unwrap();
        let b = gen_brownian(1.0, 64, 7).unwrap();
        let c = gen_brownian(1.0, 64, 8).unwrap();
        assert_eq!(a.base_values(), b.base_values());
        assert_ne!(a.base_values(), c.base_values());
        assert_eq!(a.eval(0.0).unwrap(), 0.0);
        assert!(a.jumps().is_empty());
    }

    #[test]
    fn brownian_terminal_mean_is_small() {
        let runs = 10_000;
        let mut sum = 0.0;
        for seed in 0..runs {
            let p = gen_brownian(1.0, 2, seed).unwrap();
            sum += p.eval(1.0).unwrap();
        }
        let mean = sum / runs as f64;
        assert!(mean.abs() < 3.0 * (1.0 / runs as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn fbm_terminal_variance_matches() {
        let mut sum_sq = 0.0;
        let runs = 400;
        for seed in 0..runs {
            let p = gen_fbm(1.0, 64, 0.75, seed).unwrap();
            let v = p.eval(1.0).unwrap();
            sum_sq += v * v;
        }
        let var = sum_sq / runs as f64;
        println!("empirical Var[B_H(1)] = {var:.4}");
        assert!((var - 1.0).abs() < 0.25, "var {var}");
    }

    #[test]
    fn fbm_increment_correlation_tracks_hurst() {
        let corr = |h: f64| {
            let p = gen_fbm(1.0, 1024, h, 11).unwrap();
            let vals = p.base_values();
            let incs: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
            let m = incs.iter().sum::<f64>() / incs.len() as f64;
            let var = incs.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
            let cov: f64 = incs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
            cov / var
        };
        let rho_half = corr(0.5);
        let rho_rough = corr(0.75);
        println!("adjacent-increment correlation: H=0.5 -> {rho_half:.3}, H=0.75 -> {rho_rough:.3}");
        assert!(rho_half.abs() < 0.15);
        assert!(rho_rough > 0.25);
    }

    #[test]
    fn fbm_dense_fallback_matches_variance() {
        let mut rng = rng_for(3, "fbm-dense-test");
        let mut sum_sq = 0.0;
        let runs = 300;
        for _ in 0..runs {
            let noise = fgn_cholesky(64, 0.7, &mut rng).unwrap();
            let v: f64 = noise.iter().sum::<f64>() * (1.0f64 / 64.0).powf(0.7);
            sum_sq += v * v;
        }
        let var = sum_sq / runs as f64;
        assert!((var - 1.0).abs() < 0.3, "var {var}");
    }

    #[test]
    fn fbm_rejects_bad_hurst() {
        assert!(gen_fbm(1.0, 16, 0.0, 1).is_err());
        assert!(gen_fbm(1.0, 16, 1.0, 1).is_err());
    }

    #[test]
    fn stable_walk_records_large_increments_as_jumps() {
        let p = gen_stable_levy(1.0, 512, 1.2, 42).unwrap();
        assert_eq!(p.eval(0.0).unwrap(), 0.0);
        assert!(p.is_one_sided());
        assert!(!p.jumps().is_empty(), "expect some threshold crossings at alpha=1.2");
        let threshold = 4.0 * (1.0f64 / 512.0).powf(1.0 / 1.2);
        for j in p.jumps() {
            assert_eq!(j.right, 0.0);
            assert!(j.left.abs() > threshold);
        }
        let base = p.base_values();
        for w in base.windows(2) {
            assert!((w[1] - w[0]).abs() <= threshold);
        }
        let again = gen_stable_levy(1.0, 512, 1.2, 42).unwrap();
        assert_eq!(p.base_values(), again.base_values());
        assert!(gen_stable_levy(1.0, 16, 2.0, 1).is_err());
    }

    #[test]
    fn weierstrass_frozen_values() {
        let w = gen_weierstrass(1.0, 256, 0.5, 3.0).unwrap();
        assert_eq!(w.eval(0.0).unwrap(), 0.0);
        // cos(3^k pi) = -1 for every k, so W(1) = -2 * sum of amplitudes.
        assert!((w.eval(1.0).unwrap() + 4.0).abs() < 1e-8);
        assert!(gen_weierstrass(1.0, 16, 0.5, 1.5).is_err());
        assert!(gen_weierstrass(1.0, 16, 1.2, 3.0).is_err());
    }

    #[test]
    fn exponential_prices_of_continuous_returns() {
        let r = RegulatedPath::sampled(1.0, 32, |t| 0.3 * t).unwrap();
        let p = gen_exponential_prices(&r).unwrap();
        for (&t, &v) in p.grid().iter().zip(p.base_values()) {
            assert!((v - (0.3 * t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn exponential_prices_jump_factor() {
        let r = RegulatedPath::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 0.1, 0.2],
            vec![Jump::new(0.5, -0.5, 0.0)],
        )
        .unwrap();
        let p = gen_exponential_prices(&r).unwrap();
        let before = p.eval_left(0.5).unwrap();
        let at = p.eval(0.5).unwrap();
        assert!((at / before - 0.5).abs() < 1e-14);
        // R(0.5) = 0.1 - 0.5, so P = e^{-0.4} * (1 - 0.5) * e^{0.5}.
        let expect = 0.5 * (0.1f64).exp();
        assert!((at - expect).abs() < 1e-14);
        assert!(p.min_value() > 0.0);
    }

    #[test]
    fn exponential_prices_freeze_at_crash() {
        let r = RegulatedPath::new(
            vec![0.0, 0.5, 1.0],
            vec![0.0, 0.2, 0.4],
            vec![Jump::new(0.5, -1.0, 0.0)],
        )
        .unwrap();
        let p = gen_exponential_prices(&r).unwrap();
        let frozen = p.eval_left(0.5).unwrap();
        assert!((frozen - (0.2f64).exp()).abs() < 1e-14);
        assert_eq!(p.eval(0.5).unwrap(), frozen);
        assert_eq!(p.eval(0.75).unwrap(), frozen);
        assert_eq!(p.eval(1.0).unwrap(), frozen);
        assert!(p.jumps().is_empty());
    }
}

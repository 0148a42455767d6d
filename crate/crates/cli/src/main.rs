//! Command-line front end for the pathwise calculus crate.
//!
//! Every subcommand reads/writes the shared CSV path format, reports results
//! as JSON (`--json-out`, `-` for stdout), and encodes its verdict in the
//! exit status: 0 for converged/pass, 2 for a diverged or failed verdict,
//! 1 for usage errors and malformed inputs. All randomness flows from one
//! seed (`--seed`, overridden by `PATHCALC_SEED`), expanded per component
//! with the crate's seed splitter, so identical configurations produce
//! byte-identical artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pathcalc_core::evolution::{
    self, chain_rule_eval_with, duality_check, ChainRuleReport, EvolutionPair,
};
use pathcalc_core::generate::split_seed;
use pathcalc_core::integrate::{lcs_integral_with, ly_integral_with, rs_refinement_integral_with, RsParams};
use pathcalc_core::io as pio;
use pathcalc_core::report::{richardson_tail, MIN_LEVELS_FOR_VERDICT};
use pathcalc_core::trading::{
    self, arbitrage_strategy, is_arbitrage, portfolio_ledger, simple_approximation, PriceSystem,
    Strategy,
};
use pathcalc_core::variation::{p_variation, variation_profile};
use pathcalc_core::{
    ConvergenceReport, Error, GeneratorSpec, IntegralResult, NestedPartitionSequence,
    RegulatedPath, Result, Tolerance,
};

#[derive(Parser)]
#[command(
    name = "pathcalc",
    version,
    about = "Pathwise calculus for regulated price paths",
    after_help = "Exit status: 0 converged/pass, 2 diverged/fail, 1 usage or input error.\n\
                  PATHCALC_SEED overrides --seed; `--json-out -` writes the report to stdout."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a path and write it in the CSV path format
    Generate(GenerateArgs),
    /// p-variation of a path: exact value plus per-level partition sums
    Pvar(PvarArgs),
    /// Integrate h against f (refinement Riemann-Stieltjes, left
    /// Cauchy-Stieltjes, or left Young)
    Integrate(IntegrateArgs),
    /// Evolution operators along nested partitions: L, E, b, duality, chain
    Evolve(EvolveArgs),
    /// Build the explicit two-asset arbitrage and check its ledger
    Arbitrage(ArbitrageArgs),
    /// Approximate a smooth self-financing strategy by simple ones
    Approx(ApproxArgs),
    /// Duality round trip between a price path and its return path
    Duality(DualityArgs),
    /// Emit the versioned JSON schema for every report this tool writes
    Schema(SchemaArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Family {
    /// Halve every step at each level
    Dyadic,
    /// Split every step in three at each level (at most 12 levels)
    Triadic,
    /// Random refinements drawn from the run seed (1 to 24 levels)
    Random,
}

impl Family {
    fn label(self) -> &'static str {
        match self {
            Family::Dyadic => "dyadic",
            Family::Triadic => "triadic",
            Family::Random => "random",
        }
    }

    fn branching(self) -> Result<u32> {
        match self {
            Family::Dyadic => Ok(2),
            Family::Triadic => Ok(3),
            Family::Random => Err(Error::domain(
                "the random family has no fixed branching factor; use dyadic or triadic here",
            )),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Path family to generate
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Number of grid steps
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Horizon of the path
    #[arg(long = "T", default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hurst exponent (fbm only)
    #[arg(long)]
    hurst: Option<f64>,
    /// Stability index in (0, 2] (stable only)
    #[arg(long)]
    alpha: Option<f64>,
    /// Jump threshold in units of the typical step scale (stable only)
    #[arg(long, default_value_t = 4.0)]
    threshold_factor: f64,
    /// Weierstrass amplitude decay a in (0, 1)
    #[arg(long = "weier-a", default_value_t = 0.5)]
    weier_a: f64,
    /// Weierstrass frequency growth b
    #[arg(long = "weier-b", default_value_t = 3.0)]
    weier_b: f64,
    /// Exponential growth rate (deterministic-exp only)
    #[arg(long)]
    rate: Option<f64>,
    /// Linear drift of the base (custom-jump only)
    #[arg(long, default_value_t = 0.0)]
    slope: f64,
    /// Jumps as time:left:right triples, comma separated (custom-jump only)
    #[arg(long)]
    jumps: Option<String>,
    /// Output CSV file, `-` for stdout
    #[arg(long, default_value = "-")]
    out: String,
    /// Write a JSON manifest of the recipe, `-` for stdout
    #[arg(long = "json-out")]
    json_out: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum GenKind {
    Brownian,
    Fbm,
    #[value(alias = "stable-levy")]
    Stable,
    Weierstrass,
    DeterministicExp,
    CustomJump,
}

#[derive(Args)]
struct PvarArgs {
    /// Variation exponent p > 0
    #[arg(long)]
    p: f64,
    /// Input path CSV
    #[arg(long = "in", value_name = "CSV")]
    input: PathBuf,
    /// Resolution points file (one time per line); defaults to the path's
    /// own grid and jump times
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Partition levels for the per-level sum table
    #[arg(long, default_value_t = 12)]
    levels: u32,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "dyadic")]
    family: Vec<Family>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "json-out")]
    json_out: Option<String>,
}

#[derive(Args)]
struct IntegrateArgs {
    /// Which integral to take
    #[arg(long, value_enum)]
    kind: IntKind,
    /// Integrand path CSV
    #[arg(long = "h", value_name = "CSV")]
    h: PathBuf,
    /// Integrator path CSV
    #[arg(long = "f", value_name = "CSV")]
    f: PathBuf,
    /// Upper endpoint; defaults to the common horizon
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 14)]
    levels: u32,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Report the raw refinement sums; by default the residual and verdict
    /// come from a geometric tail acceleration (random family is always raw)
    #[arg(long)]
    raw: bool,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "dyadic")]
    family: Vec<Family>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "json-out")]
    json_out: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum IntKind {
    /// Left Cauchy-Stieltjes limit along the partition sequence
    Lcs,
    /// Left Young integral (refinement sums plus jump corrections)
    Ly,
    /// Refinement Riemann-Stieltjes integral
    Rs,
}

#[derive(Args)]
struct EvolveArgs {
    /// L = log-return sums, E = product integral, b = quadratic bracket,
    /// duality = round trip, chain = d(f^2) = 2f df with jump corrections
    #[arg(long, value_enum)]
    op: EvolveOp,
    /// Input path CSV (a price path for L and duality, a return path for E
    /// and b, any path for chain)
    #[arg(long = "in", value_name = "CSV")]
    input: PathBuf,
    /// Evaluation time; defaults to the path horizon
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 14)]
    levels: u32,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "dyadic")]
    family: Vec<Family>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "json-out")]
    json_out: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum EvolveOp {
    #[value(name = "L", alias = "l")]
    LogReturn,
    #[value(name = "E", alias = "e")]
    Product,
    #[value(name = "b")]
    Bracket,
    Duality,
    Chain,
}

impl EvolveOp {
    fn label(self) -> &'static str {
        match self {
            EvolveOp::LogReturn => "L",
            EvolveOp::Product => "E",
            EvolveOp::Bracket => "b",
            EvolveOp::Duality => "duality",
            EvolveOp::Chain => "chain",
        }
    }
}

#[derive(Args)]
struct ArbitrageArgs {
    /// Rough exponent path CSV; generated from the Weierstrass flags when
    /// absent
    #[arg(long = "in", value_name = "CSV")]
    input: Option<PathBuf>,
    #[arg(long = "weier-a", default_value_t = 0.5)]
    weier_a: f64,
    #[arg(long = "weier-b", default_value_t = 3.0)]
    weier_b: f64,
    #[arg(long, default_value_t = 4096)]
    n: usize,
    #[arg(long = "T", default_value_t = 1.0)]
    t_end: f64,
    /// Money-market rate
    #[arg(long, default_value_t = 0.05)]
    r: f64,
    /// Volatility multiplying the exponent path
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,
    /// Ledger partition depth; the self-financing residual shrinks roughly
    /// geometrically in it while the budget stays fixed
    #[arg(long, default_value_t = 21)]
    levels: u32,
    /// Self-financing budget per unit of sup |V|
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Directory for the price, holding, value, and gain CSV files
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    #[arg(long = "json-out")]
    json_out: Option<String>,
}

#[derive(Args)]
struct ApproxArgs {
    /// Grid steps of the built-in smooth strategy demo
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Depth of the rebalance partition sequence
    #[arg(long, default_value_t = 10)]
    levels: u32,
    /// Rebalance levels to compare, comma separated
    #[arg(long = "n-levels", value_delimiter = ',', default_values_t = [6u32, 8, 10])]
    n_levels: Vec<u32>,
    /// Relative terminal-error budget for the finest rebalance level
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
    #[arg(long = "json-out")]
    json_out: Option<String>,
}

#[derive(Args)]
struct DualityArgs {
    /// Price path CSV (positive, away from zero)
    #[arg(long = "in", value_name = "CSV")]
    input: PathBuf,
    #[arg(long, default_value_t = 14)]
    levels: u32,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "dyadic")]
    family: Vec<Family>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "json-out")]
    json_out: Option<String>,
}

#[derive(Args)]
struct SchemaArgs {
    #[arg(long = "json-out", default_value = "-")]
    json_out: String,
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code: u8 = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let run = match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Pvar(args) => run_pvar(args),
        Command::Integrate(args) => run_integrate(args),
        Command::Evolve(args) => run_evolve(args),
        Command::Arbitrage(args) => run_arbitrage(args),
        Command::Approx(args) => run_approx(args),
        Command::Duality(args) => run_duality(args),
        Command::Schema(args) => run_schema(args),
    };
    match run {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var("PATHCALC_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Error::domain(format!("PATHCALC_SEED must be an unsigned integer, got {text:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(Error::domain("PATHCALC_SEED is not valid unicode"))
        }
    }
}

fn read_path_file(file: &Path) -> Result<RegulatedPath> {
    let text = fs::read_to_string(file)
        .map_err(|e| Error::domain(format!("cannot read {}: {e}", file.display())))?;
    pio::path_from_csv(&text).map_err(|e| match e {
        Error::Parse { line, msg } => {
            Error::Parse { line, msg: format!("{}: {msg}", file.display()) }
        }
        other => other,
    })
}

fn check_levels(levels: u32) -> Result<()> {
    if (levels as usize) < MIN_LEVELS_FOR_VERDICT {
        return Err(Error::domain(format!(
            "need at least {MIN_LEVELS_FOR_VERDICT} levels for a convergence verdict, got {levels}"
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::domain(format!("tolerance must be positive and finite, got {tol}")));
    }
    Ok(())
}

fn build_sequence(
    family: Family,
    t_end: f64,
    levels: u32,
    seed: u64,
    refine: &[f64],
) -> Result<NestedPartitionSequence> {
    let seq = match family {
        Family::Dyadic => {
            if levels > 30 {
                return Err(Error::domain("dyadic sequences support at most 30 levels"));
            }
            NestedPartitionSequence::dyadic(t_end, levels)
        }
        Family::Triadic => {
            if levels > 12 {
                return Err(Error::domain("triadic sequences support at most 12 levels"));
            }
            NestedPartitionSequence::triadic(t_end, levels)
        }
        Family::Random => {
            if !(1..=24).contains(&levels) {
                return Err(Error::domain("random sequences support 1 to 24 levels"));
            }
            NestedPartitionSequence::randomized(t_end, levels, split_seed(seed, "partition"))
        }
    };
    Ok(if refine.is_empty() { seq } else { seq.refine_with(refine) })
}

fn jump_times(path: &RegulatedPath) -> Vec<f64> {
    path.jumps().iter().map(|j| j.time).collect()
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn write_json(dest: Option<&str>, value: &Value) -> Result<()> {
    let Some(dest) = dest else { return Ok(()) };
    let mut text = serde_json::to_string_pretty(value).expect("json reports serialize");
    text.push('\n');
    write_text(dest, &text)
}

fn write_text(dest: &str, text: &str) -> Result<()> {
    if dest == "-" {
        print!("{text}");
        Ok(())
    } else {
        fs::write(dest, text).map_err(|e| Error::domain(format!("cannot write {dest}: {e}")))
    }
}

/// One-line summary on stdout, skipped when the JSON report already owns
/// stdout.
fn announce(json_dest: Option<&str>, line: &str) {
    if json_dest != Some("-") {
        println!("{line}");
    }
}

fn run_generate(args: GenerateArgs) -> Result<Outcome> {
    let seed = effective_seed(args.seed)?;
    if args.out == "-" && args.json_out.as_deref() == Some("-") {
        return Err(Error::domain("the CSV and the JSON manifest cannot both go to stdout"));
    }
    let spec = match args.kind {
        GenKind::Brownian => GeneratorSpec::Brownian { t_end: args.t_end, n: args.n },
        GenKind::Fbm => GeneratorSpec::Fbm {
            t_end: args.t_end,
            n: args.n,
            hurst: args.hurst.ok_or_else(|| Error::domain("--hurst is required for fbm"))?,
        },
        GenKind::Stable => GeneratorSpec::StableLevy {
            t_end: args.t_end,
            n: args.n,
            alpha: args.alpha.ok_or_else(|| Error::domain("--alpha is required for stable"))?,
            threshold_factor: args.threshold_factor,
        },
        GenKind::Weierstrass => GeneratorSpec::Weierstrass {
            t_end: args.t_end,
            n: args.n,
            a: args.weier_a,
            b: args.weier_b,
        },
        GenKind::DeterministicExp => GeneratorSpec::DeterministicExp {
            t_end: args.t_end,
            n: args.n,
            rate: args.rate.ok_or_else(|| Error::domain("--rate is required for deterministic-exp"))?,
        },
        GenKind::CustomJump => GeneratorSpec::CustomJump {
            t_end: args.t_end,
            n: args.n,
            slope: args.slope,
            jumps: parse_jump_list(args.jumps.as_deref().unwrap_or(""))?,
        },
    };
    let path = spec.generate(seed)?;
    write_text(&args.out, &pio::path_to_csv(&path))?;
    let manifest = json!({
        "command": "generate",
        "spec": to_value(&spec),
        "seed": seed,
        "grid_points": path.grid().len(),
        "jumps": path.jumps().len(),
        "out": args.out,
    });
    write_json(args.json_out.as_deref(), &manifest)?;
    if args.out != "-" {
        announce(
            args.json_out.as_deref(),
            &format!(
                "wrote {} ({} grid points, {} jumps, seed {seed})",
                args.out,
                path.grid().len(),
                path.jumps().len()
            ),
        );
    }
    Ok(Outcome::Pass)
}

fn parse_jump_list(text: &str) -> Result<Vec<(f64, f64, f64)>> {
    let mut jumps = Vec::new();
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        let fields: Vec<&str> = part.trim().split(':').collect();
        if fields.len() != 3 {
            return Err(Error::domain(format!(
                "jump {part:?} must be time:left:right (e.g. 0.5:-0.2:0.1)"
            )));
        }
        let mut parsed = [0.0; 3];
        for (slot, field) in parsed.iter_mut().zip(&fields) {
            *slot = field
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("bad number {field:?} in jump {part:?}")))?;
        }
        jumps.push((parsed[0], parsed[1], parsed[2]));
    }
    Ok(jumps)
}

fn run_pvar(args: PvarArgs) -> Result<Outcome> {
    check_levels(args.levels)?;
    let seed = effective_seed(args.seed)?;
    let path = read_path_file(&args.input)?;
    let resolution = match &args.grid {
        Some(file) => {
            let text = fs::read_to_string(file)
                .map_err(|e| Error::domain(format!("cannot read {}: {e}", file.display())))?;
            let seq = pio::partition_from_text(&text)?;
            seq.finest().to_vec()
        }
        None => path.event_times(),
    };
    let v_p = p_variation(&path, args.p, &resolution)?;

    let refine = jump_times(&path);
    let mut families = Vec::new();
    for &family in &args.family {
        let seq = build_sequence(family, path.t_end(), args.levels, seed, &refine)?;
        let profile = variation_profile(&path, args.p, &seq)?;
        families.push(json!({ "family": family.label(), "profile": to_value(&profile) }));
    }

    let report = json!({
        "command": "pvar",
        "p": args.p,
        "resolution_points": resolution.len(),
        "v_p": v_p,
        "families": families,
    });
    write_json(args.json_out.as_deref(), &report)?;
    announce(
        args.json_out.as_deref(),
        &format!("v_p = {v_p:.6e} (p = {}, {} resolution points)", args.p, resolution.len()),
    );
    Ok(Outcome::Pass)
}

fn run_integrate(args: IntegrateArgs) -> Result<Outcome> {
    check_levels(args.levels)?;
    check_tol(args.tol)?;
    let seed = effective_seed(args.seed)?;
    let h = read_path_file(&args.h)?;
    let f = read_path_file(&args.f)?;
    let t_hor = h.t_end().min(f.t_end());
    let t = args.t.unwrap_or(t_hor);

    let mut refine = jump_times(&h);
    refine.extend(jump_times(&f));

    let mut families = Vec::new();
    let mut all_converged = true;
    for &family in &args.family {
        let accelerate = !args.raw && family != Family::Random;
        let result: IntegralResult = match args.kind {
            IntKind::Lcs => {
                let seq = build_sequence(family, t_hor, args.levels, seed, &refine)?;
                let raw = lcs_integral_with(&h, &f, t, &seq, Tolerance::of(args.tol))?;
                if accelerate {
                    accelerated(raw, family.branching()?, Tolerance::of(args.tol))
                } else {
                    raw
                }
            }
            IntKind::Ly | IntKind::Rs => {
                let params = RsParams {
                    tol: Tolerance::of(args.tol),
                    max_depth: args.levels,
                    branching: family.branching()?,
                    extrapolate: accelerate,
                };
                if args.kind == IntKind::Ly {
                    ly_integral_with(&h, &f, 0.0, t, &params)?
                } else {
                    rs_refinement_integral_with(&h, &f, 0.0, t, &params)?
                }
            }
        };
        all_converged &= result.is_converged();
        families.push(json!({
            "family": family.label(),
            "accelerated": accelerate,
            "result": to_value(&result),
        }));
    }

    let kind = match args.kind {
        IntKind::Lcs => "lcs",
        IntKind::Ly => "ly",
        IntKind::Rs => "rs",
    };
    let report = json!({
        "command": "integrate",
        "kind": kind,
        "t": t,
        "levels": args.levels,
        "tol": args.tol,
        "converged": all_converged,
        "families": families,
    });
    write_json(args.json_out.as_deref(), &report)?;
    announce(args.json_out.as_deref(), &summary_of(&families, all_converged));
    Ok(if all_converged { Outcome::Pass } else { Outcome::Fail })
}

/// Re-judges a level sequence by its geometric tail acceleration: the
/// per-level values stay raw, the value, residual, and verdict come from the
/// accelerated series (the same convention the refinement integral uses).
fn accelerated(result: IntegralResult, branching: u32, tol: Tolerance) -> IntegralResult {
    let raw: Vec<f64> = result.report.per_level.iter().map(|&(_, v)| v).collect();
    let q = 1.0 / branching as f64;
    let acc: Vec<f64> = (1..=raw.len()).map(|k| richardson_tail(&raw[..k], q)).collect();
    let acc_report = ConvergenceReport::from_values(&acc, tol);
    IntegralResult {
        value: acc_report.value(),
        report: ConvergenceReport {
            per_level: result.report.per_level,
            residual: acc_report.residual,
            verdict: acc_report.verdict,
        },
    }
}

fn summary_of(families: &[Value], pass: bool) -> String {
    let mut line = String::new();
    for entry in families {
        let family = entry["family"].as_str().unwrap_or("?");
        let value = entry
            .pointer("/result/value")
            .or_else(|| entry.pointer("/report/price_residual"))
            .and_then(Value::as_f64);
        match value {
            Some(v) => {
                let _ = write!(line, "{family}: {v:.12e}  ");
            }
            None => {
                let _ = write!(line, "{family}: see report  ");
            }
        }
    }
    let _ = write!(line, "[{}]", if pass { "converged" } else { "diverged" });
    line
}

fn run_evolve(args: EvolveArgs) -> Result<Outcome> {
    evolve_or_duality(
        "evolve",
        args.op,
        &args.input,
        args.t,
        args.levels,
        args.tol,
        &args.family,
        args.seed,
        args.json_out.as_deref(),
    )
}

fn run_duality(args: DualityArgs) -> Result<Outcome> {
    evolve_or_duality(
        "duality",
        EvolveOp::Duality,
        &args.input,
        None,
        args.levels,
        args.tol,
        &args.family,
        args.seed,
        args.json_out.as_deref(),
    )
}

#[allow(clippy::too_many_arguments)]
fn evolve_or_duality(
    command: &str,
    op: EvolveOp,
    input: &Path,
    t: Option<f64>,
    levels: u32,
    tol: f64,
    family: &[Family],
    seed: u64,
    json_out: Option<&str>,
) -> Result<Outcome> {
    check_levels(levels)?;
    check_tol(tol)?;
    let seed = effective_seed(seed)?;
    let path = read_path_file(input)?;
    let t = t.unwrap_or(path.t_end());
    let refine = jump_times(&path);

    let mut families = Vec::new();
    let mut all_pass = true;
    let mut shown: Option<f64> = None;
    for &fam in family {
        let entry = match op {
            EvolveOp::LogReturn | EvolveOp::Product | EvolveOp::Bracket => {
                let seq = build_sequence(fam, path.t_end(), levels, seed, &refine)?;
                let tolerance = Tolerance::of(tol);
                let result = match op {
                    EvolveOp::LogReturn => evolution::l_lambda_with(&path, t, &seq, tolerance)?,
                    EvolveOp::Product => evolution::e_lambda_with(&path, t, &seq, tolerance)?,
                    _ => evolution::b_lambda_with(&path, t, &seq, tolerance)?,
                };
                all_pass &= result.is_converged();
                shown.get_or_insert(result.value);
                json!({ "family": fam.label(), "result": to_value(&result) })
            }
            EvolveOp::Duality => {
                let seq = build_sequence(fam, path.t_end(), levels, seed, &refine)?;
                let pair = EvolutionPair::from_price(path.clone(), seq)?;
                let report = duality_check(&pair, tol)?;
                all_pass &= report.pass;
                shown.get_or_insert(report.price_residual.max(report.return_residual));
                json!({ "family": fam.label(), "report": to_value(&report) })
            }
            EvolveOp::Chain => {
                let report = chain_square_check(&path, t, levels, tol, fam)?;
                let ok = report.applicable
                    && Tolerance::of(tol).accepts(report.residual, report.lhs);
                all_pass &= ok;
                shown.get_or_insert(report.residual);
                json!({ "family": fam.label(), "pass": ok, "report": to_value(&report) })
            }
        };
        families.push(entry);
    }

    let report = json!({
        "command": command,
        "op": op.label(),
        "t": t,
        "levels": levels,
        "tol": tol,
        "pass": all_pass,
        "families": families,
    });
    write_json(json_out, &report)?;
    let headline = match op {
        EvolveOp::Duality => format!(
            "duality worst residual = {:.6e} [{}]",
            shown.unwrap_or(f64::NAN),
            if all_pass { "pass" } else { "fail" }
        ),
        EvolveOp::Chain => format!(
            "chain-rule residual = {:.6e} [{}]",
            shown.unwrap_or(f64::NAN),
            if all_pass { "pass" } else { "fail" }
        ),
        _ => format!(
            "{}({t}) = {:.12e} [{}]",
            op.label(),
            shown.unwrap_or(f64::NAN),
            if all_pass { "converged" } else { "diverged" }
        ),
    };
    announce(json_out, &headline);
    Ok(if all_pass { Outcome::Pass } else { Outcome::Fail })
}

/// Checks d(f^2) = 2f df on the input path, with two-sided jump corrections
/// when the path has jumps.
fn chain_square_check(
    path: &RegulatedPath,
    t: f64,
    levels: u32,
    tol: f64,
    family: Family,
) -> Result<ChainRuleReport> {
    let one = RegulatedPath::constant(path.t_end(), 1.0);
    let params = RsParams {
        tol: Tolerance::of(tol),
        max_depth: levels,
        branching: family.branching()?,
        extrapolate: true,
    };
    chain_rule_eval_with(
        |u: &[f64]| u[0] * u[0],
        |u: &[f64]| vec![2.0 * u[0]],
        &[path],
        &one,
        0.0,
        t,
        &params,
    )
}

fn run_arbitrage(args: ArbitrageArgs) -> Result<Outcome> {
    check_levels(args.levels)?;
    check_tol(args.tol)?;
    if args.levels > 30 {
        return Err(Error::domain("dyadic sequences support at most 30 levels"));
    }
    let f = match &args.input {
        Some(file) => read_path_file(file)?,
        None => GeneratorSpec::Weierstrass {
            t_end: args.t_end,
            n: args.n,
            a: args.weier_a,
            b: args.weier_b,
        }
        .generate(0)?,
    };
    let t_end = f.t_end();
    let built = arbitrage_strategy(&f, args.r, args.sigma)?;
    let seq = NestedPartitionSequence::dyadic(t_end, args.levels);
    let ledger = portfolio_ledger(&built.strategy, &built.prices, &seq)?;

    let initial = trading::portfolio_value(&built.strategy, &built.prices, 0.0)?;
    let terminal = trading::portfolio_value(&built.strategy, &built.prices, t_end)?;
    let closed_terminal =
        (args.r * t_end).exp() * (args.sigma * f.eval(t_end)?).exp_m1().powi(2);
    let sup_value = ledger.value.max_abs_value();
    let budget = args.tol * sup_value;

    let (verdict, reason) = match is_arbitrage(&built.strategy, &built.prices, &seq, args.tol) {
        Ok(flag) => (flag, None),
        Err(Error::Hypothesis(msg)) => (false, Some(msg)),
        Err(other) => return Err(other),
    };

    let mut files = Vec::new();
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir)
            .map_err(|e| Error::domain(format!("cannot create {}: {e}", dir.display())))?;
        let artifacts: [(&str, &RegulatedPath); 6] = [
            ("price_0.csv", &built.prices.assets()[0]),
            ("price_1.csv", &built.prices.assets()[1]),
            ("holding_0.csv", &built.strategy.holdings()[0]),
            ("holding_1.csv", &built.strategy.holdings()[1]),
            ("value.csv", &ledger.value),
            ("gain.csv", &ledger.gain),
        ];
        for (name, path) in artifacts {
            let full = dir.join(name);
            fs::write(&full, pio::path_to_csv(path))
                .map_err(|e| Error::domain(format!("cannot write {}: {e}", full.display())))?;
            files.push(full.display().to_string());
        }
    }

    let report = json!({
        "command": "arbitrage",
        "arbitrage": verdict,
        "degenerate": built.degenerate,
        "r": args.r,
        "sigma": args.sigma,
        "levels": args.levels,
        "tol": args.tol,
        "initial_value": initial,
        "terminal_value": terminal,
        "closed_form_terminal": closed_terminal,
        "self_financing_residual": ledger.self_financing_residual,
        "self_financing_budget": budget,
        "sup_value": sup_value,
        "reason": reason,
        "files": files,
    });
    write_json(args.json_out.as_deref(), &report)?;
    announce(
        args.json_out.as_deref(),
        &format!(
            "arbitrage = {verdict} (V(0) = {initial:.3e}, V(T) = {terminal:.6e}, \
             ledger residual {:.3e} vs budget {budget:.3e})",
            ledger.self_financing_residual
        ),
    );
    Ok(if verdict { Outcome::Pass } else { Outcome::Fail })
}

fn run_approx(args: ApproxArgs) -> Result<Outcome> {
    check_levels(args.levels)?;
    check_tol(args.tol)?;
    if args.levels > 30 {
        return Err(Error::domain("dyadic sequences support at most 30 levels"));
    }
    if args.n < 2 {
        return Err(Error::domain("need at least 2 grid steps"));
    }
    let mut rebalance = args.n_levels.clone();
    rebalance.sort_unstable();
    rebalance.dedup();
    if rebalance.is_empty() {
        return Err(Error::domain("need at least one rebalance level"));
    }
    if let Some(&deepest) = rebalance.last() {
        if deepest > args.levels {
            return Err(Error::domain(format!(
                "rebalance level {deepest} exceeds the sequence depth {}",
                args.levels
            )));
        }
    }

    // Built-in demo: a bond plus one smooth positive price, holdings with a
    // funded bond position so the target is self-financing with V(0) = 2.
    let bond = RegulatedPath::constant(1.0, 1.0);
    let risky = RegulatedPath::sampled(1.0, args.n, |t| (0.25 * (2.4 * t).sin()).exp())?;
    let prices = PriceSystem::new(vec![bond, risky.clone()])?;
    let phi1 = RegulatedPath::sampled(1.0, args.n, |t| 1.5 + (1.7 * t).cos())?;
    let seq = NestedPartitionSequence::dyadic(1.0, args.levels);

    let pts = seq.finest();
    let hv: Vec<f64> = pts.iter().map(|&t| phi1.eval(t)).collect::<Result<_>>()?;
    let pv: Vec<f64> = pts.iter().map(|&t| risky.eval(t)).collect::<Result<_>>()?;
    let mut phi0_vals = Vec::with_capacity(pts.len());
    phi0_vals.push(2.0 - hv[0] * pv[0]);
    let mut gain = 0.0;
    for i in 1..pts.len() {
        gain += hv[i - 1] * (pv[i] - pv[i - 1]);
        phi0_vals.push(2.0 + gain - hv[i] * pv[i]);
    }
    let phi0 = RegulatedPath::new(pts.to_vec(), phi0_vals, Vec::new())?;
    let strategy = Strategy::new(vec![phi0, phi1])?;

    let target_initial = trading::portfolio_value(&strategy, &prices, 0.0)?;
    let target_terminal = trading::portfolio_value(&strategy, &prices, 1.0)?;
    let levels = simple_approximation(&strategy, &prices, &seq, &rebalance)?;

    let mut rows = Vec::new();
    let mut errs = Vec::new();
    for level in &levels {
        let err = (level.terminal_value - target_terminal).abs() / target_terminal.abs();
        errs.push(err);
        rows.push(json!({
            "level": level.level,
            "points": level.points,
            "initial_value": level.initial_value,
            "terminal_value": level.terminal_value,
            "self_financing_residual": level.residual,
            "terminal_error": err,
        }));
    }
    let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
    let final_ok = errs.last().is_some_and(|&e| e <= args.tol);
    let starts_exact = levels.iter().all(|l| l.initial_value == target_initial);
    let pass = monotone && final_ok && starts_exact;

    let report = json!({
        "command": "approx",
        "grid_steps": args.n,
        "levels": args.levels,
        "rebalance_levels": rebalance,
        "tol": args.tol,
        "target_initial": target_initial,
        "target_terminal": target_terminal,
        "starts_exact": starts_exact,
        "errors_monotone": monotone,
        "pass": pass,
        "per_level": rows,
    });
    write_json(args.json_out.as_deref(), &report)?;
    let err_list: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    announce(
        args.json_out.as_deref(),
        &format!(
            "terminal errors {} [{}]",
            err_list.join(" -> "),
            if pass { "pass" } else { "fail" }
        ),
    );
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

fn run_schema(args: SchemaArgs) -> Result<Outcome> {
    write_json(Some(&args.json_out), &schema_document())?;
    Ok(Outcome::Pass)
}

/// Fixed description of every JSON report the tool emits; the version string
/// tracks the crate release.
fn schema_document() -> Value {
    let number = json!({ "type": "number" });
    let integer = json!({ "type": "integer" });
    let boolean = json!({ "type": "boolean" });
    let string = json!({ "type": "string" });
    let per_level = json!({
        "type": "array",
        "items": {
            "type": "array",
            "items": [integer, number],
            "minItems": 2,
            "maxItems": 2,
        }
    });
    let convergence_report = json!({
        "type": "object",
        "required": ["per_level", "residual", "verdict"],
        "properties": {
            "per_level": { "$ref": "#/definitions/per_level" },
            "residual": number,
            "verdict": { "type": "string", "enum": ["converged", "diverged"] },
        }
    });
    let integral_result = json!({
        "type": "object",
        "required": ["value", "report"],
        "properties": {
            "value": number,
            "report": { "$ref": "#/definitions/convergence_report" },
        }
    });
    let family = json!({ "type": "string", "enum": ["dyadic", "triadic", "random"] });
    let duality_report = json!({
        "type": "object",
        "required": [
            "price_residual", "return_residual", "tol", "pass", "horizon",
            "checked_points", "price_report", "return_report"
        ],
        "properties": {
            "price_residual": number,
            "return_residual": number,
            "tol": number,
            "pass": boolean,
            "checked_points": integer,
            "price_report": { "$ref": "#/definitions/convergence_report" },
            "return_report": { "$ref": "#/definitions/convergence_report" },
        }
    });
    let chain_rule_report = json!({
        "type": "object",
        "required": [
            "lhs", "rhs", "residual", "applicable", "gradient_check",
            "left_corrections", "right_corrections"
        ],
        "properties": {
            "lhs": number, "rhs": number, "residual": number,
            "applicable": boolean, "gradient_check": boolean,
            "left_corrections": number, "right_corrections": number,
        }
    });
    let variation_profile = json!({
        "type": "object",
        "required": ["p", "per_level", "v_p", "jump_sum_p", "local_estimate"],
        "properties": {
            "p": number,
            "per_level": { "$ref": "#/definitions/per_level" },
            "v_p": number,
            "jump_sum_p": number,
            "local_estimate": number,
        }
    });

    json!({
        "$schema": "http://json-schema.org/draft-07/schema#",
        "title": "pathcalc report schema",
        "version": env!("CARGO_PKG_VERSION"),
        "definitions": {
            "per_level": per_level,
            "convergence_report": convergence_report,
            "integral_result": integral_result,
            "duality_report": duality_report,
            "chain_rule_report": chain_rule_report,
            "variation_profile": variation_profile,
            "family": family,
        },
        "reports": {
            "generate": {
                "type": "object",
                "required": ["command", "spec", "seed", "grid_points", "jumps", "out"],
                "properties": {
                    "command": { "const": "generate" },
                    "spec": { "type": "object", "required": ["kind"] },
                    "seed": integer,
                    "grid_points": integer,
                    "jumps": integer,
                    "out": string,
                }
            },
            "pvar": {
                "type": "object",
                "required": ["command", "p", "resolution_points", "v_p", "families"],
                "properties": {
                    "command": { "const": "pvar" },
                    "p": number,
                    "resolution_points": integer,
                    "v_p": number,
                    "families": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["family", "profile"],
                            "properties": {
                                "family": { "$ref": "#/definitions/family" },
                                "profile": { "$ref": "#/definitions/variation_profile" },
                            }
                        }
                    },
                }
            },
            "integrate": {
                "type": "object",
                "required": ["command", "kind", "t", "levels", "tol", "converged", "families"],
                "properties": {
                    "command": { "const": "integrate" },
                    "kind": { "type": "string", "enum": ["lcs", "ly", "rs"] },
                    "t": number,
                    "levels": integer,
                    "tol": number,
                    "converged": boolean,
                    "families": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["family", "result"],
                            "properties": {
                                "family": { "$ref": "#/definitions/family" },
                                "result": { "$ref": "#/definitions/integral_result" },
                            }
                        }
                    },
                }
            },
            "evolve": {
                "type": "object",
                "required": ["command", "op", "t", "levels", "tol", "pass", "families"],
                "properties": {
                    "command": { "type": "string", "enum": ["evolve", "duality"] },
                    "op": { "type": "string", "enum": ["L", "E", "b", "duality", "chain"] },
                    "t": number,
                    "levels": integer,
                    "tol": number,
                    "pass": boolean,
                    "families": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["family"],
                            "properties": {
                                "family": { "$ref": "#/definitions/family" },
                                "result": { "$ref": "#/definitions/integral_result" },
                                "report": { "$ref": "#/definitions/duality_report" },
                            }
                        }
                    },
                }
            },
            "arbitrage": {
                "type": "object",
                "required": [
                    "command", "arbitrage", "degenerate", "r", "sigma", "levels", "tol",
                    "initial_value", "terminal_value", "closed_form_terminal",
                    "self_financing_residual", "self_financing_budget", "sup_value", "files"
                ],
                "properties": {
                    "command": { "const": "arbitrage" },
                    "arbitrage": boolean,
                    "degenerate": boolean,
                    "r": number,
                    "sigma": number,
                    "levels": integer,
                    "tol": number,
                    "initial_value": number,
                    "terminal_value": number,
                    "closed_form_terminal": number,
                    "self_financing_residual": number,
                    "self_financing_budget": number,
                    "sup_value": number,
                    "reason": { "type": ["string", "null"] },
                    "files": { "type": "array", "items": string },
                }
            },
            "approx": {
                "type": "object",
                "required": [
                    "command", "grid_steps", "levels", "rebalance_levels", "tol",
                    "target_initial", "target_terminal", "starts_exact",
                    "errors_monotone", "pass", "per_level"
                ],
                "properties": {
                    "command": { "const": "approx" },
                    "grid_steps": integer,
                    "levels": integer,
                    "rebalance_levels": { "type": "array", "items": integer },
                    "tol": number,
                    "target_initial": number,
                    "target_terminal": number,
                    "starts_exact": boolean,
                    "errors_monotone": boolean,
                    "pass": boolean,
                    "per_level": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": [
                                "level", "points", "initial_value", "terminal_value",
                                "self_financing_residual", "terminal_error"
                            ],
                        }
                    },
                }
            },
        }
    })
}

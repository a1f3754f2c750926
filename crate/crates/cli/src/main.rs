//! `ergopt`: batch front-end. Parses a system-spec file, dispatches one
//! computation, prints a single JSON document to stdout, and optionally
//! writes CSV side files.
//!
//! Exit codes: 0 success, 2 spec/usage errors, 3 infeasible requests,
//! 4 numerical or budget failures.

mod spec;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ergopt_core::*;

use spec::{load, RawRun, RawSpec};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
}

impl CliError {
    fn config_from_core(e: Error) -> Self {
        CliError::Config(e.to_string())
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::Infeasible(_)
                | Error::NotMixing
                | Error::TargetsIndistinguishable(_)
                | Error::HypothesisFails(_)
                | Error::DenominatorViolated { .. }
                | Error::NoApproximantAvailable { .. }
                | Error::WordTooShort { .. } => 3,
                _ => 4,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => format!("spec: {m}"),
            CliError::Core(e) => e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// Scalar types the CLI can print.
trait OutputScalar: Scalar {
    const MODE: &'static str;
    fn to_json(&self) -> Value;
}

impl OutputScalar for Rational {
    const MODE: &'static str = "exact";
    fn to_json(&self) -> Value {
        Value::String(rational_string(self))
    }
}

impl OutputScalar for f64 {
    const MODE: &'static str = "float";
    fn to_json(&self) -> Value {
        json!(self)
    }
}

fn rational_string(v: &Rational) -> String {
    use num_traits::One;
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

#[derive(Parser)]
#[command(name = "ergopt", version, about = "Ergodic optimization on subshifts of finite type")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Path to the system-spec JSON file.
    spec: String,
    /// Directory for CSV side files.
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// SFT diagnostics: alphabet, edges, mixing time, declared potentials.
    Info(Common),
    /// Maximum ergodic average of run.f (graph + LP cross-checked).
    Beta(Common),
    /// Minimum ergodic average of run.f.
    Eta(Common),
    /// Conditional maximum at a given alpha.
    Lambda {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Full spectrum sweep with flat-top interval.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Ratio optimization sup F/G, optionally constrained to Phi/Psi = alpha.
    Ratio {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Irregular-point witness construction and supremum estimate.
    Irregular {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        growth: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Suspension-flow computations (needs the spec's suspension section).
    Suspension {
        #[command(subcommand)]
        sub: SuspensionCmd,
    },
    /// Finite-horizon maximum (1/n) max f_n and its distance to beta.
    Horizon {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Sampled generic word of the spec's measure, with checkpoints.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum SuspensionCmd {
    /// Flow average of the observable under the spec's measure.
    Average(Common),
    /// Flow level-set optimum at alpha.
    Level {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Flow irregular-set optimum with lifted oscillation record.
    Irregular {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        growth: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(value) => {
            println!("{}", serde_json::to_string(&value).expect("serializable output"));
        }
        Err(err) => {
            eprintln!("ergopt: {}", err.message());
            std::process::exit(err.exit_code());
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Exact,
    Float,
}

/// Referenced potentials decide the arithmetic: any cocycle (or a recoded
/// graph beyond 200 edges) forces floats, otherwise exact rationals. The
/// spec's run.mode can force either, but exact mode cannot host cocycles.
fn decide_mode(raw: &RawSpec, names: &[&str]) -> CliResult<Mode> {
    let mut any_cocycle = false;
    let mut max_range = 1usize;
    for name in names {
        if raw.is_cocycle(name)? {
            any_cocycle = true;
        } else if let spec::RawPotential::BlockWeights { range, .. } = raw.raw_potential(name)? {
            max_range = max_range.max(*range);
        } else if let spec::RawPotential::BlockIndicator { block } = raw.raw_potential(name)? {
            max_range = max_range.max(block.len());
        }
    }
    let requested = raw.run.mode.as_deref().unwrap_or("auto");
    match requested {
        "exact" => {
            if any_cocycle {
                return Err(CliError::Config(
                    "exact mode requested but a referenced potential is a cocycle".into(),
                ));
            }
            Ok(Mode::Exact)
        }
        "float" => Ok(Mode::Float),
        "auto" => {
            if any_cocycle {
                return Ok(Mode::Float);
            }
            let sft = raw.sft()?;
            let rec = Recoding::for_ranges(&sft, &[max_range]).map_err(CliError::from)?;
            Ok(if rec.sft().edge_count() <= 200 {
                Mode::Exact
            } else {
                Mode::Float
            })
        }
        other => Err(CliError::Config(format!("unknown mode {other:?}"))),
    }
}

fn dispatch(cmd: &Command) -> CliResult<Value> {
    match cmd {
        Command::Info(common) => cmd_info(common),
        Command::Beta(common) => extremal(common, Sense::Maximize),
        Command::Eta(common) => extremal(common, Sense::Minimize),
        Command::Lambda { common, alpha } => with_mode(common, &["f", "phi"], |raw, mode| match mode {
            Mode::Exact => cmd_lambda::<Rational>(raw, common, alpha.as_deref()),
            Mode::Float => cmd_lambda::<f64>(raw, common, alpha.as_deref()),
        }),
        Command::Spectrum { common, grid } => with_mode(common, &["f", "phi"], |raw, mode| match mode {
            Mode::Exact => cmd_spectrum::<Rational>(raw, common, *grid),
            Mode::Float => cmd_spectrum::<f64>(raw, common, *grid),
        }),
        Command::Ratio { common, alpha } => {
            let names: &[&str] = if alpha.is_some() {
                &["f", "g", "phi", "psi"]
            } else {
                &["f", "g"]
            };
            with_mode(common, names, |raw, mode| match mode {
                Mode::Exact => cmd_ratio::<Rational>(raw, common, alpha.as_deref()),
                Mode::Float => cmd_ratio::<f64>(raw, common, alpha.as_deref()),
            })
        }
        Command::Irregular {
            common,
            depth,
            growth,
            seed,
        } => with_mode(common, &["f", "g", "phi", "psi"], |raw, mode| {
            let params = witness_params(&raw.run, *depth, *growth, *seed);
            match mode {
                Mode::Exact => cmd_irregular::<Rational>(raw, common, &params),
                Mode::Float => cmd_irregular::<f64>(raw, common, &params),
            }
        }),
        Command::Suspension { sub } => {
            let common = match sub {
                SuspensionCmd::Average(c) => c,
                SuspensionCmd::Level { common, .. } => common,
                SuspensionCmd::Irregular { common, .. } => common,
            };
            let raw = load(&common.spec)?;
            let susp = raw
                .suspension
                .as_ref()
                .ok_or_else(|| CliError::Config("spec file has no suspension section".into()))?;
            let names = [
                susp.roof.as_str(),
                susp.observable.as_str(),
                susp.constraint.as_str(),
            ];
            let mode = decide_mode(&raw, &names)?;
            match (sub, mode) {
                (SuspensionCmd::Average(c), Mode::Exact) => cmd_susp_average::<Rational>(&raw, c),
                (SuspensionCmd::Average(c), Mode::Float) => cmd_susp_average::<f64>(&raw, c),
                (SuspensionCmd::Level { common, alpha }, Mode::Exact) => {
                    cmd_susp_level::<Rational>(&raw, common, alpha.as_deref())
                }
                (SuspensionCmd::Level { common, alpha }, Mode::Float) => {
                    cmd_susp_level::<f64>(&raw, common, alpha.as_deref())
                }
                (SuspensionCmd::Irregular { common, depth, growth, seed }, mode) => {
                    let params = witness_params(&raw.run, *depth, *growth, *seed);
                    match mode {
                        Mode::Exact => cmd_susp_irregular::<Rational>(&raw, common, &params),
                        Mode::Float => cmd_susp_irregular::<f64>(&raw, common, &params),
                    }
                }
            }
        }
        Command::Horizon { common, n } => with_mode(common, &["f"], |raw, mode| match mode {
            Mode::Exact => cmd_horizon::<Rational>(raw, common, *n),
            Mode::Float => cmd_horizon::<f64>(raw, common, *n),
        }),
        Command::Trace { common, n, seed } => with_mode(common, &[], |raw, mode| match mode {
            Mode::Exact => cmd_trace::<Rational>(raw, common, *n, *seed),
            Mode::Float => cmd_trace::<f64>(raw, common, *n, *seed),
        }),
    }
}

/// Loads the spec, resolves the run names the command needs, and decides the
/// arithmetic mode before running the handler.
fn with_mode(
    common: &Common,
    run_keys: &[&str],
    handler: impl FnOnce(&RawSpec, Mode) -> CliResult<Value>,
) -> CliResult<Value> {
    let raw = load(&common.spec)?;
    let mut names = Vec::new();
    for key in run_keys {
        if let Some(name) = run_name(&raw.run, key) {
            names.push(name);
        }
    }
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mode = decide_mode(&raw, &name_refs)?;
    handler(&raw, mode)
}

fn run_name(run: &RawRun, key: &str) -> Option<String> {
    match key {
        "f" => run.f.clone(),
        "phi" => run.phi.clone(),
        "g" => run.g.clone(),
        "psi" => run.psi.clone(),
        _ => None,
    }
}

fn require_name(run: &RawRun, key: &str) -> CliResult<String> {
    run_name(run, key)
        .ok_or_else(|| CliError::Config(format!("run.{key} is not set in the spec file")))
}

fn witness_params(run: &RawRun, depth: Option<usize>, growth: Option<usize>, seed: Option<u64>) -> WitnessParams {
    let defaults = WitnessParams::default();
    WitnessParams {
        depth: depth.or(run.depth).unwrap_or(defaults.depth),
        growth_factor: growth.or(run.growth).unwrap_or(defaults.growth_factor),
        base_len: run.base_len.unwrap_or(defaults.base_len),
        seed: seed.or(run.seed).unwrap_or(defaults.seed),
    }
}

fn aap_options(run: &RawRun) -> AapOptions {
    AapOptions {
        xi: run.xi.unwrap_or(1e-3),
        ..AapOptions::default()
    }
}

fn alpha_value<S: OutputScalar>(raw: &RawSpec, flag: Option<&str>) -> CliResult<S> {
    if let Some(text) = flag {
        return scalar::parse_scalar::<S>(text)
            .ok_or_else(|| CliError::Config(format!("cannot parse --alpha {text:?}")));
    }
    match &raw.run.alpha {
        Some(v) => spec::parse_value::<S>(v, "run.alpha"),
        None => Err(CliError::Config("no alpha given (flag or run.alpha)".into())),
    }
}

/// Resolves run.g / run.psi, or the constant-one potential when unset.
fn g_or_one<S: Scalar>(raw: &RawSpec, sft: &Sft, key: &str) -> CliResult<LocallyConstantPotential<S>> {
    match run_name(&raw.run, key) {
        Some(name) => raw.locally_constant::<S>(sft, &name),
        None => Ok(LocallyConstantPotential::constant(sft, S::one())),
    }
}

fn cycle_json(c: &Cycle) -> Value {
    json!(c.symbols())
}

fn witness_json<S: OutputScalar>(sft: &Sft, efv: &EdgeFrequencyVector<S>) -> Value {
    let mut map = BTreeMap::new();
    for e in efv.support() {
        let (u, v) = sft.edges()[e];
        map.insert(format!("{u}->{v}"), efv.get(e).to_json());
    }
    json!(map)
}

fn write_csv(common: &Common, file: &str, header: &str, rows: &[String]) -> CliResult<Option<String>> {
    let Some(dir) = &common.csv else {
        return Ok(None);
    };
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create csv dir {dir}: {e}")))?;
    let path = format!("{dir}/{file}");
    let mut text = String::with_capacity(rows.len() * 24 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(&path, text).map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))?;
    Ok(Some(path))
}

fn cmd_info(common: &Common) -> CliResult<Value> {
    let raw = load(&common.spec)?;
    let sft = raw.sft()?;
    let cycles = enumerate_simple_cycles(&sft, sft.alphabet_size().min(4), DEFAULT_CYCLE_CAP)?;
    let mut pots = BTreeMap::new();
    for (name, pot) in &raw.potentials {
        let kind = match pot {
            spec::RawPotential::BlockWeights { range, .. } => format!("block_weights(range {range})"),
            spec::RawPotential::Constant { .. } => "constant".into(),
            spec::RawPotential::SymbolIndicator { symbol } => format!("symbol_indicator({symbol})"),
            spec::RawPotential::BlockIndicator { block } => format!("block_indicator({block:?})"),
            spec::RawPotential::SymbolValue {} => "symbol_value".into(),
            spec::RawPotential::Cocycle { dimension, .. } => format!("cocycle(dim {dimension})"),
        };
        pots.insert(name.clone(), kind);
    }
    Ok(json!({
        "command": "info",
        "format": spec::FORMAT,
        "alphabet_size": sft.alphabet_size(),
        "edges": sft.edge_count(),
        "mixing_time": sft.mixing_time(),
        "mixing": sft.is_mixing(),
        "simple_cycles_short": cycles.len(),
        "potentials": pots,
        "has_measure": raw.measure.is_some(),
        "has_suspension": raw.suspension.is_some(),
    }))
}

fn extremal(common: &Common, sense: Sense) -> CliResult<Value> {
    with_mode(common, &["f"], |raw, mode| match mode {
        Mode::Exact => cmd_extremal::<Rational>(raw, common, sense),
        Mode::Float => cmd_extremal::<f64>(raw, common, sense),
    })
}

fn cmd_extremal<S: OutputScalar>(raw: &RawSpec, _common: &Common, sense: Sense) -> CliResult<Value> {
    let sft = raw.sft()?;
    let f_name = require_name(&raw.run, "f")?;
    let key = if sense == Sense::Maximize { "beta" } else { "eta" };
    if raw.is_cocycle(&f_name)? {
        let cocycle = raw.cocycle(&sft, &f_name)?;
        let pot = Potential::Cocycle(cocycle);
        let opts = aap_options(&raw.run);
        let out = if sense == Sense::Maximize {
            max_ergodic_average_aap(&sft, &pot, &opts)?
        } else {
            min_ergodic_average_aap(&sft, &pot, &opts)?
        };
        return Ok(json!({
            "command": key,
            "mode": "float",
            "potential": f_name,
            format!("{key}_interval"): [out.interval.lo, out.interval.hi],
            "approximant_value": out.approximant_value,
            "xi": out.xi,
            "exact_reduction": out.exact,
            "horizon_upper": out.horizon_upper,
            "cycle_bound": out.cycle_bound,
        }));
    }
    let f = raw.locally_constant::<S>(&sft, &f_name)?;
    let out = if sense == Sense::Maximize {
        max_ergodic_average(&sft, &f)?
    } else {
        min_ergodic_average(&sft, &f)?
    };
    Ok(json!({
        "command": key,
        "mode": S::MODE,
        "potential": f_name,
        key: out.value.to_json(),
        "witness_cycle": out.cycle.as_ref().map(cycle_json),
        "witness_edges": witness_json(&sft, &out.witness),
    }))
}

fn cmd_lambda<S: OutputScalar>(raw: &RawSpec, common: &Common, alpha_flag: Option<&str>) -> CliResult<Value> {
    let sft = raw.sft()?;
    let f_name = require_name(&raw.run, "f")?;
    let phi_name = require_name(&raw.run, "phi")?;
    if raw.is_cocycle(&f_name)? || raw.is_cocycle(&phi_name)? {
        let alpha: f64 = alpha_value::<f64>(raw, alpha_flag)?;
        let f = resolve_potential(raw, &sft, &f_name)?;
        let phi = resolve_potential(raw, &sft, &phi_name)?;
        let (interval, center) = conditional_max_aap(&sft, &f, &phi, alpha, &aap_options(&raw.run))?;
        return Ok(json!({
            "command": "lambda",
            "mode": "float",
            "alpha": alpha,
            "lambda_interval": [interval.lo, interval.hi],
            "approximant_value": center.value,
            "witness": witness_json(&sft, &center.witness),
            "clamped": center.clamped,
        }));
    }
    let alpha = alpha_value::<S>(raw, alpha_flag)?;
    let f = raw.locally_constant::<S>(&sft, &f_name)?;
    let phi = raw.locally_constant::<S>(&sft, &phi_name)?;
    let out = ConditionalProblem::new(&sft, &f, &phi)?.lambda_with(&alpha, None, true)?;
    let _ = common;
    Ok(json!({
        "command": "lambda",
        "mode": S::MODE,
        "alpha": out.alpha.to_json(),
        "lambda": out.value.to_json(),
        "witness": witness_json(&sft, &out.witness),
        "witness_cycle": out.cycle.as_ref().map(cycle_json),
        "clamped": out.clamped,
    }))
}

fn resolve_potential(raw: &RawSpec, sft: &Sft, name: &str) -> CliResult<Potential> {
    if raw.is_cocycle(name)? {
        Ok(Potential::Cocycle(raw.cocycle(sft, name)?))
    } else {
        Ok(Potential::LocallyConstant(raw.locally_constant::<f64>(sft, name)?))
    }
}

fn cmd_spectrum<S: OutputScalar>(raw: &RawSpec, common: &Common, grid_flag: Option<usize>) -> CliResult<Value> {
    let sft = raw.sft()?;
    let grid_size = grid_flag.or(raw.run.grid).unwrap_or(33).max(3);
    let f_name = require_name(&raw.run, "f")?;
    let phi_name = require_name(&raw.run, "phi")?;
    let cocycle_input = raw.is_cocycle(&f_name)? || raw.is_cocycle(&phi_name)?;

    if cocycle_input {
        // Approximant spectrum, then certified per-point widening.
        let opts = aap_options(&raw.run);
        let f = resolve_potential(raw, &sft, &f_name)?;
        let phi = resolve_potential(raw, &sft, &phi_name)?;
        let (f_a, _) = f.approximant(&sft, opts.xi)?;
        let (phi_a, _) = phi.approximant(&sft, opts.xi)?;
        let problem = ConditionalProblem::new(&sft, &f_a, &phi_a)?;
        let base = problem.spectrum(grid_size)?;
        let mut rows = Vec::with_capacity(base.grid.len());
        let mut grid_json = Vec::with_capacity(base.grid.len());
        for (alpha, _) in &base.grid {
            let (iv, _) = conditional_max_aap(&sft, &f, &phi, *alpha, &opts)?;
            rows.push(format!("{},{},{}", alpha, iv.lo, iv.hi));
            grid_json.push(json!([alpha, iv.lo, iv.hi]));
        }
        let csv = write_csv(common, "spectrum.csv", "alpha,lambda_lo,lambda_hi", &rows)?;
        return Ok(json!({
            "command": "spectrum",
            "mode": "float",
            "grid_size": grid_size,
            "range": [base.range.0, base.range.1],
            "flat_top": [base.flat_top.0, base.flat_top.1],
            "beta_f": base.beta_f,
            "alpha_star": base.alpha_star,
            "max_adjacent_jump": base.max_adjacent_jump,
            "rows": grid_json,
            "csv": csv,
        }));
    }

    let f = raw.locally_constant::<S>(&sft, &f_name)?;
    let phi = raw.locally_constant::<S>(&sft, &phi_name)?;
    let problem = ConditionalProblem::new(&sft, &f, &phi)?;
    let out = problem.spectrum(grid_size)?;
    let rows: Vec<String> = out
        .grid
        .iter()
        .map(|(a, v)| {
            format!(
                "{},{},{}",
                a.to_f64_lossy(),
                v.lo.to_f64_lossy(),
                v.hi.to_f64_lossy()
            )
        })
        .collect();
    let csv = write_csv(common, "spectrum.csv", "alpha,lambda_lo,lambda_hi", &rows)?;
    let grid_json: Vec<Value> = out
        .grid
        .iter()
        .map(|(a, v)| json!([a.to_json(), v.lo.to_json(), v.hi.to_json()]))
        .collect();
    Ok(json!({
        "command": "spectrum",
        "mode": S::MODE,
        "grid_size": grid_size,
        "range": [out.range.0.to_json(), out.range.1.to_json()],
        "flat_top": [out.flat_top.0.to_json(), out.flat_top.1.to_json()],
        "beta_f": out.beta_f.to_json(),
        "alpha_star": out.alpha_star.to_json(),
        "max_adjacent_jump": out.max_adjacent_jump.to_json(),
        "rows": grid_json,
        "csv": csv,
    }))
}

fn cmd_ratio<S: OutputScalar>(raw: &RawSpec, common: &Common, alpha_flag: Option<&str>) -> CliResult<Value> {
    let sft = raw.sft()?;
    let f_name = require_name(&raw.run, "f")?;
    let _ = common;
    if raw.is_cocycle(&f_name)? {
        if alpha_flag.is_some() {
            return Err(CliError::Config(
                "constrained ratio with a cocycle numerator is not supported".into(),
            ));
        }
        let f = resolve_potential(raw, &sft, &f_name)?;
        let g = Potential::LocallyConstant(g_or_one::<f64>(raw, &sft, "g")?);
        let sigma = match &g {
            Potential::LocallyConstant(p) => p.min_weight(),
            _ => unreachable!(),
        };
        let (interval, center) = ratio_max_aap(&sft, &f, &g, sigma, &aap_options(&raw.run))?;
        return Ok(json!({
            "command": "ratio",
            "mode": "float",
            "value_interval": [interval.lo, interval.hi],
            "approximant_value": center.value,
            "witness_cycle": center.cycle.as_ref().map(cycle_json),
        }));
    }
    let f = raw.locally_constant::<S>(&sft, &f_name)?;
    let g = g_or_one::<S>(raw, &sft, "g")?;
    let sigma = DenominatorBound::tight(&g).map_err(CliError::from)?;
    // Only the explicit flag selects the constrained (level-set) form.
    if let Some(flag) = alpha_flag {
        let alpha = scalar::parse_scalar::<S>(flag)
            .ok_or_else(|| CliError::Config(format!("cannot parse --alpha {flag:?}")))?;
        let phi_name = require_name(&raw.run, "phi")?;
        let phi = raw.locally_constant::<S>(&sft, &phi_name)?;
        let psi = g_or_one::<S>(raw, &sft, "psi")?;
        let psi_sigma = DenominatorBound::tight(&psi).map_err(CliError::from)?;
        let sigma_min = if sigma.sigma() <= psi_sigma.sigma() { sigma } else { psi_sigma };
        let out = ratio_max_constrained(&sft, &f, &g, &phi, &psi, &alpha, &sigma_min)?;
        return Ok(json!({
            "command": "ratio",
            "mode": S::MODE,
            "alpha": alpha.to_json(),
            "value": out.value.to_json(),
            "witness": witness_json(&sft, &out.witness),
            "witness_cycle": out.cycle.as_ref().map(cycle_json),
        }));
    }
    let out = ratio_max(&sft, &f, &g, &sigma)?;
    Ok(json!({
        "command": "ratio",
        "mode": S::MODE,
        "value": out.value.to_json(),
        "witness": witness_json(&sft, &out.witness),
        "witness_cycle": out.cycle.as_ref().map(cycle_json),
    }))
}

fn cmd_irregular<S: OutputScalar>(raw: &RawSpec, common: &Common, params: &WitnessParams) -> CliResult<Value> {
    let sft = raw.sft()?;
    let f = raw.locally_constant::<S>(&sft, &require_name(&raw.run, "f")?)?;
    let g = g_or_one::<S>(raw, &sft, "g")?;
    let phi = match run_name(&raw.run, "phi") {
        Some(name) => raw.locally_constant::<S>(&sft, &name)?,
        None => f.clone(),
    };
    let psi = g_or_one::<S>(raw, &sft, "psi")?;
    let sigma_g = DenominatorBound::tight(&g).map_err(CliError::from)?;
    let sigma_psi = DenominatorBound::tight(&psi).map_err(CliError::from)?;

    // mu1: ratio-maximizing ergodic vertex for F/G; mu2: the Phi/Psi extreme
    // vertex whose ratio differs most from mu1's.
    let best = ratio_max(&sft, &f, &g, &sigma_g)?;
    let mu1_cycle = best.cycle.clone().expect("ergodic vertex");
    let mu1 = edge_vector_to_markov(&sft, &EdgeFrequencyVector::uniform_cycle(&sft, &mu1_cycle))?;
    let r1 = measure_ratio(&phi, &psi, &mu1)?;
    let lo = ratio_min(&sft, &phi, &psi, &sigma_psi)?;
    let hi = ratio_max(&sft, &phi, &psi, &sigma_psi)?;
    let pick = if (r1.clone() - lo.value.clone()).abs() >= (r1.clone() - hi.value.clone()).abs() {
        lo
    } else {
        hi
    };
    let mu2_cycle = pick.cycle.clone().expect("ergodic vertex");
    let mu2 = edge_vector_to_markov(&sft, &EdgeFrequencyVector::uniform_cycle(&sft, &mu2_cycle))?;

    let witness = construct_irregular_witness(&sft, &phi, &psi, &mu1, &mu2, params)?;
    let estimate = irregular_supremum_estimate(&f, &g, &[&witness])?;

    let schedule: Vec<Value> = witness
        .schedule
        .iter()
        .map(|e| json!({"k": e.k, "N_k": e.block_len, "m_k": e.bridge_len, "t_k": e.t_k, "rho": e.rho}))
        .collect();
    let rows: Vec<String> = witness
        .schedule
        .iter()
        .zip(&witness.oscillation)
        .map(|(e, r)| format!("{},{},{}", e.k, e.t_k, r.to_f64_lossy()))
        .collect();
    let csv = write_csv(common, "oscillation.csv", "k,t_k,ratio", &rows)?;
    let word_json = word_export(common, &witness.word)?;

    Ok(json!({
        "command": "irregular",
        "word": word_json,
        "mode": S::MODE,
        "depth": params.depth,
        "growth": params.growth_factor,
        "seed": params.seed,
        "targets": {
            "mu1_cycle": cycle_json(&mu1_cycle),
            "mu2_cycle": cycle_json(&mu2_cycle),
            "ratio_1": witness.target_ratios.0.to_json(),
            "ratio_2": witness.target_ratios.1.to_json(),
        },
        "schedule": schedule,
        "oscillation": witness.oscillation.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        "word_length": witness.word.len(),
        "schedule_note": witness.schedule_note,
        "estimate": estimate.estimate.to_json(),
        "low_depth": estimate.low_depth,
        "ratio_max": best.value.to_json(),
        "csv": csv,
    }))
}

/// Short witness words go straight into the JSON document; long ones are
/// written next to the CSV side files instead.
fn word_export(common: &Common, word: &Word) -> CliResult<Value> {
    if word.len() <= 2048 {
        return Ok(json!(word.symbols()));
    }
    let line: String = word
        .symbols()
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",");
    match write_csv(common, "witness_word.txt", "symbols", &[line])? {
        Some(path) => Ok(json!({ "file": path, "length": word.len() })),
        None => Ok(json!({ "file": Value::Null, "length": word.len() })),
    }
}

fn suspension_parts<S: OutputScalar>(
    raw: &RawSpec,
    sft: &Sft,
) -> CliResult<(FlowObservable<S>, FlowObservable<S>, RoofFunction<S>)> {
    let susp = raw
        .suspension
        .as_ref()
        .ok_or_else(|| CliError::Config("spec file has no suspension section".into()))?;
    let h = FlowObservable::new(raw.locally_constant::<S>(sft, &susp.observable)?);
    let phi = FlowObservable::new(raw.locally_constant::<S>(sft, &susp.constraint)?);
    let tau = RoofFunction::new(raw.locally_constant::<S>(sft, &susp.roof)?)
        .map_err(CliError::from)?;
    Ok((h, phi, tau))
}

fn cmd_susp_average<S: OutputScalar>(raw: &RawSpec, common: &Common) -> CliResult<Value> {
    let sft = raw.sft()?;
    let (h, _, tau) = suspension_parts::<S>(raw, &sft)?;
    let mu = raw.measure::<S>(&sft)?;
    mu.validate(&sft).map_err(CliError::from)?;
    let value = flow_average(&sft, &h, &mu, &tau)?;
    let _ = common;
    Ok(json!({
        "command": "suspension.average",
        "mode": S::MODE,
        "value": value.to_json(),
    }))
}

fn cmd_susp_level<S: OutputScalar>(raw: &RawSpec, common: &Common, alpha_flag: Option<&str>) -> CliResult<Value> {
    let sft = raw.sft()?;
    let (h, phi, tau) = suspension_parts::<S>(raw, &sft)?;
    let alpha = alpha_value::<S>(raw, alpha_flag)?;
    let out = flow_level_set_optimum(&sft, &h, &phi, &alpha, &tau)?;
    let _ = common;
    Ok(json!({
        "command": "suspension.level",
        "mode": S::MODE,
        "alpha": alpha.to_json(),
        "value": out.value.to_json(),
        "witness": witness_json(&sft, &out.witness),
        "witness_cycle": out.cycle.as_ref().map(cycle_json),
    }))
}

fn cmd_susp_irregular<S: OutputScalar>(raw: &RawSpec, common: &Common, params: &WitnessParams) -> CliResult<Value> {
    let sft = raw.sft()?;
    let (h, phi, tau) = suspension_parts::<S>(raw, &sft)?;
    let report = flow_irregular_optimum(&sft, &h, &phi, &tau, params)?;
    let rows: Vec<String> = report
        .witness
        .schedule
        .iter()
        .zip(&report.flow_oscillation)
        .map(|(e, r)| format!("{},{},{}", e.k, e.t_k, r.to_f64_lossy()))
        .collect();
    let csv = write_csv(common, "oscillation.csv", "k,t_k,ratio", &rows)?;
    let word_json = word_export(common, &report.witness.word)?;
    Ok(json!({
        "command": "suspension.irregular",
        "mode": S::MODE,
        "word": word_json,
        "value": report.value.to_json(),
        "phi_range": [report.phi_range.0.to_json(), report.phi_range.1.to_json()],
        "witness_cycle": report.optimum.cycle.as_ref().map(cycle_json),
        "word_length": report.witness.word.len(),
        "flow_oscillation": report.flow_oscillation.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        "schedule_note": report.witness.schedule_note,
        "csv": csv,
    }))
}

fn cmd_horizon<S: OutputScalar>(raw: &RawSpec, common: &Common, n_flag: Option<usize>) -> CliResult<Value> {
    let sft = raw.sft()?;
    let n = n_flag
        .or(raw.run.n)
        .ok_or_else(|| CliError::Config("no horizon given (--n or run.n)".into()))?;
    let f_name = require_name(&raw.run, "f")?;
    let _ = common;
    if raw.is_cocycle(&f_name)? {
        let cocycle = raw.cocycle(&sft, &f_name)?;
        let out = finite_horizon_max_cocycle(&sft, &cocycle, n, 24)?;
        return Ok(json!({
            "command": "horizon",
            "mode": "float",
            "n": n,
            "value": out.value,
            "certified_upper": out.certified_upper,
            "upper_sequence": out.upper_sequence,
        }));
    }
    let f = raw.locally_constant::<S>(&sft, &f_name)?;
    let out = finite_horizon_max(&sft, &f, n)?;
    let beta = max_ergodic_average(&sft, &f)?.value;
    let deviation = out.value.clone() - beta.clone();
    let c_bound = S::from_int(2)
        * S::from_int(f.range() as i64)
        * f.max_abs_weight()
        / S::from_int(n as i64);
    Ok(json!({
        "command": "horizon",
        "mode": S::MODE,
        "n": n,
        "value": out.value.to_json(),
        "beta": beta.to_json(),
        "deviation": deviation.to_json(),
        "bound_c_over_n": c_bound.to_json(),
    }))
}

fn cmd_trace<S: OutputScalar>(raw: &RawSpec, common: &Common, n_flag: Option<usize>, seed_flag: Option<u64>) -> CliResult<Value> {
    let sft = raw.sft()?;
    let mu = raw.measure::<S>(&sft)?;
    mu.validate(&sft).map_err(CliError::from)?;
    let chain = edge_vector_to_markov(&sft, &mu)?;
    let n = n_flag.or(raw.run.n).unwrap_or(1 << 12);
    let seed = seed_flag.or(raw.run.seed).unwrap_or(0);
    let mut pots: Vec<(String, LocallyConstantPotential<S>)> = Vec::new();
    for key in ["f", "phi"] {
        if let Some(name) = run_name(&raw.run, key) {
            if !raw.is_cocycle(&name)? {
                pots.push((name.clone(), raw.locally_constant::<S>(&sft, &name)?));
            }
        }
    }
    let refs: Vec<&LocallyConstantPotential<S>> = pots.iter().map(|(_, p)| p).collect();
    let trace = sample_generic_word(&chain, n, seed, &refs)?;
    let mut header = String::from("n");
    for (name, _) in &pots {
        let _ = write!(header, ",avg_{name}");
    }
    let rows: Vec<String> = trace
        .checkpoints
        .iter()
        .map(|cp| {
            let mut row = cp.n.to_string();
            for a in &cp.averages {
                let _ = write!(row, ",{}", a.to_f64_lossy());
            }
            row
        })
        .collect();
    let csv = write_csv(common, "trace.csv", &header, &rows)?;
    let checkpoints: Vec<Value> = trace
        .checkpoints
        .iter()
        .map(|cp| {
            json!({
                "n": cp.n,
                "averages": cp.averages.iter().map(|a| a.to_json()).collect::<Vec<_>>(),
                "conservation_defect": cp.freq.conservation_defect(&sft).to_f64_lossy(),
            })
        })
        .collect();
    Ok(json!({
        "command": "trace",
        "mode": S::MODE,
        "n": n,
        "seed": seed,
        "potentials": pots.iter().map(|(name, _)| name.clone()).collect::<Vec<_>>(),
        "checkpoints": checkpoints,
        "csv": csv,
    }))
}

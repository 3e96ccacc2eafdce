//! Command-line front end: evaluate bounds, emit delivery plans, trace the
//! region slice and average-latency curves, and run the self-check suites.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use ndt_region::bounds::{constraint_polytope, lp_min_total};
use ndt_region::closed_form::{ndt_inner, ndt_outer_component, Regime};
use ndt_region::model::{Demand, PopularityProfile, SystemParams};
use ndt_region::optimizer::{
    trace_average_tradeoff, trace_region_slice, AverageMode, SweepOptions, SweepSample,
};
use ndt_region::planner::{build_cache_placement, build_delivery_plan, DeliveryPlan};
use ndt_region::suites;

#[derive(Parser)]
#[command(name = "ndt-region", version, about = "Delivery-latency regions for a 2-EN / 2-user cache-aided network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the achievable bound, the converse bound and the LP minimum
    /// for one allocation pair.
    Eval(Flags),
    /// Emit the delivery plan for one allocation pair: a phase table and,
    /// with `--format json`, the structured plan.
    Plan(Flags),
    /// Emit the two-class region slice as CSV (columns: cross-class NDT,
    /// class-1 NDT).
    Region(Flags),
    /// Emit the average-latency trade-off curve as CSV (columns: class-1
    /// average, class-2 average).
    Average(Flags),
    /// Run all self-check suites and print one pass/fail line per suite.
    Verify(Flags),
}

impl Command {
    fn flags(&self) -> &Flags {
        match self {
            Command::Eval(f)
            | Command::Plan(f)
            | Command::Region(f)
            | Command::Average(f)
            | Command::Verify(f) => f,
        }
    }
}

#[derive(Args)]
struct Flags {
    /// Structured-text config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Per-file cache capacity fraction.
    #[arg(long)]
    mu: Option<f64>,
    /// Fronthaul rate r.
    #[arg(long)]
    rate: Option<f64>,
    /// Allocation: comma list of per-file fractions, or a `c1:c2` class pair.
    #[arg(long)]
    alloc: Option<String>,
    /// Number of class-1 files.
    #[arg(long)]
    j1: Option<usize>,
    /// Number of class-2 files.
    #[arg(long)]
    j2: Option<usize>,
    /// Popularity skew a of the two-class demand model.
    #[arg(long)]
    popularity: Option<f64>,
    /// Sweep step for `region` and `average`.
    #[arg(long)]
    step: Option<f64>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Write the emitted curve/plan to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Average class-2 pairs with the class-1 within-class latency.
    #[arg(long)]
    strict_paper_average: bool,
    /// Append achieving-allocation columns and the regime id to CSV rows.
    #[arg(long)]
    extended: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    mu: Option<f64>,
    rate: Option<f64>,
    alloc: Option<Vec<f64>>,
    classes: Option<ClassConfig>,
    popularity: Option<f64>,
    step: Option<f64>,
    format: Option<OutputFormat>,
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct ClassConfig {
    j1: usize,
    j2: usize,
    mu1: f64,
    mu2: f64,
}

#[derive(Clone)]
enum AllocSpec {
    Explicit(Vec<f64>),
    Classes(f64, f64),
}

/// Fully merged scenario (file config overridden by flags).
struct Scenario {
    mu: Option<f64>,
    rate: Option<f64>,
    alloc: Option<AllocSpec>,
    j1: Option<usize>,
    j2: Option<usize>,
    popularity: Option<f64>,
    step: f64,
    format: OutputFormat,
    out: Option<PathBuf>,
    average_mode: AverageMode,
    extended: bool,
}

enum CliError {
    /// Missing or unparseable configuration (exit 2).
    Usage(String),
    /// Values outside the model's constraints (exit 3).
    Domain(String),
}

impl From<ndt_region::Error> for CliError {
    fn from(e: ndt_region::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_alloc(text: &str) -> CliResult<AllocSpec> {
    if let Some((c1, c2)) = text.split_once(':') {
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("--alloc: `{s}` is not a number")))
        };
        return Ok(AllocSpec::Classes(parse(c1)?, parse(c2)?));
    }
    let values = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("--alloc: `{s}` is not a number")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(usage("--alloc: empty list"));
    }
    Ok(AllocSpec::Explicit(values))
}

fn resolve(flags: &Flags) -> CliResult<Scenario> {
    let file = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("config `{}`: {e}", path.display())))?;
            serde_json::from_str::<FileConfig>(&text)
                .map_err(|e| usage(format!("config `{}`: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    if file.alloc.is_some() && file.classes.is_some() {
        return Err(usage("config: `alloc` and `classes` are mutually exclusive"));
    }
    let file_alloc = file
        .alloc
        .map(AllocSpec::Explicit)
        .or_else(|| file.classes.as_ref().map(|c| AllocSpec::Classes(c.mu1, c.mu2)));
    let flag_alloc = flags.alloc.as_deref().map(parse_alloc).transpose()?;

    Ok(Scenario {
        mu: flags.mu.or(file.mu),
        rate: flags.rate.or(file.rate),
        alloc: flag_alloc.or(file_alloc),
        j1: flags.j1.or(file.classes.as_ref().map(|c| c.j1)),
        j2: flags.j2.or(file.classes.as_ref().map(|c| c.j2)),
        popularity: flags.popularity.or(file.popularity),
        step: flags.step.or(file.step).unwrap_or(1e-3),
        format: flags.format.or(file.format).unwrap_or(OutputFormat::Csv),
        out: flags.out.clone().or(file.out),
        average_mode: if flags.strict_paper_average {
            AverageMode::AsPrinted
        } else {
            AverageMode::ClassConsistent
        },
        extended: flags.extended,
    })
}

fn require<T: Copy>(value: Option<T>, name: &str) -> CliResult<T> {
    value.ok_or_else(|| usage(format!("missing required field `{name}`")))
}

/// The demanded pair of per-file fractions for `eval` and `plan`.
fn alloc_pair(scenario: &Scenario) -> CliResult<(f64, f64)> {
    let (mu_i, mu_j) = match scenario
        .alloc
        .as_ref()
        .ok_or_else(|| usage("missing required field `alloc`"))?
    {
        AllocSpec::Classes(c1, c2) => (*c1, *c2),
        AllocSpec::Explicit(v) if v.len() == 2 => (v[0], v[1]),
        AllocSpec::Explicit(v) => {
            return Err(usage(format!(
                "alloc: need exactly 2 per-file fractions, got {}",
                v.len()
            )))
        }
    };
    for (name, v) in [("alloc[0]", mu_i), ("alloc[1]", mu_j)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Domain(format!("{name} must be in [0, 1], got {v}")));
        }
    }
    Ok((mu_i, mu_j))
}

fn positive_rate(scenario: &Scenario) -> CliResult<f64> {
    let rate = require(scenario.rate, "rate")?;
    if rate <= 0.0 {
        return Err(CliError::Domain(format!("rate must be positive, got {rate}")));
    }
    Ok(rate)
}

/// 12-significant-digit decimal rendering with trailing zeros trimmed; the
/// text re-parses to the original value well within 1e-12.
fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(12) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn emit(scenario: &Scenario, text: &str) -> CliResult<()> {
    match &scenario.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| usage(format!("cannot write `{}`: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_eval(scenario: &Scenario) -> CliResult<()> {
    let rate = positive_rate(scenario)?;
    let (mu_i, mu_j) = alloc_pair(scenario)?;
    let (inner, regime) = ndt_inner(mu_i, mu_j, rate);
    let regimes: &[Regime] = if rate > 1.0 {
        &[Regime::R4]
    } else {
        &[Regime::R1, Regime::R2, Regime::R3]
    };
    let (binding, outer) = regimes
        .iter()
        .map(|&l| (l, ndt_outer_component(l, mu_i, mu_i, mu_j, mu_j, rate)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let lp = lp_min_total(&constraint_polytope(mu_i, mu_i, mu_j, mu_j, rate));
    let text = match scenario.format {
        OutputFormat::Csv => format!(
            "inner = {} (regime {})\nouter = {} (component {})\nlp    = {} (vertex delta_e={}, delta_f={})\n",
            fmt_sig(inner),
            regime.index(),
            fmt_sig(outer),
            binding.index(),
            fmt_sig(lp.value),
            fmt_sig(lp.vertex.0),
            fmt_sig(lp.vertex.1),
        ),
        OutputFormat::Json => format!(
            "{}\n",
            serde_json::json!({
                "inner": inner,
                "regime": regime.index(),
                "outer": outer,
                "binding_component": binding.index(),
                "lp": { "value": lp.value, "delta_e": lp.vertex.0, "delta_f": lp.vertex.1 },
            })
        ),
    };
    emit(scenario, &text)
}

fn phase_table(plan: &DeliveryPlan) -> String {
    let demand = plan.demand();
    let mut table = format!(
        "demand: file {} (user1), file {} (user2)\n",
        demand.i() + 1,
        demand.j() + 1
    );
    for (idx, phase) in plan.phases().iter().enumerate() {
        let payloads = phase
            .payloads
            .iter()
            .map(|p| {
                format!(
                    "file{}[{},{})->{}",
                    p.file + 1,
                    fmt_sig(p.interval.lo()),
                    fmt_sig(p.interval.hi()),
                    p.endpoint.label()
                )
            })
            .collect::<Vec<_>>()
            .join("  ");
        let _ = writeln!(
            table,
            "phase {}: {:<5}  delta_f={:<14}  delta_e={:<14}  {}",
            idx + 1,
            phase.kind.label(),
            fmt_sig(phase.ndt.delta_f()),
            fmt_sig(phase.ndt.delta_e()),
            payloads
        );
    }
    let total = plan.total();
    let _ = writeln!(
        table,
        "total:          delta_f={:<14}  delta_e={:<14}  sum={}",
        fmt_sig(total.delta_f()),
        fmt_sig(total.delta_e()),
        fmt_sig(total.total())
    );
    table
}

fn run_plan(scenario: &Scenario) -> CliResult<()> {
    let rate = positive_rate(scenario)?;
    let (mu_i, mu_j) = alloc_pair(scenario)?;
    let mu = scenario.mu.unwrap_or((mu_i + mu_j) / 2.0);
    let params = SystemParams::new(mu, rate, 2)?;
    let placement = build_cache_placement(&[mu_i, mu_j], rate, &params)?;
    let demand = Demand::new(0, 1)?;
    let plan = build_delivery_plan(&placement, demand, rate)?;
    let text = match scenario.format {
        OutputFormat::Csv => phase_table(&plan),
        OutputFormat::Json => format!("{}\n", plan.to_json()),
    };
    emit(scenario, &text)
}

fn curve_text(scenario: &Scenario, points: &[SweepSample]) -> String {
    match scenario.format {
        OutputFormat::Csv => {
            let mut text = String::new();
            for p in points {
                if scenario.extended {
                    let _ = writeln!(
                        text,
                        "{},{},{},{},{}",
                        fmt_sig(p.x),
                        fmt_sig(p.y),
                        fmt_sig(p.alloc1),
                        fmt_sig(p.alloc2),
                        p.regime.index()
                    );
                } else {
                    let _ = writeln!(text, "{},{}", fmt_sig(p.x), fmt_sig(p.y));
                }
            }
            text
        }
        OutputFormat::Json => {
            let rows: Vec<_> = points
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "x": p.x,
                        "y": p.y,
                        "alloc1": p.alloc1,
                        "alloc2": p.alloc2,
                        "regime": p.regime.index(),
                    })
                })
                .collect();
            format!("{}\n", serde_json::json!(rows))
        }
    }
}

fn sweep_opts(scenario: &Scenario) -> CliResult<SweepOptions> {
    if scenario.step <= 0.0 || scenario.step > 1.0 {
        return Err(CliError::Domain(format!(
            "step must be in (0, 1], got {}",
            scenario.step
        )));
    }
    Ok(SweepOptions {
        step: scenario.step,
        interior: false,
    })
}

fn run_region(scenario: &Scenario) -> CliResult<()> {
    let rate = positive_rate(scenario)?;
    let mu = require(scenario.mu, "mu")?;
    let j1 = require(scenario.j1, "j1")?;
    let j2 = require(scenario.j2, "j2")?;
    // validates mu's range
    SystemParams::new(mu, rate, j1 + j2)?;
    let slice = trace_region_slice(j1, j2, mu, rate, sweep_opts(scenario)?);
    emit(scenario, &curve_text(scenario, &slice.points))
}

fn run_average(scenario: &Scenario) -> CliResult<()> {
    let rate = positive_rate(scenario)?;
    let mu = require(scenario.mu, "mu")?;
    let j1 = require(scenario.j1, "j1")?;
    let j2 = require(scenario.j2, "j2")?;
    let a = require(scenario.popularity, "popularity")?;
    SystemParams::new(mu, rate, j1 + j2)?;
    let profile = PopularityProfile::new(a)?;
    let curve = trace_average_tradeoff(
        j1,
        j2,
        mu,
        rate,
        profile,
        sweep_opts(scenario)?,
        scenario.average_mode,
    )?;
    emit(scenario, &curve_text(scenario, &curve.points))
}

fn run_verify() -> ExitCode {
    let results = suites::run_all();
    for r in &results {
        println!("{}", r.summary_line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        println!("all {} suites passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("{failed} suite(s) failed");
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if matches!(cli.command, Command::Verify(_)) {
        return run_verify();
    }
    let outcome = resolve(cli.command.flags()).and_then(|scenario| match cli.command {
        Command::Eval(_) => run_eval(&scenario),
        Command::Plan(_) => run_plan(&scenario),
        Command::Region(_) => run_region(&scenario),
        Command::Average(_) => run_average(&scenario),
        Command::Verify(_) => unreachable!(),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("constraint violation: {msg}");
            ExitCode::from(3)
        }
    }
}

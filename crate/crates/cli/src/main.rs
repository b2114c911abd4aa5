use std::fs;
use std::io::{self, IsTerminal, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use flt_core::report::{emit, emit_all, Format, Status};
use flt_core::runner::{run, run_batch};
use flt_core::scenario::{parse_batch, parse_scenario};

/// Evaluate the fractional Laplace transform and verify its operator-norm bounds.
#[derive(Parser, Debug)]
#[command(name = "flt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form constants with quadrature cross-checks
    Constants(ScenarioArgs),
    /// Evaluate a kernel transform on a grid of points
    Eval(ScenarioArgs),
    /// L^p norms of a test function
    Norm(ScenarioArgs),
    /// Empirical operator norm against the analytic bounds
    Bounds(ScenarioArgs),
    /// Trial-function quotient across exponents
    Sharpness(ScenarioArgs),
    /// Dilation slopes of the norm quotient
    Scaling(ScenarioArgs),
    /// Power-weighted operator norm against its bounds
    Weighted(ScenarioArgs),
    /// Grand Lebesgue space embedding check
    Gls(ScenarioArgs),
    /// Convergence to the Laplace transform as kappa grows
    Limit(ScenarioArgs),
    /// Run every scenario of a batch file
    Batch(BatchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Human,
    Json,
    Csv,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Human => Format::Human,
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "human")]
    format: OutputFormat,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Scenario file (TOML or JSON); `-` reads stdin
    input: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Set any scenario field, e.g. `--set 'p_grid=[1.5,1.9]'`; the value is
    /// read as JSON, falling back to a plain string
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct BatchArgs {
    /// Batch file with `[[scenario]]` entries; `-` reads stdin
    input: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn document_from(text: &str) -> Result<Map<String, Value>> {
    let value: Value = if text.trim_start().starts_with('{') {
        serde_json::from_str(text)?
    } else {
        let t: toml::Value = toml::from_str(text)?;
        serde_json::to_value(t)?
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => bail!("scenario must be a table"),
    }
}

/// Builds the scenario document from the input file (if any) and the flags.
fn scenario_text(command: &str, args: &ScenarioArgs) -> Result<String> {
    let input = match &args.input {
        Some(p) => Some(read_input(p)?),
        None if !io::stdin().is_terminal() && args_are_empty(args) => {
            Some(read_input(&PathBuf::from("-"))?)
        }
        None => None,
    };
    let mut doc = match input {
        Some(text) => document_from(&text)?,
        None => Map::new(),
    };
    match doc.get("command") {
        None => {
            doc.insert("command".into(), Value::String(command.into()));
        }
        Some(Value::String(c)) if c == command => {}
        Some(other) => bail!("scenario command {other} does not match subcommand `{command}`"),
    }
    let mut set = |k: &str, v: Value| {
        doc.insert(k.into(), v);
    };
    if let Some(v) = args.kappa {
        set("kappa", v.into());
    }
    if let Some(v) = args.r {
        set("r", v.into());
    }
    if let Some(v) = args.p {
        set("p", v.into());
    }
    if let Some(v) = args.mu {
        set("mu", v.into());
    }
    if let Some(v) = args.seed {
        set("seed", v.into());
    }
    if let Some(v) = args.rel_tol {
        set("rel_tol", v.into());
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {kv:?}"))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        set(k.trim(), value);
    }
    Ok(serde_json::to_string(&Value::Object(doc))?)
}

fn args_are_empty(a: &ScenarioArgs) -> bool {
    a.kappa.is_none()
        && a.r.is_none()
        && a.p.is_none()
        && a.mu.is_none()
        && a.seed.is_none()
        && a.rel_tol.is_none()
        && a.set.is_empty()
}

fn use_color(output: &OutputArgs) -> bool {
    matches!(output.format, OutputFormat::Human)
        && output.out.is_none()
        && io::stdout().is_terminal()
        && std::env::var_os("NO_COLOR").is_none()
}

fn write_output(output: &OutputArgs, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<Status> {
    let (name, args) = match &cli.command {
        Command::Batch(b) => {
            let scenarios = parse_batch(&read_input(&b.input)?)?;
            let reports = run_batch(&scenarios);
            write_output(
                &b.output,
                &emit_all(&reports, b.output.format.into(), use_color(&b.output))?,
            )?;
            return Ok(reports.iter().fold(Status::Ok, |s, r| s.worst(r.status())));
        }
        Command::Constants(a) => ("constants", a),
        Command::Eval(a) => ("eval", a),
        Command::Norm(a) => ("norm", a),
        Command::Bounds(a) => ("bounds", a),
        Command::Sharpness(a) => ("sharpness", a),
        Command::Scaling(a) => ("scaling", a),
        Command::Weighted(a) => ("weighted", a),
        Command::Gls(a) => ("gls", a),
        Command::Limit(a) => ("limit", a),
    };
    let scenario = parse_scenario(&scenario_text(name, args)?)?;
    let report = run(&scenario);
    write_output(
        &args.output,
        &emit(&report, args.output.format.into(), use_color(&args.output))?,
    )?;
    if let Some(e) = &report.error {
        eprintln!("flt {name}: {e}");
    }
    Ok(report.status())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("flt: {e:#}");
            ExitCode::from(Status::InputError.code() as u8)
        }
    }
}

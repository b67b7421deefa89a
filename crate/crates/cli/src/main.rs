//! `bertini`: predictions, experiments and self-checks for random smooth
//! complete intersections over finite fields.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bertini_core::experiment::{self, ExperimentConfig, Mode, OracleChoice, RunReport, RunSetup};
use bertini_core::groebner::{GroebnerConfig, DEFAULT_PAIR_BUDGET};
use bertini_core::predict::{PredictionReport, DEFAULT_TRUNCATION};
use bertini_core::verify::Suite;
use bertini_core::{FieldDesc, Form, ProjPoint, VarietyDesc};

/// Exit code for flags that parse but do not make sense together.
const USAGE_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "bertini", version, about = "Smooth complete intersections over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the predicted density and point-count model.
    Predict(PredictArgs),
    /// Run an experiment and compare it with the prediction.
    Run(RunArgs),
    /// Recompute a summary from JSONL trial records.
    Stats(StatsArgs),
    /// Run the built-in invariant suite.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct VarietyArgs {
    /// Base field as `p^s`.
    #[arg(long, default_value = "2^1")]
    field: String,
    /// Ambient projective space P^n.
    #[arg(long)]
    n: usize,
    /// Restrict to the smooth hypersurface X = V(g), g in variables x0..xn.
    #[arg(long, conflicts_with = "hypersurface_file")]
    hypersurface: Option<String>,
    /// Read g from a file.
    #[arg(long)]
    hypersurface_file: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    variety: VarietyArgs,
    /// Number of hypersurfaces.
    #[arg(long)]
    k: u32,
    /// Truncation degree of the Euler product.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    r: u32,
    /// Degrees d_1 <= ... <= d_k, for the explicit error bound.
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<u32>>,
    /// Number of imposed local conditions in the error bound.
    #[arg(long, default_value_t = 0)]
    z: u32,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
    UntilSmooth,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Gb,
    Brute,
    Both,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    variety: VarietyArgs,
    /// Degrees d_1 <= ... <= d_k.
    #[arg(long, value_delimiter = ',', required = true)]
    degrees: Vec<u32>,
    /// Number of hypersurfaces; a single degree is repeated k times.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "sampled")]
    mode: ModeArg,
    /// Trials to run (sampled), or the cap on trials (until-smooth).
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Smooth trials to collect in until-smooth mode.
    #[arg(long)]
    smooth_target: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rational point to contain, as comma-separated element indices. Repeatable.
    #[arg(long)]
    contain: Vec<String>,
    /// Rational point to avoid. Repeatable.
    #[arg(long)]
    avoid: Vec<String>,
    /// Record point counts over F_{q^e} for e up to this.
    #[arg(long, default_value_t = 1)]
    count_ext: u32,
    #[arg(long, value_enum, default_value = "gb")]
    oracle: OracleArg,
    /// Largest extension degree scanned by the brute-force oracle.
    #[arg(long, default_value_t = 6)]
    max_ext: u32,
    /// Gröbner pair budget; overrides BERTINI_BUDGET.
    #[arg(long)]
    budget: Option<u64>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Record wall time per trial (makes records non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Truncation degree for the prediction.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    r: u32,
    /// JSONL trial records.
    #[arg(long)]
    records: Option<PathBuf>,
    /// CSV comparison table.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Full JSON report; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    variety: VarietyArgs,
    /// JSONL trial records written by `run`.
    #[arg(long)]
    records: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    r: u32,
    /// CSV comparison table.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Full JSON report; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Also cross-check both oracles on all 1024 plane cubics over F_2.
    #[arg(long)]
    cubics: bool,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

/// Errors in flag values, reported with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Predict(a) => cmd_predict(a),
        Command::Run(a) => cmd_run(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(USAGE_ERROR)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn parse_field(text: &str) -> Result<FieldDesc> {
    let bad = || usage(format!("--field {text:?}: expected p^s, e.g. 2^3"));
    let (p, s) = match text.split_once('^') {
        Some((p, s)) => (p.trim().parse::<u64>().map_err(|_| bad())?, s.trim().parse::<u32>().map_err(|_| bad())?),
        None => (text.trim().parse::<u64>().map_err(|_| bad())?, 1),
    };
    FieldDesc::new(p, s).map_err(|e| usage(format!("--field {text}: {e}")))
}

fn build_variety(args: &VarietyArgs) -> Result<VarietyDesc> {
    let field = parse_field(&args.field)?;
    let g_text = match (&args.hypersurface, &args.hypersurface_file) {
        (Some(g), _) => Some(g.clone()),
        (None, Some(path)) => Some(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?),
        (None, None) => None,
    };
    match g_text {
        None => VarietyDesc::projective_space(&field, args.n).map_err(|e| usage(e.to_string())),
        Some(text) => {
            let g = Form::parse(&field, args.n + 1, text.trim()).map_err(|e| usage(format!("hypersurface: {e}")))?;
            VarietyDesc::hypersurface(g).map_err(|e| usage(format!("hypersurface: {e}")))
        }
    }
}

fn parse_point(field: &FieldDesc, text: &str) -> Result<ProjPoint> {
    let coords: Vec<u32> = text
        .split(',')
        .map(|c| c.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("point {text:?}: expected comma-separated integers")))?;
    ProjPoint::rational(field, &coords).map_err(|e| usage(format!("point {text:?}: {e}")))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: &Option<PathBuf>, json: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, &format!("{json}\n")),
        None => print_stdout(json),
    }
}

/// Prints to stdout, treating a closed pipe as success.
fn print_stdout(text: &str) -> Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn cmd_predict(a: PredictArgs) -> Result<ExitCode> {
    let x = build_variety(&a.variety)?;
    if a.k == 0 || a.k as usize > x.m() + 1 {
        return Err(usage(format!("--k {} must lie in 1..={}", a.k, x.m() + 1)));
    }
    if let Some(d) = &a.degrees {
        if d.len() != a.k as usize {
            return Err(usage(format!("--degrees has {} entries, --k is {}", d.len(), a.k)));
        }
    }
    let report = PredictionReport::compute(&x, a.k, a.r, a.degrees.as_deref(), a.z).map_err(|e| usage(e.to_string()))?;
    emit(&a.out, &report.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn pair_budget(flag: Option<u64>) -> Result<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("BERTINI_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("BERTINI_BUDGET={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_PAIR_BUDGET),
    }
}

fn build_config(a: &RunArgs) -> Result<ExperimentConfig> {
    let x = build_variety(&a.variety)?;
    let degrees = match (a.k, a.degrees.len()) {
        (Some(k), 1) => vec![a.degrees[0]; k],
        (Some(k), len) if k != len => return Err(usage(format!("--k {k} conflicts with {len} --degrees"))),
        _ => a.degrees.clone(),
    };
    let mut cfg = ExperimentConfig::new(x, degrees);
    cfg.mode = match a.mode {
        ModeArg::Exhaustive => Mode::Exhaustive,
        ModeArg::Sampled => Mode::Sampled { trials: a.trials },
        ModeArg::UntilSmooth => {
            let smooth = a.smooth_target.ok_or_else(|| usage("--mode until-smooth needs --smooth-target"))?;
            Mode::UntilSmooth { smooth, max_trials: a.trials }
        }
    };
    if a.smooth_target.is_some() && !matches!(a.mode, ModeArg::UntilSmooth) {
        return Err(usage("--smooth-target only applies to --mode until-smooth"));
    }
    cfg.seed = a.seed;
    let field = cfg.variety.field().clone();
    cfg.contain = a.contain.iter().map(|p| parse_point(&field, p)).collect::<Result<_>>()?;
    cfg.avoid = a.avoid.iter().map(|p| parse_point(&field, p)).collect::<Result<_>>()?;
    cfg.count_extensions = a.count_ext;
    cfg.oracle = match a.oracle {
        OracleArg::Gb => OracleChoice::Gb,
        OracleArg::Brute => OracleChoice::Brute { max_ext: a.max_ext },
        OracleArg::Both => OracleChoice::Both { max_ext: a.max_ext },
    };
    cfg.groebner = GroebnerConfig { pair_budget: pair_budget(a.budget)? };
    cfg.threads = a.threads.unwrap_or(0);
    cfg.timing = a.timing;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn finish_report(report: &RunReport, summary_csv: &Option<PathBuf>, out: &Option<PathBuf>) -> Result<ExitCode> {
    if let Some(path) = summary_csv {
        write_atomic(path, &experiment::comparison_csv(&report.comparison))?;
    }
    emit(out, &report.to_json())?;
    if report.summary.undecided_alarm {
        eprintln!(
            "error: {} of {} trials undecided, above the {}% alarm threshold",
            report.summary.undecided,
            report.summary.attempted,
            experiment::UNDECIDED_ALARM * 100.0
        );
        return Ok(ExitCode::FAILURE);
    }
    if let Some(a) = &report.summary.agreement {
        if a.soundness_violations > 0 {
            eprintln!("error: {} trials where the point scan refuted a smooth Gröbner verdict", a.soundness_violations);
            return Ok(ExitCode::FAILURE);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(a: RunArgs) -> Result<ExitCode> {
    let cfg = build_config(&a)?;
    let prediction = PredictionReport::compute(&cfg.variety, cfg.k() as u32, a.r, Some(&cfg.degrees), 0).map_err(|e| usage(e.to_string()))?;
    let mut writer = match &a.records {
        Some(path) => Some(BufWriter::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?)),
        None => None,
    };
    let summary = experiment::run_with(&cfg, |record| {
        if let Some(w) = writer.as_mut() {
            writeln!(w, "{}", record.to_json_line()).map_err(|e| experiment::ExperimentError::Sink(e.to_string()))?;
        }
        Ok(())
    })?;
    if let Some(mut w) = writer {
        w.flush().context("flushing records")?;
    }
    let report = RunReport::new(summary, prediction)?;
    finish_report(&report, &a.summary, &a.out)
}

fn cmd_stats(a: StatsArgs) -> Result<ExitCode> {
    let x = build_variety(&a.variety)?;
    let text = fs::read_to_string(&a.records).with_context(|| format!("reading {}", a.records.display()))?;
    let records = experiment::parse_records(&text)?;
    let first = records.first().ok_or_else(|| usage("no records"))?;
    let degrees = first.degrees.clone();
    if records.iter().any(|r| r.degrees != degrees) {
        bail!("records mix different degree tuples");
    }
    let mut cfg = ExperimentConfig::new(x, degrees);
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let mut setup = RunSetup::from_config(&cfg)?;
    setup.contain = records.iter().map(|r| r.contains.len()).max().unwrap_or(0);
    setup.avoid = records.iter().map(|r| r.avoids.len()).max().unwrap_or(0);
    cfg.degrees = setup.degrees.clone();
    let summary = experiment::summarize(setup, &records);
    let prediction = PredictionReport::compute(&cfg.variety, cfg.k() as u32, a.r, Some(&cfg.degrees), 0).map_err(|e| usage(e.to_string()))?;
    let report = RunReport::new(summary, prediction)?;
    finish_report(&report, &a.summary, &a.out)
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode> {
    let suite = Suite { cubics: a.cubics, ..Suite::default() };
    let report = suite.run();
    if a.json {
        print_stdout(&serde_json::to_string_pretty(&report)?)?;
    } else {
        for c in &report.checks {
            print_stdout(&format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))?;
        }
    }
    Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

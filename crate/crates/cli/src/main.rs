//! `oqs`: analyze quantum channels and GKLS generators, run verification
//! campaigns, construct saturating examples and sample random instances.
//!
//! Exit codes: 0 success, 1 I/O, parse or numerical error, 2 validation
//! failure, 3 bound violation, oracle mismatch or failed campaign.

mod table;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use oqs_core::campaign::{self, CampaignConfig, CampaignSummary};
use oqs_core::constructions::{self, Sample};
use oqs_core::spectra::SpectrumKind;
use oqs_core::{analyze, AnalysisOptions, Ensemble, Error, SamplerConfig, SpectralTolerances, Subject, C64};

const THREADS_ENV: &str = "OQS_THREADS";

#[derive(Parser)]
#[command(
    name = "oqs",
    version,
    about = "Steady and asymptotic state bounds for open quantum systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline on a channel or generator JSON file.
    Analyze(AnalyzeArgs),
    /// Run constructors and sampled ensembles and write a CSV report.
    Verify(VerifyArgs),
    /// Write a saturating example as JSON.
    Construct(ConstructArgs),
    /// Draw seeded random channels or generators.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Channel,
    Generator,
}

#[derive(Args)]
struct ToleranceArgs {
    /// Relative eigenvalue clustering tolerance.
    #[arg(long, default_value_t = oqs_core::spectra::DEFAULT_CLUSTER_TOL)]
    tol_cluster: f64,
    /// Distance from the unit circle (or imaginary axis) counted as peripheral.
    #[arg(long, default_value_t = oqs_core::spectra::DEFAULT_PERIPHERAL_TOL)]
    tol_peripheral: f64,
    /// Distance from the identity (or zero) counted as trivial.
    #[arg(long, default_value_t = oqs_core::bounds::TRIVIAL_TOL)]
    tol_trivial: f64,
    /// Relative singular value cutoff for the commutant.
    #[arg(long, default_value_t = oqs_core::commutant::DEFAULT_COMMUTANT_TOL)]
    tol_commutant: f64,
    /// Skip the commutant computation.
    #[arg(long)]
    no_commutant: bool,
}

impl ToleranceArgs {
    fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            spectral: SpectralTolerances {
                cluster: self.tol_cluster,
                peripheral: self.tol_peripheral,
            },
            trivial: self.tol_trivial,
            commutant: (!self.no_commutant).then_some(self.tol_commutant),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input file, or `-` for stdin.
    path: PathBuf,
    /// Schema of the input; inferred from the presence of a "hamiltonian" key.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[command(flatten)]
    tolerances: ToleranceArgs,
    /// Print the report as JSON (default).
    #[arg(long, conflicts_with = "table")]
    json: bool,
    /// Print the report as a plain-text table.
    #[arg(long)]
    table: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Dimensions as an inclusive range `a..b` or a comma list.
    #[arg(long, default_value = "2..6", value_parser = parse_dims)]
    dims: Dims,
    /// Samples per ensemble and dimension.
    #[arg(long, default_value_t = 100)]
    per_dim: usize,
    /// Comma-separated ensembles; defaults to all.
    #[arg(long, value_delimiter = ',', value_parser = parse_ensemble)]
    ensembles: Option<Vec<Ensemble>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path; CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only run the deterministic saturating constructions.
    #[arg(long)]
    constructors_only: bool,
    /// Worker count; overrides OQS_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    tolerances: ToleranceArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructKind {
    PhaseDamping,
    Hamiltonian,
    Unitary,
    Dissipative,
    Pinching,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(value_enum)]
    kind: ConstructKind,
    #[arg(long)]
    dim: usize,
    /// Energies `h1,h2` of the two projectors.
    #[arg(long, default_value = "0,1", value_parser = parse_energies)]
    h: (f64, f64),
    /// Noise operator eigenvalues `l1,l2` (complex, e.g. `1,0.5i`); repeatable.
    #[arg(long = "lambda", value_parser = parse_pair)]
    lambdas: Vec<(C64, C64)>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_parser = parse_ensemble)]
    ensemble: Ensemble,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stinespring environment dimension (default d²).
    #[arg(long)]
    env_dim: Option<usize>,
    /// Number of GKLS noise operators (default d).
    #[arg(long)]
    noise_ops: Option<usize>,
    /// Write one file per sample here instead of JSON lines on stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
struct Dims(Vec<usize>);

fn parse_dims(s: &str) -> Result<Dims, String> {
    parse_dim_list(s).map(Dims)
}

fn parse_dim_list(s: &str) -> Result<Vec<usize>, String> {
    let bad = |_| format!("invalid dimension list {s:?}");
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(bad)?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(bad)?;
        if a > b {
            return Err(format!("empty dimension range {s:?}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(bad)).collect()
}

fn parse_ensemble(s: &str) -> Result<Ensemble, String> {
    s.parse().map_err(|e: Error| {
        let names: Vec<&str> = Ensemble::ALL.iter().map(|e| e.as_str()).collect();
        format!("{e}; expected one of {}", names.join(", "))
    })
}

fn parse_energies(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `h1,h2`, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("invalid energy {t:?}"));
    Ok((parse(a)?, parse(b)?))
}

fn parse_pair(s: &str) -> Result<(C64, C64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `l1,l2`, got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<C64>()
            .map_err(|_| format!("invalid complex number {t:?}"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// Error carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn io(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }

    fn checks(msg: String) -> Self {
        Failure {
            code: 3,
            error: anyhow::anyhow!(msg),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Csv(_) => 1,
        Error::Json(j) if j.is_syntax() || j.is_eof() || j.is_io() => 1,
        Error::Json(_)
        | Error::NotSquare { .. }
        | Error::DimensionMismatch { .. }
        | Error::EntryCount { .. }
        | Error::NonFinite
        | Error::TraceNotPreserved { .. }
        | Error::NotCompletelyPositive { .. }
        | Error::NotHermitian { .. }
        | Error::EmptyOperatorList
        | Error::InvalidParameter(_) => 2,
        _ => 1,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            error: e.into(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_input(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        io::read_to_string(io::stdin()).map_err(|e| Failure::io(anyhow::Error::new(e).context("reading stdin")))
    } else {
        fs::read_to_string(path)
            .map_err(|e| Failure::io(anyhow::Error::new(e).context(format!("reading {}", path.display()))))
    }
}

/// Parse errors point at the offending line; schema and validation errors
/// name the file.
fn input_failure(path: &Path, text: &str, e: Error) -> Failure {
    let code = exit_code(&e);
    let error = match &e {
        Error::Json(j) if j.line() > 0 => {
            let line = text.lines().nth(j.line() - 1).unwrap_or("");
            let shown: String = line.chars().take(120).collect();
            let caret = " ".repeat(j.column().saturating_sub(1).min(shown.len()));
            anyhow::anyhow!(
                "{}:{}:{}: {j}\n  | {shown}\n  | {caret}^",
                path.display(),
                j.line(),
                j.column()
            )
        }
        Error::Json(j) => anyhow::anyhow!("{}: invalid input: {j}", path.display()),
        other => anyhow::anyhow!("{}: {other}", path.display()),
    };
    Failure { code, error }
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(Failure::io)?;
            }
            fs::write(p, text)
                .with_context(|| format!("writing {}", p.display()))
                .map_err(Failure::io)
        }
        None => io::stdout().write_all(text.as_bytes()).map_err(Failure::io),
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let text = read_input(&args.path)?;
    let kind = args.kind.map(|k| match k {
        KindArg::Channel => SpectrumKind::Channel,
        KindArg::Generator => SpectrumKind::Generator,
    });
    let subject = Subject::from_json_str(&text, kind).map_err(|e| input_failure(&args.path, &text, e))?;
    let options = args.tolerances.options();
    options.spectral.validate()?;
    let report = analyze(&subject, &options)?;
    let value = serde_json::to_value(&report).map_err(Failure::io)?;
    let json = serde_json::to_string_pretty(&value).map_err(Failure::io)? + "\n";
    if let Some(p) = &args.report {
        write_output(Some(p), &json)?;
    }
    if args.table {
        write_output(None, &table::render(&value))?;
    } else {
        write_output(None, &json)?;
    }
    if report.has_violation() {
        let names: Vec<&str> = report.bounds.violations().map(|c| c.name.as_str()).collect();
        return Err(Failure::checks(format!("bound violated: {}", names.join(", "))));
    }
    if report.discrepancy {
        return Err(Failure::checks(format!(
            "inconsistent analysis: {}",
            report.notes.join("; ")
        )));
    }
    Ok(())
}

fn threads(flag: Option<usize>) -> CliResult<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("{THREADS_ENV}={v:?} is not a thread count")).into()),
        _ => Ok(None),
    }
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    schema: &'a str,
    seed: u64,
    dims: &'a [usize],
    per_dim: usize,
    passed: bool,
    summary: &'a CampaignSummary,
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let ensembles = match (&args.ensembles, args.constructors_only) {
        (_, true) => Vec::new(),
        (Some(list), false) => list.clone(),
        (None, false) => Ensemble::ALL.to_vec(),
    };
    let per_dim = if ensembles.is_empty() { 0 } else { args.per_dim };
    let mut config = CampaignConfig::new(args.seed, args.dims.0.clone(), per_dim, ensembles);
    config.options = args.tolerances.options();
    config.threads = threads(args.threads)?;
    info!(
        "campaign: seed {}, dims {:?}, {} per ensemble and dimension",
        config.seed, config.dims, config.per_dim
    );
    let outcome = campaign::run_campaign(&config)?;
    let mut csv = Vec::new();
    campaign::write_csv(&outcome.rows, &mut csv)?;
    let csv = String::from_utf8(csv).map_err(Failure::io)?;
    let summary = VerifyOutput {
        schema: oqs_core::analysis::SCHEMA,
        seed: config.seed,
        dims: &config.dims,
        per_dim: config.per_dim,
        passed: outcome.summary.passed(),
        summary: &outcome.summary,
    };
    let summary_json = serde_json::to_string_pretty(&summary).map_err(Failure::io)? + "\n";
    match &args.out {
        Some(p) => {
            write_output(Some(p), &csv)?;
            write_output(None, &summary_json)?;
        }
        None => {
            write_output(None, &csv)?;
            eprint!("{summary_json}");
        }
    }
    if outcome.summary.passed() {
        Ok(())
    } else {
        let s = &outcome.summary;
        Err(Failure::checks(format!(
            "campaign failed: {} violations, {} discrepancies, {} errors, {} spectrum failures, {} unital CKKS failures",
            s.violations, s.discrepancies, s.errors, s.spectrum_failures, s.ckks_unital_failures
        )))
    }
}

fn cmd_construct(args: &ConstructArgs) -> CliResult<()> {
    let (h1, h2) = args.h;
    let subject: Subject = match args.kind {
        ConstructKind::PhaseDamping => constructions::phase_damping_channel(args.dim)?.into(),
        ConstructKind::Pinching => constructions::pinching_channel(args.dim)?.into(),
        ConstructKind::Hamiltonian => constructions::saturating_hamiltonian_generator(args.dim, h1, h2)?.into(),
        ConstructKind::Unitary => constructions::saturating_unitary_channel(args.dim, h1, h2)?.into(),
        ConstructKind::Dissipative => {
            let default = [(C64::new(1.0, 0.0), C64::new(0.0, 0.0))];
            let pairs = if args.lambdas.is_empty() {
                &default[..]
            } else {
                &args.lambdas[..]
            };
            constructions::saturating_dissipative_generator(args.dim, pairs)?.into()
        }
    };
    let json = serde_json::to_string_pretty(&subject).map_err(Failure::io)? + "\n";
    write_output(args.out.as_deref(), &json)
}

fn sample_file_name(s: &Sample) -> String {
    format!("{}-d{}-{:04}.json", s.ensemble.as_str(), s.dim, s.index)
}

fn cmd_sample(args: &SampleArgs) -> CliResult<()> {
    let mut config = SamplerConfig::new(args.seed, args.dim, args.ensemble, args.count);
    config.env_dim = args.env_dim;
    config.noise_ops = args.noise_ops;
    let samples = constructions::sample(&config)?;
    match &args.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(Failure::io)?;
            for s in &samples {
                let json = serde_json::to_string_pretty(&s.subject).map_err(Failure::io)? + "\n";
                write_output(Some(&dir.join(sample_file_name(s))), &json)?;
            }
            info!("wrote {} samples to {}", samples.len(), dir.display());
            Ok(())
        }
        None => {
            let mut text = String::new();
            for s in &samples {
                text.push_str(&serde_json::to_string(&s.subject).map_err(Failure::io)?);
                text.push('\n');
            }
            write_output(None, &text)
        }
    }
}

/// The error chain, dropping causes already quoted by their parent.
fn describe(error: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in error.chain() {
        let msg = cause.to_string();
        if !parts.last().is_some_and(|p| p.contains(&msg)) {
            parts.push(msg);
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Construct(a) => cmd_construct(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", describe(&f.error));
            ExitCode::from(f.code)
        }
    }
}

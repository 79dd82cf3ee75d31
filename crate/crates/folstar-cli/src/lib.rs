//! Command-line front end for the proof engine: bounded model search,
//! proof generation, forward/backward checking, trimming, atom-level
//! diagnosis, and SMT-LIB export.
//!
//! Every command reads its inputs from files named on the command line
//! and writes derived artifacts through `-o`; stdout carries a short
//! human-readable summary. Outputs are deterministic: the same inputs
//! and flags produce byte-identical files.
//!
//! Exit codes follow sysexits where they apply:
//!
//! * `0` — success (proof found, check passed, model found, …)
//! * `1` — the input or proof is rejected (check failed, no bounded
//!   model, malformed input file)
//! * `2` — the question could not be decided (prover gave up, budget)
//! * `64` — command-line or environment usage error
//! * `70` — internal error
//! * `74` — file could not be read or written

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use folstar::checker::{backward_check, trim, CheckReport};
use folstar::diagnosis::{diagnose, render_diagnosis, DiagnosisFormat};
use folstar::fol::{brute_force_sat, parse_problem, Problem, SearchBounds, Solution};
use folstar::lia::{export_smtlib, SmtlibError, DEFAULT_THEORY_BUDGET};
use folstar::proof::{deserialize_proof, serialize_proof, Proof};
use folstar::prover::{forward_check, prove, CheckMode, ProveOutcome, ProverConfig};

/// Environment variable consulted for the theory budget when the
/// `--theory-budget` flag is absent.
pub const BUDGET_ENV: &str = "FOLSTAR_THEORY_BUDGET";

#[derive(Parser)]
#[command(
    name = "folstar",
    about = "Generate, check, trim, and diagnose unsatisfiability proofs",
    disable_help_subcommand = true
)]
struct Cli {
    /// Steps the background theory may spend per query
    /// (default from FOLSTAR_THEORY_BUDGET, then built-in).
    #[arg(long, global = true, value_name = "N")]
    theory_budget: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a bounded model of a problem
    Sat {
        /// Problem file
        input: PathBuf,
        /// Maximum number of existing objects in a candidate model
        #[arg(long, value_name = "N", default_value_t = 3)]
        max_volume: usize,
        /// Attribute values range over [-B, B]
        #[arg(long, value_name = "B", default_value_t = 8)]
        value_bound: i64,
    },
    /// Prove a problem unsatisfiable and write the proof
    Prove {
        /// Problem file
        input: PathBuf,
        /// Where to write the proof
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        /// Emit only primitive derivation steps
        #[arg(long)]
        no_macros: bool,
        /// Maximum saturation rounds
        #[arg(long, value_name = "N")]
        rounds: Option<usize>,
    },
    /// Check a proof against a problem
    Check {
        /// Problem file
        input: PathBuf,
        /// Proof file
        proof: PathBuf,
        /// Checking direction
        #[arg(long, value_enum, default_value_t = Direction::Forward)]
        mode: Direction,
        /// Write the proof trimmed to its used core (implies backward)
        #[arg(long, value_name = "FILE")]
        trim: Option<PathBuf>,
        /// Write a one-line stats record
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Trim a proof to the steps its conclusion needs
    Trim {
        /// Problem file
        input: PathBuf,
        /// Proof file
        proof: PathBuf,
        /// Where to write the trimmed proof
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Report which input atoms a refutation uses and slice the rest
    Diagnose {
        /// Problem file
        input: PathBuf,
        /// Proof file
        proof: PathBuf,
        /// Where to write the diagnosis
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        /// Output style
        #[arg(long, value_enum, default_value_t = Format::Sexpr)]
        format: Format,
        /// Diagnose the proof as given instead of trimming it first
        #[arg(long)]
        untrimmed: bool,
    },
    /// Export a quantifier-free problem as SMT-LIB 2
    ExportSmtlib {
        /// Problem file
        input: PathBuf,
        /// Where to write the SMT-LIB script
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Sexpr,
    Text,
    Annotated,
}

/// Everything a command can fail with, mapped to an exit code. Outcomes
/// that are answers rather than failures (proof invalid, no model,
/// prover gave up) are printed by the handlers and returned as codes.
#[derive(Debug)]
enum CliError {
    /// Rejected input data: malformed problem or proof file.
    Invalid(String),
    Usage(String),
    Io(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Usage(_) => 64,
            CliError::Io(_) => 74,
            CliError::Internal(_) => 70,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Usage(m) | CliError::Io(m) | CliError::Internal(m) => {
                write!(f, "{m}")
            }
        }
    }
}

/// Parse arguments and run the selected command, returning the process
/// exit code. `args` includes the program name, as in `std::env::args`.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version print to stdout and succeed; actual
            // usage errors go to stderr with the usage exit code.
            let to_stderr = err.use_stderr();
            let _ = err.print();
            return if to_stderr { 64 } else { 0 };
        }
    };
    let budget = match theory_budget(cli.theory_budget) {
        Ok(b) => b,
        Err(err) => {
            eprintln!("error: {err}");
            return err.code();
        }
    };
    match dispatch(cli.command, budget) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.code()
        }
    }
}

fn theory_budget(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            CliError::Usage(format!("{BUDGET_ENV} must be a non-negative integer, got `{raw}`"))
        }),
        Err(_) => Ok(DEFAULT_THEORY_BUDGET),
    }
}

fn dispatch(command: Command, budget: u64) -> Result<i32, CliError> {
    match command {
        Command::Sat { input, max_volume, value_bound } => {
            let problem = load_problem(&input)?;
            let bounds = SearchBounds { max_volume, value_bound };
            run_sat(&problem, &bounds)
        }
        Command::Prove { input, output, no_macros, rounds } => {
            let problem = load_problem(&input)?;
            let mut cfg = ProverConfig { theory_budget: budget, ..ProverConfig::default() };
            cfg.emit_macros = !no_macros;
            if let Some(rounds) = rounds {
                cfg.max_rounds = rounds;
            }
            run_prove(&problem, &cfg, &output)
        }
        Command::Check { input, proof, mode, trim, report } => {
            let problem = load_problem(&input)?;
            let proof = load_proof(&proof)?;
            run_check(&problem, &proof, mode, trim.as_deref(), report.as_deref(), budget)
        }
        Command::Trim { input, proof, output } => {
            let problem = load_problem(&input)?;
            let proof = load_proof(&proof)?;
            run_trim(&problem, &proof, &output, budget)
        }
        Command::Diagnose { input, proof, output, format, untrimmed } => {
            let problem = load_problem(&input)?;
            let proof = load_proof(&proof)?;
            run_diagnose(&problem, &proof, &output, format, untrimmed, budget)
        }
        Command::ExportSmtlib { input, output } => {
            let problem = load_problem(&input)?;
            run_export(&problem, &output)
        }
    }
}

// ---------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------

fn run_sat(problem: &Problem, bounds: &SearchBounds) -> Result<i32, CliError> {
    match brute_force_sat(&problem.assertions, &problem.signature, bounds) {
        Ok(Some(solution)) => {
            println!("sat");
            print!("{}", render_solution(&solution));
            Ok(0)
        }
        Ok(None) => {
            println!(
                "unsat within bounds (at most {} objects, values in [-{}, {}])",
                bounds.max_volume, bounds.value_bound, bounds.value_bound
            );
            Ok(1)
        }
        Err(err) => Err(CliError::Internal(format!("model search failed: {err}"))),
    }
}

fn run_prove(problem: &Problem, cfg: &ProverConfig, output: &Path) -> Result<i32, CliError> {
    match prove(problem, cfg) {
        ProveOutcome::Unsat(proof) => {
            write_file(output, &serialize_proof(&proof))?;
            println!("unsat: proof with {} steps written to {}", proof.steps.len(), output.display());
            Ok(0)
        }
        ProveOutcome::Sat(solution) => {
            println!("sat: the problem has a bounded model");
            print!("{}", render_solution(&solution));
            Ok(1)
        }
        ProveOutcome::Unknown(reason) => {
            println!("unknown: {reason}");
            Ok(2)
        }
    }
}

fn run_check(
    problem: &Problem,
    proof: &Proof,
    mode: Direction,
    trim_to: Option<&Path>,
    report_to: Option<&Path>,
    budget: u64,
) -> Result<i32, CliError> {
    // Trimming needs the backward dependency analysis regardless of the
    // direction asked for.
    let backward = mode == Direction::Backward || trim_to.is_some();
    if backward {
        let report = backward_check(problem, proof, budget);
        if let Some(path) = report_to {
            write_file(path, &backward_record(&report))?;
        }
        if !report.valid {
            println!("invalid: {}", report.why().unwrap_or_else(|| "unspecified".into()));
            return Ok(1);
        }
        println!(
            "valid: {} steps, {} in the conclusion's core",
            report.stats.steps_total, report.stats.steps_core
        );
        if let Some(path) = trim_to {
            let trimmed = trim(proof, &report)
                .map_err(|e| CliError::Internal(format!("trimming failed: {e}")))?;
            write_file(path, &serialize_proof(&trimmed))?;
            println!(
                "trimmed proof with {} steps written to {}",
                trimmed.steps.len(),
                path.display()
            );
        }
        Ok(0)
    } else {
        let verdict = forward_check(problem, proof, budget, CheckMode::Native);
        if let Some(path) = report_to {
            write_file(path, &forward_record(proof, verdict.as_ref().err()))?;
        }
        match verdict {
            Ok(()) => {
                println!("valid: {} steps replay forward", proof.steps.len());
                Ok(0)
            }
            Err(failure) => {
                println!("invalid: {failure}");
                Ok(1)
            }
        }
    }
}

fn run_trim(
    problem: &Problem,
    proof: &Proof,
    output: &Path,
    budget: u64,
) -> Result<i32, CliError> {
    let report = backward_check(problem, proof, budget);
    if !report.valid {
        println!("invalid: {}", report.why().unwrap_or_else(|| "unspecified".into()));
        return Ok(1);
    }
    let trimmed =
        trim(proof, &report).map_err(|e| CliError::Internal(format!("trimming failed: {e}")))?;
    write_file(output, &serialize_proof(&trimmed))?;
    println!(
        "trimmed proof: kept {} of {} steps, written to {}",
        trimmed.steps.len(),
        proof.steps.len(),
        output.display()
    );
    Ok(0)
}

fn run_diagnose(
    problem: &Problem,
    proof: &Proof,
    output: &Path,
    format: Format,
    untrimmed: bool,
    budget: u64,
) -> Result<i32, CliError> {
    let trimmed;
    let subject = if untrimmed {
        proof
    } else {
        let report = backward_check(problem, proof, budget);
        if !report.valid {
            println!("invalid: {}", report.why().unwrap_or_else(|| "unspecified".into()));
            return Ok(1);
        }
        trimmed = trim(proof, &report)
            .map_err(|e| CliError::Internal(format!("trimming failed: {e}")))?;
        &trimmed
    };
    match diagnose(problem, subject, budget) {
        Ok(d) => {
            let format = match format {
                Format::Sexpr => DiagnosisFormat::Sexpr,
                Format::Text => DiagnosisFormat::Text,
                Format::Annotated => DiagnosisFormat::Annotated,
            };
            write_file(output, &render_diagnosis(&d, format))?;
            let active = d.activity.iter().filter(|e| e.active).count();
            println!(
                "{} of {} atoms active; diagnosis written to {}",
                active,
                d.activity.len(),
                output.display()
            );
            Ok(0)
        }
        Err(err) => {
            println!("invalid: {err}");
            Ok(1)
        }
    }
}

fn run_export(problem: &Problem, output: &Path) -> Result<i32, CliError> {
    match export_smtlib(&problem.assertions) {
        Ok(script) => {
            write_file(output, &script)?;
            println!("SMT-LIB script written to {}", output.display());
            Ok(0)
        }
        Err(SmtlibError::NotGround(i)) => Err(CliError::Usage(format!(
            "assertion {i} is quantified; only quantifier-free problems can be exported"
        ))),
        Err(err) => Err(CliError::Usage(err.to_string())),
    }
}

// ---------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------

fn load_problem(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn load_proof(path: &Path) -> Result<Proof, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    deserialize_proof(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn render_solution(solution: &Solution) -> String {
    let mut out = String::new();
    for obj in &solution.objects {
        out.push_str(&format!("object {} : {}", obj.name, obj.class));
        for (attr, value) in &obj.attrs {
            out.push_str(&format!(" {attr}={value}"));
        }
        out.push('\n');
    }
    for (name, value) in &solution.valuation.bools {
        out.push_str(&format!("bool {name} = {value}\n"));
    }
    for (name, value) in &solution.valuation.ints {
        out.push_str(&format!("int {name} = {value}\n"));
    }
    out
}

fn backward_record(report: &CheckReport) -> String {
    format!(
        "mode=backward valid={} steps_total={} steps_core={} bytes_total={} bytes_core={}\n",
        report.valid,
        report.stats.steps_total,
        report.stats.steps_core,
        report.stats.bytes_total,
        report.stats.bytes_core
    )
}

fn forward_record(proof: &Proof, failure: Option<&folstar::prover::CheckFailure>) -> String {
    format!(
        "mode=forward valid={} steps_total={}\n",
        failure.is_none(),
        proof.steps.len()
    )
}

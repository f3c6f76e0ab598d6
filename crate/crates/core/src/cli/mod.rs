//! Command-line driver: `gen`, `check` and `classical`.
//!
//! Every document is built as a `serde_json::Value`, so object keys come out
//! sorted and rationals as canonical strings; equal configurations produce
//! byte-identical output.

pub mod ledger;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::autom::{ModifierPoly, DEFAULT_MAX_ORDER};
use crate::families::{generate_with, FamilyError, FamilyKind, FamilySpec, PolyFamily};
use crate::polyalg::{format_rational, parse_rational, rational_opt, rational_vec, Rational};
pub use ledger::{LedgerEntry, Status, VerificationLedger};
pub use suite::{canonical_checks, run_checks, CheckName};

pub const MAX_ORDER_ENV: &str = "VOPKIT_MAX_ORDER";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "vopkit", version, about = "Exact bispectral and vector-orthogonal polynomial families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a family and emit its members, L~ and eigenvalues.
    Gen(FamilyArgs),
    /// Run verification checks on a generated or loaded family.
    Check(CheckArgs),
    /// Compare against the classical Charlier or Meixner polynomials.
    Classical(FamilyArgs),
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value = "charlier-appell")]
    kind: KindArg,
    /// Coefficients β_1,β_2,... of P(X) = Σ β_j X^j.
    #[arg(long = "P", allow_hyphen_values = true)]
    p: Option<String>,
    /// Charlier parameter; shorthand for P = -aX.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, default_value_t = 12)]
    nmax: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Checks to run, also accepted as a comma-separated `--checks` list.
    #[arg(value_enum)]
    names: Vec<CheckName>,
    #[arg(long, value_enum, value_delimiter = ',')]
    checks: Vec<CheckName>,
    /// Family document produced by `gen`; replaces the family flags.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    family: FamilyArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    CharlierAppell,
    MeixnerType,
}

impl From<KindArg> for FamilyKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::CharlierAppell => FamilyKind::CharlierAppell,
            KindArg::MeixnerType => FamilyKind::MeixnerType,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Gen,
    Check,
    Classical,
}

#[derive(Debug, Error)]
pub enum UsageError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse family document: {0}")]
    Document(#[from] serde_json::Error),
}

/// A fully parsed invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub kind: FamilyKind,
    /// `β_1, β_2, ...`; empty when `a` alone determines the family or for `classical`.
    #[serde(rename = "P", with = "rational_vec")]
    pub p: Vec<Rational>,
    #[serde(default, with = "rational_opt", skip_serializing_if = "Option::is_none")]
    pub a: Option<Rational>,
    #[serde(default, with = "rational_opt", skip_serializing_if = "Option::is_none")]
    pub beta: Option<Rational>,
    #[serde(default, with = "rational_opt", skip_serializing_if = "Option::is_none")]
    pub c: Option<Rational>,
    pub nmax: usize,
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
}

fn parse_opt(flag: &str, v: &Option<String>) -> Result<Option<Rational>, UsageError> {
    v.as_deref()
        .map(|s| {
            parse_rational(s.trim())
                .map_err(|e| UsageError::Invalid(format!("--{flag} {s:?}: {e}")))
        })
        .transpose()
}

fn parse_list(s: &str) -> Result<Vec<Rational>, UsageError> {
    s.split(',')
        .map(|t| {
            parse_rational(t.trim()).map_err(|e| UsageError::Invalid(format!("--P {s:?}: {e}")))
        })
        .collect()
}

impl RunConfig {
    /// Parses command-line arguments (including the program name).
    pub fn parse_from<I, T>(args: I) -> Result<RunConfig, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args)?;
        RunConfig::from_cli(cli).map_err(|e| {
            clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n"))
        })
    }

    fn from_cli(cli: Cli) -> Result<RunConfig, UsageError> {
        let (command, fam, checks, input) = match cli.command {
            Command::Gen(f) => (CommandKind::Gen, f, Vec::new(), None),
            Command::Classical(f) => (CommandKind::Classical, f, Vec::new(), None),
            Command::Check(c) => {
                let mut sel = c.names;
                sel.extend(c.checks);
                (CommandKind::Check, c.family, canonical_checks(&sel), c.input)
            }
        };
        Ok(RunConfig {
            command,
            kind: fam.kind.into(),
            p: fam.p.as_deref().map(parse_list).transpose()?.unwrap_or_default(),
            a: parse_opt("a", &fam.a)?,
            beta: parse_opt("beta", &fam.beta)?,
            c: parse_opt("c", &fam.c)?,
            nmax: fam.nmax,
            format: fam.format,
            out: fam.out,
            checks,
            input,
        })
    }

    pub fn to_canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    pub fn from_json(s: &str) -> Result<RunConfig, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// The family described by the flags. `--P` wins over `--a`.
    pub fn family_spec(&self) -> Result<FamilySpec, UsageError> {
        let coeffs = if !self.p.is_empty() {
            self.p.clone()
        } else if let Some(a) = &self.a {
            vec![-a.clone()]
        } else {
            return Err(UsageError::Invalid("a modifier is required: pass --P or --a".into()));
        };
        let modifier =
            ModifierPoly::new(coeffs).map_err(|e| UsageError::Invalid(e.to_string()))?;
        let spec = match self.kind {
            FamilyKind::CharlierAppell => {
                if self.beta.is_some() || self.c.is_some() {
                    return Err(UsageError::Invalid(
                        "--beta and --c apply to meixner-type only".into(),
                    ));
                }
                FamilySpec::charlier_appell(modifier, self.nmax)
            }
            FamilyKind::MeixnerType => {
                let (Some(beta), Some(c)) = (&self.beta, &self.c) else {
                    return Err(UsageError::Invalid("meixner-type needs --beta and --c".into()));
                };
                FamilySpec::meixner_type(modifier, beta.clone(), c.clone(), self.nmax)
                    .map_err(|e| UsageError::Invalid(e.to_string()))?
            }
        };
        spec.validate().map_err(|e| UsageError::Invalid(e.to_string()))?;
        Ok(spec)
    }
}

/// Guard for `e^{ad}` series, from `VOPKIT_MAX_ORDER` when set.
pub fn max_order_from_env() -> Result<usize, UsageError> {
    match std::env::var(MAX_ORDER_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| UsageError::Invalid(format!("{MAX_ORDER_ENV}={v:?} is not a count"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_MAX_ORDER),
        Err(e) => Err(UsageError::Invalid(format!("{MAX_ORDER_ENV}: {e}"))),
    }
}

/// Result of a command: the rendered document and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub document: String,
    /// First counterexample, for stderr.
    pub failure: Option<String>,
}

fn generation_code(e: &FamilyError) -> i32 {
    match e {
        FamilyError::InvalidSpec(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn ledger_json(ledger: &VerificationLedger) -> Value {
    serde_json::to_value(ledger.entries()).expect("ledger serializes")
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn family_document(fam: &PolyFamily, ledger: &VerificationLedger, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut v = serde_json::to_value(fam).expect("family serializes");
            v["ledger"] = ledger_json(ledger);
            render_json(&v)
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["n".to_string()];
            header.extend((0..fam.members.len()).map(|k| format!("c_{k}")));
            w.write_record(&header).expect("in-memory csv");
            for (n, m) in fam.members.iter().enumerate() {
                let mut rec = vec![n.to_string()];
                rec.extend((0..fam.members.len()).map(|k| format_rational(&m.coeff(k))));
                w.write_record(&rec).expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
        }
        OutputFormat::Text => {
            let mut s = format!("{}\n", fam.spec);
            for (n, m) in fam.members.iter().enumerate() {
                s.push_str(&format!("P_{n}(x) = {m}\n"));
            }
            s.push_str(&format!("L~ = {}\n", fam.tilde_l));
            let eig: Vec<String> = fam.eigenvalues.iter().map(format_rational).collect();
            s.push_str(&format!("eigenvalues = [{}]\n", eig.join(", ")));
            s.push_str(&ledger.to_text());
            s
        }
    }
}

fn ledger_document(spec: &FamilySpec, ledger: &VerificationLedger, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => render_json(&json!({
            "spec": spec,
            "ledger": ledger_json(ledger),
            "constants": ledger.constants(),
        })),
        OutputFormat::Csv => ledger.to_csv(),
        OutputFormat::Text => format!("{spec}\n{}", ledger.to_text()),
    }
}

fn ledger_outcome(document: String, ledger: &VerificationLedger) -> Outcome {
    match ledger.first_failure() {
        None => Outcome {
            code: EXIT_PASS,
            document,
            failure: None,
        },
        Some(e) => Outcome {
            code: EXIT_FAIL,
            document,
            failure: Some(format!("{}: {}", e.name, e.details)),
        },
    }
}

fn usage(e: impl std::fmt::Display) -> Outcome {
    Outcome {
        code: EXIT_USAGE,
        document: String::new(),
        failure: Some(e.to_string()),
    }
}

fn failure(e: &FamilyError) -> Outcome {
    Outcome {
        code: generation_code(e),
        document: String::new(),
        failure: Some(e.to_string()),
    }
}

/// Executes a parsed configuration without touching stdout or stderr.
pub fn execute(config: &RunConfig, max_order: usize) -> Outcome {
    match config.command {
        CommandKind::Gen => cmd_gen(config, max_order),
        CommandKind::Check => cmd_check(config, max_order),
        CommandKind::Classical => cmd_classical(config, max_order),
    }
}

fn cmd_gen(config: &RunConfig, max_order: usize) -> Outcome {
    let spec = match config.family_spec() {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    match generate_with(&spec, max_order) {
        Ok(fam) => {
            let mut ledger = VerificationLedger::new();
            ledger.pass(
                "generate",
                format!("{} monic members, eigenvalues verified", fam.members.len()),
            );
            Outcome {
                code: EXIT_PASS,
                document: family_document(&fam, &ledger, config.format),
                failure: None,
            }
        }
        Err(e) => failure(&e),
    }
}

fn load_family(path: &PathBuf) -> Result<PolyFamily, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|source| UsageError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn cmd_check(config: &RunConfig, max_order: usize) -> Outcome {
    let fam = match &config.input {
        Some(path) => match load_family(path) {
            Ok(f) => f,
            Err(e) => return usage(e),
        },
        None => {
            let spec = match config.family_spec() {
                Ok(s) => s,
                Err(e) => return usage(e),
            };
            match generate_with(&spec, max_order) {
                Ok(f) => f,
                Err(e) => return failure(&e),
            }
        }
    };
    let ledger = run_checks(&fam, &config.checks, max_order);
    ledger_outcome(ledger_document(&fam.spec, &ledger, config.format), &ledger)
}

fn cmd_classical(config: &RunConfig, max_order: usize) -> Outcome {
    let result = match config.kind {
        FamilyKind::CharlierAppell => {
            let a = match (&config.a, config.p.as_slice()) {
                (Some(a), _) => a.clone(),
                (None, [b1]) => -b1.clone(),
                _ => return usage("classical charlier-appell needs --a (or a linear --P)"),
            };
            if num_traits::Zero::is_zero(&a) {
                return usage("classical charlier-appell needs a != 0");
            }
            suite::classical_charlier_suite(&a, config.nmax, max_order)
        }
        FamilyKind::MeixnerType => {
            let (Some(beta), Some(c)) = (&config.beta, &config.c) else {
                return usage("classical meixner-type needs --beta and --c");
            };
            suite::classical_meixner_suite(beta, c, config.nmax)
        }
    };
    match result {
        Ok((spec, ledger)) => ledger_outcome(ledger_document(&spec, &ledger, config.format), &ledger),
        Err(e) => failure(&e),
    }
}

/// Full entry point: parses `args`, runs, writes the document to `--out` or
/// `stdout` and diagnostics to `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let max_order = match max_order_from_env() {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = execute(&config, max_order);
    if !outcome.document.is_empty() {
        let written = match &config.out {
            Some(path) => std::fs::write(path, &outcome.document),
            None => stdout.write_all(outcome.document.as_bytes()),
        };
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: cannot write output: {e}");
            return EXIT_USAGE;
        }
    }
    if let Some(msg) = &outcome.failure {
        let label = if outcome.code == EXIT_USAGE { "error" } else { "FAIL" };
        let _ = writeln!(stderr, "{label}: {msg}");
    }
    outcome.code
}

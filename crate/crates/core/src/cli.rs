//! Command-line front end.
//!
//! [`run`] parses arguments, executes one subcommand and returns the text
//! for stdout and stderr with the exit code, so the binary is a thin shell
//! around it.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classify::{
    classify_lhs, classify_rhs, region_map, Citation, Classification, Range, RegionCell, Verdict,
};
use crate::error::{Error, Result};
use crate::means::{cf_check, BoundCheck, ExponentPair, Side, WeightedSample, DEFAULT_TOLERANCE};
use crate::search::{search_counterexample, verify_certificate, Certificate, SearchConfig};
use crate::suites::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;

/// Environment variable overriding the default tolerance.
pub const TOLERANCE_ENV: &str = "POWERMEAN_TOL";

pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub tolerance: f64,
    pub budget: usize,
    pub seed: u64,
    pub format: Option<OutputFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: DEFAULT_TOLERANCE,
            budget: DEFAULT_BUDGET,
            seed: 0,
            format: None,
        }
    }
}

impl RunConfig {
    pub fn new(
        tolerance: f64,
        budget: usize,
        seed: u64,
        format: Option<OutputFormat>,
    ) -> Result<Self> {
        if !(tolerance > 0.0) || !tolerance.is_finite() {
            return Err(crate::error::domain(
                "tolerance",
                tolerance,
                "finite and positive",
            ));
        }
        if budget == 0 {
            return Err(Error::InvalidGrid("budget must be at least 1".into()));
        }
        Ok(RunConfig {
            tolerance,
            budget,
            seed,
            format,
        })
    }

    fn search(&self) -> SearchConfig {
        SearchConfig {
            budget: self.budget,
            seed: self.seed,
            tolerance: self.tolerance,
        }
    }

    fn format_or(&self, default: OutputFormat) -> OutputFormat {
        self.format.unwrap_or(default)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "powermean",
    version,
    about = "Power means, variance bounds on their differences, and counterexample search"
)]
struct Cli {
    /// Violation tolerance [default: $POWERMEAN_TOL or 1e-9]
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output format (each command has its own default)
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate both bounds on a sample file of `value,weight` lines
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
    },
    /// Classify an exponent pair for both sides
    Classify {
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
    },
    /// Write a CSV classification map over a grid of exponent pairs
    RegionMap {
        #[arg(long, allow_negative_numbers = true)]
        r_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        r_max: f64,
        #[arg(long, allow_negative_numbers = true)]
        s_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        s_max: f64,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search two-point samples for a counterexample
    Search {
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long)]
        side: Side,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a property suite: means, lemmas, regions or search
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recheck a certificate written by `search`
    VerifyCertificate {
        #[arg(long)]
        input: PathBuf,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn input_error(message: impl std::fmt::Display) -> Self {
        Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

/// Parses `args` (program name first) and runs the command, reading the
/// tolerance override from the process environment.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(args, std::env::var(TOLERANCE_ENV).ok().as_deref())
}

/// As [`run`], with the tolerance variable passed explicitly.
pub fn run_with_env<I, T>(args: I, tolerance_env: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            };
            let text = err.render().to_string();
            return if err.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(text)
            };
        }
    };
    let tolerance = match (cli.tol, tolerance_env) {
        (Some(t), _) => t,
        (None, Some(raw)) => match raw.trim().parse::<f64>() {
            Ok(t) => t,
            Err(_) => {
                return Outcome::input_error(format!("{TOLERANCE_ENV}={raw} is not a number"))
            }
        },
        (None, None) => DEFAULT_TOLERANCE,
    };
    let (budget, seed) = match &cli.command {
        Command::Search { budget, seed, .. } => (*budget, *seed),
        Command::Verify { seed, .. } => (DEFAULT_BUDGET, *seed),
        _ => (DEFAULT_BUDGET, 0),
    };
    let config = match RunConfig::new(tolerance, budget, seed, cli.format) {
        Ok(config) => config,
        Err(err) => return Outcome::input_error(err),
    };
    match cli.command {
        Command::Check { input, r, s } => cmd_check(&input, r, s, &config),
        Command::Classify { r, s } => cmd_classify(r, s, &config),
        Command::RegionMap {
            r_min,
            r_max,
            s_min,
            s_max,
            grid,
            out,
        } => cmd_region_map(
            Range::new(r_min, r_max),
            Range::new(s_min, s_max),
            grid,
            &out,
        ),
        Command::Search { r, s, side, .. } => cmd_search(r, s, side, &config),
        Command::Verify { suite, .. } => cmd_verify(&suite, &config),
        Command::VerifyCertificate { input } => cmd_verify_certificate(&input, &config),
    }
}

/// Parses `value,weight` lines; `#` starts a comment and blank lines are
/// skipped. Every malformed line is reported with its number.
pub fn parse_sample(text: &str) -> Result<WeightedSample> {
    let mut lines = Vec::new();
    let mut values = Vec::new();
    let mut weights = Vec::new();
    let mut problems = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [v, w] => v.parse::<f64>().ok().zip(w.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((v, w)) => {
                lines.push(line);
                values.push(v);
                weights.push(w);
            }
            None => problems.push((line, format!("expected `value,weight`, got `{content}`"))),
        }
    }
    if let Some(&(line, _)) = problems.first() {
        let message = problems
            .iter()
            .map(|(line, msg)| format!("line {line}: {msg}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Parse { line, message });
    }
    WeightedSample::new(values, weights).map_err(|err| match err {
        Error::InvalidValue { index, value } => Error::Parse {
            line: lines[index],
            message: format!("value {value} must be finite and non-negative"),
        },
        Error::InvalidWeight { index, value } => Error::Parse {
            line: lines[index],
            message: format!("weight {value} must be finite and positive"),
        },
        other => other,
    })
}

/// Shortest decimal text that parses back to the same double.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        x.to_string()
    }
}

fn side_status(check: &BoundCheck, side: Side, tolerance: f64) -> &'static str {
    match check.residual(side) {
        None => "undefined",
        Some(_) if check.violates(side, tolerance) => "violated",
        Some(_) => "satisfied",
    }
}

fn cmd_check(input: &std::path::Path, r: f64, s: f64, config: &RunConfig) -> Outcome {
    let text = match std::fs::read_to_string(input) {
        Ok(text) => text,
        Err(err) => return Outcome::input_error(format!("{}: {err}", input.display())),
    };
    let sample = match parse_sample(&text) {
        Ok(sample) => sample,
        Err(err) => return Outcome::input_error(format!("{}: {err}", input.display())),
    };
    let exps = match ExponentPair::new(r, s) {
        Ok(exps) => exps,
        Err(err) => return Outcome::input_error(err),
    };
    let check = cf_check(&sample, exps);
    let tol = config.tolerance;
    let violated = [Side::Lhs, Side::Rhs]
        .into_iter()
        .any(|side| check.violates(side, tol));
    let stdout = match config.format_or(OutputFormat::Text) {
        OutputFormat::Json => {
            let report = CheckReport {
                r,
                s,
                lower: check.lower,
                gap: check.gap,
                upper: check.upper,
                lhs_residual: check.lhs_residual,
                rhs_residual: check.rhs_residual,
                lhs: side_status(&check, Side::Lhs, tol),
                rhs: side_status(&check, Side::Rhs, tol),
            };
            format!(
                "{}\n",
                serde_json::to_string_pretty(&report).expect("serialisable")
            )
        }
        OutputFormat::Csv => {
            let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
            format!(
                "r,s,lower,gap,upper,lhs_residual,rhs_residual,lhs,rhs\n{},{},{},{},{},{},{},{},{}\n",
                fmt_num(r),
                fmt_num(s),
                fmt_num(check.lower),
                fmt_num(check.gap),
                opt(check.upper),
                fmt_num(check.lhs_residual),
                opt(check.rhs_residual),
                side_status(&check, Side::Lhs, tol),
                side_status(&check, Side::Rhs, tol),
            )
        }
        OutputFormat::Text => {
            let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_else(|| "undefined".into());
            let mut out = String::new();
            let _ = writeln!(out, "lower         {}", fmt_num(check.lower));
            let _ = writeln!(out, "gap           {}", fmt_num(check.gap));
            let _ = writeln!(out, "upper         {}", opt(check.upper));
            let _ = writeln!(out, "lhs_residual  {}", fmt_num(check.lhs_residual));
            let _ = writeln!(out, "rhs_residual  {}", opt(check.rhs_residual));
            for side in [Side::Lhs, Side::Rhs] {
                let _ = writeln!(out, "{side}: {}", side_status(&check, side, tol));
            }
            out
        }
    };
    let code = if violated { EXIT_VIOLATION } else { EXIT_OK };
    Outcome::with_code(code, stdout)
}

#[derive(Serialize)]
struct CheckReport {
    r: f64,
    s: f64,
    lower: f64,
    gap: f64,
    upper: Option<f64>,
    lhs_residual: f64,
    rhs_residual: Option<f64>,
    lhs: &'static str,
    rhs: &'static str,
}

/// Both classifications of one pair, as printed by `classify`.
#[derive(Debug, Serialize)]
pub struct ClassifyReport<'a> {
    pub r: f64,
    pub s: f64,
    pub rhs: Verdict,
    pub lhs: Verdict,
    pub citation_rhs: Option<Citation>,
    pub citation_lhs: Option<Citation>,
    pub detail_rhs: &'a str,
    pub detail_lhs: &'a str,
    pub passed_rhs: &'a [String],
    pub passed_lhs: &'a [String],
}

impl<'a> ClassifyReport<'a> {
    pub fn new(r: f64, s: f64, rhs: &'a Classification, lhs: &'a Classification) -> Self {
        ClassifyReport {
            r,
            s,
            rhs: rhs.verdict,
            lhs: lhs.verdict,
            citation_rhs: rhs.citation,
            citation_lhs: lhs.citation,
            detail_rhs: &rhs.detail,
            detail_lhs: &lhs.detail,
            passed_rhs: &rhs.passed,
            passed_lhs: &lhs.passed,
        }
    }
}

fn cmd_classify(r: f64, s: f64, config: &RunConfig) -> Outcome {
    let exps = match ExponentPair::new(r, s) {
        Ok(exps) => exps,
        Err(err) => return Outcome::input_error(err),
    };
    let rhs = classify_rhs(exps).expect("ordered pair");
    let lhs = classify_lhs(exps).expect("ordered pair");
    let stdout = match config.format_or(OutputFormat::Json) {
        OutputFormat::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&ClassifyReport::new(r, s, &rhs, &lhs))
                .expect("serialisable")
        ),
        OutputFormat::Csv => {
            let cell = RegionCell {
                r,
                s,
                rhs: Some(rhs),
                lhs: Some(lhs),
            };
            region_csv(std::slice::from_ref(&cell))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            for c in [&rhs, &lhs] {
                let citation = c.citation.map(|c| c.as_str()).unwrap_or("-");
                let _ = writeln!(
                    out,
                    "{}: {} [{citation}] {}",
                    c.side,
                    c.verdict.as_str(),
                    c.detail
                );
                if !c.passed.is_empty() {
                    let _ = writeln!(out, "  passed: {}", c.passed.join("; "));
                }
            }
            out
        }
    };
    Outcome::ok(stdout)
}

/// Region map as CSV with header `r,s,rhs,lhs,citation_rhs,citation_lhs`.
pub fn region_csv(cells: &[RegionCell]) -> String {
    let mut out = String::from("r,s,rhs,lhs,citation_rhs,citation_lhs\n");
    for cell in cells {
        let (r, s) = (fmt_num(cell.r), fmt_num(cell.s));
        match (&cell.rhs, &cell.lhs) {
            (Some(rhs), Some(lhs)) => {
                let tag = |c: &Classification| c.citation.map(|c| c.as_str()).unwrap_or("");
                let _ = writeln!(
                    out,
                    "{r},{s},{},{},{},{}",
                    rhs.verdict.as_str(),
                    lhs.verdict.as_str(),
                    tag(rhs),
                    tag(lhs)
                );
            }
            _ => {
                let _ = writeln!(out, "{r},{s},degenerate,degenerate,,");
            }
        }
    }
    out
}

fn cmd_region_map(r_range: Range, s_range: Range, grid: usize, out: &std::path::Path) -> Outcome {
    let cells = match region_map(r_range, s_range, grid) {
        Ok(cells) => cells,
        Err(err) => return Outcome::input_error(err),
    };
    let csv = region_csv(&cells);
    if let Err(err) = std::fs::write(out, &csv) {
        return Outcome::input_error(format!("{}: {err}", out.display()));
    }
    Outcome::ok(format!(
        "wrote {} cells to {}\n",
        cells.len(),
        out.display()
    ))
}

fn certificate_text(cert: &Certificate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "side        {}", cert.side);
    let _ = writeln!(out, "r           {}", fmt_num(cert.exps.r()));
    let _ = writeln!(out, "s           {}", fmt_num(cert.exps.s()));
    for (x, q) in cert.sample.pairs() {
        let _ = writeln!(out, "value,weight {},{}", fmt_num(x), fmt_num(q));
    }
    let _ = writeln!(out, "residual    {}", fmt_num(cert.residual));
    let provenance = serde_json::to_value(cert.provenance).expect("serialisable");
    let _ = writeln!(
        out,
        "provenance  {}",
        provenance.as_str().unwrap_or_default()
    );
    out
}

fn cmd_search(r: f64, s: f64, side: Side, config: &RunConfig) -> Outcome {
    let exps = match ExponentPair::new(r, s) {
        Ok(exps) => exps,
        Err(err) => return Outcome::input_error(err),
    };
    let found = match search_counterexample(exps, side, &config.search()) {
        Ok(found) => found,
        Err(err) => return Outcome::input_error(err),
    };
    match found {
        None => Outcome::with_code(EXIT_EXHAUSTED, "none\n".into()),
        Some(cert) => Outcome::ok(match config.format_or(OutputFormat::Json) {
            OutputFormat::Text => certificate_text(&cert),
            OutputFormat::Csv => {
                let mut out = String::from("value,weight\n");
                for (x, q) in cert.sample.pairs() {
                    let _ = writeln!(out, "{},{}", fmt_num(x), fmt_num(q));
                }
                out
            }
            OutputFormat::Json => format!(
                "{}\n",
                serde_json::to_string_pretty(&cert).expect("serialisable")
            ),
        }),
    }
}

fn cmd_verify(name: &str, config: &RunConfig) -> Outcome {
    let suite: Suite = match name.parse() {
        Ok(suite) => suite,
        Err(err) => return Outcome::input_error(err),
    };
    let report = run_suite(suite, config.tolerance, config.seed);
    let stdout = match config.format_or(OutputFormat::Text) {
        OutputFormat::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&report).expect("serialisable")
        ),
        OutputFormat::Csv => {
            let mut out = String::from("suite,invariant,passed,total,ok\n");
            for inv in &report.invariants {
                let _ = writeln!(
                    out,
                    "{},\"{}\",{},{},{}",
                    suite.as_str(),
                    inv.name,
                    inv.passed,
                    inv.total,
                    inv.ok()
                );
            }
            out
        }
        OutputFormat::Text => {
            let mut out = format!("suite {}\n", suite.as_str());
            for inv in &report.invariants {
                let _ = writeln!(out, "{inv}");
            }
            let verdict = if report.ok() { "ok" } else { "FAILED" };
            let _ = writeln!(out, "{verdict}");
            out
        }
    };
    let code = if report.ok() { EXIT_OK } else { EXIT_VIOLATION };
    Outcome::with_code(code, stdout)
}

fn cmd_verify_certificate(input: &std::path::Path, config: &RunConfig) -> Outcome {
    let text = match std::fs::read_to_string(input) {
        Ok(text) => text,
        Err(err) => return Outcome::input_error(format!("{}: {err}", input.display())),
    };
    let cert: Certificate = match serde_json::from_str(&text) {
        Ok(cert) => cert,
        Err(err) => {
            return Outcome::input_error(Error::MalformedCertificate(err.to_string()));
        }
    };
    match verify_certificate(&cert, config.tolerance) {
        Ok(true) => Outcome::ok("true\n".into()),
        Ok(false) => Outcome::with_code(EXIT_INPUT, "false\n".into()),
        Err(err) => Outcome::input_error(err),
    }
}

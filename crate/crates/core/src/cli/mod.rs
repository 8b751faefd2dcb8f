//! Command-line front end: the expression language, the scenario runner and
//! the `charclass` subcommands.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for bad
//! input (unreadable files, malformed JSON, syntax or semantic errors) and
//! for computations that cannot be carried out.

pub mod eval;
pub mod expr;
pub mod numexpr;
pub mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use eval::{eval_str, EvalError, Session, Value};
pub use expr::{parse_expr, parse_program, render, Expr, ParseError};
pub use scenario::{load_scenario, parse_scenario, run_scenario, Report, Scenario};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    pub fn compute(e: impl std::fmt::Display) -> Self {
        CliError::Compute(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Parser, Debug)]
#[command(name = "charclass", version, about = "Exact characteristic-class calculus and numeric Bott-Chern checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(name = "O")]
    O,
    #[value(name = "O-1")]
    OMinus1,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate an expression (or `;`-separated statements).
    Eval {
        #[arg(short = 'e', long = "expr")]
        expr: String,
        /// Print the parsed structure instead of evaluating.
        #[arg(long)]
        ast: bool,
    },
    /// Check chi(P^n, O(k)) against binomial coefficients.
    Hrr {
        #[arg(long, default_value_t = 4)]
        max_n: u32,
        #[arg(long, default_value_t = 5)]
        max_k: i64,
    },
    /// Run tower-identity configurations from a JSON file.
    TowerCheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Error-transfer operator of a series, as a series in u = c1^2/4 - c2.
    ErrTransfer {
        /// Coefficient list such as "[0, 1, 0, 1/3]".
        #[arg(long)]
        series: String,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        order: usize,
    },
    /// Recover R from its two error-transfer images.
    SolveR {
        #[arg(long = "target-o")]
        target_o: String,
        #[arg(long = "target-o1")]
        target_o1: String,
        #[arg(long)]
        order: usize,
    },
    /// Run a numeric scenario file.
    Numeric {
        #[arg(long)]
        scenario: PathBuf,
        /// Directory for CSV grids of residuals.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a scenario file of any mode.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Coefficients of a list literal such as `[0, 1, -1/3]`.
pub fn parse_series_literal(text: &str) -> Result<crate::algebra::UnivariateSeries, CliError> {
    let e = parse_expr(text).map_err(|e| CliError::Input(e.to_string()))?;
    let expr::ExprKind::List(items) = &e.kind else {
        return Err(CliError::Input(format!("expected a coefficient list like [0, 1], got '{text}'")));
    };
    let coeffs = items
        .iter()
        .map(|i| {
            expr::constant_value(i).ok_or_else(|| CliError::Input(format!("coefficient '{}' is not a rational number", render(i))))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.is_empty() {
        return Err(CliError::Input("empty coefficient list".into()));
    }
    Ok(crate::algebra::UnivariateSeries::from_coeffs(coeffs))
}

fn rationals(s: &crate::algebra::UnivariateSeries) -> serde_json::Value {
    json!(s.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>())
}

/// Output of a command: text for stdout and the exit code.
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
    pub files: Vec<(PathBuf, String)>,
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn report_outcome(rep: Report, csv: Option<&Path>) -> Outcome {
    let files = match csv {
        Some(dir) => rep.grids.into_iter().map(|(name, body)| (dir.join(name), body)).collect(),
        None => Vec::new(),
    };
    Outcome { stdout: pretty(&rep.json), code: if rep.pass { 0 } else { 1 }, files }
}

/// Executes a parsed command without touching the process state.
pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    let ok = |stdout: String, pass: bool| Outcome { stdout, code: if pass { 0 } else { 1 }, files: Vec::new() };
    match cmd {
        Command::Eval { expr, ast } => {
            if *ast {
                let prog = parse_program(expr).map_err(|e| CliError::Input(e.to_string()))?;
                let lines: Vec<String> = prog
                    .iter()
                    .map(|s| match s {
                        expr::Statement::Assign { name, value, .. } => format!("{name} = {}", expr::sexpr(value)),
                        expr::Statement::Expr(e) => expr::sexpr(e),
                    })
                    .collect();
                return Ok(ok(lines.join("\n") + "\n", true));
            }
            let v = eval_str(expr)?;
            Ok(ok(format!("{v}\n"), true))
        }
        Command::Hrr { max_n, max_k } => {
            let rep = run_scenario(&Scenario::Hrr { name: "hrr".into(), max_n: *max_n, max_k: *max_k })?;
            Ok(report_outcome(rep, None))
        }
        Command::TowerCheck { config } => {
            let text = std::fs::read_to_string(config).map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
            #[derive(serde::Deserialize)]
            #[serde(deny_unknown_fields)]
            struct File {
                #[serde(default)]
                name: Option<String>,
                configs: Vec<scenario::TowerConfig>,
            }
            let file: File = serde_json::from_str(&text).map_err(|e| {
                CliError::Input(format!("{}: line {}, column {}: {e}", config.display(), e.line(), e.column()))
            })?;
            let s = Scenario::TowerCheck { name: file.name.unwrap_or_else(|| "tower-check".into()), configs: file.configs };
            Ok(report_outcome(run_scenario(&s)?, None))
        }
        Command::ErrTransfer { series, which, order } => {
            let p = parse_series_literal(series)?;
            let r = match which {
                Which::O => crate::rr::err_transfer_o(&p, *order),
                Which::OMinus1 => crate::rr::err_transfer_ominus1(&p, *order),
            }
            .map_err(CliError::compute)?;
            let v = json!({
                "which": if *which == Which::O { "O" } else { "O-1" },
                "order": order,
                "series_in_u": rationals(&r.series_in_u),
            });
            Ok(ok(pretty(&v), true))
        }
        Command::SolveR { target_o, target_o1, order } => {
            use crate::rr::ErrOperatorResult;
            let a = ErrOperatorResult { series_in_u: parse_series_literal(target_o)? };
            let b = ErrOperatorResult { series_in_u: parse_series_literal(target_o1)? };
            let sol = crate::rr::solve_r(&a, &b, *order).map_err(CliError::compute)?;
            let v = json!({
                "order": order,
                "r": rationals(&sol.series()),
                "r_even": rationals(&sol.r_even),
                "r_odd": rationals(&sol.r_odd),
            });
            Ok(ok(pretty(&v), true))
        }
        Command::Numeric { scenario, csv } => {
            let s = load_scenario(scenario)?;
            if s.mode() != "numeric" {
                return Err(CliError::Input(format!("{}: expected a numeric scenario, got mode '{}'", scenario.display(), s.mode())));
            }
            Ok(report_outcome(run_scenario(&s)?, csv.as_deref()))
        }
        Command::Run { scenario, csv } => {
            let s = load_scenario(scenario)?;
            Ok(report_outcome(run_scenario(&s)?, csv.as_deref()))
        }
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            for (path, body) in &out.files {
                if let Some(parent) = path.parent() {
                    let _ = std::fs::create_dir_all(parent);
                }
                if let Err(e) = std::fs::write(path, body) {
                    eprintln!("error: {}: {e}", path.display());
                    return 2;
                }
            }
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

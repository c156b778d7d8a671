//! `qccr` — command-line front end for the q-CCR toolkit.
//!
//! Subcommands:
//!
//! - `verify`  — run named invariant suites and the acceptance criteria,
//!   emitting a JSON report with one entry per check.
//! - `table`   — tabulate the single-mode quantities (shift norms, `beta±`,
//!   `epsilon`, and the block-matrix lower bound) over a q-grid, as CSV or
//!   JSON, together with the `q^2 = epsilon(q)` threshold.
//! - `calc`    — parse a polynomial in the generators, print its unique
//!   normal form (exact rational functions of `q` by default, floats with
//!   `--q`), and optionally the coherent expectation at `--phi`.
//! - `export`  — serialize a truncated Fock representation or a Clifford
//!   representation to the deterministic JSON + base64 container.
//!
//! Exit codes: 0 all checks passed, 1 check failure, 2 usage error,
//! 3 budget exceeded.  Identical configurations produce byte-identical
//! output: floats are printed with 17 significant digits and all collection
//! orders are deterministic.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use qccr::boundary;
use qccr::exact::QRat;
use qccr::export;
use qccr::fock::{self, FockBudget};
use qccr::parse::parse;
use qccr::scalar::{ExactRing, FloatRing};
use qccr::single_mode;
use qccr::suite::{CheckResult, SuiteConfig};
use qccr::wick::{coherent_expectation, ModeVector};
use qccr::Error;

const SCHEMA_VERSION: &str = "1";

#[derive(Parser)]
#[command(
    name = "qccr",
    version,
    about = "q-deformed canonical commutation relations toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// A single q value; may be repeated.
    #[arg(long = "q", value_name = "Q", allow_negative_numbers = true)]
    q: Vec<f64>,
    /// Inclusive grid a:b:step.
    #[arg(long = "q-grid", value_name = "A:B:STEP", allow_hyphen_values = true)]
    q_grid: Option<String>,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Numeric tolerance override (env: QCCR_TOL).
    #[arg(long)]
    tol: Option<f64>,
    /// Output format.
    #[arg(long, default_value = "json")]
    format: String,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Basis-size budget (env: QCCR_BUDGET).
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run invariant suites and acceptance criteria.
    Verify {
        /// One of: wick, single-mode, fock, boundary, acceptance, all.
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        grid: GridArgs,
        /// Mode dimension.
        #[arg(long = "d", default_value_t = 2)]
        d: usize,
        /// Truncation degree for Fock representations.
        #[arg(long = "N", default_value_t = 6)]
        n_max: usize,
        /// Word-length cap for GNS/Gram checks.
        #[arg(long = "L", default_value_t = 4)]
        word_cap: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Tabulate single-mode quantities over a q-grid.
    Table {
        #[command(flatten)]
        grid: GridArgs,
        /// Truncation degree for the numeric shift norm.
        #[arg(long = "N", default_value_t = 40)]
        n_max: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Normal-order a polynomial and evaluate coherent expectations.
    Calc {
        /// Polynomial in the text syntax, e.g. "a1 c1" or "(1,2)*c1 a2 - q*I".
        expression: String,
        /// Coherent-state vector: d comma-separated reals, or 2d values
        /// read as (re, im) pairs.
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<String>,
        /// Evaluate in float mode at this q (default: exact symbolic q).
        #[arg(long, allow_negative_numbers = true)]
        q: Option<f64>,
        /// Mode dimension (default: inferred from the expression).
        #[arg(long = "d")]
        d: Option<usize>,
    },
    /// Export a representation to the JSON + base64 container.
    Export {
        /// "fock" or "clifford".
        #[arg(long, default_value = "fock")]
        kind: String,
        #[arg(long = "d", default_value_t = 2)]
        d: usize,
        #[arg(long, allow_negative_numbers = true)]
        q: Option<f64>,
        #[arg(long = "N", default_value_t = 4)]
        n_max: usize,
        /// d x d complex symmetric matrix as JSON [[ [re,im], .. ], ..]
        /// (clifford only).
        #[arg(long)]
        theta: Option<PathBuf>,
        /// Build the rank-one coherent form from this vector instead of a
        /// theta file (clifford only).
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded(_) => 3,
        Error::Parse { .. } | Error::Unsupported(_) | Error::ParamOutOfRange(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Verify {
            suite,
            grid,
            d,
            n_max,
            word_cap,
            common,
        } => cmd_verify(&suite, &grid, d, n_max, word_cap, &common),
        Command::Table {
            grid,
            n_max,
            common,
        } => cmd_table(&grid, n_max, &common),
        Command::Calc {
            expression,
            phi,
            q,
            d,
        } => cmd_calc(&expression, phi.as_deref(), q, d),
        Command::Export {
            kind,
            d,
            q,
            n_max,
            theta,
            phi,
            out,
            budget,
        } => cmd_export(
            &kind,
            d,
            q,
            n_max,
            theta.as_deref(),
            phi.as_deref(),
            &out,
            budget,
        ),
    }
}

fn env_f64(name: &str) -> Option<f64> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn env_usize(name: &str) -> Option<usize> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn resolve_tol(flag: Option<f64>) -> f64 {
    flag.or_else(|| env_f64("QCCR_TOL")).unwrap_or(1e-10)
}

fn resolve_budget(flag: Option<usize>) -> FockBudget {
    let default = FockBudget::default();
    let max_basis = flag
        .or_else(|| env_usize("QCCR_BUDGET"))
        .unwrap_or(default.max_basis);
    FockBudget {
        max_basis,
        max_dense: default.max_dense.min(max_basis),
    }
}

fn parse_grid(grid: &GridArgs) -> Result<Vec<f64>, Error> {
    let mut values = grid.q.clone();
    if let Some(spec) = &grid.q_grid {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                position: 0,
                message: format!("grid '{spec}' is not of the form a:b:step"),
            });
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.parse::<f64>().map_err(|_| Error::Parse {
                    position: 0,
                    message: format!("grid component '{p}' is not a number"),
                })
            })
            .collect::<Result<_, _>>()?;
        let (a, b, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || !step.is_finite() {
            return Err(Error::ParamOutOfRange("grid step must be positive".into()));
        }
        if (b - a) / step > 100_000.0 {
            return Err(Error::BudgetExceeded(
                "grid has more than 100000 points".into(),
            ));
        }
        let mut x = a;
        let mut k = 0;
        while x <= b + 1e-12 {
            values.push((a + k as f64 * step).clamp(a, b));
            k += 1;
            x = a + k as f64 * step;
        }
    }
    Ok(values)
}

fn output(common: &CommonArgs, text: &str) -> Result<(), Error> {
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Numerical(format!("writing {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout();
            let newline = if text.ends_with('\n') { "" } else { "\n" };
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.write_all(newline.as_bytes()))
                .map_err(|e| Error::Numerical(format!("stdout: {e}")))
        }
    }
}

/// 17-significant-digit float formatting shared by all outputs.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema_version: &'a str,
    suite: &'a str,
    config: &'a SuiteConfig,
    checks: &'a [CheckResult],
    all_pass: bool,
}

fn cmd_verify(
    suite: &str,
    grid: &GridArgs,
    d: usize,
    n_max: usize,
    word_cap: usize,
    common: &CommonArgs,
) -> Result<ExitCode, Error> {
    let mut q_values = parse_grid(grid)?;
    if q_values.is_empty() {
        q_values = SuiteConfig::default().q_values;
    }
    let budget = resolve_budget(common.budget);
    let config = SuiteConfig {
        d,
        q_values,
        n_max,
        word_cap,
        tol: resolve_tol(common.tol),
        budget_max_basis: budget.max_basis,
        budget_max_dense: budget.max_dense,
    };
    if common.format != "json" {
        return Err(Error::Unsupported(format!(
            "verify reports are JSON only, got --format {}",
            common.format
        )));
    }
    let checks = qccr::suite::run_suite(suite, &config)?;
    let all_pass = checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        suite,
        config: &config,
        checks: &checks,
        all_pass,
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Numerical(format!("serialization: {e}")))?;
    output(common, &text)?;
    // budget violations get their own exit code even though the partial
    // report above was still emitted
    if checks
        .iter()
        .any(|c| !c.pass && c.detail.contains("budget exceeded"))
    {
        return Ok(ExitCode::from(3));
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

#[derive(Serialize, Clone)]
struct TableRow {
    q: String,
    shift_norm_closed: String,
    shift_norm_numeric: String,
    beta_minus: String,
    beta_plus: String,
    epsilon_abs_q: String,
    dykema_nica_bound: String,
}

#[derive(Serialize)]
struct TableReport<'a> {
    schema_version: &'a str,
    config: TableConfig,
    rows: &'a [TableRow],
    epsilon_threshold: String,
}

#[derive(Serialize)]
struct TableConfig {
    q_values: Vec<f64>,
    n_max: usize,
    tol: f64,
}

fn table_row(q: f64, n_max: usize, tol: f64) -> TableRow {
    // endpoints are reported explicitly as undefined, never as NaN
    if q.abs() >= 1.0 {
        return TableRow {
            q: fmt_f64(q),
            shift_norm_closed: "undefined".into(),
            shift_norm_numeric: "undefined".into(),
            beta_minus: "undefined".into(),
            beta_plus: "undefined".into(),
            epsilon_abs_q: "undefined".into(),
            dykema_nica_bound: "undefined".into(),
        };
    }
    let (numeric, closed) = single_mode::shift_norm(q, n_max).expect("|q| < 1");
    let (bm, bp) = single_mode::beta_bounds(q, tol).expect("|q| < 1");
    let eps = single_mode::epsilon(q.abs(), tol).expect("0 <= s < 1");
    let bound = (1.0 - q) / (1.0 - q.abs()) * eps.value;
    TableRow {
        q: fmt_f64(q),
        shift_norm_closed: fmt_f64(closed),
        shift_norm_numeric: fmt_f64(numeric),
        beta_minus: fmt_f64(bm.value),
        beta_plus: fmt_f64(bp.value),
        epsilon_abs_q: fmt_f64(eps.value),
        dykema_nica_bound: fmt_f64(bound),
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn cmd_table(grid: &GridArgs, n_max: usize, common: &CommonArgs) -> Result<ExitCode, Error> {
    let q_values = parse_grid(grid)?;
    if q_values.is_empty() {
        return Err(Error::Unsupported(
            "table needs at least one q (use --q or --q-grid)".into(),
        ));
    }
    let tol = resolve_tol(common.tol).min(1e-12);
    let rows: Vec<TableRow> = match common.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
            pool.install(|| {
                use rayon::prelude::*;
                q_values
                    .par_iter()
                    .map(|&q| table_row(q, n_max, tol))
                    .collect()
            })
        }
        None => q_values.iter().map(|&q| table_row(q, n_max, tol)).collect(),
    };
    let threshold = single_mode::epsilon_threshold(1e-10)?;
    let text = match common.format.as_str() {
        "csv" => {
            let mut out = String::from(
                "q,shift_norm_closed,shift_norm_numeric,beta_minus,beta_plus,epsilon_abs_q,dykema_nica_bound\n",
            );
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    csv_quote(&r.q),
                    csv_quote(&r.shift_norm_closed),
                    csv_quote(&r.shift_norm_numeric),
                    csv_quote(&r.beta_minus),
                    csv_quote(&r.beta_plus),
                    csv_quote(&r.epsilon_abs_q),
                    csv_quote(&r.dykema_nica_bound),
                ));
            }
            out.push_str(&format!("epsilon_threshold,{}\n", fmt_f64(threshold)));
            out
        }
        "json" => serde_json::to_string_pretty(&TableReport {
            schema_version: SCHEMA_VERSION,
            config: TableConfig {
                q_values: q_values.clone(),
                n_max,
                tol,
            },
            rows: &rows,
            epsilon_threshold: fmt_f64(threshold),
        })
        .map_err(|e| Error::Numerical(format!("serialization: {e}")))?,
        other => {
            return Err(Error::Unsupported(format!(
                "format '{other}' (expected csv or json)"
            )))
        }
    };
    output(common, &text)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// calc
// ---------------------------------------------------------------------------

fn parse_phi_values(spec: &str, d: usize) -> Result<Vec<Complex64>, Error> {
    let parts: Vec<f64> = spec
        .split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| Error::Parse {
                position: 0,
                message: format!("phi component '{p}' is not a number"),
            })
        })
        .collect::<Result<_, _>>()?;
    if parts.len() == d {
        Ok(parts.iter().map(|&re| Complex64::new(re, 0.0)).collect())
    } else if parts.len() == 2 * d {
        Ok(parts
            .chunks(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect())
    } else {
        Err(Error::DimensionMismatch(format!(
            "--phi has {} components, expected {d} reals or {} (re,im) pairs",
            parts.len(),
            2 * d
        )))
    }
}

fn cmd_calc(
    expression: &str,
    phi: Option<&str>,
    q: Option<f64>,
    d: Option<usize>,
) -> Result<ExitCode, Error> {
    match q {
        None => {
            // exact symbolic mode
            let p = parse::<QRat>(expression, d, ExactRing)?;
            let normal = p.normalize();
            println!("normal form: {normal}");
            if let Some(spec) = phi {
                let values = parse_phi_values(spec, p.d())?;
                let exact: Vec<QRat> = values
                    .iter()
                    .map(|z| {
                        use qccr::scalar::Scalar;
                        let re =
                            QRat::from_decimal(&format!("{}", z.re)).unwrap_or_else(QRat::zero);
                        let im =
                            QRat::from_decimal(&format!("{}", z.im)).unwrap_or_else(QRat::zero);
                        re.add(&QRat::i().mul(&im))
                    })
                    .collect();
                let omega = coherent_expectation(&p, &ModeVector::new(exact))?;
                println!("omega_phi = {omega}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Some(qv) => {
            let ring = FloatRing::new(qv);
            let p = parse::<Complex64>(expression, d, ring)?;
            let normal = p.normalize();
            println!("normal form: {normal}");
            if let Some(spec) = phi {
                let values = parse_phi_values(spec, p.d())?;
                let omega = coherent_expectation(&p, &ModeVector::new(values))?;
                if omega.im == 0.0 {
                    println!("omega_phi = {}", fmt_f64(omega.re));
                } else {
                    println!("omega_phi = ({},{})", fmt_f64(omega.re), fmt_f64(omega.im));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_export(
    kind: &str,
    d: usize,
    q: Option<f64>,
    n_max: usize,
    theta_path: Option<&std::path::Path>,
    phi: Option<&str>,
    out: &std::path::Path,
    budget: Option<usize>,
) -> Result<ExitCode, Error> {
    let budget = resolve_budget(budget);
    let json = match kind {
        "fock" => {
            let q = q.ok_or_else(|| Error::Unsupported("fock export needs --q".into()))?;
            let rep = fock::build_fock_rep(d, q, n_max, &budget)?;
            serde_json::to_string_pretty(&export::export_rep(&rep))
        }
        "clifford" => {
            let form = match (theta_path, phi) {
                (Some(path), _) => {
                    let raw = std::fs::read_to_string(path)
                        .map_err(|e| Error::Numerical(format!("reading theta: {e}")))?;
                    let entries: Vec<Vec<[f64; 2]>> =
                        serde_json::from_str(&raw).map_err(|e| Error::Parse {
                            position: 0,
                            message: format!("theta file: {e}"),
                        })?;
                    let n = entries.len();
                    if entries.iter().any(|row| row.len() != n) {
                        return Err(Error::DimensionMismatch("theta must be square".into()));
                    }
                    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
                        Complex64::new(entries[i][j][0], entries[i][j][1])
                    });
                    boundary::BilinearForm::new(m)?
                }
                (None, Some(spec)) => {
                    let values = parse_phi_values(spec, d)?;
                    boundary::coherent_theta(&values)
                }
                (None, None) => {
                    return Err(Error::Unsupported(
                        "clifford export needs --theta FILE or --phi".into(),
                    ))
                }
            };
            let fam = boundary::clifford_rep(&form)?;
            serde_json::to_string_pretty(&export::export_clifford(&fam.rep))
        }
        other => {
            return Err(Error::Unsupported(format!(
                "export kind '{other}' (expected fock or clifford)"
            )))
        }
    }
    .map_err(|e| Error::Numerical(format!("serialization: {e}")))?;
    std::fs::write(out, json)
        .map_err(|e| Error::Numerical(format!("writing {}: {e}", out.display())))?;
    Ok(ExitCode::SUCCESS)
}

//! `deepweight` command-line tool.
//!
//! Every subcommand prints a one-line JSON summary on stdout. Failures print
//! `{"error": kind, "message": ..., "exit_code": n}` on stderr and exit with
//! the code listed in [`ExitCode`].

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use deepweight::baselines::newton_abs;
use deepweight::fieldopt::{optimize_field, FieldSearchConfig};
use deepweight::golden::{golden_table, write_golden_csv};
use deepweight::mrs::{
    endpoint_functional, endpoint_localization, freud_mrs, mrs_numeric, mrs_numeric_for,
};
use deepweight::report::{
    compare, fit_report, fmt_f64, read_json, write_compare_csv, write_json, write_landscape_csv,
    write_pointwise_csv, CompareConfig,
};
use deepweight::weights::PowerField;
use deepweight::{train, Error, FitConfig, FitResult, TargetSpec, WeightSpec};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "DEEPWEIGHT_OUT_DIR";

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Ok = 0,
    /// Unknown subcommand or bad flags.
    Usage = 2,
    /// Config that does not parse or fails validation.
    Config = 3,
    /// Missing or unwritable files.
    Io = 4,
    /// Argument outside a supported domain, or unsupported combination.
    Domain = 5,
    /// Training, root finding or overflow failure.
    Numerical = 6,
}

const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  2  usage error (unknown subcommand, bad flags)
  3  malformed or invalid config
  4  missing or unwritable file
  5  argument outside the supported domain
  6  numerical failure (training diverged, solver failed, overflow)

Configs are JSON, given either as a file path or inline. Outputs go to
--out-dir, else $DEEPWEIGHT_OUT_DIR, else the current directory.";

#[derive(Parser, Debug)]
#[command(name = "deepweight", version, about = "Weighted deep polynomial approximation", after_help = EXIT_CODES_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Output {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
}

impl Output {
    fn dir(&self) -> Result<PathBuf, Error> {
        let dir = self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a weighted deep polynomial; writes fit_result.json and pointwise.csv.
    Fit {
        /// JSON config: a path or an inline object.
        #[arg(long)]
        config: String,
        #[command(flatten)]
        out: Output,
    },
    /// Weighted vs unweighted deep fits vs Chebyshev vs Taylor at matched
    /// degrees of freedom; writes compare.csv and compare_summary.json.
    Compare {
        #[arg(long)]
        config: String,
        #[command(flatten)]
        out: Output,
    },
    /// MRS number a_n for `freud:<lambda>`, `field:<c>:<n>` or `t^<lambda>`.
    Mrs {
        #[arg(long)]
        field: String,
        #[arg(long)]
        degree: f64,
        /// Solve numerically even when a closed form exists.
        #[arg(long)]
        numeric: bool,
    },
    /// Endpoint localization for a field `t^<lambda>`, `pow:<c>:<lambda>` or `field:<c>:<n>`.
    Endpoint {
        #[arg(long)]
        phi: String,
    },
    /// Optimize the one-sided field exp(-c x^n); writes field_opt.json and landscape.csv.
    FieldOpt {
        #[arg(long)]
        config: String,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate a saved fit, a target, or the Newton iterate for |x|.
    Eval {
        /// fit_result.json written by `fit`.
        #[arg(long, conflicts_with_all = ["target", "newton"])]
        result: Option<PathBuf>,
        /// Target name such as `exp-neg` or `airy-bi-neg`.
        #[arg(long, conflicts_with = "newton")]
        target: Option<String>,
        /// Newton iteration count k for x^2 f_k(x).
        #[arg(long)]
        newton: Option<usize>,
        /// Points to evaluate; repeatable.
        #[arg(long = "x", allow_negative_numbers = true)]
        xs: Vec<f64>,
        /// Midpoint grid `a,b,N`; written to eval.csv.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Regenerate the high-precision Bi(x) reference table.
    GoldenAiry {
        #[arg(long, default_value_t = -30.0, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        stop: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Output file; defaults to airy_bi_golden.csv in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) | Error::Parse(_) => ExitCode::Config,
        Error::Io(_) => ExitCode::Io,
        Error::Domain(_) | Error::Unsupported(_) => ExitCode::Domain,
        Error::Overflow { .. } | Error::Solver(_) | Error::Training(_) => ExitCode::Numerical,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "config",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
        Error::Domain(_) => "domain",
        Error::Unsupported(_) => "unsupported",
        Error::Overflow { .. } => "overflow",
        Error::Solver(_) => "solver",
        Error::Training(_) => "training",
    }
}

fn error_json(kind: &str, message: &str, code: ExitCode) -> String {
    json!({"error": kind, "message": message, "exit_code": code as i32}).to_string()
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit status, printing to the process's stdout and stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_command`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return ExitCode::Ok as i32;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            let _ = writeln!(err, "{}", error_json("usage", first, ExitCode::Usage));
            return ExitCode::Usage as i32;
        }
    };
    match execute(cli.command) {
        Ok(summary) => {
            let _ = writeln!(out, "{summary}");
            ExitCode::Ok as i32
        }
        Err(e) => {
            let code = exit_code(&e);
            let _ = writeln!(err, "{}", error_json(kind(&e), &e.to_string(), code));
            code as i32
        }
    }
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn load_config<T: DeserializeOwned>(arg: &str) -> Result<T, Error> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::Io(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{e}")))
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn execute(cmd: Command) -> Result<Value, Error> {
    match cmd {
        Command::Fit { config, out } => {
            let cfg: FitConfig = load_config(&config)?;
            cfg.validate()?;
            let dir = out.dir()?;
            let fit = train(&cfg)?;
            let report = fit_report(&fit)?;
            let result_path = dir.join("fit_result.json");
            let csv_path = dir.join("pointwise.csv");
            write_json(&result_path, &fit)?;
            let mut w = create(&csv_path)?;
            write_pointwise_csv(&mut w, &report)?;
            w.flush()?;
            Ok(json!({
                "command": "fit",
                "loss_star": fit.loss_star,
                "sup_error": fit.sup_error,
                "l2_error": report.l2_error,
                "best_restart": fit.best_restart,
                "warnings": report.warnings(),
                "outputs": [path_str(&result_path), path_str(&csv_path)],
            }))
        }
        Command::Compare { config, out } => {
            let cfg: CompareConfig = load_config(&config)?;
            cfg.fit.validate()?;
            let dir = out.dir()?;
            let result = compare(&cfg)?;
            let csv_path = dir.join("compare.csv");
            let summary_path = dir.join("compare_summary.json");
            let mut w = create(&csv_path)?;
            write_compare_csv(&mut w, &result.rows)?;
            w.flush()?;
            write_json(&summary_path, &result.summary)?;
            let mut v = serde_json::to_value(&result.summary).expect("summary serializes");
            v["command"] = json!("compare");
            v["outputs"] = json!([path_str(&csv_path), path_str(&summary_path)]);
            Ok(v)
        }
        Command::Mrs {
            field,
            degree,
            numeric,
        } => {
            // checked here so that a bad exponent reports a domain error
            let freud = field.strip_prefix("freud:").map(str::parse::<f64>);
            let result = match freud {
                Some(Ok(lambda)) if !numeric => freud_mrs(lambda, degree)?,
                _ => match field.parse::<WeightSpec>() {
                    Ok(WeightSpec::Freud(lambda)) if !numeric => freud_mrs(lambda, degree)?,
                    Ok(WeightSpec::Freud(lambda)) => mrs_numeric_for(
                        &PowerField {
                            coef: 1.0,
                            exponent: lambda,
                        },
                        degree,
                    )?,
                    Ok(WeightSpec::Field(f)) => mrs_numeric(&f, degree)?,
                    Ok(other) => {
                        return Err(Error::Unsupported(format!(
                            "MRS numbers need a symmetric decaying field, got {other}"
                        )))
                    }
                    Err(_) => mrs_numeric_for(&field.parse::<PowerField>()?, degree)?,
                },
            };
            let mut v = serde_json::to_value(result).expect("result serializes");
            v["field"] = json!(field);
            v["degree"] = json!(degree);
            Ok(v)
        }
        Command::Endpoint { phi } => {
            let f: PowerField = phi.parse()?;
            let a = endpoint_localization(&f)?;
            let residual = (endpoint_functional(&f, a) - std::f64::consts::FRAC_PI_2).abs();
            Ok(json!({"phi": phi, "a": a, "residual": residual}))
        }
        Command::FieldOpt { config, out } => {
            let cfg: FieldSearchConfig = load_config(&config)?;
            cfg.validate()?;
            let dir = out.dir()?;
            let r = optimize_field(&cfg)?;
            let json_path = dir.join("field_opt.json");
            let csv_path = dir.join("landscape.csv");
            write_json(&json_path, &r)?;
            let mut w = create(&csv_path)?;
            write_landscape_csv(&mut w, &r.grid_log)?;
            w.flush()?;
            Ok(json!({
                "command": "field-opt",
                "best_c": r.best_c,
                "best_n": r.best_n,
                "best_loss": r.best_loss,
                "baseline_loss": r.baseline_loss,
                "best_sup_error": r.best_fit.sup_error,
                "baseline_sup_error": r.baseline_fit.as_ref().map(|f| f.sup_error),
                "evaluated": r.grid_log.len(),
                "outputs": [path_str(&json_path), path_str(&csv_path)],
            }))
        }
        Command::Eval {
            result,
            target,
            newton,
            xs,
            grid,
            out,
        } => {
            let f: Box<dyn Fn(f64) -> Result<f64, Error>> = match (result, target, newton) {
                (Some(path), None, None) => {
                    let fit: FitResult = read_json(&path)?;
                    let graph = fit.graph()?;
                    Box::new(move |x| graph.forward(&fit.theta_star, x))
                }
                (None, Some(t), None) => {
                    let t: TargetSpec = t.parse()?;
                    Box::new(move |x| t.eval(x))
                }
                (None, None, Some(k)) => Box::new(move |x| newton_abs(x, k)),
                _ => {
                    return Err(Error::Config(
                        "give exactly one of --result, --target, --newton".into(),
                    ))
                }
            };
            if let Some(g) = grid {
                let parts: Vec<&str> = g.split(',').collect();
                let [a, b, n] = parts.as_slice() else {
                    return Err(Error::Config(format!("--grid expects a,b,N, got `{g}`")));
                };
                let num = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad number `{s}`")))
                };
                let n = n
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad N `{n}`")))?;
                let g = deepweight::fit::sample_grid([num(a)?, num(b)?], n)?;
                let dir = out.dir()?;
                let path = dir.join("eval.csv");
                let mut w = create(&path)?;
                writeln!(w, "x,q")?;
                for &x in &g.points {
                    writeln!(w, "{},{}", fmt_f64(x), fmt_f64(f(x)?))?;
                }
                w.flush()?;
                Ok(
                    json!({"command": "eval", "points": g.points.len(), "outputs": [path_str(&path)]}),
                )
            } else if xs.is_empty() {
                Err(Error::Config("give --x or --grid".into()))
            } else {
                let values = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>, _>>()?;
                Ok(json!({"command": "eval", "x": xs, "q": values}))
            }
        }
        Command::GoldenAiry {
            start,
            stop,
            step,
            output,
            out,
        } => {
            let rows = golden_table(start, stop, step)?;
            let path = match output {
                Some(p) => p,
                None => out.dir()?.join("airy_bi_golden.csv"),
            };
            let mut w = create(&path)?;
            write_golden_csv(&mut w, &rows)?;
            w.flush()?;
            Ok(json!({"command": "golden-airy", "rows": rows.len(), "outputs": [path_str(&path)]}))
        }
    }
}

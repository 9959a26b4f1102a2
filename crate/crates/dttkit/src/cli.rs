//! Command-line front end: planning, verification, application, export and
//! cost-table reproduction.

use std::ffi::OsString;
use std::io::{BufRead, Write};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::formula::{Formula, Scalar};
use crate::planner::{
    cost_report_csv, cost_report_text, resolve, verify_plan, CostRow, PlanError, Planner, Strategy,
};
use crate::reference::{complex_matrix_to_csv, matrix_to_csv, parse_rational, TransformId};

/// Exit status: success.
pub const EXIT_OK: i32 = 0;
/// Exit status: a verification failed (or a plan could not be built).
pub const EXIT_FAILURE: i32 = 1;
/// Exit status: the invocation was malformed.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "dttkit",
    version,
    about = "Fast DCT/DST/DFT algorithms: plan, verify, apply, export and cost them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Planning strategy: min-cost, radix<k>, radix2-where-possible,
    /// balanced, fact or rule:<tag>.
    #[arg(long, default_value = "min-cost")]
    strategy: String,
    /// Skew parameter r as an exact rational p/q.
    #[arg(long = "r", value_name = "P/Q")]
    r: Option<String>,
    /// Seed for the randomized verification vectors.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan and verify a transform for a range or list of sizes.
    Verify {
        /// Transform spec, e.g. dct3, dst7, dct4:poly, idct3, dft, dfta=-1/2.
        spec: String,
        /// Sizes: N, A..B (inclusive) or comma-separated lists.
        #[arg(required = true)]
        sizes: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the plan cost next to the closed-form cost.
    Cost {
        spec: String,
        #[arg(required = true)]
        sizes: Vec<String>,
        /// Emit CSV instead of an aligned table.
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Apply the planned algorithm to a newline-separated vector.
    Apply {
        spec: String,
        size: usize,
        /// Input file (standard input when omitted).
        input: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Export the dense matrix, the formula or the plan tree.
    Export {
        spec: String,
        size: usize,
        /// Dense matrix as CSV.
        #[arg(long, group = "what")]
        dense: bool,
        /// Fully resolved formula as an s-expression.
        #[arg(long, group = "what")]
        formula: bool,
        /// Rule-trace tree of the plan.
        #[arg(long, group = "what")]
        plan: bool,
        #[command(flatten)]
        common: Common,
    },
}

/// A usage problem: reported with exit status 2.
#[derive(Debug)]
struct Usage(String);

/// Parse size arguments: `N`, `A..B` (inclusive) and comma-separated lists.
pub fn parse_sizes(args: &[String]) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for arg in args {
        for tok in arg.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if let Some((a, b)) = tok.split_once("..") {
                let a: usize = a
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad size range {tok:?}"))?;
                let b: usize = b
                    .trim_start_matches('=')
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad size range {tok:?}"))?;
                if a == 0 || a > b {
                    return Err(format!("empty size range {tok:?}"));
                }
                out.extend(a..=b);
            } else {
                let n: usize = tok.parse().map_err(|_| format!("bad size {tok:?}"))?;
                if n == 0 {
                    return Err("sizes must be positive".into());
                }
                out.push(n);
            }
        }
    }
    if out.is_empty() {
        return Err("no sizes given".into());
    }
    Ok(out)
}

fn transform(spec: &str, n: usize, common: &Common) -> Result<TransformId, Usage> {
    let mut t = TransformId::parse_spec(spec, n).map_err(|e| Usage(e.to_string()))?;
    if let Some(r) = &common.r {
        let q = parse_rational(r).ok_or_else(|| Usage(format!("bad skew parameter {r:?}")))?;
        t = t.with_skew(q);
    }
    t.validate().map_err(|e| Usage(e.to_string()))?;
    Ok(t)
}

fn strategy(common: &Common) -> Result<Strategy, Usage> {
    common
        .strategy
        .parse()
        .map_err(|e: PlanError| Usage(e.to_string()))
}

/// Format with 17 significant digits, dropping redundant trailing zeros.
pub fn fmt_sig17(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.16e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{exp}")
    }
}

/// Run the CLI with explicit streams; returns the process exit status.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Verify {
            spec,
            sizes,
            common,
        } => cmd_verify(&spec, &sizes, &common, out),
        Command::Cost {
            spec,
            sizes,
            csv,
            common,
        } => cmd_cost(&spec, &sizes, csv, &common, out),
        Command::Apply {
            spec,
            size,
            input: path,
            common,
        } => cmd_apply(&spec, size, path.as_deref(), &common, input, out),
        Command::Export {
            spec,
            size,
            dense,
            formula,
            plan,
            common,
        } => cmd_export(&spec, size, (dense, formula, plan), &common, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Failed(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        Failure::Failed(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Failed(e.to_string())
    }
}

fn cmd_verify(
    spec: &str,
    sizes: &[String],
    common: &Common,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let sizes = parse_sizes(sizes).map_err(Failure::Usage)?;
    let strat = strategy(common)?;
    let ids = sizes
        .iter()
        .map(|&n| transform(spec, n, common))
        .collect::<Result<Vec<_>, _>>()?;
    let mut planner = Planner::new(strat.clone());
    let mut first_failure: Option<String> = None;
    for t in &ids {
        let line = match planner.plan(t) {
            Ok(p) => match verify_plan(&p, common.seed) {
                Ok(v) => {
                    let ok = v.passed();
                    if !ok && first_failure.is_none() {
                        first_failure = Some(format!("{t}: error {:.3e}", v.max_error()));
                    }
                    format!(
                        "{}  {t}  error {:.3e}  cost {}  {}",
                        if ok { "pass" } else { "FAIL" },
                        v.max_error(),
                        p.cost,
                        p.trace()
                    )
                }
                Err(e) => {
                    first_failure.get_or_insert(format!("{t}: {e}"));
                    format!("FAIL  {t}  {e}")
                }
            },
            Err(e) => {
                first_failure.get_or_insert(format!("{t}: {e}"));
                format!("FAIL  {t}  {e}")
            }
        };
        writeln!(out, "{line}")?;
    }
    match first_failure {
        None => {
            writeln!(out, "all {} sizes pass (strategy {strat})", ids.len())?;
            Ok(EXIT_OK)
        }
        Some(f) => {
            writeln!(out, "first failure: {f}")?;
            Ok(EXIT_FAILURE)
        }
    }
}

fn cmd_cost(
    spec: &str,
    sizes: &[String],
    csv: bool,
    common: &Common,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let sizes = parse_sizes(sizes).map_err(Failure::Usage)?;
    let mut planner = Planner::new(strategy(common)?);
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let t = transform(spec, n, common)?;
        rows.push(CostRow::from_plan(&planner.plan(&t)?));
    }
    let text = if csv {
        cost_report_csv(&rows)
    } else {
        cost_report_text(&rows)
    };
    write!(out, "{text}")?;
    Ok(EXIT_OK)
}

fn read_vector(text: &str, complex: bool) -> Result<Vec<Complex64>, String> {
    let mut v = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| format!("line {}: not a number: {s:?}", i + 1))
        };
        let value = match fields.as_slice() {
            [re] => Complex64::new(num(re)?, 0.0),
            [re, im] if complex => Complex64::new(num(re)?, num(im)?),
            _ => return Err(format!("line {}: expected one value per line", i + 1)),
        };
        v.push(value);
    }
    Ok(v)
}

fn cmd_apply(
    spec: &str,
    n: usize,
    path: Option<&str>,
    common: &Common,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let t = transform(spec, n, common)?;
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Failed(format!("{p}: {e}")))?,
        None => {
            let mut s = String::new();
            input.read_to_string(&mut s)?;
            s
        }
    };
    let x = read_vector(&text, t.is_dft()).map_err(Failure::Failed)?;
    if x.len() != n {
        return Err(Failure::Failed(format!(
            "input has {} values, {t} needs {n}",
            x.len()
        )));
    }
    let plan = Planner::new(strategy(common)?).plan(&t)?;
    if t.is_dft() {
        let f: Formula<Complex64> = resolve(&plan)?;
        let y = f.apply(&x).map_err(PlanError::from)?;
        for v in y {
            writeln!(out, "{} {}", fmt_sig17(v.re), fmt_sig17(v.im))?;
        }
    } else {
        let f: Formula<f64> = resolve(&plan)?;
        let xr: Vec<f64> = x.iter().map(|c| c.re).collect();
        for v in f.apply(&xr).map_err(PlanError::from)? {
            writeln!(out, "{}", fmt_sig17(v))?;
        }
    }
    Ok(EXIT_OK)
}

fn export_formula<S: Scalar>(f: &Formula<S>, dense: bool) -> Result<String, PlanError> {
    if dense {
        let m = f.densify()?;
        Ok(dense_csv(&m))
    } else {
        let mut s = f.to_sexpr();
        s.push('\n');
        Ok(s)
    }
}

/// CSV of a dense matrix: plain cells for real fields, `re:im` for complex.
fn dense_csv<S: Scalar>(m: &nalgebra::DMatrix<S>) -> String {
    if S::of_complex(Complex64::new(0.0, 1.0)).is_none() {
        matrix_to_csv(&m.map(|v| v.real()))
    } else {
        complex_matrix_to_csv(&m.map(|v| Complex64::new(v.real(), v.imaginary())))
    }
}

fn cmd_export(
    spec: &str,
    n: usize,
    what: (bool, bool, bool),
    common: &Common,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let t = transform(spec, n, common)?;
    let (dense, formula, tree) = what;
    if !(dense || formula || tree) {
        return Err(Failure::Usage(
            "choose one of --dense, --formula, --plan".into(),
        ));
    }
    let plan = Planner::new(strategy(common)?).plan(&t)?;
    let text = if tree {
        plan.tree()
    } else if t.is_dft() {
        export_formula(&resolve::<Complex64>(&plan)?, dense)?
    } else {
        export_formula(&resolve::<f64>(&plan)?, dense)?
    };
    write!(out, "{text}")?;
    Ok(EXIT_OK)
}

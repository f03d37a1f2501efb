//! Command-line front end. `run` parses arguments, dispatches, and returns
//! the process exit code: 0 success, 1 verification failed, 2 bad input,
//! 3 no witness within bounds.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::average::{
    cesaro_av_window, default_workers, inner_product, orthogonality_test, quad_norm,
    shift_compactness_probe, DEFAULT_T_GRID,
};
use crate::classify::{
    matrix_to_json, params_from_json, params_to_json, polarized_from_json, polarized_to_heisenberg,
    search_witness, verify_witness, witness_from_json, witness_to_json, SearchBounds,
    SearchOutcome,
};
use crate::error::{Error, Result};
use crate::exactnum::{e, IrrationalBasis, QAffineReal};
use crate::nilsys::{
    c1_gaussian, fiber_fourier, AffineSkewSystem, HeisenbergElement, HeisenbergSystem,
};
use crate::selftest::{run_selftest, SelftestConfig};
use crate::seq::json::{leaf_json, SCHEMA};
use crate::seq::{parse_document, NilseqExpr};
use crate::theta::{kappa, KappaAccuracy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "nilseq",
    version,
    about = "Two-step nilsequences: evaluation, averages, classification"
)]
pub struct Cli {
    /// Worker threads for averaging and probes.
    #[arg(long, global = true, env = "NILSEQ_WORKERS")]
    workers: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an expression file on an index range.
    Eval(RangeArgs),
    /// Cesàro average over a window.
    Avg(AvgArgs),
    /// Inner product <a|b>_N, with an orthogonality verdict.
    Ip(IpArgs),
    /// Quadratic norm (Av |a|^2)^{1/2}.
    Norm2(AvgArgs),
    /// The kernel κ(s, t).
    Kappa(KappaArgs),
    /// Orbit values of a Heisenberg or affine system.
    Orbit(OrbitArgs),
    /// Fiber Fourier coefficients of the Gaussian section at a point.
    Decompose(DecomposeArgs),
    /// Exact classification tools.
    Classify {
        #[command(subcommand)]
        action: ClassifyCommand,
    },
    /// Shift-compactness probe.
    Probe(ProbeArgs),
    /// Run the built-in acceptance checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct RangeArgs {
    #[arg(long)]
    expr: PathBuf,
    /// First index.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    n0: i64,
    /// One past the last index.
    #[arg(long, allow_hyphen_values = true)]
    n1: i64,
}

#[derive(Debug, Args)]
struct AvgArgs {
    #[arg(long)]
    expr: PathBuf,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    start: i64,
}

#[derive(Debug, Args)]
struct IpArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    n: u64,
    /// Threshold for the orthogonality verdict.
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
}

#[derive(Debug, Args)]
struct KappaArgs {
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, default_value_t = 1e-16)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemKind {
    Heisenberg,
    Affine,
}

#[derive(Debug, Args)]
struct OrbitArgs {
    #[arg(long, value_enum, default_value_t = SystemKind::Heisenberg)]
    system: SystemKind,
    /// α values (repeat for d > 1), e.g. `--alpha xi1`.
    #[arg(long, required = true, allow_hyphen_values = true)]
    alpha: Vec<String>,
    #[arg(long, required = true, allow_hyphen_values = true)]
    beta: Vec<String>,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    gamma: String,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    n0: i64,
    #[arg(long, allow_hyphen_values = true)]
    n1: i64,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[arg(long, required = true, allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long, required = true, allow_hyphen_values = true)]
    y: Vec<f64>,
    /// Central coordinate as a phase `z = e(u)`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    u: f64,
    /// Characters to compute.
    #[arg(long, value_delimiter = ',', default_values_t = vec![-2, -1, 0, 1, 2], allow_hyphen_values = true)]
    chi: Vec<i64>,
    /// Quadrature points on the fiber.
    #[arg(long, default_value_t = 8)]
    m: usize,
}

#[derive(Debug, Subcommand)]
enum ClassifyCommand {
    /// Check a witness exactly.
    Verify {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        pprime: PathBuf,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Look for a witness within bounds.
    Search {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        pprime: PathBuf,
        #[arg(long, default_value_t = 6)]
        mmax: u64,
        #[arg(long, default_value_t = 4)]
        shiftmax: u64,
        #[arg(long, default_value_t = 5)]
        height: u64,
    },
    /// Heisenberg coordinates of a connected system.
    Reduce {
        #[arg(long)]
        polarized: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[arg(long)]
    expr: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 5, 12, 29, 70], allow_hyphen_values = true)]
    shifts: Vec<i64>,
    #[arg(long, default_value_t = 10_000)]
    window: usize,
    #[arg(long, default_value_t = DEFAULT_T_GRID)]
    t_grid: usize,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Averages at N = 10^5 with tolerances ×3.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

/// 17 significant digits, positional where that stays short.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..16).contains(&mag) {
        let decimals = (16 - mag).max(1) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

struct Ctx {
    workers: usize,
    format: Format,
}

struct Output {
    text: String,
    code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output {
            text,
            code: EXIT_OK,
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|err| Error::InvalidInput(format!("cannot read {}: {err}", path.display())))?;
    serde_json::from_str(&text).map_err(|err| Error::Parse(format!("{}: {err}", path.display())))
}

fn read_expr(path: &Path) -> Result<NilseqExpr> {
    let text = fs::read_to_string(path)
        .map_err(|err| Error::InvalidInput(format!("cannot read {}: {err}", path.display())))?;
    Ok(parse_document(&text)?.expr)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

fn series(ctx: &Ctx, n0: i64, vals: &[Complex64]) -> String {
    match ctx.format {
        Format::Csv => {
            let mut s = String::from("n,re,im\n");
            for (i, v) in vals.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{}\n",
                    n0 + i as i64,
                    fmt17(v.re),
                    fmt17(v.im)
                ));
            }
            s
        }
        Format::Json => pretty(&json!({
            "schema": SCHEMA,
            "n0": n0,
            "values": vals.iter().map(|v| json!([v.re, v.im])).collect::<Vec<_>>(),
        })),
    }
}

fn check_range(n0: i64, n1: i64) -> Result<()> {
    if n1 <= n0 {
        return Err(Error::InvalidInput(format!(
            "empty range n0 = {n0}, n1 = {n1}"
        )));
    }
    Ok(())
}

fn cmd_eval(ctx: &Ctx, a: &RangeArgs) -> Result<Output> {
    check_range(a.n0, a.n1)?;
    let expr = read_expr(&a.expr)?;
    Ok(Output::ok(series(ctx, a.n0, &expr.eval_range(a.n0, a.n1)?)))
}

fn scalar_report(ctx: &Ctx, name: &str, value: Complex64, n: u64, err: f64) -> String {
    match ctx.format {
        Format::Csv => format!(
            "quantity,re,im,n_used,error_estimate\n{name},{},{},{n},{}\n",
            fmt17(value.re),
            fmt17(value.im),
            fmt17(err)
        ),
        Format::Json => pretty(&json!({
            "schema": SCHEMA,
            "quantity": name,
            "value": [value.re, value.im],
            "n_used": n,
            "error_estimate": err,
        })),
    }
}

fn cmd_avg(ctx: &Ctx, a: &AvgArgs) -> Result<Output> {
    let r = cesaro_av_window(&read_expr(&a.expr)?, a.start, a.n, ctx.workers)?;
    Ok(Output::ok(scalar_report(
        ctx,
        "average",
        r.value,
        r.n_used,
        r.error_estimate,
    )))
}

fn cmd_norm2(ctx: &Ctx, a: &AvgArgs) -> Result<Output> {
    if a.start != 0 {
        return Err(Error::InvalidInput("norm2 averages from n = 0".into()));
    }
    let r = quad_norm(&read_expr(&a.expr)?, a.n, ctx.workers)?;
    Ok(Output::ok(scalar_report(
        ctx,
        "quadratic_norm",
        Complex64::new(r.value, 0.0),
        r.n_used,
        r.error_estimate,
    )))
}

fn cmd_ip(ctx: &Ctx, a: &IpArgs) -> Result<Output> {
    let (x, y) = (read_expr(&a.a)?, read_expr(&a.b)?);
    let ip = inner_product(&x, &y, a.n, ctx.workers)?;
    let v = orthogonality_test(&x, &y, a.n, a.threshold, ctx.workers)?;
    let verdict = serde_json::to_value(v.kind).unwrap_or(Value::Null);
    let text = match ctx.format {
        Format::Csv => format!(
            "re,im,n_used,error_estimate,statistic,threshold,verdict\n{},{},{},{},{},{},{}\n",
            fmt17(ip.value.re),
            fmt17(ip.value.im),
            ip.n_used,
            fmt17(ip.error_estimate),
            fmt17(v.statistic),
            fmt17(v.threshold),
            verdict.as_str().unwrap_or("")
        ),
        Format::Json => pretty(&json!({
            "schema": SCHEMA,
            "value": [ip.value.re, ip.value.im],
            "n_used": ip.n_used,
            "error_estimate": ip.error_estimate,
            "statistic": v.statistic,
            "threshold": v.threshold,
            "verdict": verdict,
        })),
    };
    Ok(Output::ok(text))
}

fn cmd_kappa(ctx: &Ctx, a: &KappaArgs) -> Result<Output> {
    let v = kappa(a.s, a.t, &KappaAccuracy::new(a.tol)?)?;
    let text = match ctx.format {
        Format::Csv => format!("{},{}\n", fmt17(v.re), fmt17(v.im)),
        Format::Json => {
            pretty(&json!({ "schema": SCHEMA, "s": a.s, "t": a.t, "value": [v.re, v.im] }))
        }
    };
    Ok(Output::ok(text))
}

fn cmd_orbit(ctx: &Ctx, a: &OrbitArgs) -> Result<Output> {
    check_range(a.n0, a.n1)?;
    let basis = IrrationalBasis::standard();
    let parse = |v: &[String]| {
        v.iter()
            .map(|s| QAffineReal::parse(s, &basis))
            .collect::<Result<Vec<_>>>()
    };
    let (alpha, beta) = (parse(&a.alpha)?, parse(&a.beta)?);
    let expr = match a.system {
        SystemKind::Heisenberg => NilseqExpr::heisenberg_orbit(HeisenbergSystem::new(
            alpha,
            beta,
            QAffineReal::parse(&a.gamma, &basis)?,
        )?),
        SystemKind::Affine => {
            if alpha.len() != 1 || beta.len() != 1 {
                return Err(Error::InvalidInput(
                    "the affine system takes one alpha and one beta".into(),
                ));
            }
            NilseqExpr::affine_orbit(AffineSkewSystem::new(alpha[0].clone(), beta[0].clone())?)
        }
    };
    Ok(Output::ok(series(ctx, a.n0, &expr.eval_range(a.n0, a.n1)?)))
}

fn cmd_decompose(ctx: &Ctx, a: &DecomposeArgs) -> Result<Output> {
    let point = HeisenbergElement::new(a.x.clone(), a.y.clone(), e(a.u))?;
    let rows = a
        .chi
        .iter()
        .map(|&chi| Ok((chi, fiber_fourier(c1_gaussian, &point, chi, a.m)?)))
        .collect::<Result<Vec<_>>>()?;
    let text = match ctx.format {
        Format::Csv => {
            let mut s = String::from("chi,re,im\n");
            for (chi, v) in &rows {
                s.push_str(&format!("{chi},{},{}\n", fmt17(v.re), fmt17(v.im)));
            }
            s
        }
        Format::Json => pretty(&json!({
            "schema": SCHEMA,
            "coefficients": rows.iter().map(|(chi, v)| json!({ "chi": chi, "value": [v.re, v.im] })).collect::<Vec<_>>(),
        })),
    };
    Ok(Output::ok(text))
}

fn cmd_classify(action: &ClassifyCommand) -> Result<Output> {
    match action {
        ClassifyCommand::Verify { p, pprime, witness } => {
            let (p, pp) = (
                params_from_json(&read_json(p)?)?,
                params_from_json(&read_json(pprime)?)?,
            );
            let w = witness_from_json(&read_json(witness)?)?;
            let ok = verify_witness(&p, &pp, &w)?;
            Ok(Output {
                text: pretty(&json!({ "schema": SCHEMA, "verified": ok })),
                code: if ok { EXIT_OK } else { EXIT_REFUTED },
            })
        }
        ClassifyCommand::Search {
            p,
            pprime,
            mmax,
            shiftmax,
            height,
        } => {
            let (p, pp) = (
                params_from_json(&read_json(p)?)?,
                params_from_json(&read_json(pprime)?)?,
            );
            let bounds = SearchBounds {
                m_max: *mmax,
                shift_max: *shiftmax,
                height_max: *height,
            };
            let (v, code) = match search_witness(&p, &pp, bounds)? {
                SearchOutcome::Found(w) => (
                    json!({ "outcome": "found", "witness": witness_to_json(&w) }),
                    EXIT_OK,
                ),
                SearchOutcome::OutsideBounds(w) => (
                    json!({ "outcome": "outside_bounds", "minimal_witness": witness_to_json(&w) }),
                    EXIT_NOT_FOUND,
                ),
                SearchOutcome::Inequivalent(reason) => (
                    json!({ "outcome": "inequivalent", "reason": reason }),
                    EXIT_NOT_FOUND,
                ),
            };
            let mut v = v;
            v["schema"] = json!(SCHEMA);
            v["p"] = params_to_json(&p);
            v["pprime"] = params_to_json(&pp);
            Ok(Output {
                text: pretty(&v),
                code,
            })
        }
        ClassifyCommand::Reduce { polarized } => {
            let sys = polarized_from_json(&read_json(polarized)?)?;
            let r = polarized_to_heisenberg(&sys)?;
            Ok(Output::ok(pretty(&json!({
                "schema": SCHEMA,
                "phi": matrix_to_json(&r.phi),
                "alpha": r.system.alpha().iter().map(leaf_json).collect::<Vec<_>>(),
                "beta": r.system.beta().iter().map(leaf_json).collect::<Vec<_>>(),
                "gamma": leaf_json(r.system.gamma()),
                "minimal": r.minimal,
            }))))
        }
    }
}

fn cmd_probe(ctx: &Ctx, a: &ProbeArgs) -> Result<Output> {
    let rows = shift_compactness_probe(
        &read_expr(&a.expr)?,
        &a.shifts,
        a.window,
        a.t_grid,
        ctx.workers,
    )?;
    let text = match ctx.format {
        Format::Csv => {
            let mut s = String::from("k,best_t,d_inf,d_2\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    r.k,
                    fmt17(r.best_t),
                    fmt17(r.d_inf),
                    fmt17(r.d_2)
                ));
            }
            s
        }
        Format::Json => pretty(&json!({ "schema": SCHEMA, "window": a.window, "rows": rows })),
    };
    Ok(Output::ok(text))
}

fn cmd_selftest(ctx: &Ctx, a: &SelftestArgs) -> Result<Output> {
    let report = run_selftest(&SelftestConfig {
        quick: a.quick,
        seed: a.seed,
        workers: ctx.workers,
    })?;
    let text = match ctx.format {
        Format::Json => pretty(&report.to_json()),
        Format::Csv => {
            let mut s = String::from("id,name,statistic,threshold,passed\n");
            for c in &report.criteria {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.id,
                    c.name,
                    fmt17(c.statistic),
                    fmt17(c.threshold),
                    c.passed
                ));
            }
            s
        }
    };
    Ok(Output {
        text,
        code: if report.all_passed() {
            EXIT_OK
        } else {
            EXIT_REFUTED
        },
    })
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let workers = cli.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(Error::InvalidInput("--workers must be >= 1".into()));
    }
    let ctx = Ctx {
        workers,
        format: cli.format,
    };
    match &cli.command {
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::Avg(a) => cmd_avg(&ctx, a),
        Command::Ip(a) => cmd_ip(&ctx, a),
        Command::Norm2(a) => cmd_norm2(&ctx, a),
        Command::Kappa(a) => cmd_kappa(&ctx, a),
        Command::Orbit(a) => cmd_orbit(&ctx, a),
        Command::Decompose(a) => cmd_decompose(&ctx, a),
        Command::Classify { action } => cmd_classify(action),
        Command::Probe(a) => cmd_probe(&ctx, a),
        Command::Selftest(a) => cmd_selftest(&ctx, a),
    }
}

/// Runs the CLI, writing results to `stdout` (or `--out`) and diagnostics to `stderr`.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_BAD_INPUT
            } else {
                EXIT_OK
            };
            let text = err.render().to_string();
            let sink: &mut dyn Write = if err.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, &out.text),
                None => stdout.write_all(out.text.as_bytes()),
            };
            if let Err(err) = written {
                let _ = writeln!(stderr, "error: cannot write output: {err}");
                return EXIT_BAD_INPUT;
            }
            out.code
        }
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            EXIT_BAD_INPUT
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(
        args,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

//! Command-line front end: verification suites, rate sweeps, figure-data
//! reproduction, codec simulation.
//!
//! Every data-producing subcommand emits CSV (header row first, sweep
//! variable in the leading columns, floats printed with 9 significant
//! digits). Identical configuration and seed give byte-identical CSV; wall
//! clocks and other nondeterminism go to stderr only. Exit codes: 0 success,
//! 1 verification failure, 2 usage error.

use crate::entropy::{
    self, constrained_binary_km_closed, constrained_binary_sw_closed, cross_paired_gain,
    cross_paired_km_closed, cross_paired_sw_closed, ternary_km_bound, ternary_sw_closed,
    RateReport,
};
use crate::field::PrimeModulus;
use crate::graph_entropy::{rate_km_or, GraphError, HybridRateReport, SideInformation};
use crate::kmcodec::{run_joint_trials, run_trials, SymbolModel, TrialReport};
use crate::schemes::exhaustive::{
    verify_embedding, verify_entrywise, verify_inner, verify_square, verify_symmetric,
    verify_symmetric_binary, VerifyReport,
};
use crate::sources::{CustomTable, JointSourceModel};
use clap::{Parser, Subcommand};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(
    name = "distmm",
    version,
    about = "Structured distributed compression schemes for inner and matrix products over F_q",
    after_help = "CSV schemas:\n  \
        verify        -> human-readable pass/fail counts (no CSV)\n  \
        rates         -> p,r_sw,r_km,r_s,r_sv,r_km_or,r_km_or_b,gain\n  \
        gain          -> p,r_sw_closed,r_km_closed,eta\n  \
        figure --id 1 -> m,p,eta\n  \
        figure --id 2l-> p,r_sw_closed,r_sw,r_km_closed,r_km,r_sv,h_product\n  \
        figure --id 2m/2r -> p,r_sw,r_s,r_km_or,r_km_or_b,h_product\n  \
        figure --id 3l-> m,p,r_sw_closed,r_km_closed,eta\n  \
        figure --id 3r-> m,p,r_sw_closed,r_sw,r_km,r_km_bound,eta\n  \
        simulate      -> n,k,q,trials,errors,error_rate\n  \
        graph-entropy -> model,m,p,variant,h_side,h_graph,h_cond_bound,rate,converged\n\n\
        A --config file holds `key = value` lines (keys match the long flag\n\
        names); explicit command-line flags take precedence."
)]
pub struct Cli {
    /// Key = value config file supplying defaults for the flags below.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exhaustively verify a scheme's decoding identity.
    Verify {
        /// inner | embedding | sym | sym-binary | square | entrywise
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
    },
    /// Exact rate table for a source model, optionally over a p sweep.
    Rates {
        /// crosspaired | paired | single | ternary | custom
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        /// lo:hi:steps, strictly inside (0, 1)
        #[arg(long = "p-grid")]
        p_grid: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// support table file for --model custom
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Closed-form gain of structured over unstructured coding.
    Gain {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "p-grid")]
        p_grid: Option<String>,
    },
    /// Emit the data behind one of the rate-comparison figures.
    Figure {
        /// 1 | 2l | 2m | 2r | 3l | 3r
        #[arg(long)]
        id: Option<String>,
        #[arg(long = "p-grid")]
        p_grid: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Monte-Carlo syndrome-codec simulation.
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// per-symbol Bernoulli parameter (symbol model)
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// symbol | crosspaired (full stacked-message pipeline)
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Conditional graph entropy and hybrid rates.
    GraphEntropy {
        /// dsbs | paired | crosspaired
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
    },
}

#[derive(Debug)]
enum CliError {
    /// Bad parameters or I/O: exit 2.
    Usage(String),
    /// A verification found failures: exit 1.
    Failure(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        usage(e.to_string())
    }
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::Failure(msg)) => {
            eprintln!("{msg}");
            1
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => BTreeMap::new(),
    };
    let ctx = Ctx { cfg };
    match cli.command {
        Command::Verify { scheme, q, m, l } => cmd_verify(&ctx, scheme, q, m, l),
        Command::Rates {
            model,
            m,
            p,
            p_grid,
            epsilon,
            table,
        } => {
            let csv = cmd_rates(&ctx, model, m, p, p_grid, epsilon, table)?;
            emit(&cli.out, &csv)
        }
        Command::Gain { m, p, p_grid } => {
            let csv = cmd_gain(&ctx, m, p, p_grid)?;
            emit(&cli.out, &csv)
        }
        Command::Figure {
            id,
            p_grid,
            epsilon,
        } => {
            let csv = cmd_figure(&ctx, id, p_grid, epsilon)?;
            emit(&cli.out, &csv)
        }
        Command::Simulate {
            n,
            k,
            p,
            trials,
            seed,
            model,
            m,
        } => {
            let csv = cmd_simulate(&ctx, n, k, p, trials, seed, model, m)?;
            emit(&cli.out, &csv)
        }
        Command::GraphEntropy { model, m, p } => {
            let csv = cmd_graph_entropy(&ctx, model, m, p)?;
            emit(&cli.out, &csv)
        }
    }
}

// ---------------------------------------------------------------------------
// Configuration plumbing
// ---------------------------------------------------------------------------

struct Ctx {
    cfg: BTreeMap<String, String>,
}

impl Ctx {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.cfg.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| usage(format!("config value {key} = {raw} is invalid"))),
            None => Ok(None),
        }
    }

    fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError> {
        self.get(flag, key)?
            .ok_or_else(|| usage(format!("missing required parameter --{key}")))
    }

    fn get_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }
}

fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!(
                "config {}:{}: expected `key = value`",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn emit(out: &Option<PathBuf>, csv: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

/// `lo:hi:steps` to a strictly increasing grid inside (0, 1).
fn parse_p_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("--p-grid {spec}: expected lo:hi:steps")));
    }
    let lo: f64 = parts[0].parse().map_err(|_| usage("bad p-grid lo"))?;
    let hi: f64 = parts[1].parse().map_err(|_| usage("bad p-grid hi"))?;
    let steps: usize = parts[2].parse().map_err(|_| usage("bad p-grid steps"))?;
    if !(0.0 < lo && lo < 1.0 && 0.0 < hi && hi < 1.0) {
        return Err(usage("p-grid endpoints must lie strictly inside (0, 1)"));
    }
    if steps < 2 || lo >= hi {
        return Err(usage("p-grid needs lo < hi and at least 2 steps"));
    }
    let span = hi - lo;
    Ok((0..steps)
        .map(|i| lo + span * i as f64 / (steps - 1) as f64)
        .collect())
}

fn check_p(p: f64) -> Result<f64, CliError> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(usage(format!("p = {p} must lie in [0, 1]")));
    }
    Ok(p)
}

fn p_values(
    ctx: &Ctx,
    p: Option<f64>,
    p_grid: Option<String>,
    default_grid: Option<&[f64]>,
) -> Result<Vec<f64>, CliError> {
    let grid_spec = ctx.get(p_grid, "p-grid")?;
    if let Some(spec) = grid_spec {
        return parse_p_grid(&spec);
    }
    if let Some(p) = ctx.get(p, "p")? {
        return Ok(vec![check_p(p)?]);
    }
    match default_grid {
        Some(grid) => Ok(grid.to_vec()),
        None => Err(usage("supply --p or --p-grid")),
    }
}

// ---------------------------------------------------------------------------
// Float formatting: 9 significant digits, fixed-point in the common range.
// ---------------------------------------------------------------------------

pub fn fmt9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

fn opt9(x: Option<f64>) -> String {
    x.map(fmt9).unwrap_or_default()
}

struct Csv {
    text: String,
    cols: usize,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            cols: header.len(),
        }
    }

    fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.cols, "ragged CSV row");
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    fn finish(self) -> String {
        self.text
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(
    ctx: &Ctx,
    scheme: Option<String>,
    q: Option<u32>,
    m: Option<usize>,
    l: Option<usize>,
) -> Result<(), CliError> {
    let scheme: String = ctx.require(scheme, "scheme")?;
    let report: VerifyReport = match scheme.as_str() {
        "inner" => {
            let q = prime(ctx.require(q, "q")?)?;
            let m = ctx.require(m, "m")?;
            verify_inner(q, m).map_err(|e| usage(e.to_string()))?
        }
        "embedding" => {
            let q = prime(ctx.require(q, "q")?)?;
            let m = ctx.require(m, "m")?;
            verify_embedding(q, m).map_err(|e| usage(e.to_string()))?
        }
        "sym" => {
            let q = prime(ctx.require(q, "q")?)?;
            let m = ctx.require(m, "m")?;
            let l = ctx.get_or(l, "l", 1)?;
            verify_symmetric(q, m, l).map_err(|e| usage(e.to_string()))?
        }
        "sym-binary" => {
            let m = ctx.require(m, "m")?;
            let l = ctx.get_or(l, "l", 2)?;
            verify_symmetric_binary(m, l).map_err(|e| usage(e.to_string()))?
        }
        "square" => {
            let q = prime(ctx.require(q, "q")?)?;
            let m = ctx.require(m, "m")?;
            let l = ctx.get_or(l, "l", 2)?;
            verify_square(q, m, l).map_err(|e| usage(e.to_string()))?
        }
        "entrywise" => verify_entrywise(),
        other => return Err(usage(format!("unknown scheme {other}"))),
    };
    let passed = report.checked - report.failures;
    if report.passed() {
        println!("{}/{} pass", passed, report.checked);
        Ok(())
    } else {
        println!(
            "{}/{} pass, {} fail",
            passed, report.checked, report.failures
        );
        Err(CliError::Failure(format!(
            "{}: {} of {} pairs decoded incorrectly",
            report.scheme, report.failures, report.checked
        )))
    }
}

fn prime(q: u32) -> Result<PrimeModulus, CliError> {
    PrimeModulus::new(q).map_err(|e| usage(e.to_string()))
}

// ---------------------------------------------------------------------------
// rates
// ---------------------------------------------------------------------------

fn build_named_model(
    ctx: &Ctx,
    name: &str,
    m: Option<usize>,
    epsilon: Option<f64>,
    p: f64,
    table: &Option<PathBuf>,
) -> Result<JointSourceModel, CliError> {
    let model = match name {
        "crosspaired" => JointSourceModel::cross_paired_dsbs(ctx.require(m, "m")?, p),
        "paired" => JointSourceModel::paired_dsbs(ctx.require(m, "m")?, p),
        "single" | "dsbs" => JointSourceModel::single_dsbs(p),
        "ternary" => {
            let eps = ctx.get_or(epsilon, "epsilon", 0.2)?;
            JointSourceModel::ternary_correlated(ctx.require(m, "m")?, eps, p)
        }
        "custom" => {
            let path: PathBuf = ctx.require(table.clone(), "table")?;
            let parsed = CustomTable::load(&path).map_err(|e| usage(e.to_string()))?;
            JointSourceModel::from_custom_table(&parsed)
        }
        other => return Err(usage(format!("unknown model {other}"))),
    };
    model.map_err(|e| usage(e.to_string()))
}

/// Hybrid rates where the graph is small enough to enumerate; None otherwise.
fn hybrid_rates(model: &JointSourceModel) -> (Option<HybridRateReport>, Option<HybridRateReport>) {
    if model.l() != 1 {
        return (None, None);
    }
    let sum = rate_km_or(model, SideInformation::ModuloSum).ok();
    let side_b = rate_km_or(model, SideInformation::SourceB).ok();
    (sum, side_b)
}

#[allow(clippy::too_many_arguments)]
fn cmd_rates(
    ctx: &Ctx,
    model: Option<String>,
    m: Option<usize>,
    p: Option<f64>,
    p_grid: Option<String>,
    epsilon: Option<f64>,
    table: Option<PathBuf>,
) -> Result<String, CliError> {
    let name: String = ctx.require(model, "model")?;
    let mut csv = Csv::new(&[
        "p",
        "r_sw",
        "r_km",
        "r_s",
        "r_sv",
        "r_km_or",
        "r_km_or_b",
        "gain",
    ]);
    let sweep = if name == "custom" {
        vec![f64::NAN] // placeholder; custom tables have no p parameter
    } else {
        p_values(ctx, p, p_grid, None)?
    };
    for &pv in &sweep {
        let model = build_named_model(
            ctx,
            &name,
            m,
            epsilon,
            if pv.is_nan() { 0.0 } else { pv },
            &table,
        )?;
        let report = RateReport::compute(&model).map_err(|e| usage(e.to_string()))?;
        let (or_sum, or_b) = hybrid_rates(&model);
        csv.row(&[
            if pv.is_nan() { String::new() } else { fmt9(pv) },
            fmt9(report.r_sw),
            opt9(report.r_km),
            opt9(report.r_s),
            opt9(report.r_sv),
            opt9(or_sum.map(|r| r.rate)),
            opt9(or_b.map(|r| r.rate)),
            opt9(report.gain),
        ]);
    }
    Ok(csv.finish())
}

// ---------------------------------------------------------------------------
// gain
// ---------------------------------------------------------------------------

fn cmd_gain(
    ctx: &Ctx,
    m: Option<usize>,
    p: Option<f64>,
    p_grid: Option<String>,
) -> Result<String, CliError> {
    let m: usize = ctx.require(m, "m")?;
    if m == 0 || m % 2 != 0 {
        return Err(usage(format!("m = {m} must be even and positive")));
    }
    let mut csv = Csv::new(&["p", "r_sw_closed", "r_km_closed", "eta"]);
    for &pv in &p_values(ctx, p, p_grid, None)? {
        csv.row(&[
            fmt9(pv),
            fmt9(cross_paired_sw_closed(m, pv)),
            fmt9(cross_paired_km_closed(m, pv)),
            fmt9(cross_paired_gain(m, pv)),
        ]);
    }
    Ok(csv.finish())
}

// ---------------------------------------------------------------------------
// figure
// ---------------------------------------------------------------------------

const FIG1_P: [f64; 14] = [
    0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 0.95, 0.99, 1.0,
];
const FIG1_M: [usize; 6] = [2, 4, 8, 16, 32, 64];
const FIG2_P: [f64; 18] = [
    0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95,
    0.99,
];
const FIG3_P: [f64; 15] = [
    1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.25, 0.5, 0.75, 0.9, 0.97, 0.99, 0.999, 0.9999,
];
const FIG3L_M: [usize; 3] = [2, 4, 8];
const FIG3R_M: [usize; 3] = [1, 2, 4];

fn cmd_figure(
    ctx: &Ctx,
    id: Option<String>,
    p_grid: Option<String>,
    epsilon: Option<f64>,
) -> Result<String, CliError> {
    let id: String = ctx.require(id, "id")?;
    match id.as_str() {
        "1" => {
            let ps = p_values(ctx, None, p_grid, Some(&FIG1_P))?;
            let mut csv = Csv::new(&["m", "p", "eta"]);
            for &m in &FIG1_M {
                for &p in &ps {
                    csv.row(&[m.to_string(), fmt9(p), fmt9(cross_paired_gain(m, p))]);
                }
            }
            Ok(csv.finish())
        }
        "2l" => {
            let ps = p_values(ctx, None, p_grid, Some(&FIG2_P))?;
            let mut csv = Csv::new(&[
                "p",
                "r_sw_closed",
                "r_sw",
                "r_km_closed",
                "r_km",
                "r_sv",
                "h_product",
            ]);
            for &p in &ps {
                let model =
                    JointSourceModel::cross_paired_dsbs(2, p).map_err(|e| usage(e.to_string()))?;
                let err = |e: entropy::EntropyError| usage(e.to_string());
                csv.row(&[
                    fmt9(p),
                    fmt9(cross_paired_sw_closed(2, p)),
                    fmt9(entropy::rate_sw(&model).map_err(err)?),
                    fmt9(cross_paired_km_closed(2, p)),
                    fmt9(entropy::rate_km_inner(&model).map_err(err)?),
                    fmt9(entropy::rate_sv(&model).map_err(err)?),
                    fmt9(entropy::product_entropy(&model).map_err(err)?),
                ]);
            }
            Ok(csv.finish())
        }
        "2m" | "2r" => {
            let ps = p_values(ctx, None, p_grid, Some(&FIG2_P))?;
            let mut csv = Csv::new(&["p", "r_sw", "r_s", "r_km_or", "r_km_or_b", "h_product"]);
            for &p in &ps {
                let model = if id == "2m" {
                    JointSourceModel::single_dsbs(p)
                } else {
                    JointSourceModel::paired_dsbs(2, p)
                }
                .map_err(|e| usage(e.to_string()))?;
                let err = |e: entropy::EntropyError| usage(e.to_string());
                let or_sum = rate_km_or(&model, SideInformation::ModuloSum)?;
                let or_b = rate_km_or(&model, SideInformation::SourceB)?;
                csv.row(&[
                    fmt9(p),
                    fmt9(entropy::rate_sw(&model).map_err(err)?),
                    fmt9(entropy::rate_s_entrywise(&model).map_err(err)?),
                    fmt9(or_sum.rate),
                    fmt9(or_b.rate),
                    fmt9(entropy::product_entropy(&model).map_err(err)?),
                ]);
            }
            Ok(csv.finish())
        }
        "3l" => {
            // constrained binary matrix scheme, square A, B in F_2^{m x m}
            let ps = p_values(ctx, None, p_grid, Some(&FIG3_P))?;
            let mut csv = Csv::new(&["m", "p", "r_sw_closed", "r_km_closed", "eta"]);
            for &m in &FIG3L_M {
                for &p in &ps {
                    let sw = constrained_binary_sw_closed(m, m, p);
                    let km = constrained_binary_km_closed(m, m, p);
                    let eta = if km > 0.0 { sw / km } else { f64::INFINITY };
                    csv.row(&[m.to_string(), fmt9(p), fmt9(sw), fmt9(km), fmt9(eta)]);
                }
            }
            Ok(csv.finish())
        }
        "3r" => {
            let ps = p_values(ctx, None, p_grid, Some(&FIG3_P))?;
            let eps = ctx.get_or(epsilon, "epsilon", 0.2)?;
            let mut csv = Csv::new(&["m", "p", "r_sw_closed", "r_sw", "r_km", "r_km_bound", "eta"]);
            for &m in &FIG3R_M {
                for &p in &ps {
                    let model = JointSourceModel::ternary_correlated(m, eps, p)
                        .map_err(|e| usage(e.to_string()))?;
                    let err = |e: entropy::EntropyError| usage(e.to_string());
                    let sw = entropy::rate_sw(&model).map_err(err)?;
                    let km = entropy::rate_km_square(&model).map_err(err)?;
                    let eta = if km > 0.0 { sw / km } else { f64::INFINITY };
                    csv.row(&[
                        m.to_string(),
                        fmt9(p),
                        fmt9(ternary_sw_closed(m, eps, p)),
                        fmt9(sw),
                        fmt9(km),
                        fmt9(ternary_km_bound(m, eps, p)),
                        fmt9(eta),
                    ]);
                }
            }
            Ok(csv.finish())
        }
        other => Err(usage(format!(
            "unknown figure id {other} (use 1, 2l, 2m, 2r, 3l, 3r)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    ctx: &Ctx,
    n: Option<usize>,
    k: Option<usize>,
    p: Option<f64>,
    trials: Option<u64>,
    seed: Option<u64>,
    model: Option<String>,
    m: Option<usize>,
) -> Result<String, CliError> {
    let n: usize = ctx.require(n, "n")?;
    let k: usize = ctx.require(k, "k")?;
    let trials: u64 = ctx.get_or(trials, "trials", 1000)?;
    let seed: u64 = ctx.get_or(seed, "seed", 0)?;
    let model_name: String = ctx.get_or(model, "model", "symbol".to_string())?;
    let report: TrialReport = match model_name.as_str() {
        "symbol" => {
            let p = check_p(ctx.require(p, "p")?)?;
            let symbol = SymbolModel::bernoulli(p).map_err(|e| usage(e.to_string()))?;
            run_trials(&symbol, n, k, trials, seed).map_err(|e| usage(e.to_string()))?
        }
        "crosspaired" => {
            let p = check_p(ctx.require(p, "p")?)?;
            let mm = ctx.get_or(m, "m", 2)?;
            let source =
                JointSourceModel::cross_paired_dsbs(mm, p).map_err(|e| usage(e.to_string()))?;
            let report =
                run_joint_trials(&source, n, k, trials, seed).map_err(|e| usage(e.to_string()))?;
            eprintln!(
                "note: stacked-message coordinates are decoded independently \
                 against their exact marginals; a joint decoder could only do better"
            );
            report
        }
        other => return Err(usage(format!("unknown simulate model {other}"))),
    };
    eprintln!(
        "{} trials in {:.2?}: {} block errors (rate {:.4})",
        report.trials, report.elapsed, report.decode_errors, report.empirical_error_rate
    );
    let mut csv = Csv::new(&["n", "k", "q", "trials", "errors", "error_rate"]);
    csv.row(&[
        report.n.to_string(),
        report.k.to_string(),
        report.q.to_string(),
        report.trials.to_string(),
        report.decode_errors.to_string(),
        fmt9(report.empirical_error_rate),
    ]);
    Ok(csv.finish())
}

// ---------------------------------------------------------------------------
// graph-entropy
// ---------------------------------------------------------------------------

fn cmd_graph_entropy(
    ctx: &Ctx,
    model: Option<String>,
    m: Option<usize>,
    p: Option<f64>,
) -> Result<String, CliError> {
    let name: String = ctx.get_or(model, "model", "dsbs".to_string())?;
    let p = check_p(ctx.require(p, "p")?)?;
    let source = match name.as_str() {
        "dsbs" | "single" => JointSourceModel::single_dsbs(p),
        "paired" => JointSourceModel::paired_dsbs(ctx.get_or(m, "m", 2)?, p),
        "crosspaired" => JointSourceModel::cross_paired_dsbs(ctx.get_or(m, "m", 2)?, p),
        other => return Err(usage(format!("unknown model {other}"))),
    }
    .map_err(|e| usage(e.to_string()))?;
    let mut csv = Csv::new(&[
        "model",
        "m",
        "p",
        "variant",
        "h_side",
        "h_graph",
        "h_cond_bound",
        "rate",
        "converged",
    ]);
    for (variant, label) in [
        (SideInformation::ModuloSum, "km-or"),
        (SideInformation::SourceB, "side-b"),
    ] {
        let r = rate_km_or(&source, variant)?;
        csv.row(&[
            name.clone(),
            source.m().to_string(),
            fmt9(p),
            label.to_string(),
            fmt9(r.h_side),
            fmt9(r.h_graph),
            fmt9(r.h_conditional),
            fmt9(r.rate),
            r.converged.to_string(),
        ]);
    }
    Ok(csv.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt9_has_nine_significant_digits() {
        assert_eq!(fmt9(2.0), "2.00000000");
        assert_eq!(fmt9(0.0), "0.00000000");
        assert_eq!(fmt9(0.4689955935892812), "0.468995594");
        assert_eq!(fmt9(37.697), "37.6970000");
        assert_eq!(fmt9(1234567890.0), "1.23456789e9");
    }

    #[test]
    fn p_grid_parsing() {
        let grid = parse_p_grid("0.1:0.9:5").unwrap();
        assert_eq!(grid.len(), 5);
        assert!((grid[0] - 0.1).abs() < 1e-15);
        assert!((grid[4] - 0.9).abs() < 1e-15);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(parse_p_grid("0:0.9:5").is_err());
        assert!(parse_p_grid("0.5:0.4:5").is_err());
        assert!(parse_p_grid("0.1:0.9").is_err());
    }

    #[test]
    fn config_parsing_and_precedence() {
        let dir = std::env::temp_dir().join("distmm-cli-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg");
        std::fs::write(&path, "# comment\nm = 4\np = 0.25\n").unwrap();
        let ctx = Ctx {
            cfg: load_config(&path).unwrap(),
        };
        // flag wins over config
        assert_eq!(ctx.get(Some(2usize), "m").unwrap(), Some(2));
        // config fills missing flags
        assert_eq!(ctx.get::<usize>(None, "m").unwrap(), Some(4));
        assert_eq!(ctx.get::<f64>(None, "p").unwrap(), Some(0.25));
        // absent everywhere
        assert_eq!(ctx.get::<u64>(None, "seed").unwrap(), None);
    }
}

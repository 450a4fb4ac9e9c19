//! Command-line runner: one subcommand per experiment, results as CSV plus a
//! JSON sidecar holding the configuration, diagnostics and a timestamp.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical failure (rows
//! computed before the failure are still written).

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::action::{action_value, minimize_numerical, minimizer_closed_form, BoundaryConstraints};
use crate::diffeo::{cross_ratio, random_smooth, GridDiffeo};
use crate::error::{Error, Result};
use crate::holder::{cocycle_residual, equivalence_scan, holder_report, rough_profile, sandwich_check, scaled_family};
use crate::inequalities::appendix_suite;
use crate::mobius::{mobius_post_compose, random_mobius};
use crate::rng::{stream_id, stream_rng};
use crate::sampler::{concentration_experiment, holder_tail_scan, ldp_rate_table, WeightedSample};
use crate::specfun::{kernel_expansion_check, kernel_grid, moment_integral, partition_function, exp_moment_series, QuadratureSpec};

#[derive(Debug, Parser)]
#[command(name = "schwarzian", version, about = "Schwarzian field theory experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// CSV destination; the sidecar goes next to it with a `.json` extension.
    /// Without it the CSV is written to stdout and no sidecar is produced.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Cocycle, sandwich, kernel expansion, partition function, Möbius
    /// invariance and the elementary inequalities; PASS/FAIL per check.
    VerifyIdentities(VerifyArgs),
    /// Closed form and quadrature of the partition function.
    PartitionFunction(PartitionArgs),
    /// Cross-ratio moments and, optionally, exponential moments.
    Moments(MomentArgs),
    /// Constrained minimizer in closed form and by iteration.
    Minimize(MinimizeArgs),
    /// Both Hölder constants for a diffeomorphism or a scaled rough family.
    HolderScan(HolderScanArgs),
    /// Weighted draws from the pushforward measure.
    Sample(SampleArgs),
    /// Large-deviation table around a centre.
    LdpRate(LdpArgs),
    /// Weighted mean distance to the identity after gauge fixing.
    Concentrate(ConcentrateArgs),
    /// Weighted fraction of samples outside a Hölder class.
    HolderTail(HolderTailArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Grid size for the diffeomorphism checks.
    #[arg(long, default_value_t = 8192)]
    pub n: usize,
    /// Random configurations per randomized check.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PartitionArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0, 4.0])]
    pub sigma2: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentArgs {
    /// Arc length `Δ` of the cross-ratio observable.
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Highest moment order.
    #[arg(long, default_value_t = 4)]
    pub l_max: u32,
    /// Exponential-moment arguments `z`.
    #[arg(long, value_delimiter = ',')]
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MinimizeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub t1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub t2: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub p1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub p2: f64,
    #[arg(long)]
    pub q1: f64,
    #[arg(long)]
    pub q2: f64,
    /// Cells on `[t1, t2]`.
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Gradient-norm tolerance of the iterative minimizer.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HolderScanArgs {
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    /// Diffeomorphism as JSON `{"n", "theta", "xi"}`; without it a rough
    /// profile is scaled by each of `--scales`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Regularity exponent of the generated rough profile.
    #[arg(long, default_value_t = 0.75)]
    pub hurst: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625])]
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LdpArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.25, 0.125])]
    pub sigma2: Vec<f64>,
    /// Sup-norm radius of the ball around the centre.
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    /// Centre as diffeomorphism JSON (default: identity on `--n` cells).
    #[arg(long)]
    pub center: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConcentrateArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 0.49, 0.25])]
    pub sigma2: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HolderTailArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.64])]
    pub sigma2: Vec<f64>,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    /// Hölder-class thresholds `M`.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 40.0])]
    pub m: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

/// Echo of one invocation, written to the sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub subcommand: String,
    pub params: Value,
    pub seed: u64,
    pub workers: Option<usize>,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let (subcommand, params) = match serde_json::to_value(&cli.command) {
            Ok(Value::Object(map)) => map.into_iter().next().unwrap_or((String::new(), Value::Null)),
            _ => (String::new(), Value::Null),
        };
        Self {
            subcommand,
            params,
            seed: cli.seed,
            workers: cli.workers,
            output_path: cli.out.clone(),
        }
    }
}

/// Rows produced so far, diagnostics for the sidecar, and the first error.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    diagnostics: Value,
    failed_checks: usize,
    error: Option<Error>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
            diagnostics: Value::Null,
            failed_checks: 0,
            error: None,
        }
    }
}

/// Seventeen significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn load_diffeo(path: &Path) -> Result<GridDiffeo> {
    Ok(serde_json::from_reader(std::fs::File::open(path)?)?)
}

/// Runs `body` for each item, stopping at the first error but keeping the
/// rows already produced.
fn each<T>(table: &mut Table, items: &[T], mut body: impl FnMut(&T, &mut Table) -> Result<()>) {
    for item in items {
        if let Err(e) = body(item, table) {
            table.error = Some(e);
            return;
        }
    }
}

fn verify(args: &VerifyArgs, seed: u64) -> Result<Table> {
    let mut t = Table::new(&["check", "worst", "tolerance", "passed"]);
    let mut checks: Vec<(String, f64, f64)> = Vec::new();
    let n = args.n;

    let id = GridDiffeo::identity(n);
    checks.push(("cocycle identity".into(), cocycle_residual(&id, [0.05, 0.3, 0.55, 0.8])?, 1e-12));

    let mut cocycle = 0.0f64;
    let mut sandwich = 0.0f64;
    for i in 0..args.samples as u64 {
        let mut rng = stream_rng(seed, stream_id(11, i));
        let d = random_smooth(&mut rng, n, 4, 0.4)?;
        let mut pts: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
        pts.sort_by(f64::total_cmp);
        cocycle = cocycle.max(cocycle_residual(&d, [pts[0], pts[1], pts[2], pts[3]])?);
        if !sandwich_check(&d, [pts[0], pts[1], pts[2], pts[3], pts[4]])?.holds {
            sandwich += 1.0;
        }
    }
    checks.push(("cocycle random".into(), cocycle, 1e-7));
    checks.push(("sandwich violations".into(), sandwich, 0.0));

    let spec = QuadratureSpec::default();
    let mut kernel = 0.0f64;
    for (k, beta, z) in kernel_grid() {
        kernel = kernel.max(kernel_expansion_check(k, beta, z, &spec)?.residual());
    }
    checks.push(("kernel expansion".into(), kernel, 1e-6));

    let mut partition = 0.0f64;
    for s2 in [0.5, 1.0, 2.0, 4.0] {
        partition = partition.max(partition_function(s2, &spec)?.rel_diff());
    }
    checks.push(("partition function".into(), partition, 1e-8));

    let mut action_gap = 0.0f64;
    let mut cross_gap = 0.0f64;
    for i in 0..args.samples as u64 {
        let mut rng = stream_rng(seed, stream_id(12, i));
        let d = random_smooth(&mut rng, n, 4, 0.4)?;
        let m = random_mobius(&mut rng, 0.5);
        let moved = mobius_post_compose(&m, &d);
        action_gap = action_gap.max((action_value(&moved) - action_value(&d)).abs());
        let (s, u) = (rng.random::<f64>(), rng.random::<f64>());
        if let (Ok(a), Ok(b)) = (cross_ratio(&d, s, u), cross_ratio(&moved, s, u)) {
            cross_gap = cross_gap.max((a - b).abs() / a.abs());
        }
    }
    checks.push(("action invariance".into(), action_gap, 1e-5));
    checks.push(("cross-ratio invariance".into(), cross_gap, 1e-8));

    for r in appendix_suite(seed)? {
        checks.push((r.name.clone(), r.violations as f64, 0.0));
    }

    for (name, worst, tol) in checks {
        let passed = worst <= tol;
        eprintln!("{} {name}: {worst:.3e} (tolerance {tol:.1e})", if passed { "PASS" } else { "FAIL" });
        if !passed {
            t.failed_checks += 1;
        }
        t.rows.push(vec![name, num(worst), num(tol), passed.to_string()]);
    }
    Ok(t)
}

fn execute(command: &Command, seed: u64) -> Result<Table> {
    let spec = QuadratureSpec::default();
    match command {
        Command::VerifyIdentities(a) => verify(a, seed),
        Command::PartitionFunction(a) => {
            let mut t = Table::new(&["sigma2", "log_closed_form", "log_quadrature", "closed_form", "quadrature", "rel_diff", "tail_bound"]);
            each(&mut t, &a.sigma2, |&s2, t| {
                let z = partition_function(s2, &spec)?;
                t.rows.push(vec![
                    num(s2),
                    num(z.log_closed_form()),
                    num(z.log_quadrature()),
                    num(z.log_closed_form().exp()),
                    num(z.log_quadrature().exp()),
                    num(z.rel_diff()),
                    num(z.tail_bound),
                ]);
                Ok(())
            });
            Ok(t)
        }
        Command::Moments(a) => {
            let mut t = Table::new(&["kind", "parameter", "value", "log_value", "error_estimate"]);
            let orders: Vec<u32> = (1..=a.l_max).collect();
            each(&mut t, &orders, |&l, t| {
                let m = moment_integral(l, a.delta, a.sigma2, &spec)?;
                t.rows.push(vec!["moment".into(), l.to_string(), num(m.value), num(m.log_value), num(m.error_estimate)]);
                Ok(())
            });
            if t.error.is_none() {
                each(&mut t, &a.z, |&z, t| {
                    let e = exp_moment_series(z, a.delta, a.sigma2, &spec)?;
                    t.rows.push(vec!["exp-moment".into(), num(z), num(e.value), num(e.log_value), num(e.last_term * e.value.abs())]);
                    Ok(())
                });
            }
            Ok(t)
        }
        Command::Minimize(a) => {
            let c = BoundaryConstraints::new(a.t1, a.t2, a.p1, a.p2, a.q1, a.q2)?;
            let (sol, seg) = minimizer_closed_form(&c, a.n)?;
            let mut t = Table::new(&["regime", "lambda", "kappa", "action_closed_form", "action_numerical", "log_derivative_distance", "iterations"]);
            let mut diag = json!({ "regime": sol.regime, "lambda": sol.lambda, "kappa": sol.kappa, "mobius": sol.mobius });
            match minimize_numerical(&c, a.n, a.max_iter, a.tol) {
                Ok(nm) => {
                    t.rows.push(vec![
                        sol.regime.to_string(),
                        num(sol.lambda),
                        num(sol.kappa),
                        num(seg.action()),
                        num(nm.profile.action()),
                        num(seg.log_derivative_distance(&nm.profile)),
                        nm.iterations.to_string(),
                    ]);
                    diag["grad_norm"] = json!(nm.grad_norm);
                }
                Err(e) => {
                    t.rows.push(vec![sol.regime.to_string(), num(sol.lambda), num(sol.kappa), num(seg.action()), String::new(), String::new(), String::new()]);
                    t.error = Some(e);
                }
            }
            t.diagnostics = diag;
            Ok(t)
        }
        Command::HolderScan(a) => {
            let mut t = Table::new(&["scale", "alpha", "k_cross", "c_classical", "pair_count", "cross_s", "cross_t", "classical_s", "classical_t"]);
            let row = |scale: f64, r: &crate::holder::HolderReport| {
                vec![
                    num(scale),
                    num(r.alpha),
                    num(r.k_cross),
                    num(r.c_classical),
                    r.pair_count.to_string(),
                    num(r.cross_pair.0),
                    num(r.cross_pair.1),
                    num(r.classical_pair.0),
                    num(r.classical_pair.1),
                ]
            };
            if let Some(path) = &a.input {
                let r = holder_report(&load_diffeo(path)?, a.alpha)?;
                t.rows.push(row(1.0, &r));
                t.diagnostics = json!({ "report": r });
            } else {
                let family = scaled_family(&rough_profile(a.n, a.hurst, seed), &a.scales)?;
                let scan = equivalence_scan(&family, a.alpha)?;
                for (s, r) in a.scales.iter().zip(&scan.reports) {
                    t.rows.push(row(*s, r));
                }
                t.diagnostics = json!({ "reports": scan.reports, "rank_correlation": scan.rank_correlation, "monotone": scan.monotone });
            }
            Ok(t)
        }
        Command::Sample(a) => {
            let sigma = a.sigma2.sqrt();
            let mut t = Table::new(&["index", "stream", "theta", "log_weight", "derivative_energy", "xi_sup"]);
            let idx: Vec<u64> = (0..a.samples as u64).collect();
            each(&mut t, &idx, |&i, t| {
                let s = WeightedSample::draw(sigma, a.n, seed, stream_id(1, i))?;
                let sup = s.diffeo.xi().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                t.rows.push(vec![
                    i.to_string(),
                    s.stream.to_string(),
                    num(s.diffeo.theta()),
                    num(s.log_weight),
                    num(s.diffeo.derivative_energy()),
                    num(sup),
                ]);
                Ok(())
            });
            t.diagnostics = json!({ "bridge_mass": crate::sampler::bridge_mass(sigma) });
            Ok(t)
        }
        Command::LdpRate(a) => {
            let center = match &a.center {
                Some(p) => load_diffeo(p)?,
                None => GridDiffeo::identity(a.n),
            };
            let rows = ldp_rate_table(&center, a.radius, &a.sigma2, a.samples, seed)?;
            let mut t = Table::new(&["sigma2", "log_mass_estimate", "rate_prediction", "gap", "std_error", "effective_samples", "inside", "unreliable"]);
            for r in &rows {
                t.rows.push(vec![
                    num(r.sigma2),
                    num(r.log_mass_estimate),
                    num(r.rate_prediction),
                    num(r.gap()),
                    num(r.std_error),
                    num(r.effective_samples),
                    r.inside.to_string(),
                    r.unreliable.to_string(),
                ]);
            }
            t.diagnostics = json!({ "two_pi_squared": 2.0 * PI * PI });
            Ok(t)
        }
        Command::Concentrate(a) => {
            let sigmas: Vec<f64> = a.sigma2.iter().map(|s| s.sqrt()).collect();
            let rows = concentration_experiment(&sigmas, a.n, a.samples, seed)?;
            let mut t = Table::new(&["sigma", "mean_distance", "effective_samples", "max_weight_ratio", "unreliable"]);
            for r in &rows {
                t.rows.push(vec![num(r.sigma), num(r.mean_distance), num(r.effective_samples), num(r.max_weight_ratio), r.unreliable.to_string()]);
            }
            Ok(t)
        }
        Command::HolderTail(a) => {
            let mut t = Table::new(&["sigma", "alpha", "m", "fraction", "effective_samples", "unreliable"]);
            each(&mut t, &a.sigma2, |&s2, t| {
                for r in holder_tail_scan(s2.sqrt(), a.alpha, &a.m, a.n, a.samples, seed)? {
                    t.rows.push(vec![num(r.sigma), num(r.alpha), num(r.m), num(r.fraction), num(r.effective_samples), r.unreliable.to_string()]);
                }
                Ok(())
            });
            Ok(t)
        }
    }
}

fn write_csv(table: &Table, sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn emit(config: &ExperimentConfig, table: &Table, status: &str) -> Result<()> {
    match &config.output_path {
        Some(path) => {
            write_csv(table, std::fs::File::create(path)?)?;
            let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            let sidecar = json!({
                "config": config,
                "status": status,
                "error": table.error.as_ref().map(|e| e.to_string()),
                "failed_checks": table.failed_checks,
                "diagnostics": table.diagnostics,
                "timestamp_unix": stamp,
            });
            let file = std::fs::File::create(path.with_extension("json"))?;
            serde_json::to_writer_pretty(file, &sidecar)?;
        }
        None => write_csv(table, std::io::stdout().lock())?,
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

/// Executes a parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let config = ExperimentConfig::from_cli(&cli);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            return 2;
        }
        pool = pool.num_threads(w);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let table = match pool.install(|| execute(&cli.command, cli.seed)) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            if code == 3 {
                let mut t = Table::new(&[]);
                t.error = Some(e);
                let _ = emit(&config, &t, "numerical-failure");
            }
            return code;
        }
    };
    let (status, code) = match (&table.error, table.failed_checks) {
        (Some(e), _) => {
            eprintln!("error: {e}");
            (if e.is_numerical() { "numerical-failure" } else { "invalid" }, exit_code(e))
        }
        (None, 0) => ("ok", 0),
        (None, _) => ("checks-failed", 3),
    };
    if let Err(e) = emit(&config, &table, status) {
        eprintln!("error: {e}");
        return 2;
    }
    code
}

/// Parses `args` (including the program name) and runs.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use ultraspherical::harmonic::{cz_certify, cz_certify_scaling, CertifyOptions, CzConstants, KernelMatrix};
use ultraspherical::harness::{self, RunConfig, SuiteReport};
use ultraspherical::hypergroup::{translate, FiniteSeq};
use ultraspherical::semigroup::{
    g_function, heat_apply, heat_kernel_row, heat_time_derivative, maximal, poisson_apply, poisson_time_derivative,
    HeatRoute, PoissonRoute, SemigroupKernel, SemigroupKernelKind, SemigroupKind, TimeGrid,
};
use ultraspherical::transplant::{build_kernel_matrix, Parity};
use ultraspherical::OrderParam;

/// Environment variable read when `--threads` is absent.
const THREADS_ENV: &str = "ULTRASPHERICAL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "ultra", version, about = "Discrete ultraspherical harmonic analysis and its verification suite")]
struct Cli {
    /// Seed for random test sequences.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (falls back to $ULTRASPHERICAL_THREADS).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Output file; CSV and JSON go to stdout when omitted (verify writes nothing).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Semigroup kernel h_t or p_t (or a time derivative) as a sequence, or its translation matrix.
    Kernel(KernelArgs),
    /// Apply W_t or P_t (or ∂_t^k) to a sequence read from CSV.
    Evolve(EvolveArgs),
    /// Littlewood–Paley g-function or semigroup maximal function of a sequence.
    Gfunction(GfunctionArgs),
    /// Export the transplantation kernel or apply it to a sequence.
    Transplant(TransplantArgs),
    /// Fit Calderón–Zygmund constants of a kernel and write them as JSON.
    Certify(CertifyArgs),
    /// Run the acceptance suite and write the JSON report.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Semigroup {
    Heat,
    Poisson,
}

impl From<Semigroup> for SemigroupKind {
    fn from(s: Semigroup) -> Self {
        match s {
            Semigroup::Heat => SemigroupKind::Heat,
            Semigroup::Poisson => SemigroupKind::Poisson,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Route {
    /// Hypergroup convolution (subordination for Poisson).
    Convolution,
    Spectral,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ParityArg {
    Even,
    Odd,
    Full,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
            ParityArg::Full => Parity::Full,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KernelKind {
    /// Heat kernel, sup over t.
    Heat,
    /// t∂_t h_t in L²(dt/t).
    HeatPsi,
    /// t∂_t p_t in L²(dt/t).
    PoissonDeriv,
    /// Transplantation kernel K_{λ,μ}.
    Transplant,
    /// Kernel read from a CSV file with rows n,m,value.
    File,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long, value_enum, default_value = "heat")]
    semigroup: Semigroup,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    t: f64,
    /// Largest index written.
    #[arg(long, default_value_t = 64)]
    size: usize,
    /// Order of the time derivative.
    #[arg(long, default_value_t = 0)]
    deriv: usize,
    /// Write the matrix K_t(n,m) = τ_n k_t(m) instead of the sequence k_t.
    #[arg(long)]
    matrix: bool,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[arg(long, value_enum, default_value = "heat")]
    semigroup: Semigroup,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    t: f64,
    /// Input sequence (CSV rows index,value).
    #[arg(long)]
    input: PathBuf,
    /// Largest output index; defaults to a length that captures the tail.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    deriv: usize,
    #[arg(long, value_enum, default_value = "convolution")]
    route: Route,
}

#[derive(Args, Debug)]
struct GfunctionArgs {
    #[arg(long, value_enum, default_value = "heat")]
    semigroup: Semigroup,
    #[arg(long)]
    lambda: f64,
    /// Derivative order k ≥ 1 of g^k.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Time grid min,max,points-per-decade.
    #[arg(long, default_value = "1e-8,1e8,20")]
    t_grid: String,
    /// Compute sup_t |T_t f| instead of g^k.
    #[arg(long)]
    maximal: bool,
}

#[derive(Args, Debug)]
struct TransplantArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = 64)]
    size: usize,
    #[arg(long, value_enum, default_value = "full")]
    parity: ParityArg,
    /// Apply the kernel to this sequence instead of exporting the matrix.
    #[arg(long)]
    apply: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long, value_enum)]
    kernel: KernelKind,
    #[arg(long, default_value_t = 256)]
    size: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Second order for the transplantation kernel.
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, value_enum, default_value = "full")]
    parity: ParityArg,
    #[arg(long, default_value = "1e-2,1e7,4")]
    t_grid: String,
    /// Kernel CSV for --kernel file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Also certify at 2N and report the relative drift of every constant.
    #[arg(long)]
    scaling: bool,
    /// Largest |n−m| offset in the regularity scan.
    #[arg(long, default_value_t = 8)]
    max_offset: usize,
    /// Random ±1 patterns per interval in the Hörmander scan.
    #[arg(long, default_value_t = 8)]
    random_sequences: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run only these check ids (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Run configuration as JSON; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Tolerance override `id=value` (repeatable).
    #[arg(long = "tolerance", value_parser = parse_override)]
    tolerances: Vec<(String, f64)>,
    /// Leave runtimes at zero so repeated runs give byte-identical reports.
    #[arg(long)]
    no_runtime: bool,
    /// Print the registered checks and exit.
    #[arg(long)]
    list: bool,
}

fn parse_override(s: &str) -> std::result::Result<(String, f64), String> {
    let (id, v) = s.split_once('=').ok_or_else(|| format!("expected id=value, got {s:?}"))?;
    let v: f64 = v.parse().map_err(|_| format!("bad tolerance value {v:?}"))?;
    Ok((id.to_string(), v))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns `false` when a verification ran and something failed.
fn run(cli: Cli) -> Result<bool> {
    if cli.threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    if let Command::Verify(args) = &cli.command {
        return verify(&cli, args);
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Kernel(a) => kernel(a, out),
        Command::Evolve(a) => evolve(a, out),
        Command::Gfunction(a) => gfunction(a, out),
        Command::Transplant(a) => transplant(a, out),
        Command::Certify(a) => certify(a, cli.seed, out),
        Command::Verify(_) => unreachable!(),
    }?;
    Ok(true)
}

fn order(value: f64, flag: &str) -> Result<OrderParam> {
    OrderParam::new(value).with_context(|| format!("--{flag} {value}"))
}

fn read_seq(path: &Path) -> Result<FiniteSeq> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    FiniteSeq::read_csv(f).with_context(|| format!("reading {}", path.display()))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_seq(seq: &FiniteSeq, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    seq.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_matrix(k: &KernelMatrix, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => k.write_csv(p).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut w = io::stdout().lock();
            writeln!(w, "n,m,value")?;
            for n in 0..=k.size() {
                for m in 0..=k.size() {
                    writeln!(w, "{n},{m},{:e}", k.get(n, m))?;
                }
            }
            Ok(())
        }
    }
}

fn write_json(v: &Value, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn evolve_seq(kind: Semigroup, l: OrderParam, t: f64, deriv: usize, route: Route, f: &FiniteSeq, n_out: Option<usize>) -> Result<FiniteSeq> {
    Ok(match (kind, deriv) {
        (Semigroup::Heat, 0) => {
            let r = match route {
                Route::Convolution => HeatRoute::Convolution,
                Route::Spectral => HeatRoute::Spectral,
            };
            heat_apply(l, t, f, r, n_out)?
        }
        (Semigroup::Heat, k) => heat_time_derivative(l, t, k, f, n_out)?,
        (Semigroup::Poisson, 0) => {
            let r = match route {
                Route::Convolution => PoissonRoute::Subordination,
                Route::Spectral => PoissonRoute::Spectral,
            };
            poisson_apply(l, t, f, r, n_out)?
        }
        (Semigroup::Poisson, k) => poisson_time_derivative(l, t, k, f, n_out)?,
    })
}

fn kernel(a: &KernelArgs, out: Option<&Path>) -> Result<()> {
    let l = order(a.lambda, "lambda")?;
    let row = if matches!(a.semigroup, Semigroup::Heat) && a.deriv == 0 {
        FiniteSeq::new(heat_kernel_row(l, a.t, 2 * a.size)?)
    } else {
        evolve_seq(a.semigroup, l, a.t, a.deriv, Route::Convolution, &FiniteSeq::delta(0), Some(2 * a.size))?
    };
    if a.matrix {
        let rows: Vec<FiniteSeq> = (0..=a.size).map(|n| translate(l, n, &row)).collect();
        let name = match a.semigroup {
            Semigroup::Heat => "heat",
            Semigroup::Poisson => "poisson",
        };
        let k = KernelMatrix::from_fn(a.size, name, |n, m| rows[n].get(m))
            .with_parameter("lambda", a.lambda)
            .with_parameter("t", a.t);
        write_matrix(&k, out)
    } else {
        write_seq(&row.truncated(a.size), out)
    }
}

fn evolve(a: &EvolveArgs, out: Option<&Path>) -> Result<()> {
    let l = order(a.lambda, "lambda")?;
    let f = read_seq(&a.input)?;
    write_seq(&evolve_seq(a.semigroup, l, a.t, a.deriv, a.route, &f, a.size)?, out)
}

fn gfunction(a: &GfunctionArgs, out: Option<&Path>) -> Result<()> {
    let l = order(a.lambda, "lambda")?;
    let f = read_seq(&a.input)?;
    let grid = TimeGrid::parse(&a.t_grid)?;
    let values = if a.maximal {
        maximal(a.semigroup.into(), l, &f, &grid, a.size)?.values
    } else {
        let g = g_function(a.semigroup.into(), l, a.k, &f, &grid, a.size)?;
        eprintln!("converged at {} points per decade (relative change {:.2e})", g.points_per_decade, g.relative_change);
        g.values
    };
    write_seq(&values, out)
}

fn transplant(a: &TransplantArgs, out: Option<&Path>) -> Result<()> {
    let k = build_kernel_matrix(order(a.lambda, "lambda")?, order(a.mu, "mu")?, a.size, a.parity.into())?;
    match &a.apply {
        Some(path) => write_seq(&k.matrix().apply(&read_seq(path)?), out),
        None => write_matrix(k.matrix(), out),
    }
}

fn real(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("NaN")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn constants_json(c: &CzConstants) -> Value {
    let mut m: Map<String, Value> = c.named().into_iter().map(|(k, v)| (k, real(v))).collect();
    m.insert("size".into(), json!(c.size));
    m.insert("rows_scanned".into(), json!(c.rows_scanned));
    m.insert("intervals_scanned".into(), json!(c.intervals_scanned));
    Value::Object(m)
}

fn certify(a: &CertifyArgs, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let opts = CertifyOptions {
        max_offset: a.max_offset,
        random_sequences: a.random_sequences,
        seed: seed.unwrap_or(CertifyOptions::default().seed),
    };
    let grid = TimeGrid::parse(&a.t_grid)?;
    let l = order(a.lambda, "lambda")?;
    let semigroup = match a.kernel {
        KernelKind::Heat => Some(SemigroupKernelKind::Heat),
        KernelKind::HeatPsi => Some(SemigroupKernelKind::HeatPsi),
        KernelKind::PoissonDeriv => Some(SemigroupKernelKind::PoissonPsi),
        _ => None,
    };
    let mut params = Map::new();
    params.insert("kernel".into(), json!(format!("{:?}", a.kernel).to_lowercase()));
    params.insert("size".into(), json!(a.size));
    params.insert("seed".into(), json!(opts.seed));
    params.insert("max_offset".into(), json!(opts.max_offset));
    params.insert("random_sequences".into(), json!(opts.random_sequences));

    let (small, scaling) = if let Some(kind) = semigroup {
        params.insert("lambda".into(), json!(a.lambda));
        params.insert("t_grid".into(), json!(a.t_grid));
        run_certify(|n| Ok(SemigroupKernel::new(kind, l, n, &grid)?), a, &opts)?
    } else if let KernelKind::Transplant = a.kernel {
        let mu = order(a.mu.context("--kernel transplant needs --mu")?, "mu")?;
        let parity: Parity = a.parity.into();
        params.insert("lambda".into(), json!(a.lambda));
        params.insert("mu".into(), json!(mu.value()));
        params.insert("parity".into(), json!(parity.name()));
        run_certify(|n| Ok(build_kernel_matrix(l, mu, n, parity)?.into_matrix()), a, &opts)?
    } else {
        let path = a.file.as_deref().context("--kernel file needs --file")?;
        if a.scaling {
            bail!("--scaling needs a kernel family, not a file");
        }
        let k = KernelMatrix::read_csv(path)?;
        params.insert("file".into(), json!(path.display().to_string()));
        params.insert("size".into(), json!(k.size()));
        (cz_certify(&k, &opts)?, None)
    };

    for (name, v) in small.named() {
        eprintln!("{name:>14} = {v:.6e}");
    }
    let mut report = json!({ "parameters": params, "constants": constants_json(&small) });
    if let Some(s) = scaling {
        let drift: Map<String, Value> = s.drift.iter().map(|(k, v)| (k.clone(), real(*v))).collect();
        eprintln!("drift N → 2N: max {:.3e}", s.max_drift(false));
        report["constants_2n"] = constants_json(&s.large);
        report["drift"] = Value::Object(drift);
    }
    write_json(&report, out)
}

type Certified = (CzConstants, Option<ultraspherical::harmonic::CzScaling>);

fn run_certify<S, F>(make: F, a: &CertifyArgs, opts: &CertifyOptions) -> Result<Certified>
where
    S: ultraspherical::harmonic::KernelSource,
    F: Fn(usize) -> ultraspherical::Result<S>,
{
    if a.scaling {
        let s = cz_certify_scaling(make, a.size, opts)?;
        Ok((s.small.clone(), Some(s)))
    } else {
        Ok((cz_certify(&make(a.size)?, opts)?, None))
    }
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<bool> {
    let mut stdout = io::stdout().lock();
    if a.list {
        for spec in harness::registry() {
            writeln!(stdout, "{:<32} {:<4} {}", spec.id, spec.criterion, spec.description)?;
        }
        return Ok(true);
    }
    let mut cfg = match &a.config {
        Some(p) => {
            let s = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<RunConfig>(&s).with_context(|| format!("parsing {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if !a.only.is_empty() {
        cfg.only = a.only.clone();
    }
    cfg.tolerances.extend(a.tolerances.iter().cloned());
    if a.no_runtime {
        cfg.record_runtime = false;
    }
    let report: SuiteReport = harness::run_suite_report(&cfg)?;
    for r in &report.reports {
        writeln!(stdout, "{}", r.summary_line())?;
    }
    writeln!(stdout, "{} passed, {} failed", report.summary.passed, report.summary.failed)?;
    if let Some(p) = &cfg.out {
        std::fs::write(p, report.to_json()? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(report.all_passed())
}

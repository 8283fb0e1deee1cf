//! Command-line front end for the network constructions: build any catalog
//! target and store it as JSON, evaluate stored networks, verify them
//! against independent oracles, and run parameter sweeps with scaling fits.
//!
//! Reports are CSV rows with a fixed column order (see `relunet::harness`)
//! and never include wall-clock times, so repeated runs with the same flags
//! and seeds are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relunet::catalog::{
    build, default_grid, load_series, parse_measure, parse_oracle, run_catalog_sweep, BuildSpec,
    GridChoice, Target,
};
use relunet::harness::{
    csv_report, l2_mu_error, linf_error, mc_sup_error, ErrorReport, SweepSpec, CSV_HEADER,
};
use relunet::{Error, NetworkGraph, Result};

#[derive(Parser)]
#[command(
    name = "relunet",
    version,
    about = "Build, evaluate and verify rectifier approximation networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a network from the construction catalog and write it as JSON.
    Build(BuildArgs),
    /// Evaluate a stored network at one input point.
    Eval(EvalArgs),
    /// Measure a stored network against an oracle and print a CSV report.
    Verify(VerifyArgs),
    /// Run a parameter sweep from a JSON spec and write CSV/JSON reports.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Construction: mul2, muld, poly, cheb, series, analytic or bandlimited.
    #[arg(long)]
    target: String,
    /// Accuracy budget in (0, 1).
    #[arg(long)]
    eps: Option<f64>,
    /// Degree (cheb) when no coefficient list applies.
    #[arg(long)]
    n: Option<usize>,
    /// Input dimension (muld, bandlimited).
    #[arg(long)]
    d: Option<usize>,
    /// Domain half-width: inputs in [-M, M]^d (frequency box for bandlimited).
    #[arg(long = "M", value_name = "V")]
    m: Option<f64>,
    /// Kernel spec: "cexp", "cexp:s=<v>", "runge:beta=<v>", "cos".
    #[arg(long, value_name = "SPEC")]
    kernel: Option<String>,
    /// Spectral density: "gauss:sigma=<v>", "uniform", "bump:center=<w>,width=<h>".
    #[arg(long, value_name = "SPEC")]
    density: Option<String>,
    /// Comma-separated coefficients c0,c1,... (poly and series targets).
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    coeffs: Option<String>,
    /// Series JSON file {"M": ..., "coeffs": [...]} (series and analytic targets).
    #[arg(long, value_name = "FILE")]
    series: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the network JSON document.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Also write the drawn frequency sample as JSON (bandlimited only).
    #[arg(long, value_name = "FILE")]
    out_sample: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    net: PathBuf,
    /// Comma-separated input coordinates "x1,x2,...".
    #[arg(long, allow_hyphen_values = true)]
    point: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_name = "FILE")]
    net: PathBuf,
    /// Oracle spec: "product", "cheb:n=<k>", "runge:beta=<v>", "cos",
    /// "cexp:phase=<v>", "poly:coeffs=<list>", "series:<file>", or
    /// "bandlimited:density=<spec>;d=<k>;m=<v>;kernel=cexp".
    #[arg(long, value_name = "SPEC")]
    oracle: String,
    /// Tensor-grid points per axis (exclusive with --mc).
    #[arg(long, conflicts_with = "mc")]
    grid: Option<usize>,
    /// Monte-Carlo point count (sup check, or sample count with --measure).
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimate the L²(mu) error instead of a sup error; "lebesgue" weights
    /// the unit box uniformly.
    #[arg(long, value_name = "SPEC")]
    measure: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep spec JSON: {"construction", "varying", "values", "fixed", "seeds"}.
    #[arg(long, value_name = "FILE")]
    spec: PathBuf,
    #[arg(long, value_name = "FILE")]
    out_csv: PathBuf,
    /// Also write the full outcome (rows, failures, fit) as JSON.
    #[arg(long, value_name = "FILE")]
    out_json: Option<PathBuf>,
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parameter(format!("bad number {t:?} in list")))
        })
        .collect()
}

fn load_net(path: &Path) -> Result<NetworkGraph> {
    NetworkGraph::from_json_str(&fs::read_to_string(path)?)
}

fn run_build(args: BuildArgs) -> Result<()> {
    let target: Target = args.target.parse()?;
    let mut spec = BuildSpec::new(target);
    spec.eps = args.eps;
    spec.n = args.n;
    spec.d = args.d;
    spec.m = args.m;
    spec.kernel = args.kernel;
    spec.density = args.density;
    spec.coeffs = args.coeffs.as_deref().map(parse_list).transpose()?;
    spec.series = args.series.as_deref().map(load_series).transpose()?;
    spec.seed = args.seed;
    let built = build(&spec)?;
    fs::write(&args.out, built.net.to_json_string()?)?;
    // The stored document must reproduce the resource counts exactly.
    let back = load_net(&args.out)?;
    if back.depth() != built.net.depth() || back.size() != built.net.size() {
        return Err(Error::Serialization(format!(
            "stored network disagrees with the built one: depth {} vs {}, size {} vs {}",
            back.depth(),
            built.net.depth(),
            back.size(),
            built.net.size()
        )));
    }
    if let Some(path) = &args.out_sample {
        match &built.sample {
            Some(sample) => fs::write(path, sample.to_json_string()?)?,
            None => {
                return Err(Error::Parameter(
                    "only bandlimited builds produce a frequency sample".into(),
                ))
            }
        }
    }
    println!(
        "{} [{}]: depth {}, size {}, max|w| {:.3e} -> {}",
        built.construction,
        built.params,
        back.depth(),
        back.size(),
        built.net.max_abs_weight(),
        args.out.display()
    );
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let net = load_net(&args.net)?;
    let x = parse_list(&args.point)?;
    let out = net.evaluate(&x)?;
    let rendered: Vec<String> = out.iter().map(|v| format!("{v:.16e}")).collect();
    println!("{}", rendered.join(" "));
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<()> {
    let net = load_net(&args.net)?;
    let oracle = parse_oracle(&args.oracle, net.input_dim())?;
    let f = oracle.f.clone();
    let construction = args
        .net
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("network")
        .to_string();
    let mut base =
        ErrorReport::for_net(&construction, &format!("oracle={}", oracle.name), &net);
    let report = if let Some(mspec) = &args.measure {
        let mu = parse_measure(mspec, net.input_dim())?;
        let samples = args.mc.unwrap_or(2000);
        let l2 = l2_mu_error(&net, |x| f(x), &mu, samples, args.seed)?;
        base.with_l2(&l2, args.seed)
    } else {
        let choice = match (args.grid, args.mc) {
            (Some(g), _) => GridChoice::Grid(g),
            (None, Some(n)) => GridChoice::MonteCarlo(n),
            (None, None) => default_grid(net.input_dim()),
        };
        match choice {
            GridChoice::Grid(g) => {
                base.with_linf(&linf_error(&net, |x| f(x), &oracle.domain, g)?)
            }
            GridChoice::MonteCarlo(n) => {
                base.seed = args.seed;
                base.with_linf(&mc_sup_error(&net, |x| f(x), &oracle.domain, n, args.seed)?)
            }
        }
    };
    println!("{CSV_HEADER}");
    println!("{}", report.to_csv_row());
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let spec: SweepSpec = serde_json::from_str(&fs::read_to_string(&args.spec)?)?;
    let outcome = run_catalog_sweep(&spec)?;
    fs::write(&args.out_csv, csv_report(&outcome.rows))?;
    if let Some(path) = &args.out_json {
        fs::write(path, serde_json::to_string_pretty(&outcome)?)?;
    }
    for failure in &outcome.failures {
        eprintln!(
            "row value={} seed={} failed: {}",
            failure.value, failure.seed, failure.message
        );
    }
    let mut summary = format!(
        "{} rows ({} failed) -> {}",
        outcome.rows.len(),
        outcome.failures.len(),
        args.out_csv.display()
    );
    if let Some(fit) = &outcome.fit {
        let coeffs: Vec<String> = fit.coeffs.iter().map(|c| format!("{c:.4}")).collect();
        summary.push_str(&format!(
            "; fit {:?}: coeffs [{}], R²={:.4}",
            fit.model,
            coeffs.join(", "),
            fit.r_squared
        ));
    }
    println!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(args) => run_build(args),
        Command::Eval(args) => run_eval(args),
        Command::Verify(args) => run_verify(args),
        Command::Sweep(args) => run_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

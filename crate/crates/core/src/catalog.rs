//! Registry tying construction names, oracle specifications, and density
//! presets to the builders in this crate. The command-line front end and the
//! sweep runner both dispatch through here, so a construction name means the
//! same thing in a `build` invocation, a `verify` row, and a sweep spec.
//!
//! Spec syntax is `name` or `name:key=value,key=value`. Values never contain
//! commas except for the coefficient list forms (`poly:coeffs=...`), which
//! consume the whole remainder.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::{build_analytic, exp_kernel_bound, runge_params, EllipseParams};
use crate::bandlimited::{
    build_bandlimited, maurey_sample_with_terms, select_kernel_ellipse, KernelSpec, MaureySample,
    MeasureSpec, SpectralDensity, SpectralOracle,
};
use crate::chebyshev::{build_cheb_series, build_chebyshev, build_poly, ChebSeries, MonomialPoly};
use crate::error::{Error, Result};
use crate::graph::NetworkGraph;
use crate::harness::{
    l2_mu_error, l2_mu_error_fn, linf_error, mc_sup_error, run_sweep, ErrorReport, ScalingModel,
    SweepOutcome, SweepSpec,
};
use crate::product::{build_mul2, build_muld, MulBudget};

/// Ellipse parameter used for entire functions (cosine and phase-shifted
/// cosine) when the caller does not pick one.
const DEFAULT_ENTIRE_ELLIPSE: f64 = 3.0;

/// Quadrature agreement tolerance for reference oracles.
const ORACLE_TOL: f64 = 1e-10;

/// Default Monte-Carlo sample count for L²(μ) rows in sweeps.
const DEFAULT_L2_SAMPLES: usize = 2_000;

/// Constructions the CLI can build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Mul2,
    Muld,
    Poly,
    Cheb,
    Series,
    Analytic,
    Bandlimited,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Mul2 => "mul2",
            Target::Muld => "muld",
            Target::Poly => "poly",
            Target::Cheb => "cheb",
            Target::Series => "series",
            Target::Analytic => "analytic",
            Target::Bandlimited => "bandlimited",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mul2" => Ok(Target::Mul2),
            "muld" => Ok(Target::Muld),
            "poly" => Ok(Target::Poly),
            "cheb" => Ok(Target::Cheb),
            "series" => Ok(Target::Series),
            "analytic" => Ok(Target::Analytic),
            "bandlimited" => Ok(Target::Bandlimited),
            other => Err(Error::Parameter(format!(
                "unknown target {other:?} (expected mul2, muld, poly, cheb, series, analytic, \
                 or bandlimited)"
            ))),
        }
    }
}

fn split_spec(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((name, rest)) => (name, Some(rest)),
        None => (spec, None),
    }
}

fn parse_kv(rest: Option<&str>, allowed: &[&str]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let Some(rest) = rest else { return Ok(map) };
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| {
            Error::Parameter(format!("expected key=value, got {part:?}"))
        })?;
        if !allowed.contains(&key) {
            return Err(Error::Parameter(format!(
                "unknown key {key:?} (allowed: {})",
                allowed.join(", ")
            )));
        }
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}

fn kv_f64(map: &BTreeMap<String, String>, key: &str, default: Option<f64>) -> Result<f64> {
    match map.get(key) {
        Some(s) => s
            .parse()
            .map_err(|_| Error::Parameter(format!("bad numeric value for {key}: {s:?}"))),
        None => default.ok_or_else(|| Error::Parameter(format!("missing required key {key}"))),
    }
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("bad number {p:?} in list")))
        })
        .collect()
}

/// A named scalar function together with its analyticity certificate, as
/// accepted by `--kernel` for the `analytic` target.
#[derive(Clone)]
pub struct ScalarFunction {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub params: EllipseParams,
}

/// Parses a function-catalog name: `runge:beta=<v>`, `cos`, or
/// `cexp[:phase=<p>]` (the real part cos(t+phase) of a phase-shifted complex
/// exponential). `m` is the half-width of the approximation interval.
pub fn parse_function(spec: &str, m: f64) -> Result<ScalarFunction> {
    let (name, rest) = split_spec(spec);
    match name {
        "runge" => {
            let kv = parse_kv(rest, &["beta"])?;
            let beta = kv_f64(&kv, "beta", None)?;
            let params = runge_params(beta, m)?;
            Ok(ScalarFunction {
                name: spec.to_string(),
                f: Arc::new(move |x| 1.0 / (1.0 + x * x / (beta * beta))),
                params,
            })
        }
        "cos" => {
            parse_kv(rest, &[])?;
            let s = DEFAULT_ENTIRE_ELLIPSE;
            Ok(ScalarFunction {
                name: spec.to_string(),
                f: Arc::new(f64::cos),
                params: EllipseParams::new(s, exp_kernel_bound(s, m), m)?,
            })
        }
        "cexp" => {
            let kv = parse_kv(rest, &["phase"])?;
            let phase = kv_f64(&kv, "phase", Some(0.0))?;
            let s = DEFAULT_ENTIRE_ELLIPSE;
            Ok(ScalarFunction {
                name: spec.to_string(),
                f: Arc::new(move |x| (x + phase).cos()),
                params: EllipseParams::new(s, exp_kernel_bound(s, m), m)?,
            })
        }
        "custom" => Err(Error::Parameter(
            "custom functions are supplied as coefficient files via --series".into(),
        )),
        other => Err(Error::Parameter(format!(
            "unknown function {other:?} (expected runge:beta=..., cos, or cexp[:phase=...])"
        ))),
    }
}

/// Parses a spectral-density preset: `gauss:sigma=<v>`, `uniform`, or
/// `bump:center=<w0>,width=<h>`, on the frequency box `[-m, m]^d`.
pub fn parse_density(spec: &str, d: usize, m: f64) -> Result<SpectralDensity> {
    let (name, rest) = split_spec(spec);
    match name {
        "gauss" => {
            let kv = parse_kv(rest, &["sigma"])?;
            SpectralDensity::gaussian(d, m, kv_f64(&kv, "sigma", Some(1.0))?)
        }
        "uniform" => {
            parse_kv(rest, &[])?;
            SpectralDensity::uniform(d, m)
        }
        "bump" => {
            let kv = parse_kv(rest, &["center", "width"])?;
            let center = vec![kv_f64(&kv, "center", Some(0.0))?; d];
            let width = kv_f64(&kv, "width", None)?;
            SpectralDensity::bump(d, m, &center, width)
        }
        other => Err(Error::Parameter(format!(
            "unknown density {other:?} (expected gauss:sigma=..., uniform, or \
             bump:center=...,width=...)"
        ))),
    }
}

/// Parses a ridge-kernel name for bandlimited constructions: `cexp` selects
/// the ellipse parameter automatically at accuracy `eps0`; `cexp:s=<v>` pins
/// it.
pub fn parse_kernel(spec: &str, d: usize, m: f64, eps0: f64) -> Result<KernelSpec> {
    let (name, rest) = split_spec(spec);
    if name != "cexp" {
        return Err(Error::Parameter(format!(
            "unknown kernel {name:?} (expected cexp or cexp:s=...)"
        )));
    }
    let kv = parse_kv(rest, &["s"])?;
    match kv.get("s") {
        Some(_) => KernelSpec::complex_exponential(kv_f64(&kv, "s", None)?, d, m),
        None => select_kernel_ellipse(d, m, eps0),
    }
}

/// Parses a measure name for L²(μ) verification; only `lebesgue` (the unit
/// box `[0,1]^d` with mass 1) is expressible from the command line.
pub fn parse_measure(spec: &str, d: usize) -> Result<MeasureSpec> {
    match spec {
        "lebesgue" => MeasureSpec::lebesgue_unit_box(d),
        other => Err(Error::Parameter(format!(
            "unknown measure {other:?} (expected lebesgue)"
        ))),
    }
}

/// Wire format for Chebyshev coefficient files: `{"M": scale, "coeffs":
/// [c0, c1, ...]}`.
#[derive(Serialize, Deserialize)]
struct ChebSeriesFile {
    #[serde(rename = "M")]
    m: f64,
    coeffs: Vec<f64>,
}

pub fn series_from_json(text: &str) -> Result<ChebSeries> {
    let file: ChebSeriesFile = serde_json::from_str(text)?;
    ChebSeries::new(file.coeffs, file.m)
}

pub fn series_to_json(series: &ChebSeries) -> Result<String> {
    crate::serialize::to_json_string(&ChebSeriesFile {
        m: series.scale(),
        coeffs: series.coeffs().to_vec(),
    })
}

pub fn load_series(path: &Path) -> Result<ChebSeries> {
    series_from_json(&std::fs::read_to_string(path)?)
}

/// Evaluation closure type for oracles.
pub type OracleFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A parsed oracle: reference function, echo of its spec, and the default
/// verification domain.
#[derive(Clone)]
pub struct OracleSpec {
    pub name: String,
    pub f: OracleFn,
    pub domain: Vec<(f64, f64)>,
}

/// Parses an oracle spec for `verify`:
///
/// * `product[:m=<v>]` — exact product of all inputs
/// * `cheb:n=<k>` — cos(k·arccos x) on [-1,1]
/// * `runge:beta=<v>[,m=<v>]` — 1/(1+x²/β²)
/// * `cos[:m=<v>]`, `cexp[:phase=<p>][,m=<v>]` — library cosine
/// * `poly:coeffs=<c0,c1,...>` — Horner evaluation on [-1,1]
/// * `series:<FILE>` — Clenshaw evaluation of a coefficient file
/// * `bandlimited:density=<spec>;d=<v>;m=<v>[;kernel=cexp]` — converged
///   quadrature of the spectral integral (`;`-separated because the density
///   spec itself contains commas)
///
/// `input_dim` is the network's input dimension; one-dimensional oracles
/// reject other dimensions.
pub fn parse_oracle(spec: &str, input_dim: usize) -> Result<OracleSpec> {
    let (name, rest) = split_spec(spec);
    let scalar_domain = |m: f64| vec![(-m, m)];
    let need_1d = || -> Result<()> {
        if input_dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: input_dim });
        }
        Ok(())
    };
    match name {
        "product" => {
            let kv = parse_kv(rest, &["m"])?;
            let m = kv_f64(&kv, "m", Some(1.0))?;
            Ok(OracleSpec {
                name: spec.to_string(),
                f: Arc::new(|x: &[f64]| x.iter().product()),
                domain: vec![(-m, m); input_dim],
            })
        }
        "cheb" => {
            need_1d()?;
            let kv = parse_kv(rest, &["n"])?;
            let n = kv_f64(&kv, "n", None)?;
            if n < 0.0 || n.fract() != 0.0 {
                return Err(Error::Parameter(format!("degree must be a whole number, got {n}")));
            }
            Ok(OracleSpec {
                name: spec.to_string(),
                f: Arc::new(move |x: &[f64]| (n * x[0].clamp(-1.0, 1.0).acos()).cos()),
                domain: scalar_domain(1.0),
            })
        }
        "runge" => {
            need_1d()?;
            let kv = parse_kv(rest, &["beta", "m"])?;
            let beta = kv_f64(&kv, "beta", None)?;
            let m = kv_f64(&kv, "m", Some(1.0))?;
            Ok(OracleSpec {
                name: spec.to_string(),
                f: Arc::new(move |x: &[f64]| 1.0 / (1.0 + x[0] * x[0] / (beta * beta))),
                domain: scalar_domain(m),
            })
        }
        "cos" => {
            need_1d()?;
            let kv = parse_kv(rest, &["m"])?;
            let m = kv_f64(&kv, "m", Some(1.0))?;
            Ok(OracleSpec {
                name: spec.to_string(),
                f: Arc::new(|x: &[f64]| x[0].cos()),
                domain: scalar_domain(m),
            })
        }
        "cexp" => {
            need_1d()?;
            let kv = parse_kv(rest, &["phase", "m"])?;
            let phase = kv_f64(&kv, "phase", Some(0.0))?;
            let m = kv_f64(&kv, "m", Some(1.0))?;
            Ok(OracleSpec {
                name: spec.to_string(),
                f: Arc::new(move |x: &[f64]| (x[0] + phase).cos()),
                domain: scalar_domain(m),
            })
        }
        "poly" => {
            need_1d()?;
            let rest = rest.ok_or_else(|| Error::Parameter("poly needs coeffs=...".into()))?;
            let list = rest
                .strip_prefix("coeffs=")
                .ok_or_else(|| Error::Parameter(format!("expected coeffs=..., got {rest:?}")))?;
            let coeffs = parse_f64_list(list)?;
            let poly = MonomialPoly::new(coeffs, 1.0)?;
            Ok(OracleSpec {
                name: spec.to_string(),
                f: Arc::new(move |x: &[f64]| poly.eval(x[0])),
                domain: scalar_domain(1.0),
            })
        }
        "series" => {
            need_1d()?;
            let path = rest.ok_or_else(|| Error::Parameter("series needs a file path".into()))?;
            let series = load_series(Path::new(path))?;
            let m = series.scale();
            Ok(OracleSpec {
                name: spec.to_string(),
                f: Arc::new(move |x: &[f64]| {
                    crate::chebyshev::clenshaw_eval(&series, x[0]).unwrap_or(f64::NAN)
                }),
                domain: scalar_domain(m),
            })
        }
        "bandlimited" => {
            let rest =
                rest.ok_or_else(|| Error::Parameter("bandlimited needs density=...".into()))?;
            let mut density = None;
            let mut d = 1usize;
            let mut m = 1.0f64;
            let mut kernel = "cexp".to_string();
            for part in rest.split(';').filter(|p| !p.is_empty()) {
                let (key, value) = part.split_once('=').ok_or_else(|| {
                    Error::Parameter(format!("expected key=value, got {part:?}"))
                })?;
                match key {
                    "density" => density = Some(value.to_string()),
                    "d" => {
                        d = value.parse().map_err(|_| {
                            Error::Parameter(format!("bad dimension {value:?}"))
                        })?;
                    }
                    "m" => {
                        m = value.parse().map_err(|_| {
                            Error::Parameter(format!("bad half-width {value:?}"))
                        })?;
                    }
                    "kernel" => kernel = value.to_string(),
                    other => {
                        return Err(Error::Parameter(format!(
                            "unknown key {other:?} (allowed: density, d, m, kernel)"
                        )));
                    }
                }
            }
            if input_dim != d {
                return Err(Error::DimensionMismatch { expected: d, got: input_dim });
            }
            let density =
                density.ok_or_else(|| Error::Parameter("bandlimited needs density=...".into()))?;
            let f = parse_density(&density, d, m)?;
            let kernel = parse_kernel(&kernel, d, m, 0.5)?;
            let oracle = SpectralOracle::converged(&f, &kernel, ORACLE_TOL)?;
            Ok(OracleSpec {
                name: spec.to_string(),
                f: Arc::new(move |x: &[f64]| oracle.eval(x)),
                domain: vec![(0.0, 1.0); d],
            })
        }
        other => Err(Error::Parameter(format!(
            "unknown oracle {other:?} (expected product, cheb, runge, cos, cexp, poly, series, \
             or bandlimited)"
        ))),
    }
}

/// Default verification plan by input dimension: dense grids while feasible,
/// Monte-Carlo beyond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridChoice {
    Grid(usize),
    MonteCarlo(usize),
}

pub fn default_grid(d: usize) -> GridChoice {
    match d {
        1 => GridChoice::Grid(2001),
        2 => GridChoice::Grid(401),
        _ => GridChoice::MonteCarlo(100_000),
    }
}

/// Flags of a `build` invocation, normalized.
#[derive(Debug, Clone)]
pub struct BuildSpec {
    pub target: Target,
    pub eps: Option<f64>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    /// Range half-width `M` (factor bound, interval half-width, or frequency
    /// box half-width depending on the target).
    pub m: Option<f64>,
    pub kernel: Option<String>,
    pub density: Option<String>,
    pub coeffs: Option<Vec<f64>>,
    pub series: Option<ChebSeries>,
    pub seed: u64,
}

impl BuildSpec {
    pub fn new(target: Target) -> Self {
        BuildSpec {
            target,
            eps: None,
            n: None,
            d: None,
            m: None,
            kernel: None,
            density: None,
            coeffs: None,
            series: None,
            seed: 0,
        }
    }
}

/// A built network plus its identity for reports, and the Maurey sample for
/// stochastic constructions.
pub struct Built {
    pub net: NetworkGraph,
    pub construction: String,
    pub params: String,
    pub sample: Option<MaureySample>,
}

fn req_eps(spec: &BuildSpec) -> Result<f64> {
    spec.eps.ok_or_else(|| Error::Parameter(format!("{} needs --eps", spec.target)))
}

/// Dispatches a build request to the matching construction.
pub fn build(spec: &BuildSpec) -> Result<Built> {
    let m = spec.m.unwrap_or(1.0);
    match spec.target {
        Target::Mul2 => {
            let eps = req_eps(spec)?;
            let net = build_mul2(&MulBudget::new(m, m, eps)?)?;
            Ok(Built {
                net,
                construction: "mul2".into(),
                params: format!("eps={eps};M={m}"),
                sample: None,
            })
        }
        Target::Muld => {
            let eps = req_eps(spec)?;
            let d = spec.d.ok_or_else(|| Error::Parameter("muld needs --d".into()))?;
            let net = build_muld(d, m, eps)?;
            Ok(Built {
                net,
                construction: "muld".into(),
                params: format!("eps={eps};d={d};M={m}"),
                sample: None,
            })
        }
        Target::Poly => {
            let eps = req_eps(spec)?;
            let coeffs = spec
                .coeffs
                .clone()
                .ok_or_else(|| Error::Parameter("poly needs --coeffs".into()))?;
            let poly = MonomialPoly::new(coeffs, m)?;
            let label = poly
                .coeffs()
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join("|");
            let net = build_poly(&poly, eps)?;
            Ok(Built {
                net,
                construction: "poly".into(),
                params: format!("eps={eps};M={m};coeffs={label}"),
                sample: None,
            })
        }
        Target::Cheb => {
            let eps = req_eps(spec)?;
            let n = spec.n.ok_or_else(|| Error::Parameter("cheb needs --n".into()))?;
            let net = build_chebyshev(n, eps)?;
            Ok(Built {
                net,
                construction: "cheb".into(),
                params: format!("n={n};eps={eps}"),
                sample: None,
            })
        }
        Target::Series => {
            let eps = req_eps(spec)?;
            let series = spec
                .series
                .clone()
                .ok_or_else(|| Error::Parameter("series needs --series FILE".into()))?;
            let degree = series.degree();
            let scale = series.scale();
            let net = build_cheb_series(&series, eps)?;
            Ok(Built {
                net,
                construction: "series".into(),
                params: format!("eps={eps};M={scale};degree={degree}"),
                sample: None,
            })
        }
        Target::Analytic => {
            let eps = req_eps(spec)?;
            if let Some(series) = &spec.series {
                let net = build_cheb_series(series, eps)?;
                return Ok(Built {
                    net,
                    construction: "analytic".into(),
                    params: format!("eps={eps};M={};f=custom", series.scale()),
                    sample: None,
                });
            }
            let spec_name = spec
                .kernel
                .clone()
                .ok_or_else(|| Error::Parameter("analytic needs --kernel or --series".into()))?;
            let function = parse_function(&spec_name, m)?;
            let built = build_analytic(|x| (function.f)(x), &function.params, eps)?;
            Ok(Built {
                net: built.net,
                construction: "analytic".into(),
                params: format!("eps={eps};M={m};f={spec_name}"),
                sample: None,
            })
        }
        Target::Bandlimited => {
            let eps = req_eps(spec)?;
            let d = spec.d.unwrap_or(1);
            let density_name = spec.density.clone().unwrap_or_else(|| "gauss:sigma=1".into());
            let kernel_name = spec.kernel.clone().unwrap_or_else(|| "cexp".into());
            let f = parse_density(&density_name, d, m)?;
            let mu = MeasureSpec::lebesgue_unit_box(d)?;
            let eps0 = eps / (2.0 * f.c_f() * mu.mass().sqrt());
            let kernel = parse_kernel(&kernel_name, d, m, eps0)?;
            let built = build_bandlimited(&f, &kernel, &mu, eps, spec.seed)?;
            Ok(Built {
                net: built.net,
                construction: "bandlimited".into(),
                params: format!(
                    "eps={eps};d={d};M={m};density={density_name};kernel={kernel_name};seed={}",
                    spec.seed
                ),
                sample: Some(built.sample),
            })
        }
    }
}

/// The scaling model a sweep of `construction` over `varying` is checked
/// against.
pub fn model_for(construction: &str, varying: &str) -> Option<ScalingModel> {
    match (construction, varying) {
        ("mul2" | "muld" | "analytic", "eps") => Some(ScalingModel::SizeLinearInLog2InvEps),
        ("cheb", "n") => Some(ScalingModel::SizeQuadraticInN),
        ("maurey-series" | "bandlimited", "n_terms") => Some(ScalingModel::ErrorPowerLaw),
        _ => None,
    }
}

/// Parameter resolution for one sweep row: the varying value wins, then the
/// fixed map, then the default.
struct RowParams<'a> {
    varying: &'a str,
    value: f64,
    fixed: &'a BTreeMap<String, String>,
}

impl RowParams<'_> {
    fn f64(&self, key: &str, default: Option<f64>) -> Result<f64> {
        if self.varying == key {
            return Ok(self.value);
        }
        match self.fixed.get(key) {
            Some(s) => s
                .parse()
                .map_err(|_| Error::Parameter(format!("bad value for {key}: {s:?}"))),
            None => {
                default.ok_or_else(|| Error::Parameter(format!("sweep needs parameter {key}")))
            }
        }
    }

    fn usize(&self, key: &str, default: Option<usize>) -> Result<usize> {
        let v = self.f64(key, default.map(|d| d as f64))?;
        if !(v >= 0.0 && v.fract() == 0.0) {
            return Err(Error::Parameter(format!(
                "{key} must be a nonnegative integer, got {v}"
            )));
        }
        Ok(v as usize)
    }

    fn str(&self, key: &str, default: &str) -> String {
        self.fixed.get(key).cloned().unwrap_or_else(|| default.to_string())
    }
}

/// Runs a sweep through the catalog: builds each (value, seed) cell,
/// verifies it against its canonical oracle, and fits the scaling model for
/// (construction, varying) if one is declared.
pub fn run_catalog_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    match spec.construction.as_str() {
        "mul2" | "muld" | "cheb" | "analytic" | "bandlimited" | "maurey-series" => {}
        other => {
            return Err(Error::Parameter(format!(
                "unknown sweep construction {other:?} (expected mul2, muld, cheb, analytic, \
                 bandlimited, or maurey-series)"
            )));
        }
    }
    let model = model_for(&spec.construction, &spec.varying);
    run_sweep(spec, model, |value, seed, _row| {
        let params = RowParams { varying: &spec.varying, value, fixed: &spec.fixed };
        sweep_row(&spec.construction, &params, seed)
    })
}

fn sweep_row(construction: &str, params: &RowParams<'_>, seed: u64) -> Result<ErrorReport> {
    match construction {
        "mul2" => {
            let eps = params.f64("eps", None)?;
            let m = params.f64("M", Some(1.0))?;
            let grid = params.usize("grid", Some(401))?;
            let net = build_mul2(&MulBudget::new(m, m, eps)?)?;
            let linf = linf_error(&net, |x| x[0] * x[1], &[(-m, m), (-m, m)], grid)?;
            let mut report = ErrorReport::for_net("mul2", &format!("eps={eps};M={m}"), &net)
                .with_linf(&linf);
            report.seed = seed;
            Ok(report)
        }
        "muld" => {
            let eps = params.f64("eps", None)?;
            let d = params.usize("d", Some(2))?;
            let m = params.f64("M", Some(1.0))?;
            let net = build_muld(d, m, eps)?;
            let oracle = |x: &[f64]| x.iter().product::<f64>();
            let domain = vec![(-m, m); d];
            let linf = if d <= 2 {
                linf_error(&net, oracle, &domain, params.usize("grid", Some(401))?)?
            } else {
                mc_sup_error(&net, oracle, &domain, params.usize("mc", Some(100_000))?, seed)?
            };
            let mut report =
                ErrorReport::for_net("muld", &format!("eps={eps};d={d};M={m}"), &net)
                    .with_linf(&linf);
            report.seed = seed;
            Ok(report)
        }
        "cheb" => {
            let n = params.usize("n", None)?;
            let eps = params.f64("eps", Some(1e-3))?;
            let grid = params.usize("grid", Some(2001))?;
            let net = build_chebyshev(n, eps)?;
            let degree = n as f64;
            let linf = linf_error(
                &net,
                |x: &[f64]| (degree * x[0].clamp(-1.0, 1.0).acos()).cos(),
                &[(-1.0, 1.0)],
                grid,
            )?;
            let mut report =
                ErrorReport::for_net("cheb", &format!("n={n};eps={eps}"), &net).with_linf(&linf);
            report.seed = seed;
            Ok(report)
        }
        "analytic" => {
            let eps = params.f64("eps", None)?;
            let m = params.f64("M", Some(1.0))?;
            let name = params.str("kernel", "runge:beta=2");
            let grid = params.usize("grid", Some(2001))?;
            let function = parse_function(&name, m)?;
            let built = build_analytic(|x| (function.f)(x), &function.params, eps)?;
            let f = function.f.clone();
            let linf = linf_error(&built.net, move |x: &[f64]| f(x[0]), &[(-m, m)], grid)?;
            let mut report =
                ErrorReport::for_net("analytic", &format!("eps={eps};M={m};f={name}"), &built.net)
                    .with_linf(&linf);
            report.seed = seed;
            Ok(report)
        }
        "bandlimited" => {
            let eps = params.f64("eps", None)?;
            let d = params.usize("d", Some(1))?;
            let m = params.f64("M", Some(1.0))?;
            let density_name = params.str("density", "gauss:sigma=1");
            let kernel_name = params.str("kernel", "cexp");
            let samples = params.usize("mc", Some(DEFAULT_L2_SAMPLES))?;
            let f = parse_density(&density_name, d, m)?;
            let mu = MeasureSpec::lebesgue_unit_box(d)?;
            let eps0 = eps / (2.0 * f.c_f() * mu.mass().sqrt());
            let kernel = parse_kernel(&kernel_name, d, m, eps0)?;
            let built = build_bandlimited(&f, &kernel, &mu, eps, seed)?;
            let oracle = SpectralOracle::converged(&f, &kernel, ORACLE_TOL)?;
            let l2 = l2_mu_error(&built.net, |x| oracle.eval(x), &mu, samples, seed)?;
            let report = ErrorReport::for_net(
                "bandlimited",
                &format!("eps={eps};d={d};M={m};density={density_name};kernel={kernel_name}"),
                &built.net,
            )
            .with_l2(&l2, seed);
            Ok(report)
        }
        "maurey-series" => {
            let n_terms = params.usize("n_terms", None)?;
            let d = params.usize("d", Some(1))?;
            let m = params.f64("M", Some(1.0))?;
            let density_name = params.str("density", "gauss:sigma=1");
            let samples = params.usize("mc", Some(DEFAULT_L2_SAMPLES))?;
            let f = parse_density(&density_name, d, m)?;
            let mu = MeasureSpec::lebesgue_unit_box(d)?;
            let kernel = KernelSpec::complex_exponential(DEFAULT_ENTIRE_ELLIPSE, d, m)?;
            let sample = maurey_sample_with_terms(&f, n_terms, seed)?;
            let oracle = SpectralOracle::converged(&f, &kernel, ORACLE_TOL)?;
            let l2 = l2_mu_error_fn(
                |x| Ok(sample.series_value(&kernel, x)),
                |x| oracle.eval(x),
                &mu,
                samples,
                seed,
            )?;
            let max_coeff = sample
                .terms()
                .iter()
                .map(|t| t.magnitude())
                .fold(0.0f64, f64::max);
            let mut report = ErrorReport {
                construction: "maurey-series".into(),
                params: format!("n_terms={n_terms};d={d};M={m};density={density_name}"),
                depth: 0,
                size: n_terms,
                max_abs_weight: max_coeff,
                linf_error: None,
                linf_argmax: None,
                l2_error: None,
                l2_stderr: None,
                l2_samples: None,
                rng: crate::harness::RNG_ALGORITHM.into(),
                seed,
                wall_time: 0.0,
            };
            report.l2_error = Some(l2.estimate);
            report.l2_stderr = Some(l2.stderr);
            report.l2_samples = Some(l2.samples);
            Ok(report)
        }
        other => Err(Error::Parameter(format!("unknown sweep construction {other:?}"))),
    }
}

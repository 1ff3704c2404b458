//! `blaschke`: run phase analyses, coefficient scans, peak predictions,
//! example constructions and Schäffer reports from a JSON config.
//!
//! Every command validates its whole config before computing and writes its
//! output only once everything succeeded, so a failed run never leaves a
//! partial file behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blaschke_core::asymptotics::{compare, predict_peak, PeakComparison, PeakPrediction};
use blaschke_core::coefficients::{
    fit_exponent, fourier_coeffs_with, Column, ExponentFit, NormRow, NormScan, SamplerOptions,
    DEFAULT_EPS, DEFAULT_SAMPLE_CAP,
};
use blaschke_core::examples::{reference_spec, ExampleBuild, ExampleSpec, Family};
use blaschke_core::model_space::{schaffer_csv, schaffer_lower_bound, SchafferReport, Spectrum};
use blaschke_core::phase::{self, PhasePortrait, SearchOptions};
use blaschke_core::product::ProductDoc;
use blaschke_core::{BlaschkeProduct, Error, ErrorKind};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "blaschke", version, about = "Fourier coefficients of powers of finite Blaschke products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    config: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(clap::Args, Clone)]
struct OutputArgs {
    /// Write here instead of standard output (overrides the config).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Output format (overrides the config).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Critical points of ψ'' and the dominant class.
    Analyze(Common),
    /// Sup, ℓ¹ and ℓ² norms of the coefficients of Bⁿ over an n list, with fitted exponents.
    Scan(Common),
    /// Stationary-phase peak predictions matched against computed coefficients.
    Predict(Common),
    /// Construct a product from one of the example families.
    #[command(args_conflicts_with_subcommands = true)]
    Example(ExampleArgs),
    /// Lower bounds for the inverse shift norm on the model space.
    Schaffer(Common),
}

#[derive(clap::Args)]
struct ExampleArgs {
    #[command(subcommand)]
    family: Option<FamilyCommand>,
    /// Example spec JSON: {"family": ..., "params": {...}}.
    config: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Subcommand)]
enum FamilyCommand {
    /// Degree-N family with a maximal-order point at the origin.
    #[command(name = "general-n")]
    GeneralN(FamilyArgs),
    /// Degree 2, conjugate zeros.
    #[command(name = "deg2-conjugate")]
    Deg2Conjugate(FamilyArgs),
    /// Degree 2, real zeros.
    #[command(name = "deg2-real")]
    Deg2Real(FamilyArgs),
    /// Degree 4, two conjugate pairs.
    Deg4(FamilyArgs),
}

#[derive(clap::Args)]
struct FamilyArgs {
    /// JSON object of family parameters; the reference parameters are used if omitted.
    params: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    command: Option<String>,
    product: Option<ProductDoc>,
    example: Option<ExampleSpec>,
    n_list: Option<Vec<u64>>,
    eps: Option<f64>,
    sample_cap: Option<usize>,
    grid_size: Option<usize>,
    tol: Option<f64>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

struct Failure {
    name: &'static str,
    message: String,
    code: u8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Validation => 2,
            ErrorKind::Budget => 3,
            ErrorKind::Numerical => 4,
        };
        Failure {
            name: e.name(),
            message: e.to_string(),
            code,
        }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        name: "InvalidConfig",
        message: message.into(),
        code: 2,
    }
}

type CliResult<T> = Result<T, Failure>;

/// A fully validated run: everything needed to compute and write.
struct Plan {
    product: BlaschkeProduct,
    n_list: Vec<u64>,
    sampler: SamplerOptions,
    search: SearchOptions,
    output: Option<PathBuf>,
    format: Format,
}

fn read_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn plan(cfg: RunConfig, command: &str, needs_n: bool, default_format: Format, out: &OutputArgs) -> CliResult<Plan> {
    if let Some(c) = &cfg.command {
        if c != command {
            return Err(config_error(format!("config is for `{c}`, not `{command}`")));
        }
    }
    let product = match (cfg.product, cfg.example) {
        (Some(doc), None) => BlaschkeProduct::try_from(doc)?,
        (None, Some(spec)) => spec.build()?.product,
        (Some(_), Some(_)) => return Err(config_error("give either `product` or `example`, not both")),
        (None, None) => return Err(config_error("missing `product` or `example`")),
    };
    let eps = cfg.eps.unwrap_or(DEFAULT_EPS);
    if !(eps > 0.0 && eps < 1e-3) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 1e-3), got {eps}")).into());
    }
    let n_list = cfg.n_list.unwrap_or_default();
    if needs_n {
        if n_list.is_empty() {
            return Err(config_error("missing or empty `n_list`"));
        }
        if n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("n_list must be positive and strictly increasing".into()).into());
        }
    }
    let mut search = SearchOptions::for_product(&product);
    if let Some(g) = cfg.grid_size {
        search.grid_size = g;
    }
    if let Some(t) = cfg.tol {
        search.tol = t;
    }
    Ok(Plan {
        product,
        n_list,
        sampler: SamplerOptions {
            eps,
            cap: cfg.sample_cap.unwrap_or(DEFAULT_SAMPLE_CAP),
        },
        search,
        output: out.output.clone().or(cfg.output),
        format: out.format.or(cfg.format).unwrap_or(default_format),
    })
}

fn emit(text: String, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure {
            name: "Io",
            message: format!("cannot write {}: {e}", p.display()),
            code: 2,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn portrait_csv(p: &PhasePortrait) -> String {
    let mut out = String::from("index,xi,order,psi_prime,psi_N,dominant\n");
    for (i, c) in p.points.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{:.16e},{},{:.16e},{:.16e},{}",
            c.xi.radians(),
            c.order,
            c.psi_prime,
            c.psi_n,
            u8::from(p.dominant.contains(&i))
        );
    }
    out
}

fn cmd_analyze(c: Common) -> CliResult<()> {
    let p = plan(read_config(&c.config)?, "analyze", false, Format::Json, &c.out)?;
    let portrait = phase::analyze_with(&p.product, p.search)?;
    let text = match p.format {
        Format::Json => to_json(&portrait),
        Format::Csv => portrait_csv(&portrait),
    };
    emit(text, p.output.as_deref())
}

fn scan_rows(p: &Plan) -> CliResult<NormScan> {
    let mut rows = Vec::with_capacity(p.n_list.len());
    for (i, &n) in p.n_list.iter().enumerate() {
        eprintln!("scan: n = {n} ({}/{})", i + 1, p.n_list.len());
        rows.push(NormRow::from_series(&fourier_coeffs_with(&p.product, n, p.sampler)?));
    }
    Ok(NormScan { rows })
}

#[derive(Serialize)]
struct ScanDoc {
    rows: Vec<NormRow>,
    fit_sup: Option<ExponentFit>,
    fit_l1: Option<ExponentFit>,
}

fn cmd_scan(c: Common) -> CliResult<()> {
    let p = plan(read_config(&c.config)?, "scan", true, Format::Csv, &c.out)?;
    let scan = scan_rows(&p)?;
    let (fit_sup, fit_l1) = if scan.rows.len() >= 4 {
        (Some(fit_exponent(&scan, Column::Sup)?), Some(fit_exponent(&scan, Column::L1)?))
    } else {
        (None, None)
    };
    if let (Some(s), Some(l)) = (&fit_sup, &fit_l1) {
        eprintln!("scan: sup slope {:.6}, l1 slope {:.6}", s.slope, l.slope);
    }
    let text = match p.format {
        Format::Csv => scan.to_csv(),
        Format::Json => to_json(&ScanDoc {
            rows: scan.rows,
            fit_sup,
            fit_l1,
        }),
    };
    emit(text, p.output.as_deref())
}

#[derive(Serialize)]
struct PredictRow {
    prediction: PeakPrediction,
    comparison: PeakComparison,
    norms: NormRow,
}

fn cmd_predict(c: Common) -> CliResult<()> {
    let p = plan(read_config(&c.config)?, "predict", true, Format::Csv, &c.out)?;
    let portrait = phase::analyze_with(&p.product, p.search)?;
    let mut rows = Vec::new();
    for &n in &p.n_list {
        eprintln!("predict: n = {n}");
        let prediction = predict_peak(&p.product, &portrait, n)?;
        let series = fourier_coeffs_with(&p.product, n, p.sampler)?;
        rows.push(PredictRow {
            comparison: compare(&prediction, &series),
            norms: NormRow::from_series(&series),
            prediction,
        });
    }
    let text = match p.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut out = String::from(
                "n,N,D,k,predicted_re,predicted_im,computed_re,computed_im,rel_err,phase_err,predicted_sup,sup,argmax_k\n",
            );
            for r in &rows {
                let c = &r.comparison;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                    c.n,
                    r.prediction.order,
                    r.prediction.d_values.len(),
                    c.k,
                    c.predicted.re,
                    c.predicted.im,
                    c.computed.re,
                    c.computed.im,
                    c.rel_err,
                    c.phase_err,
                    r.prediction.predicted_sup(),
                    c.sup,
                    c.argmax_k
                );
            }
            out
        }
    };
    emit(text, p.output.as_deref())
}

fn example_csv(b: &ExampleBuild) -> String {
    let mut out = String::from("re,im\n");
    for z in b.product.zeros() {
        let _ = writeln!(out, "{:.16e},{:.16e}", z.re, z.im);
    }
    out
}

fn cmd_example(a: ExampleArgs) -> CliResult<()> {
    let (spec, out) = match a.family {
        Some(cmd) => {
            let (family, args) = match cmd {
                FamilyCommand::GeneralN(x) => (Family::General, x),
                FamilyCommand::Deg2Conjugate(x) => (Family::Deg2Conjugate, x),
                FamilyCommand::Deg2Real(x) => (Family::Deg2Real, x),
                FamilyCommand::Deg4(x) => (Family::Deg4, x),
            };
            let mut spec = reference_spec(family);
            if let Some(path) = &args.params {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
                spec.params = serde_json::from_str::<Value>(&text)
                    .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            }
            (spec, args.out)
        }
        None => {
            let path = a
                .config
                .ok_or_else(|| config_error("give an example spec file or a family subcommand"))?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
            let spec = match serde_json::from_str::<RunConfig>(&text) {
                Ok(RunConfig { example: Some(s), .. }) => s,
                _ => ExampleSpec::from_json(&text)?,
            };
            (spec, a.out)
        }
    };
    let built = spec.build()?;
    if built.t_retries > 0 {
        eprintln!(
            "example: t halved {} time(s) to {:e} before the origin became the maximal-order point",
            built.t_retries,
            built.t.unwrap_or_default()
        );
    }
    let text = match out.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&built),
        Format::Csv => example_csv(&built),
    };
    emit(text, out.output.as_deref())
}

fn cmd_schaffer(c: Common) -> CliResult<()> {
    let p = plan(read_config(&c.config)?, "schaffer", true, Format::Csv, &c.out)?;
    let sigma = Spectrum::from_product(&p.product)?;
    let mut rows: Vec<SchafferReport> = Vec::new();
    for &n in &p.n_list {
        eprintln!("schaffer: n = {n}");
        rows.push(schaffer_lower_bound(&sigma, n, p.sampler.eps)?);
    }
    let text = match p.format {
        Format::Csv => schaffer_csv(&rows),
        Format::Json => to_json(&rows),
    };
    emit(text, p.output.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(c) => cmd_analyze(c),
        Command::Scan(c) => cmd_scan(c),
        Command::Predict(c) => cmd_predict(c),
        Command::Example(a) => cmd_example(a),
        Command::Schaffer(c) => cmd_schaffer(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}: {}", f.name, f.message);
            ExitCode::from(f.code)
        }
    }
}

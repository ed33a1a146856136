//! Command-line front end for the star-body toolkit: body-spec
//! ingestion, one subcommand per library operation, and deterministic
//! JSON/CSV reports (12 significant digits, seed recorded, identical
//! configuration ⇒ identical bytes).
//!
//! Exit codes: 0 when a verdict was computed (including "fails"),
//! 2 on input errors, 3 on numerical non-convergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lzero::approximation::{dyadicize_weights, fit_ellipsoid_product, EllipsoidProduct};
use lzero::bodies::spec::{load_body, parse_body_spec, BodySpec};
use lzero::bodies::{ball, radial_distance, StarBody};
use lzero::embedding::{embeds_in_l0, embedding_constant, log_ft, spectral_measure_density,
    verify_log_representation};
use lzero::experiments::{cauchy_log_moment_mc, counterexample_scan};
use lzero::numerics::{sphere_grid, GridKind, SphereGrid, Tolerances};
use lzero::report::{to_json, Csv, Field};
use lzero::sections::{SectionMethod, SectionProfile};
use lzero::Error;

#[derive(Parser)]
#[command(name = "lzero", version, about = "Log-norm embeddings of star bodies", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report to this path instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for stochastic subcommands; recorded in every report
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct BodyOpt {
    /// Body: "ball", an inline JSON spec, or a path to a spec file
    #[arg(long)]
    body: String,

    /// Dimension for named bodies (and a consistency check otherwise)
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args)]
struct GridOpt {
    /// Sphere grid resolution (defaults depend on the dimension)
    #[arg(long = "grid-res")]
    grid_res: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sign test of the log-gauge transform over a full sphere grid
    EmbedTest {
        #[command(flatten)]
        body: BodyOpt,
        #[command(flatten)]
        grid: GridOpt,
    },
    /// Transform of the log-gauge in a single direction
    LogFt {
        #[command(flatten)]
        body: BodyOpt,
        /// Direction, comma-separated (e.g. 0,0,1)
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
    },
    /// Spectral measure density over a sphere grid
    Measure {
        #[command(flatten)]
        body: BodyOpt,
        #[command(flatten)]
        grid: GridOpt,
    },
    /// Representation constant of the body
    Constant {
        #[command(flatten)]
        body: BodyOpt,
        #[command(flatten)]
        grid: GridOpt,
    },
    /// Residuals of the reconstructed log-gauge at sample points
    VerifyRepr {
        #[command(flatten)]
        body: BodyOpt,
        #[command(flatten)]
        grid: GridOpt,
        /// Number of probe points
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Fit a product of directional ellipsoids to an embeddable body
    Fit {
        #[command(flatten)]
        body: BodyOpt,
        #[command(flatten)]
        grid: GridOpt,
        /// Kernel semiaxis across the smoothing direction
        #[arg(long, default_value_t = 0.1)]
        a: f64,
        /// Kernel semiaxis along the smoothing direction
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        /// Cap radius for the measure discretization
        #[arg(long, default_value_t = 0.2)]
        sigma: f64,
    },
    /// Rewrite product weights as powers of two
    Dyadic {
        /// Product spec: JSON array of parts or {"kind":"product",...}
        #[command(flatten)]
        body: BodyOpt,
        #[command(flatten)]
        grid: GridOpt,
        /// Binary digits kept below each weight's leading bit
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Closed-form and numeric values for the quartic revolution body
    Counterexample {
        /// Quartic coefficient(s), comma-separated
        #[arg(long = "N", allow_hyphen_values = true)]
        n: String,
    },
    /// Monte Carlo check of the Cauchy log-moment identity
    CauchyMc {
        /// Constant coefficient
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        a0: f64,
        /// Cauchy coefficients, comma-separated (may be empty)
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Largest radial gap between two bodies over a grid
    RadialDistance {
        #[command(flatten)]
        body: BodyOpt,
        /// Second body (same forms as --body)
        #[arg(long)]
        other: String,
        #[command(flatten)]
        grid: GridOpt,
    },
    /// Parallel section profile A(t) along a direction
    Sections {
        #[command(flatten)]
        body: BodyOpt,
        /// Direction, comma-separated
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        /// Number of sample points
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
}

/// An error carrying its process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

type CliResult<T> = Result<T, Failure>;

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::BodySpec(_)
            | Error::InvalidParameter(_)
            | Error::UnsupportedDimension(..)
            | Error::ResolutionOverflow { .. }
            | Error::NonStarSlice { .. }
            | Error::NotEmbeddable { .. }
            | Error::Io(_) => 2,
            Error::NonFinite { .. }
            | Error::NoSignChange { .. }
            | Error::NonConvergence { .. }
            | Error::Cancellation { .. }
            | Error::KernelMass { .. } => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = configure_threads().and_then(|()| dispatch(&cli));
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// LZERO_THREADS caps worker parallelism for the whole process.
fn configure_threads() -> CliResult<()> {
    match std::env::var("LZERO_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => {
            let threads: usize = v
                .parse()
                .map_err(|_| input_error(format!("LZERO_THREADS is not a thread count: {v:?}")))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .ok();
            Ok(())
        }
    }
}

impl BodyOpt {
    fn build(&self) -> CliResult<StarBody> {
        let body = resolve_body(&self.body, self.dim)?;
        if let Some(dim) = self.dim {
            if body.dim() != dim {
                return Err(input_error(format!(
                    "--dim {dim} does not match the body dimension {}",
                    body.dim()
                )));
            }
        }
        Ok(body)
    }
}

fn resolve_body(text: &str, dim: Option<usize>) -> CliResult<StarBody> {
    let text = text.trim();
    if text == "ball" {
        let dim = dim.ok_or_else(|| input_error("--body ball needs --dim"))?;
        if dim < 2 {
            return Err(input_error(format!("a ball needs dimension >= 2, got {dim}")));
        }
        return Ok(ball(dim));
    }
    if text.starts_with('{') || text.starts_with('[') {
        return Ok(load_body(text)?);
    }
    if Path::new(text).is_file() {
        let contents = std::fs::read_to_string(text).map_err(Error::Io)?;
        return Ok(load_body(&contents)?);
    }
    Err(input_error(format!(
        "unknown body {text:?}: expected \"ball\", an inline JSON spec, or a spec file path"
    )))
}

impl GridOpt {
    fn build(&self, dim: usize) -> CliResult<SphereGrid> {
        let res = self
            .grid_res
            .unwrap_or_else(|| SphereGrid::default_resolution(dim));
        Ok(sphere_grid(dim, res, GridKind::Deterministic)?)
    }
}

fn parse_vector(text: &str, what: &str) -> CliResult<Vec<f64>> {
    let v: Result<Vec<f64>, _> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect();
    v.map_err(|e| input_error(format!("{what} is not a comma-separated vector ({e}): {text:?}")))
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure {
            code: 2,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            // tolerate a reader that closes the pipe early (`... | head`)
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let newline = if text.ends_with('\n') { "" } else { "\n" };
            match write!(lock, "{text}{newline}").and_then(|()| lock.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(|e| Failure {
                    code: 2,
                    message: format!("cannot write to stdout: {e}"),
                }),
            }
        }
    }
}

#[derive(Serialize)]
struct GridMeta {
    dim: usize,
    resolution: usize,
    nodes: usize,
}

impl GridMeta {
    fn of(grid: &SphereGrid) -> GridMeta {
        GridMeta {
            dim: grid.dim(),
            resolution: grid.resolution(),
            nodes: grid.len(),
        }
    }
}

fn axis_columns(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let text = match &cli.command {
        Command::EmbedTest { body, grid } => run_embed_test(cli, body, grid)?,
        Command::LogFt { body, xi } => run_log_ft(cli, body, xi)?,
        Command::Measure { body, grid } => run_measure(cli, body, grid)?,
        Command::Constant { body, grid } => run_constant(cli, body, grid)?,
        Command::VerifyRepr { body, grid, samples } => run_verify_repr(cli, body, grid, *samples)?,
        Command::Fit { body, grid, a, b, sigma } => run_fit(cli, body, grid, *a, *b, *sigma)?,
        Command::Dyadic { body, grid, depth } => run_dyadic(cli, body, grid, *depth)?,
        Command::Counterexample { n } => run_counterexample(cli, n)?,
        Command::CauchyMc { a0, a, samples } => run_cauchy_mc(cli, *a0, a, *samples)?,
        Command::RadialDistance { body, other, grid } => {
            run_radial_distance(cli, body, other, grid)?
        }
        Command::Sections { body, xi, samples } => run_sections(cli, body, xi, *samples)?,
    };
    emit(&cli.out, &text)
}

#[derive(Serialize)]
struct DirectionRow {
    xi: Vec<f64>,
    weight: f64,
    log_ft: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<f64>,
}

fn run_embed_test(cli: &Cli, body: &BodyOpt, grid: &GridOpt) -> CliResult<String> {
    let k = body.build()?;
    let g = grid.build(k.dim())?;
    let report = embeds_in_l0(&k, &g, &Tolerances::scan())?;

    #[derive(Serialize)]
    struct Witness {
        xi: Vec<f64>,
        log_ft: f64,
    }
    #[derive(Serialize)]
    struct Out {
        subcommand: &'static str,
        seed: u64,
        grid: GridMeta,
        verdict: String,
        #[serde(rename = "constant_C")]
        constant_c: f64,
        min_margin: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
        inconclusive_fraction: f64,
        tolerance: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness: Option<Witness>,
        per_direction: Vec<DirectionRow>,
    }

    let per_direction: Vec<DirectionRow> = (0..g.len())
        .map(|i| DirectionRow {
            xi: g.node(i).to_vec(),
            weight: g.weight(i),
            log_ft: report.log_ft[i],
            density: report.density.as_ref().map(|d| d[i]),
        })
        .collect();
    match cli.format {
        Format::Json => Ok(to_json(&Out {
            subcommand: "embed-test",
            seed: cli.seed,
            grid: GridMeta::of(&g),
            verdict: report.verdict.to_string(),
            constant_c: report.constant_c,
            min_margin: report.min_margin,
            mass: report.mass,
            inconclusive_fraction: report.inconclusive_fraction,
            tolerance: report.tolerance,
            witness: report.witness.map(|(xi, value)| Witness { xi, log_ft: value }),
            per_direction,
        })?),
        Format::Csv => {
            let comment = format!(
                "embed-test: verdict {}, per-direction transform of the log-gauge; seed {}",
                report.verdict, cli.seed
            );
            let mut columns = axis_columns(g.dim());
            columns.extend(["weight".into(), "log_ft".into(), "density".into()]);
            let names: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
            let mut table = Csv::new(&comment, &names);
            for row in &per_direction {
                let mut fields: Vec<Field> = row.xi.iter().map(|c| Field::Num(*c)).collect();
                fields.push(row.weight.into());
                fields.push(row.log_ft.into());
                fields.push(match row.density {
                    Some(d) => d.into(),
                    None => "".into(),
                });
                table.row(&fields)?;
            }
            Ok(table.finish())
        }
    }
}

fn run_log_ft(cli: &Cli, body: &BodyOpt, xi: &str) -> CliResult<String> {
    let k = body.build()?;
    let xi = parse_vector(xi, "--xi")?;
    if xi.len() != k.dim() {
        return Err(input_error(format!(
            "--xi has {} components, the body lives in dimension {}",
            xi.len(),
            k.dim()
        )));
    }
    let value = log_ft(&k, &xi, &Tolerances::default())?;

    #[derive(Serialize)]
    struct Out {
        subcommand: &'static str,
        seed: u64,
        xi: Vec<f64>,
        log_ft: f64,
    }
    match cli.format {
        Format::Json => Ok(to_json(&Out {
            subcommand: "log-ft",
            seed: cli.seed,
            xi,
            log_ft: value,
        })?),
        Format::Csv => {
            let mut columns = axis_columns(k.dim());
            columns.push("log_ft".into());
            let names: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
            let mut table = Csv::new(&format!("log-ft; seed {}", cli.seed), &names);
            let mut fields: Vec<Field> = xi.iter().map(|c| Field::Num(*c)).collect();
            fields.push(value.into());
            table.row(&fields)?;
            Ok(table.finish())
        }
    }
}

fn run_measure(cli: &Cli, body: &BodyOpt, grid: &GridOpt) -> CliResult<String> {
    let k = body.build()?;
    let g = grid.build(k.dim())?;
    let density = spectral_measure_density(&k, &g, &Tolerances::scan())?;
    let mass: f64 = (0..g.len()).map(|i| g.weight(i) * density[i]).sum();

    #[derive(Serialize)]
    struct Row {
        xi: Vec<f64>,
        weight: f64,
        density: f64,
    }
    #[derive(Serialize)]
    struct Out {
        subcommand: &'static str,
        seed: u64,
        grid: GridMeta,
        mass: f64,
        per_direction: Vec<Row>,
    }
    match cli.format {
        Format::Json => Ok(to_json(&Out {
            subcommand: "measure",
            seed: cli.seed,
            grid: GridMeta::of(&g),
            mass,
            per_direction: (0..g.len())
                .map(|i| Row {
                    xi: g.node(i).to_vec(),
                    weight: g.weight(i),
                    density: density[i],
                })
                .collect(),
        })?),
        Format::Csv => {
            let comment = format!(
                "measure: spectral density per direction, total mass {}; seed {}",
                lzero::report::sig12(mass),
                cli.seed
            );
            let mut columns = axis_columns(g.dim());
            columns.extend(["weight".into(), "density".into()]);
            let names: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
            let mut table = Csv::new(&comment, &names);
            for i in 0..g.len() {
                let mut fields: Vec<Field> = g.node(i).iter().map(|c| Field::Num(*c)).collect();
                fields.push(g.weight(i).into());
                fields.push(density[i].into());
                table.row(&fields)?;
            }
            Ok(table.finish())
        }
    }
}

fn run_constant(cli: &Cli, body: &BodyOpt, grid: &GridOpt) -> CliResult<String> {
    let k = body.build()?;
    let g = grid.build(k.dim())?;
    let c = embedding_constant(&k, &g)?;

    #[derive(Serialize)]
    struct Out {
        subcommand: &'static str,
        seed: u64,
        #[serde(rename = "constant_C")]
        constant_c: f64,
    }
    match cli.format {
        Format::Json => Ok(to_json(&Out {
            subcommand: "constant",
            seed: cli.seed,
            constant_c: c,
        })?),
        Format::Csv => {
            let mut table = Csv::new(&format!("constant; seed {}", cli.seed), &["constant_C"]);
            table.row(&[c.into()])?;
            Ok(table.finish())
        }
    }
}

fn run_verify_repr(cli: &Cli, body: &BodyOpt, grid: &GridOpt, samples: usize) -> CliResult<String> {
    let k = body.build()?;
    let g = grid.build(k.dim())?;
    if samples == 0 {
        return Err(input_error("--samples must be positive"));
    }
    let c = embedding_constant(&k, &g)?;
    // evenly spread probe points over the grid
    let step = (g.len() / samples.min(g.len())).max(1);
    let points: Vec<Vec<f64>> = (0..g.len())
        .step_by(step)
        .take(samples)
        .map(|i| g.node(i).to_vec())
        .collect();
    let report = verify_log_representation(&k, c, &points, 12, &Tolerances::scan())?;

    #[derive(Serialize)]
    struct Row {
        x: Vec<f64>,
        residual: f64,
    }
    #[derive(Serialize)]
    struct Out {
        subcommand: &'static str,
        seed: u64,
        #[serde(rename = "constant_C")]
        constant_c: f64,
        max_residual: f64,
        residuals: Vec<Row>,
    }
    match cli.format {
        Format::Json => Ok(to_json(&Out {
            subcommand: "verify-repr",
            seed: cli.seed,
            constant_c: c,
            max_residual: report.max_residual,
            residuals: report
                .residuals
                .into_iter()
                .map(|(x, residual)| Row { x, residual })
                .collect(),
        })?),
        Format::Csv => {
            let comment = format!(
                "verify-repr: log-gauge reconstruction residuals, max {}; seed {}",
                lzero::report::sig12(report.max_residual),
                cli.seed
            );
            let mut columns = axis_columns(k.dim());
            columns.push("residual".into());
            let names: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
            let mut table = Csv::new(&comment, &names);
            for (x, residual) in &report.residuals {
                let mut fields: Vec<Field> = x.iter().map(|c| Field::Num(*c)).collect();
                fields.push((*residual).into());
                table.row(&fields)?;
            }
            Ok(table.finish())
        }
    }
}

#[derive(Serialize)]
struct ProductOut {
    subcommand: &'static str,
    seed: u64,
    grid: GridMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup_log_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup_log_perturbation: Option<f64>,
    weight_sum: f64,
    parts: Vec<lzero::bodies::spec::ProductPart>,
}

fn product_report(cli: &Cli, out: ProductOut) -> CliResult<String> {
    match cli.format {
        Format::Json => Ok(to_json(&out)?),
        Format::Csv => {
            let comment = format!("{}: ellipsoid product parts; seed {}", out.subcommand, out.seed);
            let dim = out.parts[0].xi.len();
            let mut columns = axis_columns(dim);
            columns.extend(["a".into(), "b".into(), "weight".into()]);
            let names: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
            let mut table = Csv::new(&comment, &names);
            for p in &out.parts {
                let mut fields: Vec<Field> = p.xi.iter().map(|c| Field::Num(*c)).collect();
                fields.extend([p.a.into(), p.b.into(), p.weight.into()]);
                table.row(&fields)?;
            }
            Ok(table.finish())
        }
    }
}

fn run_fit(
    cli: &Cli,
    body: &BodyOpt,
    grid: &GridOpt,
    a: f64,
    b: f64,
    sigma: f64,
) -> CliResult<String> {
    let k = body.build()?;
    let g = grid.build(k.dim())?;
    let fit = fit_ellipsoid_product(&k, a, b, sigma, &g, &Tolerances::scan())?;
    product_report(
        cli,
        ProductOut {
            subcommand: "fit",
            seed: cli.seed,
            grid: GridMeta::of(&g),
            sup_log_error: Some(fit.sup_log_error),
            sup_log_perturbation: None,
            weight_sum: fit.product.weight_sum(),
            parts: fit.product.parts().to_vec(),
        },
    )
}

fn run_dyadic(cli: &Cli, body: &BodyOpt, grid: &GridOpt, depth: usize) -> CliResult<String> {
    if depth == 0 {
        return Err(input_error("--depth must be at least 1"));
    }
    let text = body.body.trim();
    let spec_text = if Path::new(text).is_file() {
        std::fs::read_to_string(text).map_err(Error::Io)?
    } else {
        text.to_owned()
    };
    let parts = match parse_body_spec(&spec_text)? {
        BodySpec::Product { parts } => parts,
        other => {
            return Err(input_error(format!(
                "dyadic needs a product body, got {other:?}"
            )))
        }
    };
    let product = EllipsoidProduct::new(parts)?;
    let dyadic = dyadicize_weights(&product, depth)?;
    let g = grid.build(product.dim())?;
    let perturbation = (0..g.len())
        .map(|i| {
            let x = g.node(i);
            (dyadic.gauge(x).ln() - product.gauge(x).ln()).abs()
        })
        .fold(0.0, f64::max);
    product_report(
        cli,
        ProductOut {
            subcommand: "dyadic",
            seed: cli.seed,
            grid: GridMeta::of(&g),
            sup_log_error: None,
            sup_log_perturbation: Some(perturbation),
            weight_sum: dyadic.weight_sum(),
            parts: dyadic.parts().to_vec(),
        },
    )
}

fn run_counterexample(cli: &Cli, n: &str) -> CliResult<String> {
    let coefficients = parse_vector(n, "--N")?;
    if coefficients.iter().any(|c| *c < 0.0) {
        return Err(input_error("--N takes nonnegative coefficients"));
    }
    let records = counterexample_scan(&coefficients)?;

    #[derive(Serialize)]
    struct Row {
        #[serde(rename = "N")]
        n: f64,
        a_n: f64,
        closed_form_value: f64,
        #[serde(rename = "numeric_I")]
        numeric_i: f64,
        verdict: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness: Option<Vec<f64>>,
    }
    #[derive(Serialize)]
    struct Out {
        subcommand: &'static str,
        seed: u64,
        records: Vec<Row>,
    }
    let rows: Vec<Row> = records
        .into_iter()
        .map(|r| Row {
            n: r.n_param,
            a_n: r.a_n,
            closed_form_value: r.closed_form_value,
            numeric_i: r.numeric_i,
            verdict: r.verdict.to_string(),
            witness: r.witness,
        })
        .collect();
    match cli.format {
        Format::Json => Ok(to_json(&Out {
            subcommand: "counterexample",
            seed: cli.seed,
            records: rows,
        })?),
        Format::Csv => {
            let mut table = Csv::new(
                &format!("counterexample scan; seed {}", cli.seed),
                &["N", "a_N", "closed_form_value", "numeric_I", "verdict"],
            );
            for r in &rows {
                table.row(&[
                    r.n.into(),
                    r.a_n.into(),
                    r.closed_form_value.into(),
                    r.numeric_i.into(),
                    r.verdict.as_str().into(),
                ])?;
            }
            Ok(table.finish())
        }
    }
}

fn run_cauchy_mc(cli: &Cli, a0: f64, a: &str, samples: u64) -> CliResult<String> {
    let coeffs = if a.trim().is_empty() {
        Vec::new()
    } else {
        parse_vector(a, "--a")?
    };
    if samples < 10_000 {
        return Err(input_error(format!(
            "--samples must be at least 10000, got {samples}"
        )));
    }
    if a0 == 0.0 && coeffs.iter().all(|c| *c == 0.0) {
        return Err(input_error("all coefficients are zero"));
    }
    let result = cauchy_log_moment_mc(a0, &coeffs, samples, cli.seed);

    #[derive(Serialize)]
    struct Out {
        subcommand: &'static str,
        seed: u64,
        a0: f64,
        a: Vec<f64>,
        samples: u64,
        estimate: f64,
        stderr: f64,
        target: f64,
    }
    match cli.format {
        Format::Json => Ok(to_json(&Out {
            subcommand: "cauchy-mc",
            seed: result.seed,
            a0,
            a: coeffs,
            samples: result.samples,
            estimate: result.estimate,
            stderr: result.stderr,
            target: result.target,
        })?),
        Format::Csv => {
            let joined = coeffs
                .iter()
                .map(|c| lzero::report::sig12(*c))
                .collect::<Vec<_>>()
                .join(";");
            let mut table = Csv::new(
                &format!("cauchy-mc; seed {}", result.seed),
                &["a0", "coeffs", "samples", "seed", "estimate", "stderr", "target"],
            );
            table.row(&[
                a0.into(),
                joined.into(),
                (result.samples as usize).into(),
                (result.seed as usize).into(),
                result.estimate.into(),
                result.stderr.into(),
                result.target.into(),
            ])?;
            Ok(table.finish())
        }
    }
}

fn run_radial_distance(
    cli: &Cli,
    body: &BodyOpt,
    other: &str,
    grid: &GridOpt,
) -> CliResult<String> {
    let k = body.build()?;
    let l = resolve_body(other, Some(k.dim()))?;
    if l.dim() != k.dim() {
        return Err(input_error(format!(
            "bodies live in different dimensions: {} vs {}",
            k.dim(),
            l.dim()
        )));
    }
    let g = grid.build(k.dim())?;
    let distance = radial_distance(&k, &l, &g);

    #[derive(Serialize)]
    struct Out {
        subcommand: &'static str,
        seed: u64,
        grid: GridMeta,
        distance: f64,
    }
    match cli.format {
        Format::Json => Ok(to_json(&Out {
            subcommand: "radial-distance",
            seed: cli.seed,
            grid: GridMeta::of(&g),
            distance,
        })?),
        Format::Csv => {
            let mut table = Csv::new(
                &format!("radial-distance; seed {}", cli.seed),
                &["distance"],
            );
            table.row(&[distance.into()])?;
            Ok(table.finish())
        }
    }
}

fn run_sections(cli: &Cli, body: &BodyOpt, xi: &str, samples: usize) -> CliResult<String> {
    let k = body.build()?;
    let xi = parse_vector(xi, "--xi")?;
    if xi.len() != k.dim() {
        return Err(input_error(format!(
            "--xi has {} components, the body lives in dimension {}",
            xi.len(),
            k.dim()
        )));
    }
    if samples < 2 {
        return Err(input_error("--samples must be at least 2"));
    }
    let profile = SectionProfile::new(&k, &xi, SectionMethod::Auto, &Tolerances::default())?;
    let rows = profile.sample_uniform(samples)?;

    #[derive(Serialize)]
    struct Out {
        subcommand: &'static str,
        seed: u64,
        xi: Vec<f64>,
        method: String,
        t_max: f64,
        rows: Vec<(f64, f64)>,
    }
    match cli.format {
        Format::Json => Ok(to_json(&Out {
            subcommand: "sections",
            seed: cli.seed,
            xi,
            method: profile.method_name().to_string(),
            t_max: profile.t_max(),
            rows,
        })?),
        Format::Csv => {
            let comment = format!(
                "sections: A(t) along ({}) via {}; seed {}",
                xi.iter()
                    .map(|c| lzero::report::sig12(*c))
                    .collect::<Vec<_>>()
                    .join(", "),
                profile.method_name(),
                cli.seed
            );
            let mut table = Csv::new(&comment, &["t", "A"]);
            for (t, a) in &rows {
                table.row(&[(*t).into(), (*a).into()])?;
            }
            Ok(table.finish())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_errors_exit_3_and_input_errors_exit_2() {
        let f: Failure = Error::BodySpec("bad".into()).into();
        assert_eq!(f.code, 2);
        let f: Failure = Error::InvalidParameter("bad".into()).into();
        assert_eq!(f.code, 2);
        let f: Failure = Error::NonFinite {
            context: "x".into(),
        }
        .into();
        assert_eq!(f.code, 3);
        let f: Failure = Error::KernelMass { got: 1.2, tol: 1e-3 }.into();
        assert_eq!(f.code, 3);
    }

    #[test]
    fn vectors_parse_with_signs_and_spaces() {
        assert_eq!(
            parse_vector("0, -1,2.5", "--xi").unwrap(),
            vec![0.0, -1.0, 2.5]
        );
        assert!(parse_vector("1,,2", "--xi").is_err());
        assert!(parse_vector("1;2", "--xi").is_err());
    }

    #[test]
    fn named_bodies_resolve() {
        assert_eq!(resolve_body("ball", Some(4)).unwrap().dim(), 4);
        assert!(resolve_body("ball", None).is_err());
        assert!(resolve_body("cube", Some(3)).is_err());
        let inline = resolve_body("{\"kind\":\"lq\",\"dim\":3,\"q\":4.0}", None).unwrap();
        assert_eq!(inline.dim(), 3);
    }

    #[test]
    fn cli_declaration_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

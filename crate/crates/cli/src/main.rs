//! `barylab`: evaluate barycentric extensions, solve the discrete Dirichlet
//! problem and run the verification suites, writing CSV and JSON artifacts.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use barylab::barycentric::{Extension, ExtensionOptions};
use barylab::boundary_maps::parse_map_spec;
use barylab::dirichlet::{build_mesh, solve_dirichlet, DirichletOptions, EdgeWeights};
use barylab::hyperbolic::{BPoint, HPoint};
use barylab::linalg::Vector;
use barylab::verification::{run_suite, ExperimentConfig, Suite};

use output::{config_hash, csv, energy_svg, RunDir};

/// Exit status of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Success,
    Partial,
    Unconverged,
}

impl From<Outcome> for ExitCode {
    fn from(outcome: Outcome) -> Self {
        ExitCode::from(match outcome {
            Outcome::Success => 0,
            Outcome::Partial => 2,
            Outcome::Unconverged => 3,
        })
    }
}

type CliResult = Result<Outcome, String>;

#[derive(Parser)]
#[command(name = "barylab", version, about = "Barycentric extensions, discrete harmonic maps and their verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the extension of a boundary map at interior points.
    Extend(ExtendArgs),
    /// Solve the discrete Dirichlet problem on a ball with the extension as
    /// boundary data.
    Dirichlet(DirichletArgs),
    /// Run one verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ExtendArgs {
    /// Boundary map spec, e.g. `power:2` or `compose:power:2|stretch:1.5`.
    #[arg(long)]
    map: String,
    /// Dimension of the boundary sphere.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Quadrature size.
    #[arg(long = "N", default_value_t = 2048)]
    quadrature: usize,
    /// Inline point as comma-separated ball coordinates; repeatable.
    #[arg(long = "point", allow_hyphen_values = true)]
    points: Vec<String>,
    /// File with one point per line, coordinates separated by commas or
    /// whitespace; `#` starts a comment.
    #[arg(long)]
    points_file: Option<PathBuf>,
    /// Points at hyperbolic radii `k R / count` along the first axis.
    #[arg(long)]
    radial: Option<usize>,
    #[arg(long = "R", default_value_t = 5.0)]
    radius: f64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum WeightsArg {
    Uniform,
    Cotangent,
}

#[derive(Args)]
struct DirichletArgs {
    #[arg(long)]
    map: String,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Radius of the hyperbolic ball.
    #[arg(long = "R")]
    radius: f64,
    /// Mesh spacing.
    #[arg(long = "h", default_value_t = 0.1)]
    spacing: f64,
    /// Stop once no vertex moves farther than this in a sweep.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_sweeps: usize,
    #[arg(long = "N", default_value_t = 2048)]
    quadrature: usize,
    /// Edge weights; cotangent on disc meshes and uniform otherwise by
    /// default.
    #[arg(long, value_enum)]
    weights: Option<WeightsArg>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Also plot the energy per sweep to `dirichlet_energy.svg`.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of lipschitz, volume, radial-qi, modulus, annulus-image,
    /// compactness, gravity, trig.
    #[arg(long)]
    suite: String,
    /// JSON file with flat configuration keys; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "N")]
    quadrature: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Points, directions or trials, depending on the suite.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Extend(args) => cmd_extend(&args),
        Command::Dirichlet(args) => cmd_dirichlet(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match result {
        Ok(outcome) => outcome.into(),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

/// Caps the worker pool at `BARYLAB_THREADS` when it is set.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("BARYLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|t| *t > 0).ok_or_else(|| format!("BARYLAB_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> String + '_ {
    move |e| format!("{}: {e}", path.display())
}

fn parse_point(text: &str, dim: usize) -> Result<HPoint<f64>, String> {
    let coords: Vec<f64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad coordinate `{t}` in point `{text}`")))
        .collect::<Result<_, _>>()?;
    if coords.len() != dim {
        return Err(format!("point `{text}` has {} coordinates, expected {dim}", coords.len()));
    }
    HPoint::from_f64(&coords).map_err(|e| format!("point `{text}`: {e}"))
}

fn collect_points(args: &ExtendArgs) -> Result<Vec<HPoint<f64>>, String> {
    let dim = args.n + 1;
    let mut points: Vec<HPoint<f64>> = args.points.iter().map(|p| parse_point(p, dim)).collect::<Result<_, _>>()?;
    if let Some(path) = &args.points_file {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if !line.is_empty() {
                points.push(parse_point(line, dim)?);
            }
        }
    }
    if let Some(count) = args.radial {
        let axis = BPoint::new(Vector::basis(dim, 0)).map_err(|e| e.to_string())?;
        points.extend((1..=count).map(|k| HPoint::radial(&axis, args.radius * k as f64 / count as f64)));
    }
    if points.is_empty() {
        points.push(HPoint::origin(dim));
    }
    Ok(points)
}

#[derive(Serialize)]
struct ExtendConfig<'a> {
    map: &'a str,
    n: usize,
    quadrature_n: usize,
    points: Vec<Vec<f64>>,
}

fn cmd_extend(args: &ExtendArgs) -> CliResult {
    let f = parse_map_spec::<f64>(&args.map, args.n).map_err(|e| e.to_string())?;
    let points = collect_points(args)?;
    let config = ExtendConfig { map: &args.map, n: args.n, quadrature_n: args.quadrature, points: points.iter().map(|p| p.coords().to_f64_vec()).collect() };
    let hash = config_hash("extend", &config);
    let ext = Extension::new(f, ExtensionOptions::default().with_size(args.quadrature)).map_err(|e| e.to_string())?;
    let mut run = RunDir::new(&args.out_dir);
    let dim = args.n + 1;
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|x| {
            let mut row = x.coords().to_f64_vec();
            let evaluated = ext.evaluate(x).and_then(|eval| Ok((eval, ext.refinement(x)?)));
            match evaluated {
                Ok((eval, refinement)) => {
                    row.extend(eval.value.coords().to_f64_vec());
                    row.push(eval.jacobian.map_or(f64::NAN, |j| j.operator_norm()));
                    row.push(refinement);
                    row.push(0.0);
                }
                Err(_) => {
                    row.extend(std::iter::repeat_n(f64::NAN, dim + 2));
                    row.push(1.0);
                }
            }
            row
        })
        .collect();
    run.stage("evaluate");
    let mut columns: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    columns.extend((0..dim).map(|k| format!("f{k}")));
    columns.extend(["df_norm", "refinement", "failed"].map(String::from));
    run.write("extend.csv", &csv(&hash, &columns, &rows)).map_err(io_error(&args.out_dir))?;
    let failed = rows.iter().filter(|r| r[r.len() - 1] != 0.0).count();
    run.stage("write");
    run.finish("extend", &hash, Some(&args.map)).map_err(io_error(&args.out_dir))?;
    if failed > 0 {
        eprintln!("{failed} of {} points failed", rows.len());
        return Ok(Outcome::Partial);
    }
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct DirichletConfig<'a> {
    map: &'a str,
    n: usize,
    radius: f64,
    spacing: f64,
    tol: f64,
    max_sweeps: usize,
    quadrature_n: usize,
    weights: WeightsArg,
}

#[derive(Serialize)]
struct DirichletSummary<'a> {
    config_hash: &'a str,
    map: &'a str,
    vertices: usize,
    rho_r: f64,
    unconverged: bool,
    energy_monotone: bool,
    report: &'a barylab::dirichlet::FlowReport,
}

fn cmd_dirichlet(args: &DirichletArgs) -> CliResult {
    let f = parse_map_spec::<f64>(&args.map, args.n).map_err(|e| e.to_string())?;
    let weights = args.weights.unwrap_or(if args.n == 1 { WeightsArg::Cotangent } else { WeightsArg::Uniform });
    let config = DirichletConfig {
        map: &args.map,
        n: args.n,
        radius: args.radius,
        spacing: args.spacing,
        tol: args.tol,
        max_sweeps: args.max_sweeps,
        quadrature_n: args.quadrature,
        weights,
    };
    let hash = config_hash("dirichlet", &config);
    let edge_weights = match weights {
        WeightsArg::Uniform => EdgeWeights::Uniform,
        WeightsArg::Cotangent => EdgeWeights::Cotangent,
    };
    let mut run = RunDir::new(&args.out_dir);
    let mesh = build_mesh::<f64>(args.n, args.radius, args.spacing, edge_weights).map_err(|e| e.to_string())?;
    run.stage("mesh");
    let opts = DirichletOptions {
        tol: args.tol,
        max_sweeps: args.max_sweeps,
        extension: ExtensionOptions::default().with_size(args.quadrature),
        ..DirichletOptions::default()
    };
    let solution = solve_dirichlet(&f, &mesh, &opts).map_err(|e| e.to_string())?;
    run.stage("solve");
    let dim = args.n + 1;
    let mut columns: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    columns.push("boundary".into());
    columns.extend((0..dim).map(|k| format!("h{k}")));
    columns.extend((0..dim).map(|k| format!("f{k}")));
    columns.push("displacement".into());
    let rows: Vec<Vec<f64>> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, x)| {
            let mut row = x.coords().to_f64_vec();
            row.push(f64::from(u8::from(mesh.is_boundary(v))));
            row.extend(solution.map.value(v).coords().to_f64_vec());
            row.extend(solution.reference[v].coords().to_f64_vec());
            row.push(barylab::hyperbolic::dist(solution.map.value(v), &solution.reference[v]));
            row
        })
        .collect();
    run.write("dirichlet_mesh.csv", &csv(&hash, &columns, &rows)).map_err(io_error(&args.out_dir))?;
    let energy_rows: Vec<Vec<f64>> = solution.report.energies.iter().enumerate().map(|(k, e)| vec![k as f64, *e]).collect();
    run.write("dirichlet_energy.csv", &csv(&hash, &["sweep".into(), "energy".into()], &energy_rows)).map_err(io_error(&args.out_dir))?;
    let report = &solution.report;
    let summary = DirichletSummary {
        config_hash: &hash,
        map: &args.map,
        vertices: mesh.len(),
        rho_r: report.rho_r,
        unconverged: !report.converged,
        energy_monotone: report.is_monotone(1e-12 * report.energies.first().copied().unwrap_or(0.0).abs().max(1.0)),
        report,
    };
    run.write_json("dirichlet_summary.json", &summary).map_err(io_error(&args.out_dir))?;
    if args.svg {
        run.write("dirichlet_energy.svg", &energy_svg(&report.energies)).map_err(io_error(&args.out_dir))?;
    }
    run.stage("write");
    run.finish("dirichlet", &hash, Some(&args.map)).map_err(io_error(&args.out_dir))?;
    println!("rho_R = {:.6e} after {} sweeps", report.rho_r, report.iterations);
    if let Err(e) = report.check() {
        eprintln!("{e}");
        return Ok(Outcome::Unconverged);
    }
    Ok(Outcome::Success)
}

/// Defaults, then the config file, then flags.
fn verify_config(args: &VerifyArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_error(path))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(map) = &args.map {
        cfg.map_spec = Some(map.clone());
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(size) = args.quadrature {
        cfg.quadrature_n = size;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.samples = Some(samples);
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    suite: Suite,
    config_hash: &'a str,
    config: &'a ExperimentConfig,
    passed: bool,
    partial: bool,
    /// Acceptance id to whether every check backing it passed.
    criteria: std::collections::BTreeMap<u8, bool>,
    checks: &'a [barylab::verification::Check],
    scalars: &'a std::collections::BTreeMap<String, f64>,
    failures: &'a [String],
    elapsed_seconds: f64,
}

fn cmd_verify(args: &VerifyArgs) -> CliResult {
    let suite: Suite = args.suite.parse().map_err(|e: barylab::verification::VerificationError| e.to_string())?;
    let cfg = verify_config(args)?;
    let mut run = RunDir::new(&args.out_dir);
    let report = run_suite(suite, &cfg).map_err(|e| e.to_string())?;
    run.stage("run");
    for (name, contents) in report.csv_files() {
        run.write(&name, &contents).map_err(io_error(&args.out_dir))?;
    }
    let mut criteria = std::collections::BTreeMap::new();
    for check in &report.checks {
        if let Some(id) = check.criterion {
            *criteria.entry(id).or_insert(true) &= check.passed;
        }
    }
    let summary = VerifySummary {
        suite,
        config_hash: &report.config_hash,
        config: &report.config,
        passed: report.passed(),
        partial: report.is_partial(),
        criteria,
        checks: &report.checks,
        scalars: &report.scalars,
        failures: &report.failures,
        elapsed_seconds: report.elapsed_seconds,
    };
    run.write_json(&format!("{}_summary.json", suite.name().replace('-', "_")), &summary).map_err(io_error(&args.out_dir))?;
    run.stage("write");
    run.finish("verify", &report.config_hash, report.config.map_spec.as_deref()).map_err(io_error(&args.out_dir))?;
    for check in &report.checks {
        println!("{} {}{}", if check.passed { "PASS" } else { "FAIL" }, check.name, if check.detail.is_empty() { String::new() } else { format!(" ({})", check.detail) });
    }
    if report.passed() && !report.is_partial() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Partial)
    }
}

//! `echoform`: synthesize far-field data, run the reconstruction pipeline,
//! and check the solver against the disk oracle.

mod config;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{load_calibration, parse_grid, Outputs, SynthArgs};
use echoform::export::{
    directions_from, save_grid, write_json, BoundaryLambdaEntry, ByBeta, ClassificationEntry, PipelineReport,
    SignTestEntry, Verdict,
};
use echoform::inversion::{
    a1_hull, calibrate, curve_samples, dn_sign_test, estimate_impedance, indicator_i, indicator_t, label_lambda,
    lambda_with_boundary, ridge_extract, Calibration, Classification, ClassifyMode, ImpedanceEstimate,
    IndicatorOutput, OrientedPoint, SignVerdict,
};
use echoform::oracle::{disk_far_field, reference_table, DiskSpec, TABLE_RADIUS};
use echoform::solver::{required_nodes, BoundaryCondition, FactorizedScatterer, ScattererSpec};
use echoform::synthesis::{add_noise, DirectionConfig, build_direction_set, load_dataset, save_dataset, synthesize, FarFieldDataset};
use echoform::{BoundaryCurve, Complex64, Vec2};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "echoform", version, about = "Multi-frequency backscattering: synthesis and reconstruction")]
struct Cli {
    /// Worker threads; 1 keeps output bit-stable
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem and write a far-field dataset
    Synthesize {
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classification, impedance, indicator and sign test in one run
    Pipeline(PipelineArgs),
    /// Indicator grid only
    Reconstruct(PipelineArgs),
    /// Per-direction impedance, with or without the boundary
    Impedance(ImpedanceArgs),
    /// ℒ table and boundary-condition classification
    Classify(ClassifyArgs),
    /// Compare oracle, solver and the reference table
    Oracle(OracleArgs),
    /// Fit the phase convention against the disk oracle
    Calibrate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IndicatorKind {
    #[value(name = "I")]
    I,
    #[value(name = "T")]
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundarySource {
    Hull,
    Ridge,
    Known,
}

#[derive(Debug, Clone, Args)]
struct DataArgs {
    /// Dataset file; without it the synthesis flags are used
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    synth: SynthArgs,
}

impl DataArgs {
    fn load(&self) -> Result<FarFieldDataset> {
        match &self.data {
            Some(path) => load_dataset(path).with_context(|| format!("loading {}", path.display())),
            None => synthesize_from(&self.synth),
        }
    }
}

#[derive(Debug, Clone, Args)]
struct ClassifierArgs {
    /// Minimum-over-directions criterion for non-convex obstacles
    #[arg(long)]
    concave: bool,
    /// Require both rotations to pass (default: only in concave mode)
    #[arg(long, conflicts_with = "either")]
    require_both: bool,
    /// Accept either rotation (default in convex mode)
    #[arg(long)]
    either: bool,
}

impl ClassifierArgs {
    fn mode(&self) -> (ClassifyMode, bool) {
        let mode = if self.concave { ClassifyMode::Concave } else { ClassifyMode::Convex };
        let both = if self.require_both {
            true
        } else if self.either {
            false
        } else {
            mode.default_require_both()
        };
        (mode, both)
    }
}

#[derive(Debug, Clone, Args)]
struct PipelineArgs {
    #[command(flatten)]
    data: DataArgs,
    /// A2 dataset for the classification and λ̃ steps (default: the imaged data)
    #[arg(long)]
    impedance_data: Option<PathBuf>,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[arg(long, value_enum, default_value = "I")]
    indicator: IndicatorKind,
    /// xmin:xmax:ymin:ymax:h
    #[arg(long, default_value = "-3:3:-3:3:0.01", allow_hyphen_values = true)]
    grid: String,
    /// Boundary estimate for the sign test
    #[arg(long, value_enum, default_value = "hull")]
    boundary: BoundarySource,
    /// Quantile for ridge extraction
    #[arg(long, default_value_t = 0.95)]
    quantile: f64,
    /// Bound on the obstacle diameter for the tangent scan
    #[arg(long, default_value_t = 6.0)]
    diam_bound: f64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Print the report to stdout
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Args)]
struct ImpedanceArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Use the known boundary given by --geometry
    #[arg(long, conflicts_with = "no_boundary")]
    with_boundary: bool,
    /// Rotated-pair statistic, boundary unknown (default)
    #[arg(long)]
    no_boundary: bool,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Args)]
struct OracleArgs {
    #[arg(long)]
    json: bool,
    /// Scale applied to the quadrature node floor
    #[arg(long, default_value_t = 1.0, hide = true)]
    node_factor: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::FAILURE;
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Synthesize { synth, out } => {
            let data = synthesize_from(&synth)?;
            let mut outputs = Outputs::default();
            outputs.add([out.clone()]);
            save_dataset(&data, &out)?;
            outputs.commit();
            println!("wrote {} records to {}", data.records.len(), out.display());
        }
        Command::Pipeline(args) => pipeline(&args, true)?,
        Command::Reconstruct(args) => pipeline(&args, false)?,
        Command::Impedance(args) => impedance(&args)?,
        Command::Classify(args) => classify(&args)?,
        Command::Oracle(args) => return oracle(&args),
        Command::Calibrate { out } => {
            let report = calibrate()?;
            let text = serde_json::to_string_pretty(&report)?;
            println!("{text}");
            if let Some(path) = out {
                std::fs::write(&path, text + "\n")?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn synthesize_from(args: &SynthArgs) -> Result<FarFieldDataset> {
    let spec = args.spec()?;
    let pairs = build_direction_set(args.directions, args.config()?)?;
    let grid = args.grid()?;
    let clean = synthesize(&spec, &pairs, &grid)?;
    if args.noise > 0.0 {
        Ok(add_noise(&clean, args.noise, args.seed)?)
    } else {
        Ok(clean)
    }
}

fn estimate(data: &FarFieldDataset, classifier: &ClassifierArgs) -> Result<ImpedanceEstimate> {
    let (mode, both) = classifier.mode();
    Ok(estimate_impedance(data, mode, both)?)
}

fn is_a2(data: &FarFieldDataset) -> bool {
    matches!(data.manifest.directions.config, DirectionConfig::A2 { .. })
}

fn pipeline(args: &PipelineArgs, full: bool) -> Result<()> {
    let cal = load_calibration()?;
    let grid_spec = parse_grid(&args.grid)?;
    let data = args.data.load()?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut outputs = Outputs::default();

    // Steps 1 and 2: ℒ table, classification, λ̃.
    let (source, est) = match &args.impedance_data {
        Some(path) => {
            let other = load_dataset(path).with_context(|| format!("loading {}", path.display()))?;
            (Some(path.display().to_string()), Some(estimate(&other, &args.classifier)?))
        }
        None if is_a2(&data) => (None, Some(estimate(&data, &args.classifier)?)),
        None => (None, None),
    };
    if let Some(e) = &est {
        if e.rows.len() != data.base_directions().len() {
            bail!(
                "impedance data has {} directions but the imaged data has {}",
                e.rows.len(),
                data.base_directions().len()
            );
        }
    }

    // Step 3: indicator.
    let (output, name): (IndicatorOutput, &str) = match args.indicator {
        IndicatorKind::I => {
            let gamma = match &est {
                Some(e) => e.gamma(),
                None => bail!("indicator I needs an A2 dataset or --impedance-data for the γ̃ weights"),
            };
            (indicator_i(&data, &gamma, &grid_spec, &cal)?, "I")
        }
        IndicatorKind::T => (indicator_t(&data, &grid_spec, &cal)?, "T"),
    };
    outputs.add(save_grid(&output.grid, &args.out.join(format!("indicator_{name}")))?);

    if full {
        // Step 4: sign test on 𝓘.
        let mut sign_test = None;
        let mut boundary_estimate = None;
        if args.indicator == IndicatorKind::I {
            let boundary = boundary_points(args, &data, &cal, &output)?;
            let (verdict, outer, inner) = dn_sign_test(&output.grid, &boundary)?;
            sign_test = Some(SignTestEntry { verdict, outer_mean: outer, inner_mean: inner });
            boundary_estimate = Some(format!("{:?}", args.boundary).to_lowercase());
        }
        let verdict = match (est.as_ref().map(|e| e.classification), &sign_test) {
            (Some(Classification::Impedance), _) => Verdict::Impedance,
            (_, Some(SignTestEntry { verdict: SignVerdict::Dirichlet, .. })) => Verdict::Dirichlet,
            (_, Some(SignTestEntry { verdict: SignVerdict::Neumann, .. })) => Verdict::Neumann,
            _ => Verdict::DirichletOrNeumann,
        };
        let report = PipelineReport {
            verdict,
            classification: est.as_ref().map(|e| ClassificationEntry {
                classification: e.classification,
                mode: e.mode,
                require_both: e.require_both,
                alphas: e.alphas,
                source: source.clone(),
            }),
            indicator: name.to_string(),
            sign_test,
            boundary_estimate,
            imag_ratio: output.imag_ratio,
            skipped_directions: output.skipped.clone(),
            calibration: cal,
            directions: est.as_ref().map(directions_from).unwrap_or_default(),
        };
        let path = args.out.join("report.json");
        outputs.add([path.clone()]);
        write_json(&report, &path)?;
        if args.json {
            println!("{}", serde_json::to_string_pretty(&report)?);
        } else {
            println!("verdict: {}", serde_json::to_value(verdict)?.as_str().unwrap_or("?"));
        }
    }
    for p in outputs.commit() {
        if !args.json {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn boundary_points(
    args: &PipelineArgs,
    data: &FarFieldDataset,
    cal: &Calibration,
    output: &IndicatorOutput,
) -> Result<Vec<OrientedPoint>> {
    Ok(match args.boundary {
        BoundarySource::Hull => {
            let (hull, _) = a1_hull(data, args.diam_bound, cal)?;
            hull.boundary_samples(2.0 * output.grid.spec.h)?
        }
        BoundarySource::Ridge => {
            let t = indicator_t(data, &output.grid.spec, cal)?;
            ridge_extract(&t.grid, args.quantile)?
        }
        BoundarySource::Known => {
            let curve: BoundaryCurve = args.data.synth.curve()?;
            curve_samples(&curve, 512)?
        }
    })
}

#[derive(Serialize)]
struct ImpedanceReport {
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<Classification>,
    directions: serde_json::Value,
}

fn impedance(args: &ImpedanceArgs) -> Result<()> {
    let cal = load_calibration()?;
    let data = args.data.load()?;
    let report = if args.with_boundary {
        let curve = args.data.synth.curve()?;
        let mut map = serde_json::Map::new();
        for theta in data.base_directions() {
            let xhat = -theta;
            let entry = match lambda_with_boundary(&data, &curve, xhat, &cal) {
                Ok(l) => BoundaryLambdaEntry { lambda: Some(l), label: Some(label_lambda(l)), error: None },
                Err(e) => BoundaryLambdaEntry { lambda: None, label: None, error: Some(e.to_string()) },
            };
            map.insert(format!("{:.6}", xhat.angle()), serde_json::to_value(entry)?);
        }
        ImpedanceReport { method: "with-boundary", classification: None, directions: map.into() }
    } else {
        let est = estimate(&data, &args.classifier)?;
        ImpedanceReport {
            method: "no-boundary",
            classification: Some(est.classification),
            directions: serde_json::to_value(directions_from(&est))?,
        }
    };
    let text = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn classify(args: &ClassifyArgs) -> Result<()> {
    let data = args.data.load()?;
    let est = estimate(&data, &args.classifier)?;
    if args.json {
        #[derive(Serialize)]
        struct Out<'a> {
            classification: Classification,
            mode: ClassifyMode,
            require_both: bool,
            alphas: [u32; 2],
            directions: &'a ByBeta,
        }
        let dirs = directions_from(&est);
        let out = Out {
            classification: est.classification,
            mode: est.mode,
            require_both: est.require_both,
            alphas: est.alphas,
            directions: &dirs,
        };
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("{:>10} {:>10} {:>10}", "beta", "L1", "L2");
        for r in &est.rows {
            println!("{:>10.4} {:>10.5} {:>10.5}", r.beta, r.l1, r.l2);
        }
        println!("classification: {}", serde_json::to_value(est.classification)?.as_str().unwrap_or("?"));
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleRow {
    cell: String,
    reference: Complex64,
    oracle: Complex64,
    solver: Complex64,
    oracle_diff: f64,
    solver_diff: f64,
    nodes: usize,
}

/// Larger of the component-wise differences.
fn component_diff(a: Complex64, b: Complex64) -> f64 {
    (a.re - b.re).abs().max((a.im - b.im).abs())
}

fn oracle(args: &OracleArgs) -> Result<ExitCode> {
    if !(args.node_factor > 0.0) {
        bail!("node factor must be positive");
    }
    let disk = BoundaryCurve::disk(TABLE_RADIUS, Vec2::default())?;
    let mut rows = Vec::new();
    for cell in reference_table() {
        let (xhat, theta) = cell.directions();
        let oracle = disk_far_field(&DiskSpec::centered(TABLE_RADIUS, cell.bc)?, xhat, theta, cell.k)?;
        let spec = ScattererSpec::new(disk.clone(), BoundaryCondition::try_from(cell.bc)?)?;
        let nodes = scaled_nodes(&disk, cell.k, args.node_factor);
        // Unchecked so that a coarse rule shows up as a diff, not a refusal.
        let solver = FactorizedScatterer::new_unchecked(&spec, cell.k, nodes)
            .and_then(|f| f.far_field_matrix(&[theta], &[xhat]))
            .map_err(|e| anyhow!("{}: {e}", cell.label()))?[(0, 0)];
        rows.push(OracleRow {
            cell: cell.label(),
            reference: cell.value,
            oracle,
            solver,
            oracle_diff: component_diff(oracle, cell.value),
            solver_diff: component_diff(solver, cell.value),
            nodes,
        });
    }
    let worst = rows.iter().map(|r| r.oracle_diff.max(r.solver_diff)).fold(0.0, f64::max);
    let pass = worst <= 2e-3;
    if args.json {
        let mut out = BTreeMap::new();
        out.insert("pass", serde_json::to_value(pass)?);
        out.insert("max_diff", serde_json::to_value(worst)?);
        out.insert("rows", serde_json::to_value(&rows)?);
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("{:<28} {:>22} {:>22} {:>22} {:>9} {:>9}", "cell", "table", "oracle", "solver", "d_oracle", "d_solver");
        let fmt = |z: Complex64| format!("{:+.5}{:+.5}i", z.re, z.im);
        for r in &rows {
            println!(
                "{:<28} {:>22} {:>22} {:>22} {:>9.1e} {:>9.1e}",
                r.cell,
                fmt(r.reference),
                fmt(r.oracle),
                fmt(r.solver),
                r.oracle_diff,
                r.solver_diff
            );
        }
        println!("max diff {worst:.2e}: {}", if pass { "ok" } else { "FAILED (limit 2e-3)" });
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn scaled_nodes(curve: &BoundaryCurve, k: f64, factor: f64) -> usize {
    let n = (required_nodes(curve, k) as f64 * factor).round() as usize;
    (n.max(8) + 1) / 2 * 2
}

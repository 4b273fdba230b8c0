//! Command-line surface for the curvature-flow toolkit.
//!
//! Subcommands: `run` (evolve a network and record a trajectory),
//! `analyze` (audit CSVs from a recorded trajectory), `shrinker`
//! (construct self-similar solutions) and `validate` (admissibility
//! report, optionally writing a reparametrized network).
//!
//! Exit codes: 0 success, 2 validation failure, 3 solver error, 4 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use curvenet::diagnostics;
use curvenet::flow::{
    self, AdmissibilityTolerances, FlowState, MakeAdmissibleOptions, SolverConfig,
};
use curvenet::geometry::resample_arclength;
use curvenet::io;
use curvenet::monotonicity;
use curvenet::selfsimilar::{self, ShrinkerKind};
use curvenet::Vec2;

const OUTPUT_DIR_ENV: &str = "CURVENET_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "curvenet",
    about = "Motion by curvature of planar curve networks: solver, diagnostics and self-similar solutions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a network file and record snapshots + diagnostics.
    Run(RunArgs),
    /// Produce audit CSVs from a recorded trajectory directory.
    Analyze(AnalyzeArgs),
    /// Construct a self-similar solution and write it as a network file.
    Shrinker(ShrinkerArgs),
    /// Check a network file against the admissibility conditions.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Input network file.
    #[arg(long)]
    input: PathBuf,
    /// Output directory (default: $CURVENET_OUTPUT_DIR or ./curvenet-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time step.
    #[arg(long)]
    dt: f64,
    /// Final time.
    #[arg(long)]
    t_max: f64,
    /// Resample every curve to this many segments before running.
    #[arg(long)]
    grid: Option<usize>,
    /// Snapshot cadence in steps.
    #[arg(long, default_value_t = 100)]
    record_every: usize,
    /// Junction Newton tolerance.
    #[arg(long, default_value_t = 1e-10)]
    newton_tol: f64,
    #[arg(long, default_value_t = 25)]
    max_newton_iters: usize,
    /// Arclength re-equidistribution threshold (max/min spacing ratio).
    #[arg(long, default_value_t = 3.0)]
    resample_threshold: f64,
    /// Stop when a curve is shorter than this.
    #[arg(long, default_value_t = 1e-3)]
    min_length: f64,
    /// Stop when the sampled curvature exceeds this.
    #[arg(long, default_value_t = 1e4)]
    max_curvature: f64,
    /// Reparametrize to an admissible initial parametrization first.
    #[arg(long)]
    make_admissible: bool,
    /// Tolerance on the junction tangent sum during validation.
    #[arg(long, default_value_t = 1e-3)]
    tangent_tol: f64,
    /// Tolerance on flow-velocity mismatch during validation.
    #[arg(long, default_value_t = 1e-2)]
    velocity_tol: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Trajectory directory written by `run`.
    #[arg(long)]
    trajectory: PathBuf,
    /// Output directory for the audit CSVs (default: the trajectory dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit length_law.csv.
    #[arg(long)]
    length_law: bool,
    /// Emit area_law_<i>.csv for every tracked loop.
    #[arg(long)]
    area_law: bool,
    /// Emit blowup_fit.csv.
    #[arg(long)]
    blowup_fit: bool,
    /// Monotonicity probe "t0,x,y"; repeatable, emits monotonicity_<j>.csv.
    #[arg(
        long = "monotonicity",
        value_name = "T0,X,Y",
        allow_hyphen_values = true
    )]
    monotonicity: Vec<String>,
    /// Limit-density probe "x,y"; repeatable, emits limit_density.csv.
    #[arg(long = "limit-density", value_name = "X,Y", allow_hyphen_values = true)]
    limit_density: Vec<String>,
    /// Limit-density map "xmin,xmax,ymin,ymax,nx,ny"; emits density_map.csv.
    #[arg(
        long = "density-map",
        value_name = "XMIN,XMAX,YMIN,YMAX,NX,NY",
        allow_hyphen_values = true
    )]
    density_map: Option<String>,
    /// Worker threads for density maps (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ShrinkerArgs {
    /// circle | triod | spoon | lens | abresch-langer
    #[arg(long)]
    kind: String,
    /// Output network file.
    #[arg(long)]
    out: PathBuf,
    /// Samples per curve.
    #[arg(long, default_value_t = 1600)]
    samples: usize,
    /// Initial apsis distance for abresch-langer.
    #[arg(long, default_value_t = 0.5)]
    r0: f64,
    /// Integration step budget for abresch-langer.
    #[arg(long, default_value_t = 4_000_000)]
    max_steps: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// Network file to check.
    path: PathBuf,
    /// Write a reparametrized admissible network here on success.
    #[arg(long, value_name = "OUT")]
    make_admissible: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    tangent_tol: f64,
    #[arg(long, default_value_t = 1e-2)]
    velocity_tol: f64,
}

enum CliError {
    Validation(String),
    Solver(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Solver(m) | CliError::Io(m) => m,
        }
    }
}

impl From<io::IoError> for CliError {
    fn from(e: io::IoError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<flow::FlowError> for CliError {
    fn from(e: flow::FlowError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<curvenet::geometry::GeometryError> for CliError {
    fn from(e: curvenet::geometry::GeometryError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<diagnostics::DiagnosticsError> for CliError {
    fn from(e: diagnostics::DiagnosticsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<monotonicity::MonotonicityError> for CliError {
    fn from(e: monotonicity::MonotonicityError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<selfsimilar::SelfSimilarError> for CliError {
    fn from(e: selfsimilar::SelfSimilarError) -> Self {
        CliError::Solver(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Shrinker(args) => cmd_shrinker(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn default_out_dir(requested: Option<PathBuf>) -> PathBuf {
    requested.unwrap_or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("curvenet-out"))
    })
}

fn write_text(path: &Path, body: String) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let out_dir = default_out_dir(args.out);
    let (mut network, _meta) = io::load_network(&args.input)?;
    if let Some(n) = args.grid {
        for c in network.curves.iter_mut() {
            *c = resample_arclength(c, n)?;
        }
    }
    let tolerances = AdmissibilityTolerances {
        tangent_sum: args.tangent_tol,
        velocity: args.velocity_tol,
        ..Default::default()
    };
    if args.make_admissible {
        network = flow::make_admissible(&network, &MakeAdmissibleOptions::default())?;
    }
    let report = flow::check_admissible(&network, &tolerances)?;
    if !report.passes() {
        return Err(CliError::Validation(format!(
            "network is not an admissible initial parametrization \
             (re-run with --make-admissible if it is geometrically admissible)\n{}",
            report.summary()
        )));
    }
    let config = SolverConfig {
        dt: args.dt,
        max_newton_iters: args.max_newton_iters,
        newton_tol: args.newton_tol,
        resample_threshold: args.resample_threshold,
        min_curve_length: args.min_length,
        max_curvature: args.max_curvature,
        record_every: args.record_every,
    };
    let trajectory = flow::evolve(FlowState::new(network), &config, args.t_max)?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    io::save_trajectory(&trajectory, &out_dir)?;
    let class = diagnostics::singularity_classify(&trajectory);
    println!(
        "run finished at t = {} ({:?}); classified {:?}; {} snapshots -> {}",
        trajectory.termination.time,
        trajectory.termination.reason,
        class.kind,
        trajectory.snapshots.len(),
        out_dir.display()
    );
    Ok(())
}

fn parse_floats(spec: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<f64> = spec
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Validation(format!("bad {what} spec `{spec}`: {e}")))?;
    if parts.len() != n {
        return Err(CliError::Validation(format!(
            "{what} spec `{spec}` needs {n} comma-separated numbers"
        )));
    }
    Ok(parts)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let trajectory = io::load_trajectory(&args.trajectory)?;
    let out_dir = args.out.unwrap_or_else(|| args.trajectory.clone());
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;

    if args.length_law {
        let samples = diagnostics::length_law_audit(&trajectory)?;
        let mut buf = Vec::new();
        io::write_length_law_csv(&samples, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        write_text(
            &out_dir.join("length_law.csv"),
            String::from_utf8_lossy(&buf).into_owned(),
        )?;
        println!("length_law.csv: {} rows", samples.len());
    }
    if args.area_law {
        if trajectory.loops.is_empty() {
            return Err(CliError::Validation("trajectory tracks no loops".into()));
        }
        for i in 0..trajectory.loops.len() {
            let audit = diagnostics::area_law_audit(&trajectory, i)?;
            let mut buf = Vec::new();
            io::write_area_law_csv(&audit, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
            write_text(
                &out_dir.join(format!("area_law_{i}.csv")),
                String::from_utf8_lossy(&buf).into_owned(),
            )?;
            println!(
                "area_law_{i}.csv: fitted slope {:.6} vs expected {:.6} (m = {})",
                audit.fitted_slope, audit.expected_slope, audit.junction_count
            );
        }
    }
    if args.blowup_fit {
        let fit = diagnostics::blowup_fit(&trajectory, None)?;
        let mut buf = Vec::new();
        io::write_blowup_fit_csv(&fit, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        write_text(
            &out_dir.join("blowup_fit.csv"),
            String::from_utf8_lossy(&buf).into_owned(),
        )?;
        println!(
            "blowup_fit.csv: ∫k² exponent {:.4}, sup k² exponent {:.4}",
            fit.integral_exponent, fit.sup_exponent
        );
    }
    for (j, spec) in args.monotonicity.iter().enumerate() {
        let v = parse_floats(spec, 3, "monotonicity probe")?;
        let samples = monotonicity::monotonicity_audit(&trajectory, v[0], Vec2::new(v[1], v[2]))?;
        let mut buf = Vec::new();
        io::write_monotonicity_csv(&samples, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        write_text(
            &out_dir.join(format!("monotonicity_{j}.csv")),
            String::from_utf8_lossy(&buf).into_owned(),
        )?;
        println!("monotonicity_{j}.csv: {} rows", samples.len());
    }
    if !args.limit_density.is_empty() {
        let mut rows = Vec::new();
        for spec in &args.limit_density {
            let v = parse_floats(spec, 2, "limit-density probe")?;
            let p = Vec2::new(v[0], v[1]);
            let ld = monotonicity::limit_density(&trajectory, p)?;
            println!("limit density at ({}, {}) = {:.6}", p.x, p.y, ld.value);
            rows.push((p, ld.value));
        }
        let mut buf = Vec::new();
        io::write_density_map_csv(&rows, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        write_text(
            &out_dir.join("limit_density.csv"),
            String::from_utf8_lossy(&buf).into_owned(),
        )?;
    }
    if let Some(spec) = &args.density_map {
        let v = parse_floats(spec, 6, "density map")?;
        let (nx, ny) = (v[4] as usize, v[5] as usize);
        if nx == 0 || ny == 0 {
            return Err(CliError::Validation("density map needs nx, ny >= 1".into()));
        }
        let rows = density_map_parallel(&trajectory, v[0], v[1], v[2], v[3], nx, ny, args.workers)?;
        let mut buf = Vec::new();
        io::write_density_map_csv(&rows, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        write_text(
            &out_dir.join("density_map.csv"),
            String::from_utf8_lossy(&buf).into_owned(),
        )?;
        println!("density_map.csv: {} probes", rows.len());
    }
    Ok(())
}

/// Limit-density map computed by a bounded worker pool over probe points.
#[allow(clippy::too_many_arguments)]
fn density_map_parallel(
    trajectory: &curvenet::flow::Trajectory,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
    workers: Option<usize>,
) -> Result<Vec<(Vec2, f64)>, CliError> {
    let probes: Vec<Vec2> = (0..nx * ny)
        .map(|i| {
            let (jx, jy) = (i % nx, i / nx);
            let fx = if nx > 1 {
                jx as f64 / (nx - 1) as f64
            } else {
                0.5
            };
            let fy = if ny > 1 {
                jy as f64 / (ny - 1) as f64
            } else {
                0.5
            };
            Vec2::new(x_min + (x_max - x_min) * fx, y_min + (y_max - y_min) * fy)
        })
        .collect();
    let pool = workers
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .clamp(1, 32);
    let chunk = probes.len().div_ceil(pool);
    let mut values: Vec<Result<f64, monotonicity::MonotonicityError>> =
        (0..probes.len()).map(|_| Ok(0.0)).collect();
    std::thread::scope(|scope| {
        for (slot, chunk_probes) in values.chunks_mut(chunk).zip(probes.chunks(chunk)) {
            scope.spawn(move || {
                for (v, p) in slot.iter_mut().zip(chunk_probes) {
                    *v = monotonicity::limit_density(trajectory, *p).map(|ld| ld.value);
                }
            });
        }
    });
    let mut rows = Vec::with_capacity(probes.len());
    for (p, v) in probes.into_iter().zip(values) {
        rows.push((p, v.map_err(CliError::from)?));
    }
    Ok(rows)
}

fn cmd_shrinker(args: ShrinkerArgs) -> Result<(), CliError> {
    let kind = match args.kind.as_str() {
        "circle" => ShrinkerKind::Circle,
        "triod" => ShrinkerKind::Triod,
        "spoon" => ShrinkerKind::Spoon,
        "lens" => ShrinkerKind::Lens,
        "abresch-langer" => ShrinkerKind::AbreschLanger,
        other => {
            return Err(CliError::Validation(format!(
                "unknown shrinker kind `{other}` (circle|triod|spoon|lens|abresch-langer)"
            )))
        }
    };
    let entry = match kind {
        ShrinkerKind::AbreschLanger => selfsimilar::find_abresch_langer(args.r0, args.max_steps)?,
        ShrinkerKind::Spoon => selfsimilar::find_brakke_spoon_with(args.samples)?,
        ShrinkerKind::Lens => selfsimilar::find_lens_with(args.samples)?,
        other => selfsimilar::catalog_entry(other, args.samples)?,
    };
    let mut metadata = io::Metadata::new();
    metadata.insert("kind".into(), serde_json::json!(entry.kind.name()));
    metadata.insert(
        "angle_residual".into(),
        serde_json::json!(entry.angle_residual),
    );
    metadata.insert(
        "shrinker_residual".into(),
        serde_json::json!(entry.shrinker_residual),
    );
    metadata.insert("rescaled_density".into(), serde_json::json!(entry.density));
    if let Some(c) = entry.closure_residual {
        metadata.insert("closure_residual".into(), serde_json::json!(c));
    }
    for (k, v) in &entry.parameters {
        metadata.insert(format!("param_{k}"), serde_json::json!(v));
    }
    io::save_network(&entry.network, metadata, &args.out)?;
    println!(
        "{}: angle residual {:.3e}, shrinker residual {:.3e}, density {:.6} -> {}",
        entry.kind.name(),
        entry.angle_residual,
        entry.shrinker_residual,
        entry.density,
        args.out.display()
    );
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let (network, _meta) = io::load_network(&args.path)?;
    let tolerances = AdmissibilityTolerances {
        tangent_sum: args.tangent_tol,
        velocity: args.velocity_tol,
        ..Default::default()
    };
    let report = flow::check_admissible(&network, &tolerances)?;
    println!("{}", report.summary());
    let flags = report.condition_flags();
    println!(
        "{{\"pass\": {}, \"conditions\": {:?}, \"min_tangent\": {:e}, \"junction_gap\": {:e}, \
         \"tangent_sum\": {:e}, \"velocity_mismatch\": {:e}, \"endpoint_gap\": {:e}, \
         \"endpoint_accel\": {:e}, \"endpoint_velocity\": {:e}}}",
        report.passes(),
        flags,
        report.min_tangent_magnitude,
        report.max_junction_gap,
        report.max_tangent_sum,
        report.max_velocity_mismatch,
        report.max_endpoint_gap,
        report.max_endpoint_accel,
        report.max_endpoint_velocity,
    );
    if let Some(out) = &args.make_admissible {
        let fixed = flow::make_admissible(&network, &MakeAdmissibleOptions::default())?;
        let fixed_report = flow::check_admissible(&fixed, &tolerances)?;
        println!("after reparametrization: {}", fixed_report.summary());
        io::save_network(&fixed, io::Metadata::new(), out)?;
        println!("wrote {}", out.display());
        if !fixed_report.passes() {
            return Err(CliError::Validation(
                "reparametrized network still fails the admissibility check".into(),
            ));
        }
        return Ok(());
    }
    if !report.passes() {
        return Err(CliError::Validation("network is not admissible".into()));
    }
    Ok(())
}

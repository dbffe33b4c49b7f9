//! `hofer-asym`: growth rates of Hofer norms for autonomous flows on open
//! surfaces.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid input, 3 the oracle
//! disagrees with the sweep.

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use hofer_asym_core::decomposition::{
    build_cutoff, decompose, default_epsilon, upper_bound_certificate, DecompositionError,
};
use hofer_asym_core::field::{FieldError, FieldFile, FieldPreset, HamiltonianField};
use hofer_asym_core::flow::{
    convergence_ratio, decomposed_pair, integrate, verify_commutation, ChartFlowSpec, ClosedForm, FlowError,
};
use hofer_asym_core::minimax::{analyze, GrowthReport, MinimaxError};
use hofer_asym_core::oracle::{brute_force_minimax, oracle_matches, OracleError, OracleResult};
use hofer_asym_core::report::{
    certificate_value, decomposition_value, growth_report_value, round_sig, to_canonical_string,
};
use hofer_asym_core::surface::{
    make_standard_surface, ChartKind, MeshData, MeshLoop, Puncture, StandardSurface, SurfaceError,
    SurfaceMesh,
};
use plot::{emit_plot, PlotError};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("oracle disagrees with the sweep: {0}")]
    OracleMismatch(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::OracleMismatch(_) => 3,
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::Inconsistent(_) | SurfaceError::NonContractibleBoundary(_) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<MinimaxError> for CliError {
    fn from(e: MinimaxError) -> Self {
        match e {
            MinimaxError::Surface(s) => s.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<DecompositionError> for CliError {
    fn from(e: DecompositionError) -> Self {
        match e {
            DecompositionError::NonContractibleBoundary(_) | DecompositionError::MismatchedInputs(_) => {
                CliError::Internal(e.to_string())
            }
            DecompositionError::Surface(s) => s.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Surface(s) => s.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<PlotError> for CliError {
    fn from(e: PlotError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "hofer-asym", version, about = "Asymptotic Hofer growth of autonomous flows on open surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Recorded in the output; no computation is randomized.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a standard mesh, or validate a mesh file.
    Mesh(MeshArgs),
    /// Compute c_plus, c_minus, mu and the verdict.
    Analyze(AnalyzeArgs),
    /// Analyze, then build H = K + H0 and the upper-bound certificate.
    Decompose(DecomposeArgs),
    /// Integrate a closed-form flow in a chart and check the decomposition identities.
    Flow(FlowArgs),
    /// Brute-force minimax values by simple-cycle enumeration.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeshKind {
    Plane,
    Cylinder,
    PuncturedPlane,
}

#[derive(Args, Debug)]
struct MeshArgs {
    /// Validate and summarize this mesh instead of generating one.
    #[arg(long, conflicts_with = "kind")]
    validate: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<MeshKind>,
    /// Vertices per side (plane) or per ring (cylinder).
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Number of rings on the cylinder (defaults to `n`).
    #[arg(long)]
    rings: Option<usize>,
    /// Half side of the plane square or half height of the cylinder.
    #[arg(long, default_value_t = 3.0)]
    extent: f64,
    /// Puncture as `x,y,r`; repeatable.
    #[arg(long = "puncture")]
    punctures: Vec<String>,
}

#[derive(Args, Debug)]
struct Inputs {
    /// Mesh file (mesh JSON or a standard surface `{"kind": ...}`).
    #[arg(long)]
    mesh: PathBuf,
    /// Field file (`{"mesh", "values"}` or `{"preset", "params"}`).
    #[arg(long)]
    field: PathBuf,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Cross-check against brute-force enumeration.
    #[arg(long)]
    oracle: bool,
    /// Longest cycle the oracle enumerates (default: vertex count).
    #[arg(long)]
    max_cycle_length: Option<usize>,
    /// Write an SVG plot here.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[command(flatten)]
    analyze: AnalyzeArgs,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    max_cycle_length: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ChartArg {
    Plane,
    Cylinder,
}

#[derive(Args, Debug)]
struct FlowArgs {
    #[arg(long, value_enum)]
    chart: ChartArg,
    /// Preset JSON (`{"preset", "params"}`) or closed form (`{"kind", ...}`).
    #[arg(long)]
    preset: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Number of sample points for the commutation check.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Sample points cover `|x2| <= extent` (and `|x1| <= extent` on the plane).
    #[arg(long, default_value_t = 2.0)]
    extent: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c_plus: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c_minus: f64,
    /// Initial point `x1,x2` of the recorded trajectory.
    #[arg(long, default_value = "0.5,0.25", allow_hyphen_values = true)]
    x0: String,
    /// Write the trajectory as CSV (`t,q,p`).
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn invalid(msg: impl std::fmt::Display) -> CliError {
    CliError::Invalid(msg.to_string())
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_mesh(path: &Path) -> Result<SurfaceMesh, CliError> {
    let v = read_json(path)?;
    if v.get("kind").is_some() {
        let spec: StandardSurface = serde_json::from_value(v).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Ok(make_standard_surface(&spec)?)
    } else {
        let data: MeshData = serde_json::from_value(v).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Ok(SurfaceMesh::from_data(&data)?)
    }
}

fn load_inputs(inputs: &Inputs) -> Result<(SurfaceMesh, HamiltonianField), CliError> {
    let mesh = load_mesh(&inputs.mesh)?;
    let file: FieldFile = serde_json::from_value(read_json(&inputs.field)?)
        .map_err(|e| invalid(format!("{}: {e}", inputs.field.display())))?;
    if let FieldFile::Values { mesh: name, .. } = &file {
        if name != mesh.name() {
            return Err(invalid(format!("field is for mesh '{name}', not '{}'", mesh.name())));
        }
    }
    let field = file.resolve(&mesh)?;
    Ok((mesh, field))
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn loop_ids(mesh: &SurfaceMesh, lp: &Option<MeshLoop>) -> Value {
    lp.as_ref().map_or(json!([]), |l| json!(l.vertex_ids(mesh)))
}

fn oracle_value(mesh: &SurfaceMesh, r: &OracleResult, max_length: usize) -> Value {
    json!({
        "c_plus": r.c_plus,
        "c_minus": r.c_minus,
        "witness_plus": loop_ids(mesh, &r.witness_plus),
        "witness_minus": loop_ids(mesh, &r.witness_minus),
        "simply_connected": r.simply_connected,
        "cycles_examined": r.cycles_examined,
        "max_length": max_length,
    })
}

fn insert(v: &mut Value, key: &str, item: Value) {
    if let Value::Object(map) = v {
        map.insert(key.to_string(), item);
    }
}

/// Runs the analysis part shared by `analyze` and `decompose`. Returns the
/// report object and whether an oracle mismatch occurred.
fn run_analysis(
    args: &AnalyzeArgs,
    seed: Option<u64>,
) -> Result<(SurfaceMesh, HamiltonianField, GrowthReport, Value, Option<String>), CliError> {
    let (mesh, field) = load_inputs(&args.inputs)?;
    let report = analyze(&mesh, &field)?;
    let mut out = growth_report_value(&mesh, &report);
    if let Some(s) = seed {
        insert(&mut out, "seed", json!(s));
    }
    let mut mismatch = None;
    if args.oracle {
        let max_length = args.max_cycle_length.unwrap_or(mesh.vertex_count());
        let oracle = brute_force_minimax(&mesh, &field, max_length)?;
        let ok = oracle_matches(&report, &oracle);
        insert(&mut out, "oracle_match", json!(ok));
        insert(&mut out, "oracle", oracle_value(&mesh, &oracle, max_length));
        if !ok {
            mismatch = Some(format!(
                "sweep ({}, {}) vs oracle ({}, {})",
                report.c_plus, report.c_minus, oracle.c_plus, oracle.c_minus
            ));
        }
    }
    if let Some(path) = &args.plot {
        emit_plot(&mesh, &field, &report, path)?;
    }
    Ok((mesh, field, report, out, mismatch))
}

fn cmd_analyze(args: &AnalyzeArgs, cli: &Cli) -> Result<(), CliError> {
    let (_, _, _, out, mismatch) = run_analysis(args, cli.seed)?;
    write_output(&cli.out, &to_canonical_string(&out))?;
    match mismatch {
        Some(m) => Err(CliError::OracleMismatch(m)),
        None => Ok(()),
    }
}

fn cmd_decompose(args: &DecomposeArgs, cli: &Cli) -> Result<(), CliError> {
    let (mesh, field, report, mut out, mismatch) = run_analysis(&args.analyze, cli.seed)?;
    let epsilon = args.epsilon.unwrap_or_else(|| default_epsilon(&report, &field));
    let d = decompose(&mesh, &field, &report, epsilon, args.kappa)?;
    let cert = upper_bound_certificate(&d, &report)?;
    insert(&mut out, "upper_bound", certificate_value(&cert));
    insert(&mut out, "decomposition", decomposition_value(&mesh, &field.values, &d));
    write_output(&cli.out, &to_canonical_string(&out))?;
    match mismatch {
        Some(m) => Err(CliError::OracleMismatch(m)),
        None => Ok(()),
    }
}

fn cmd_oracle(args: &OracleArgs, cli: &Cli) -> Result<(), CliError> {
    let (mesh, field) = load_inputs(&args.inputs)?;
    let max_length = args.max_cycle_length.unwrap_or(mesh.vertex_count());
    let r = brute_force_minimax(&mesh, &field, max_length)?;
    let mut out = oracle_value(&mesh, &r, max_length);
    insert(&mut out, "mesh", json!(mesh.name()));
    if let Some(s) = cli.seed {
        insert(&mut out, "seed", json!(s));
    }
    write_output(&cli.out, &to_canonical_string(&out))
}

fn parse_floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(invalid(format!("{what} must be {n} comma-separated numbers, got '{s}'"))),
    }
}

fn cmd_mesh(args: &MeshArgs, cli: &Cli) -> Result<(), CliError> {
    if let Some(path) = &args.validate {
        let mesh = load_mesh(path)?;
        let out = json!({
            "name": mesh.name(),
            "vertices": mesh.vertex_count(),
            "edges": mesh.edge_count(),
            "faces": mesh.face_count(),
            "ends": mesh.end_count(),
            "euler_characteristic": mesh.euler_characteristic(),
            "genus": mesh.genus(),
            "simply_connected": mesh.is_simply_connected(),
            "total_area": mesh.total_area(),
        });
        return write_output(&cli.out, &to_canonical_string(&out));
    }
    let kind = args.kind.ok_or_else(|| invalid("either --kind or --validate is required"))?;
    let spec = match kind {
        MeshKind::Plane => StandardSurface::Plane { n: args.n, extent: args.extent },
        MeshKind::Cylinder => StandardSurface::Cylinder {
            n_theta: args.n,
            n_y: args.rings.unwrap_or(args.n),
            half_height: args.extent,
        },
        MeshKind::PuncturedPlane => {
            let punctures = args
                .punctures
                .iter()
                .map(|p| {
                    let v = parse_floats(p, 3, "--puncture")?;
                    Ok(Puncture { center: [v[0], v[1]], radius: v[2] })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            StandardSurface::PuncturedPlane { n: args.n, extent: args.extent, punctures }
        }
    };
    let mesh = make_standard_surface(&spec)?;
    let mut v = serde_json::to_value(mesh.to_data()).map_err(|e| CliError::Internal(e.to_string()))?;
    if let Some(s) = cli.seed {
        insert(&mut v, "seed", json!(s));
    }
    write_output(&cli.out, &to_canonical_string(&v))
}

fn load_closed_form(path: &Path) -> Result<ClosedForm, CliError> {
    let v = read_json(path)?;
    if v.get("kind").is_some() {
        serde_json::from_value(v).map_err(|e| invalid(format!("{}: {e}", path.display())))
    } else {
        let preset: FieldPreset =
            serde_json::from_value(v).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Ok(ClosedForm::Preset { preset })
    }
}

/// Deterministic lattice of `n` points in the chart.
fn sample_points(chart: ChartKind, n: usize, extent: f64) -> Vec<[f64; 2]> {
    let m = (n as f64).sqrt().ceil().max(1.0) as usize;
    let (x_lo, x_span) = match chart {
        ChartKind::Plane => (-extent, 2.0 * extent),
        ChartKind::Cylinder => (0.0, 2.0 * std::f64::consts::PI),
    };
    (0..n)
        .map(|i| {
            let (a, b) = ((i % m) as f64, (i / m) as f64);
            [x_lo + x_span * (a + 0.5) / m as f64, -extent + 2.0 * extent * (b + 0.5) / m as f64]
        })
        .collect()
}

fn cmd_flow(args: &FlowArgs, cli: &Cli) -> Result<(), CliError> {
    let chart = match args.chart {
        ChartArg::Plane => ChartKind::Plane,
        ChartArg::Cylinder => ChartKind::Cylinder,
    };
    if !(args.extent > 0.0 && args.extent.is_finite()) {
        return Err(invalid("--extent must be positive"));
    }
    let h = load_closed_form(&args.preset)?;
    let x0 = parse_floats(&args.x0, 2, "--x0")?;
    let x0 = [x0[0], x0[1]];
    let cutoff = build_cutoff(args.c_minus, args.c_plus, args.epsilon)?;
    let (k, h0) = decomposed_pair(&h, &cutoff);

    let spec = ChartFlowSpec::new(chart, h.clone(), args.step, args.t);
    let traj = integrate(&spec, x0)?;
    let half = integrate(&ChartFlowSpec::new(chart, h.clone(), args.step / 2.0, args.t), x0)?;
    let energy_ratio =
        if half.energy_drift > 0.0 { json!(traj.energy_drift / half.energy_drift) } else { Value::Null };
    let ratio = convergence_ratio(chart, &h, x0, args.t, args.step).map_or(Value::Null, |r| json!(r));
    let points = sample_points(chart, args.samples, args.extent);
    let comm = verify_commutation(chart, &k, &h0, &points, args.t, args.t, args.step)?;

    if let Some(path) = &args.csv {
        let mut csv = String::from("t,q,p\n");
        for (t, x) in &traj.samples {
            csv.push_str(&format!("{},{},{}\n", round_sig(*t), round_sig(x[0]), round_sig(x[1])));
        }
        std::fs::write(path, csv).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    }
    let mut out = json!({
        "chart": match chart { ChartKind::Plane => "plane", ChartKind::Cylinder => "cylinder" },
        "t": args.t,
        "step": args.step,
        "x0": x0,
        "end": traj.end(),
        "energy_drift": traj.energy_drift,
        "energy_drift_half_step": half.energy_drift,
        "convergence_ratio": ratio,
        "energy_drift_ratio": energy_ratio,
        "jacobian_drift": traj.jacobian_drift,
        "commute_error": comm.commute_error,
        "composition_error": comm.composition_error,
        "samples": points.len(),
        "epsilon": args.epsilon,
        "c_plus": args.c_plus,
        "c_minus": args.c_minus,
    });
    if let Some(s) = cli.seed {
        insert(&mut out, "seed", json!(s));
    }
    write_output(&cli.out, &to_canonical_string(&out))
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("HOFER_ASYM_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| invalid(format!("HOFER_ASYM_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Mesh(a) => cmd_mesh(a, cli),
        Command::Analyze(a) => cmd_analyze(a, cli),
        Command::Decompose(a) => cmd_decompose(a, cli),
        Command::Flow(a) => cmd_flow(a, cli),
        Command::Oracle(a) => cmd_oracle(a, cli),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hofer-asym: {e}");
            ExitCode::from(e.code())
        }
    }
}

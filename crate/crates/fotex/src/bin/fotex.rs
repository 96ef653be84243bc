//! Command-line surface: candidate checks, tensor construction from fiber
//! measures, extremization, polar-sweep data, atomic decompositions, and
//! sum-of-squares certificates.
//!
//! stdout carries JSON (or CSV where noted), stderr carries logs. Exit
//! codes: 0 success or affirmative verdict, 1 domain-negative verdict,
//! 2 input error, 3 numerical-tolerance failure.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fotex::error::Error;
use fotex::fot::{check_candidate_km, check_properties, sample_extreme_candidate};
use fotex::io::{
    read_fibers_path, read_tensor, write_fibers_path, write_sweep, write_tensor, TensorFile,
};
use fotex::param::{check_ordering, SymmetryClass};
use fotex::realize::{realize, RealizeOptions, SosOutcome};
use fotex::sdp::{extremize, sweep, SweepGrid};
use fotex::tensor::{Direction, Frame, Sym4};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fotex",
    about = "Fourth-order fiber-orientation tensors: checks, extremal programs, decompositions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether a tensor file is a realizable orientation tensor.
    Check(CheckArgs),
    /// Build orientation tensors from a fiber CSV.
    FromFibers(FromFibersArgs),
    /// Maximize the quartic projection onto a direction at fixed
    /// second-order information.
    Extremize(ExtremizeArgs),
    /// Extremize over a direction grid and emit CSV polar data.
    Sweep(SweepArgs),
    /// Decompose a candidate tensor into at most 15 weighted fibers.
    Realize(RealizeArgs),
    /// Sum-of-squares certificate or separating witness for a quartic.
    Sos(SosArgs),
    /// Generate a random extreme candidate tensor (deterministic per seed).
    SampleExtreme(SampleExtremeArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Tensor JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Membership tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct FromFibersArgs {
    /// Fiber CSV file (header: weight,p_x,p_y,p_z).
    #[arg(long)]
    input: PathBuf,
    /// Moment order.
    #[arg(long, value_parser = parse_order)]
    order: u8,
    /// Output tensor JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Direction-grid size for the positivity audit.
    #[arg(long, default_value_t = 1000)]
    grid: usize,
}

fn parse_order(s: &str) -> Result<u8, String> {
    match s {
        "2" => Ok(2),
        "4" => Ok(4),
        other => Err(format!("order must be 2 or 4, got '{other}'")),
    }
}

#[derive(Args)]
struct ExtremizeArgs {
    #[arg(long)]
    lambda1: f64,
    #[arg(long)]
    lambda2: f64,
    #[arg(long, default_value_t = 0.0)]
    phi_deg: f64,
    #[arg(long, default_value_t = 90.0)]
    theta_deg: f64,
    #[arg(long, value_enum, default_value_t = SymmetryArg::Triclinic)]
    symmetry: SymmetryArg,
    /// Optional path for the maximizing tensor.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    lambda1: f64,
    /// Defaults to 1 - lambda1 in planar mode; required otherwise.
    #[arg(long)]
    lambda2: Option<f64>,
    /// In-plane sweep (theta = 90 degrees, lambda2 = 1 - lambda1).
    #[arg(long, default_value_t = false)]
    planar: bool,
    /// Grid nodes over phi in [0, 90] degrees (planar default: 91).
    #[arg(long)]
    n_phi: Option<usize>,
    /// Grid nodes over theta in [0, 90] degrees; rejected in planar mode.
    #[arg(long)]
    n_theta: Option<usize>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RealizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Dictionary size on the hemisphere.
    #[arg(long, default_value_t = 400)]
    grid: usize,
    /// Target decomposition residual.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output fiber CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SosArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct SampleExtremeArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SymmetryArg {
    Triclinic,
    Orthotropic,
}

impl From<SymmetryArg> for SymmetryClass {
    fn from(v: SymmetryArg) -> Self {
        match v {
            SymmetryArg::Triclinic => SymmetryClass::Triclinic,
            SymmetryArg::Orthotropic => SymmetryClass::Orthotropic,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    if let Ok(threads) = std::env::var("FOTEX_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => log::warn!("ignoring unparsable FOTEX_THREADS value '{threads}'"),
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Maps error kinds onto the stable exit-code contract.
fn classify(err: &Error) -> u8 {
    match err {
        Error::OrderingViolation { .. } | Error::NotCandidate { .. } => EXIT_NEGATIVE,
        Error::ToleranceNotReached { .. } | Error::Solver { .. } | Error::NullSpaceNotFound => {
            EXIT_TOLERANCE
        }
        _ => EXIT_INPUT,
    }
}

fn print_json(value: &serde_json::Value) {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).expect("stdout JSON");
    let _ = out.write_all(b"\n");
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::FromFibers(args) => cmd_from_fibers(args),
        Command::Extremize(args) => cmd_extremize(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Realize(args) => cmd_realize(args),
        Command::Sos(args) => cmd_sos(args),
        Command::SampleExtreme(args) => cmd_sample_extreme(args),
    }
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode, Error> {
    let file = read_tensor(&args.input)?;
    let km = file.to_km()?;
    let report = check_candidate_km(&km, args.tol);
    print_json(&serde_json::to_value(&report)?);
    Ok(if report.is_candidate {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NEGATIVE)
    })
}

fn cmd_from_fibers(args: FromFibersArgs) -> Result<ExitCode, Error> {
    let (measure, load) = read_fibers_path(&args.input)?;
    if load.renormalized_directions > 0 {
        log::warn!(
            "renormalized {} direction(s); worst norm defect {:.3e}",
            load.renormalized_directions,
            load.worst_direction_defect
        );
    }
    let measure = if measure.is_normalized(1e-12) {
        measure
    } else {
        log::warn!(
            "weights sum to {:.17}, normalizing to unit total",
            load.weight_sum
        );
        measure.normalized()?
    };
    let properties = check_properties(&measure, args.grid);
    let payload: serde_json::Value = match args.order {
        2 => {
            let c = *measure.moment2().coeffs();
            let body = json!({
                "format": "fot2-coeffs-v1",
                "coefficients": {
                    "a11": c[0], "a22": c[1], "a33": c[2],
                    "a23": c[3], "a13": c[4], "a12": c[5],
                },
                "properties": serde_json::to_value(&properties)?,
            });
            if let Some(out) = &args.out {
                std::fs::write(out, format!("{body:#}\n"))?;
            }
            body
        }
        _ => {
            let tensor = TensorFile::from_sym4(&measure.moment4(), Frame::Fixed);
            if let Some(out) = &args.out {
                write_tensor(out, &tensor)?;
            }
            json!({
                "tensor": serde_json::to_value(&tensor)?,
                "properties": serde_json::to_value(&properties)?,
            })
        }
    };
    print_json(&payload);
    Ok(ExitCode::SUCCESS)
}

fn cmd_extremize(args: ExtremizeArgs) -> Result<ExitCode, Error> {
    check_ordering(args.lambda1, args.lambda2)?;
    let n = Direction::from_angles(args.phi_deg.to_radians(), args.theta_deg.to_radians());
    let (value, tensor) = extremize(args.lambda1, args.lambda2, &n, args.symmetry.into())?;
    let file = TensorFile::from_sym4(&tensor, Frame::Eigen);
    if let Some(out) = &args.out {
        write_tensor(out, &file)?;
    }
    print_json(&json!({
        "value": value,
        "lambda1": args.lambda1,
        "lambda2": args.lambda2,
        "phi_deg": args.phi_deg,
        "theta_deg": args.theta_deg,
        "symmetry": SymmetryClass::from(args.symmetry).to_string(),
        "tensor": serde_json::to_value(&file)?,
    }));
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, Error> {
    let (lambda2, grid) = if args.planar {
        let expect = 1.0 - args.lambda1;
        if let Some(l2) = args.lambda2 {
            if (l2 - expect).abs() > 1e-12 {
                return Err(Error::Parse(format!(
                    "planar mode requires lambda2 = 1 - lambda1 = {expect}, got {l2}"
                )));
            }
        }
        if args.n_theta.is_some() {
            return Err(Error::Parse(
                "planar mode has no theta grid; drop --n-theta".into(),
            ));
        }
        (expect, SweepGrid::Planar { n_phi: args.n_phi.unwrap_or(91) })
    } else {
        let lambda2 = args
            .lambda2
            .ok_or_else(|| Error::Parse("3D sweeps need --lambda2 (or use --planar)".into()))?;
        (
            lambda2,
            SweepGrid::ThreeD {
                n_phi: args.n_phi.unwrap_or(31),
                n_theta: args.n_theta.unwrap_or(31),
            },
        )
    };
    let result = sweep(args.lambda1, lambda2, grid)?;
    match &args.out {
        Some(path) => {
            let mut buf = Vec::new();
            write_sweep(&mut buf, &result)?;
            std::fs::write(path, buf)?;
        }
        None => {
            let stdout = std::io::stdout().lock();
            write_sweep(stdout, &result)?;
        }
    }
    Ok(if result.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_TOLERANCE)
    })
}

fn cmd_realize(args: RealizeArgs) -> Result<ExitCode, Error> {
    let file = read_tensor(&args.input)?;
    let tensor = file.to_sym4(1e-9)?;
    let opts = RealizeOptions {
        grid_size: args.grid,
        tol: args.tol,
        ..Default::default()
    };
    let (result, code) = match realize(&tensor, &opts) {
        Ok(result) => (result, ExitCode::SUCCESS),
        Err(Error::ToleranceNotReached { best, residual, tol }) => {
            log::warn!("tolerance not reached: residual {residual:.3e} > {tol:.3e}");
            (*best, ExitCode::from(EXIT_TOLERANCE))
        }
        Err(other) => return Err(other),
    };
    if let Some(out) = &args.out {
        write_fibers_path(out, &result.measure)?;
    }
    print_json(&json!({
        "residual": result.residual,
        "atoms": result.atom_count,
        "weight_sum": result.measure.weight_sum(),
        "converged": code == ExitCode::SUCCESS,
    }));
    Ok(code)
}

fn cmd_sos(args: SosArgs) -> Result<ExitCode, Error> {
    let file = read_tensor(&args.input)?;
    let tensor = file.to_sym4(1e-9)?;
    match fotex::realize::sos_certificate(&tensor, args.tol)? {
        SosOutcome::Certificate(cert) => {
            let squares: Vec<Vec<f64>> =
                cert.squares.iter().map(|s| s.coeffs().to_vec()).collect();
            print_json(&json!({
                "feasible": true,
                "gram": cert.gram.entries().to_vec(),
                "squares": squares,
                "reconstruction_residual": cert.reconstruction_residual,
            }));
            Ok(ExitCode::SUCCESS)
        }
        SosOutcome::Infeasible(witness) => {
            let wfile = TensorFile::from_sym4(&witness.candidate, Frame::Fixed);
            print_json(&json!({
                "feasible": false,
                "witness": serde_json::to_value(&wfile)?,
                "pairing": witness.pairing,
            }));
            Ok(ExitCode::from(EXIT_NEGATIVE))
        }
    }
}

fn cmd_sample_extreme(args: SampleExtremeArgs) -> Result<ExitCode, Error> {
    let tensor: Sym4 = sample_extreme_candidate(args.seed)?;
    let file = TensorFile::from_sym4(&tensor, Frame::Fixed);
    if let Some(out) = &args.out {
        write_tensor(out, &file)?;
    }
    let report = fotex::fot::check_candidate(&tensor, 1e-8);
    print_json(&json!({
        "seed": args.seed,
        "tensor": serde_json::to_value(&file)?,
        "report": serde_json::to_value(&report)?,
    }));
    Ok(ExitCode::SUCCESS)
}

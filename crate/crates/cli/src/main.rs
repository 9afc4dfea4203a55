//! `biotraj` command line: plan and compare trajectories, segment recorded
//! lifts, filter series, export classic velocity profiles, and benchmark the
//! swarm optimizer.
//!
//! Exit codes: 0 success, 1 usage error, 2 input-data error, 3 infeasible
//! plan. Failures additionally print one machine-readable JSON line on
//! stderr.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use biotraj_core::phase::{extract_feature_points, segment_by_elbow_angle};
use biotraj_core::planner::{self, PlanConfig, PlannerError};
use biotraj_core::profiles::{classic_profile, ProfileKind};
use biotraj_core::pso::{Bounds, PsoConfig};
use biotraj_core::signal::{
    emg_envelope, load_emg_csv, load_motion_csv, lowpass_zero_phase, EmgRecording, FilterSpec,
    SeriesTable, SignalError, TimeSeries,
};
use biotraj_core::{pso, PhaseSpec};

#[derive(Parser)]
#[command(
    name = "biotraj",
    version,
    about = "Bio-inspired trajectory planning toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the standard-vs-optimized planner and write trajectory CSVs,
    /// power curves, and a summary JSON.
    Plan(PlanArgs),
    /// Plan and print a human-readable comparison table.
    Compare(PlanArgs),
    /// Segment a motion recording into load phases and extract feature
    /// points.
    Segment {
        /// Motion CSV (t,shoulder_angle,elbow_angle[,wrist_accel]).
        #[arg(long)]
        motion: PathBuf,
        /// Optional EMG CSV (t,deltoid,triceps,biceps,brachioradialis).
        #[arg(long)]
        emg: Option<PathBuf>,
        /// Low-pass cutoff for conditioning, Hz; 0 skips filtering.
        #[arg(long, default_value_t = 6.0)]
        cutoff: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Zero-phase low-pass filter every value column of a series CSV.
    Filter {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        cutoff: f64,
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export classic velocity-profile families as trajectory CSVs.
    Profiles {
        /// trapezoid | s_curve | triangle | cubic | quintic | all
        #[arg(long, default_value = "all")]
        kind: String,
        /// Start angle, degrees.
        #[arg(long, default_value_t = 0.0)]
        theta0: f64,
        /// End angle, degrees.
        #[arg(long, default_value_t = 150.0)]
        thetaf: f64,
        /// Duration, seconds.
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sanity-check the optimizer on analytic test functions.
    PsoBench {
        /// sphere | rosenbrock | rastrigin
        #[arg(long = "fn", default_value = "sphere")]
        function: String,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        swarm_size: Option<usize>,
    },
}

#[derive(Args)]
struct PlanArgs {
    /// Planning problem + PSO configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing). Optional for `compare`.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Input { kind: &'static str, message: String },
    Infeasible(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input { .. } => 2,
            CliError::Infeasible(_) => 3,
        }
    }

    fn emit(&self) {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Input { kind, message } => (*kind, message.clone()),
            CliError::Infeasible(m) => ("infeasible_plan", m.clone()),
        };
        eprintln!("{}", json!({ "error": kind, "message": message }));
    }
}

impl From<SignalError> for CliError {
    fn from(err: SignalError) -> Self {
        CliError::Input {
            kind: err.kind(),
            message: err.to_string(),
        }
    }
}

impl From<PlannerError> for CliError {
    fn from(err: PlannerError) -> Self {
        match err {
            PlannerError::InfeasiblePlan(_) => CliError::Infeasible(err.to_string()),
            PlannerError::InvalidProblem(_) => CliError::Usage(err.to_string()),
            other => CliError::Input {
                kind: "planner",
                message: other.to_string(),
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Input {
            kind: "io",
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help/version requests are not errors.
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            CliError::Usage(err.kind().to_string()).emit();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            err.emit();
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Plan(args) => {
            let out = args
                .out
                .clone()
                .ok_or_else(|| CliError::Usage("plan requires --out <DIR>".to_string()))?;
            let (result, target) = run_plan(&args)?;
            write_plan_outputs(&result, target, &out)?;
            println!(
                "plan written to {} (work reduction {:.3}%, peak power reduction {:.3}%)",
                out.display(),
                result.work_reduction_pct,
                result.peak_power_reduction_pct
            );
            Ok(())
        }
        Command::Compare(args) => {
            let (result, target) = run_plan(&args)?;
            print!("{}", result.human_table(target));
            if let Some(out) = &args.out {
                write_plan_outputs(&result, target, out)?;
            }
            Ok(())
        }
        Command::Segment {
            motion,
            emg,
            cutoff,
            out,
        } => run_segment(&motion, emg.as_deref(), cutoff, &out),
        Command::Filter {
            input,
            cutoff,
            order,
            out,
        } => run_filter(&input, cutoff, order, &out),
        Command::Profiles {
            kind,
            theta0,
            thetaf,
            duration,
            dt,
            out,
        } => run_profiles(&kind, theta0, thetaf, duration, dt, &out),
        Command::PsoBench {
            function,
            dim,
            seed,
            iterations,
            swarm_size,
        } => run_pso_bench(&function, dim, seed, iterations, swarm_size),
    }
}

fn threads_from_env() -> usize {
    std::env::var("BIOTRAJ_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn run_plan(args: &PlanArgs) -> Result<(planner::PlanResult, f64), CliError> {
    let text = fs::read_to_string(&args.config).map_err(|err| CliError::Input {
        kind: "io",
        message: format!("{}: {err}", args.config.display()),
    })?;
    let mut config: PlanConfig = serde_json::from_str(&text).map_err(|err| CliError::Input {
        kind: "malformed_config",
        message: err.to_string(),
    })?;
    if let Some(seed) = args.seed {
        config.pso.seed = seed;
    }
    config.pso.threads = threads_from_env();
    let result = planner::optimize_plan(&config.problem, &config.pso)?;
    Ok((result, config.problem.phase.target_peak_angle_deg))
}

fn write_plan_outputs(
    result: &planner::PlanResult,
    target_peak_angle_deg: f64,
    out: &Path,
) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    let write_traj = |name: &str, traj: &biotraj_core::SampledTrajectory| -> Result<(), CliError> {
        let file = fs::File::create(out.join(name))?;
        traj.write_csv(std::io::BufWriter::new(file))
            .map_err(|err| CliError::Input {
                kind: "io",
                message: err.to_string(),
            })
    };
    write_traj("standard_trajectory.csv", &result.standard.trajectory)?;
    write_traj("optimized_trajectory.csv", &result.optimized.trajectory)?;

    let file = fs::File::create(out.join("power_curves.csv"))?;
    result
        .write_power_csv(std::io::BufWriter::new(file))
        .map_err(|err| CliError::Input {
            kind: "io",
            message: err.to_string(),
        })?;

    let summary = result.summary(target_peak_angle_deg);
    let mut file = fs::File::create(out.join("summary.json"))?;
    writeln!(
        file,
        "{}",
        serde_json::to_string_pretty(&summary).expect("serializable")
    )?;
    Ok(())
}

fn condition(series: &TimeSeries, cutoff: f64) -> Result<TimeSeries, CliError> {
    if cutoff == 0.0 {
        return Ok(series.clone());
    }
    let spec = FilterSpec::new(cutoff, 2)?;
    Ok(lowpass_zero_phase(series, &spec)?)
}

fn run_segment(
    motion_path: &Path,
    emg_path: Option<&Path>,
    cutoff: f64,
    out: &Path,
) -> Result<(), CliError> {
    let motion = load_motion_csv(motion_path)?;
    let mut conditioned = motion.clone();
    conditioned.shoulder_angle = condition(&motion.shoulder_angle, cutoff)?;
    conditioned.elbow_angle = condition(&motion.elbow_angle, cutoff)?;

    let emg = emg_path.map(load_emg_csv).transpose()?;
    let enveloped = emg
        .as_ref()
        .map(|rec| -> Result<EmgRecording, CliError> {
            let spec = FilterSpec::emg_default();
            Ok(EmgRecording {
                deltoid: emg_envelope(&rec.deltoid, &spec)?,
                triceps: emg_envelope(&rec.triceps, &spec)?,
                biceps: emg_envelope(&rec.biceps, &spec)?,
                brachioradialis: emg_envelope(&rec.brachioradialis, &spec)?,
            })
        })
        .transpose()?;

    let spec = PhaseSpec::default();
    let intervals = segment_by_elbow_angle(&conditioned.elbow_angle, &spec);
    let features = extract_feature_points(&conditioned, enveloped.as_ref(), &spec)
        .map(Some)
        .or_else(|err| match err {
            biotraj_core::phase::PhaseError::NoPeakFound => Ok(None),
            other => Err(CliError::Input {
                kind: other.kind(),
                message: other.to_string(),
            }),
        })?;

    fs::create_dir_all(out)?;
    let payload = json!({
        "phase_spec": spec,
        "phase_intervals": intervals,
        "feature_points": features,
    });
    let mut file = fs::File::create(out.join("segmentation.json"))?;
    writeln!(
        file,
        "{}",
        serde_json::to_string_pretty(&payload).expect("serializable")
    )?;
    println!("segmentation written to {}", out.display());
    Ok(())
}

fn run_filter(input: &Path, cutoff: f64, order: u32, out: &Path) -> Result<(), CliError> {
    let file = fs::File::open(input).map_err(|err| CliError::Input {
        kind: "io",
        message: format!("{}: {err}", input.display()),
    })?;
    let table = SeriesTable::read(file)?;
    let spec = FilterSpec::new(cutoff, order)?;

    let mut filtered_columns = Vec::with_capacity(table.columns.len());
    let mut t_out = None;
    for column in &table.columns {
        let series = TimeSeries::new(table.t.clone(), column.clone())?;
        let filtered = lowpass_zero_phase(&series, &spec)?;
        t_out.get_or_insert_with(|| filtered.t().to_vec());
        filtered_columns.push(filtered.values().to_vec());
    }
    let result = SeriesTable {
        names: table.names,
        t: t_out.unwrap_or(table.t),
        columns: filtered_columns,
    };
    let file = fs::File::create(out)?;
    result.write(std::io::BufWriter::new(file))?;
    Ok(())
}

fn run_profiles(
    kind: &str,
    theta0_deg: f64,
    thetaf_deg: f64,
    duration: f64,
    dt: f64,
    out: &Path,
) -> Result<(), CliError> {
    let kinds: Vec<ProfileKind> = if kind == "all" {
        ProfileKind::ALL.to_vec()
    } else {
        vec![kind
            .parse()
            .map_err(|err: biotraj_core::profiles::UnknownProfileKind| {
                CliError::Usage(err.to_string())
            })?]
    };
    fs::create_dir_all(out)?;
    for kind in kinds {
        let traj = classic_profile(
            kind,
            theta0_deg.to_radians(),
            thetaf_deg.to_radians(),
            duration,
            dt,
        )
        .map_err(|err| CliError::Usage(err.to_string()))?;
        let file = fs::File::create(out.join(format!("profile_{}.csv", kind.name())))?;
        traj.write_csv(std::io::BufWriter::new(file))
            .map_err(|err| CliError::Input {
                kind: "io",
                message: err.to_string(),
            })?;
    }
    println!("profiles written to {}", out.display());
    Ok(())
}

fn run_pso_bench(
    function: &str,
    dim: usize,
    seed: u64,
    iterations: Option<usize>,
    swarm_size: Option<usize>,
) -> Result<(), CliError> {
    let objective: fn(&[f64]) -> f64 = match function {
        "sphere" => |x| x.iter().map(|v| v * v).sum(),
        "rosenbrock" => |x| {
            x.windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum()
        },
        "rastrigin" => |x| {
            10.0 * x.len() as f64
                + x.iter()
                    .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
                    .sum::<f64>()
        },
        other => return Err(CliError::Usage(format!("unknown test function `{other}`"))),
    };
    if dim == 0 {
        return Err(CliError::Usage("dim must be positive".to_string()));
    }
    let bounds = Bounds::uniform(dim, -5.0, 5.0).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut config = PsoConfig::default().with_seed(seed);
    if let Some(iterations) = iterations {
        config.iterations = iterations;
    }
    if let Some(swarm_size) = swarm_size {
        config.swarm_size = swarm_size;
    }
    config.threads = threads_from_env();
    let result =
        pso::optimize(objective, &bounds, &config).map_err(|e| CliError::Usage(e.to_string()))?;
    let payload = json!({
        "function": function,
        "dim": dim,
        "seed": seed,
        "best_fitness": result.best_fitness,
        "best_position": result.best_position,
        "evaluations": result.evaluations,
        "iterations": result.history.len() - 1,
        "terminated_by": result.terminated_by,
        "generator": result.generator,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&payload).expect("serializable")
    );
    Ok(())
}

//! Command-line front end for the flipperplan morphology planner.
//!
//! Subcommands cover the whole pipeline: synthetic scene generation
//! (`gen-map`), map inflation (`inflate`), whole-body planning (`plan`),
//! kinematic replay with optional disturbances (`simulate`), the full
//! obstacle/rotation experiment grid (`sweep`), and parameter inspection
//! (`params`).
//!
//! Exit codes: 0 success, 2 usage or invalid parameters, 3 planning or
//! geometric infeasibility, 4 I/O and file-format failures. Failures print
//! a single machine-parseable line to stderr: `error: <category>: <message>`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flipperplan::follower::{follow, write_report, DisturbanceSpec, FollowSettings};
use flipperplan::inflation::{inflate, load_inflated, save_inflated, InflatedMap};
use flipperplan::path_search::{
    export_path, import_path, level_start, plan, plan_traced, CandidateRecord, SearchSettings,
};
use flipperplan::robot_model::RobotParams;
use flipperplan::terrain::{
    generate_obstacle, load_map, save_map, MapFormat, ObstacleKind, ObstacleSpec,
};
use flipperplan::Error;

/// Rotations covered by the standard experiment grid, degrees.
const SWEEP_ROTATIONS: [u32; 9] = [0, 5, 10, 15, 20, 25, 30, 35, 40];

#[derive(Parser)]
#[command(
    name = "flipperplan",
    version,
    about = "Whole-body morphology planning for a four-flipper tracked robot",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic obstacle scene as an elevation map file.
    GenMap(GenMapArgs),
    /// Inflate an elevation map by the wheel radius.
    Inflate(InflateArgs),
    /// Plan a whole-body path across a map.
    Plan(PlanArgs),
    /// Replay a planned path with the kinematic follower.
    Simulate(SimulateArgs),
    /// Run the full obstacle/rotation experiment grid.
    Sweep(SweepArgs),
    /// Inspect robot parameters.
    Params(ParamsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Step,
    Ramp,
    Iramp,
}

impl KindArg {
    fn to_kind(self) -> ObstacleKind {
        match self {
            KindArg::Step => ObstacleKind::Step,
            KindArg::Ramp => ObstacleKind::Ramp,
            KindArg::Iramp => ObstacleKind::InverseRamp,
        }
    }
}

#[derive(Args)]
struct GenMapArgs {
    /// Obstacle family.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Clockwise rotation of the obstacle boundary, degrees in [0, 90).
    #[arg(long)]
    rot: f64,
    /// Output map file (`.csv` for comma-separated, anything else for the
    /// space-separated grid format).
    #[arg(long)]
    out: PathBuf,
    /// World x of the obstacle boundary at y = 0, meters.
    #[arg(long)]
    axis_distance: Option<f64>,
    /// Peak feature height, meters.
    #[arg(long)]
    obstacle_height: Option<f64>,
    /// Horizontal run of the sloped section, meters.
    #[arg(long)]
    slope_run: Option<f64>,
    /// Map extent along x, meters.
    #[arg(long)]
    extent_x: Option<f64>,
    /// Map extent along y, meters.
    #[arg(long)]
    extent_y: Option<f64>,
    /// Grid resolution, meters per cell.
    #[arg(long)]
    resolution: Option<f64>,
    /// World x of cell (0, 0), meters.
    #[arg(long)]
    origin_x: Option<f64>,
    /// World y of cell (0, 0), meters.
    #[arg(long)]
    origin_y: Option<f64>,
}

#[derive(Args)]
struct InflateArgs {
    /// Input elevation map file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output inflated map file.
    #[arg(long)]
    out: PathBuf,
    /// Inflation radius (wheel radius), meters.
    #[arg(long, default_value_t = 0.035)]
    radius: f64,
}

/// Robot parameter sources shared by plan/simulate/sweep: an optional
/// config file, then explicit flags that beat the file.
#[derive(Args)]
struct RobotArgs {
    /// Robot parameter config file (`name = value` lines); missing keys
    /// keep their defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override the wheel radius from the config file / defaults, meters.
    #[arg(long)]
    wheel_radius: Option<f64>,
}

impl RobotArgs {
    fn resolve(&self) -> Result<RobotParams, Error> {
        let mut robot = match &self.params {
            Some(path) => RobotParams::from_config_file(path)?,
            None => RobotParams::default(),
        };
        if let Some(r) = self.wheel_radius {
            robot.wheel_radius = r;
        }
        robot.validate()?;
        Ok(robot)
    }
}

#[derive(Args)]
struct SearchArgs {
    /// Forward advance of the reference joint per step, meters.
    #[arg(long)]
    dx: Option<f64>,
    /// Spacing of the reference lift ladder, meters.
    #[arg(long)]
    dh: Option<f64>,
    /// Number of lifts tried per side and step.
    #[arg(long)]
    h_samples: Option<usize>,
    /// Plan until the body center crosses this x, meters.
    #[arg(long)]
    target_x: Option<f64>,
    /// Spacing of cost samples along the body middle line, meters.
    #[arg(long)]
    cost_sample_step: Option<f64>,
    /// Alternative branch heads kept between steps (1 = plain greedy).
    #[arg(long)]
    beam_width: Option<usize>,
}

impl SearchArgs {
    fn resolve(&self) -> SearchSettings {
        let mut s = SearchSettings::default();
        if let Some(v) = self.dx {
            s.dx = v;
        }
        if let Some(v) = self.dh {
            s.dh = v;
        }
        if let Some(v) = self.h_samples {
            s.h_samples = v;
        }
        if let Some(v) = self.target_x {
            s.target_x = v;
        }
        if let Some(v) = self.cost_sample_step {
            s.cost_sample_step = v;
        }
        if let Some(v) = self.beam_width {
            s.beam_width = v;
        }
        s
    }
}

#[derive(Args)]
struct PlanArgs {
    /// Input elevation map (the raw terrain, not the inflated map).
    #[arg(long)]
    map: PathBuf,
    /// Precomputed inflated map; inflated on the fly from `--map` with the
    /// robot's wheel radius when omitted.
    #[arg(long)]
    inflated: Option<PathBuf>,
    /// Output path file.
    #[arg(long)]
    out: PathBuf,
    /// World x of the start body center, meters.
    #[arg(long, default_value_t = 0.0)]
    start_x: f64,
    /// World y of the start body center, meters.
    #[arg(long, default_value_t = 0.0)]
    start_y: f64,
    /// Dump every enumerated candidate as line-delimited records here.
    #[arg(long)]
    debug_candidates: Option<PathBuf>,
    #[command(flatten)]
    robot: RobotArgs,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum DisturbanceArg {
    None,
    YawDrift,
    Noise,
}

#[derive(Args)]
struct SimulateArgs {
    /// Input path file produced by `plan` or `sweep`.
    #[arg(long)]
    path: PathBuf,
    /// Output report directory (created if needed); receives
    /// `position_bias.csv` and `orientation_error.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Disturbance model applied at every tick.
    #[arg(long, value_enum, default_value_t = DisturbanceArg::None)]
    disturbance: DisturbanceArg,
    /// Yaw drift per tick for `--disturbance yaw-drift`, radians.
    #[arg(long, default_value_t = 0.01)]
    drift: f64,
    /// Position noise standard deviation for `--disturbance noise`, meters.
    #[arg(long, default_value_t = 0.001)]
    sigma: f64,
    /// RNG seed; required for any stochastic disturbance.
    #[arg(long)]
    seed: Option<u64>,
    /// Feed the pitch-slip offset forward instead of letting the tracking
    /// point fall behind.
    #[arg(long)]
    compensate_pitch: bool,
    /// Control rate, ticks per second.
    #[arg(long)]
    tick_hz: Option<f64>,
    /// Commanded body-center speed, meters per second.
    #[arg(long)]
    speed: Option<f64>,
    /// Reach radius for retiring a target, meters.
    #[arg(long)]
    reach: Option<f64>,
    /// Fraction of the yaw error removed per tick.
    #[arg(long)]
    yaw_gain: Option<f64>,
    /// Hard cap on simulated ticks.
    #[arg(long)]
    ticks_max: Option<usize>,
    /// Robot parameter config file; the path file's embedded parameters
    /// are used when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Output directory; receives one `<kind>_<rot>.path` per case,
    /// per-case report directories under `reports/`, and `summary.csv`.
    #[arg(long)]
    out: PathBuf,
    /// RNG seed recorded in the summary and used for noisy replays.
    #[arg(long)]
    seed: u64,
    /// Position noise standard deviation for the replays, meters;
    /// 0 replays noiselessly.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[command(flatten)]
    robot: RobotArgs,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct ParamsArgs {
    /// Print the default robot parameters as a config file to stdout.
    #[arg(long)]
    dump: bool,
}

/// A failure ready for the shell: exit code plus the single stderr line.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: format!("error: invalid-params: {}", message.into()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, category) = match &e {
            Error::InvalidParams(_) => (2, "invalid-params"),
            Error::OutOfBounds { .. } => (3, "out-of-bounds"),
            Error::NoContact { .. } => (3, "no-contact"),
            Error::PunctureAtStart { .. } => (3, "puncture-at-start"),
            Error::InfeasibleStart(_) => (3, "infeasible-start"),
            Error::DeadEnd { .. } => (3, "dead-end"),
            Error::EmptyPath => (3, "empty-path"),
            Error::Io { .. } => (4, "io"),
            Error::Parse { .. } => (4, "parse"),
            Error::InvalidMap(_) => (4, "invalid-map"),
            Error::InvalidMorphology(_) => (4, "invalid-morphology"),
        };
        Failure {
            code,
            message: format!("error: {category}: {e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::GenMap(args) => cmd_gen_map(args),
        Cmd::Inflate(args) => cmd_inflate(args),
        Cmd::Plan(args) => cmd_plan(args),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Params(args) => cmd_params(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn build_spec(args: &GenMapArgs) -> ObstacleSpec {
    let mut spec = ObstacleSpec::new(args.kind.to_kind(), args.rot);
    if let Some(v) = args.axis_distance {
        spec.axis_distance = v;
    }
    if let Some(v) = args.obstacle_height {
        spec.obstacle_height = v;
    }
    if let Some(v) = args.slope_run {
        spec.slope_run = v;
    }
    if let Some(v) = args.extent_x {
        spec.map_extent.0 = v;
    }
    if let Some(v) = args.extent_y {
        spec.map_extent.1 = v;
    }
    if let Some(v) = args.resolution {
        spec.resolution = v;
    }
    if let Some(v) = args.origin_x {
        spec.origin.0 = v;
    }
    if let Some(v) = args.origin_y {
        spec.origin.1 = v;
    }
    spec
}

fn cmd_gen_map(args: GenMapArgs) -> Result<(), Failure> {
    if args.rot > 40.0 {
        eprintln!(
            "warning: rotation {} deg is outside the standard sweep range [0, 40] deg",
            args.rot
        );
    }
    let spec = build_spec(&args);
    let map = generate_obstacle(&spec)?;
    save_map(&map, &args.out, MapFormat::from_path(&args.out))?;
    Ok(())
}

fn cmd_inflate(args: InflateArgs) -> Result<(), Failure> {
    let map = load_map(&args.input, MapFormat::from_path(&args.input))?;
    let inflated = inflate(&map, args.radius)?;
    save_inflated(&inflated, &args.out, MapFormat::from_path(&args.out))?;
    Ok(())
}

/// Formats one traced candidate as a line-delimited record.
fn candidate_line(rec: &CandidateRecord) -> String {
    let rejection = match &rec.rejection {
        Some(r) => format!("{r:?}"),
        None => "-".into(),
    };
    format!(
        "step={} side={} dh_index={} pitch={} roll={} cost={} chosen={} rejection={}",
        rec.step_index,
        rec.side,
        rec.dh_index,
        rec.pitch,
        rec.roll,
        rec.cost,
        rec.chosen,
        rejection
    )
}

/// Writes `contents` to `path` via a sibling temp file and an atomic
/// rename, so failures never leave a partial artifact behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "out".into())
        )),
        None => PathBuf::from(format!(
            ".{}.tmp",
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "out".into())
        )),
    };
    let mut file = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn cmd_plan(args: PlanArgs) -> Result<(), Failure> {
    let robot = args.robot.resolve()?;
    let settings = args.search.resolve();
    let terrain = load_map(&args.map, MapFormat::from_path(&args.map))?;
    let d = match &args.inflated {
        Some(path) => load_inflated(path, MapFormat::from_path(path))?,
        None => inflate(&terrain, robot.wheel_radius)?,
    };
    let start = level_start(args.start_x, args.start_y, &d, &robot, &settings.contact)?;
    let path = match &args.debug_candidates {
        Some(trace_path) => {
            let mut trace = Vec::new();
            let path = plan_traced(&start, &terrain, &d, &robot, &settings, Some(&mut trace))?;
            let mut out = String::new();
            for rec in &trace {
                writeln!(out, "{}", candidate_line(rec)).expect("string writes cannot fail");
            }
            write_atomic(trace_path, &out)?;
            path
        }
        None => plan(&start, &terrain, &d, &robot, &settings)?,
    };
    export_path(&path, &args.out)?;
    println!("steps={} total_cost={}", path.len(), path.total_cost());
    Ok(())
}

fn resolve_disturbance(
    disturbance: DisturbanceArg,
    drift: f64,
    sigma: f64,
    seed: Option<u64>,
) -> Result<DisturbanceSpec, Failure> {
    match disturbance {
        DisturbanceArg::None => Ok(DisturbanceSpec::None),
        DisturbanceArg::YawDrift => Ok(DisturbanceSpec::YawDrift {
            rad_per_tick: drift,
        }),
        DisturbanceArg::Noise => {
            let seed =
                seed.ok_or_else(|| Failure::usage("--seed is required with --disturbance noise"))?;
            Ok(DisturbanceSpec::PositionNoise { sigma, seed })
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let path = import_path(&args.path)?;
    let robot = match &args.params {
        Some(file) => RobotParams::from_config_file(file)?,
        None => path.provenance.robot.clone(),
    };
    let mut settings = FollowSettings {
        compensate_pitch: args.compensate_pitch,
        ..FollowSettings::default()
    };
    if let Some(v) = args.tick_hz {
        settings.tick_hz = v;
    }
    if let Some(v) = args.speed {
        settings.speed = v;
    }
    if let Some(v) = args.reach {
        settings.reach_radius = v;
    }
    if let Some(v) = args.yaw_gain {
        settings.yaw_gain = v;
    }
    if let Some(v) = args.ticks_max {
        settings.ticks_max = v;
    }
    let disturbance = resolve_disturbance(args.disturbance, args.drift, args.sigma, args.seed)?;
    let report = follow(&path, &robot, &settings, &disturbance)?;
    write_report(&report, &args.out)?;
    println!(
        "completed={} ticks={} final_position_error={}",
        report.completed, report.ticks_used, report.summary.final_position_error
    );
    Ok(())
}

/// One row of the sweep summary.
struct SweepRow {
    kind: ObstacleKind,
    rotation_deg: u32,
    feasible: bool,
    steps: usize,
    total_cost: f64,
    followed: bool,
    ticks_used: usize,
    final_position_error: f64,
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let robot = args.robot.resolve()?;
    let settings = args.search.resolve();
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let disturbance = if args.sigma > 0.0 {
        DisturbanceSpec::PositionNoise {
            sigma: args.sigma,
            seed: args.seed,
        }
    } else {
        DisturbanceSpec::None
    };

    let mut rows = Vec::new();
    for kind in [ObstacleKind::Step, ObstacleKind::Ramp, ObstacleKind::InverseRamp] {
        for rot in SWEEP_ROTATIONS {
            let case = format!("{}_{}", kind.name(), rot);
            let spec = ObstacleSpec::new(kind, rot as f64);
            let terrain = generate_obstacle(&spec)?;
            let d = inflate(&terrain, robot.wheel_radius)?;
            let mut row = SweepRow {
                kind,
                rotation_deg: rot,
                feasible: false,
                steps: 0,
                total_cost: 0.0,
                followed: false,
                ticks_used: 0,
                final_position_error: 0.0,
            };
            match plan_case(&terrain, &d, &robot, &settings) {
                Ok(path) => {
                    export_path(&path, &args.out.join(format!("{case}.path")))?;
                    row.feasible = true;
                    row.steps = path.len();
                    row.total_cost = path.total_cost();
                    let report = follow(&path, &robot, &FollowSettings::default(), &disturbance)?;
                    write_report(&report, &args.out.join("reports").join(&case))?;
                    row.followed = report.completed;
                    row.ticks_used = report.ticks_used;
                    row.final_position_error = report.summary.final_position_error;
                }
                Err(e) if infeasibility(&e) => {
                    eprintln!("warning: case {case} is infeasible: {e}");
                }
                Err(e) => return Err(e.into()),
            }
            println!(
                "case {case}: feasible={} followed={}",
                row.feasible as u8, row.followed as u8
            );
            rows.push(row);
        }
    }

    let mut summary = format!("# seed={}\n", args.seed);
    summary.push_str(
        "kind,rotation_deg,feasible,steps,total_cost,followed,ticks_used,final_position_error\n",
    );
    for row in &rows {
        writeln!(
            summary,
            "{},{},{},{},{},{},{},{}",
            row.kind.name(),
            row.rotation_deg,
            row.feasible as u8,
            row.steps,
            row.total_cost,
            row.followed as u8,
            row.ticks_used,
            row.final_position_error
        )
        .expect("string writes cannot fail");
    }
    write_atomic(&args.out.join("summary.csv"), &summary)?;
    Ok(())
}

/// Plans one sweep case from the conventional start at the origin.
fn plan_case(
    terrain: &flipperplan::terrain::ElevationMap,
    d: &InflatedMap,
    robot: &RobotParams,
    settings: &SearchSettings,
) -> Result<flipperplan::path_search::PlanPath, Error> {
    let start = level_start(0.0, 0.0, d, robot, &settings.contact)?;
    plan(&start, terrain, d, robot, settings)
}

/// Whether an error means "this case has no plan" rather than a broken
/// invocation; such cases become zero rows in the sweep summary.
fn infeasibility(e: &Error) -> bool {
    matches!(
        e,
        Error::DeadEnd { .. }
            | Error::InfeasibleStart(_)
            | Error::NoContact { .. }
            | Error::PunctureAtStart { .. }
            | Error::OutOfBounds { .. }
            | Error::EmptyPath
    )
}

fn cmd_params(args: ParamsArgs) -> Result<(), Failure> {
    if !args.dump {
        return Err(Failure::usage(
            "nothing to do: pass --dump to print the default parameters",
        ));
    }
    print!("{}", RobotParams::default().to_config_string());
    Ok(())
}

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ecodrive::dp::{extract_trajectory, solve, Objective};
use ecodrive::evaluate::{
    eta_sweep, format_sweep, format_table, metrics, monte_carlo_idm, monte_carlo_plan,
    replicate_rng, write_metrics_csv, write_sweep_csv, RunMetrics, SweepDeadline,
};
use ecodrive::idm;
use ecodrive::scenario::{builtin_names, load_scenario, Scenario};
use ecodrive::signals::SignalKind;
use ecodrive::{Error, Trajectory};

mod svg;

const DEFAULT_SEED: u64 = 2018;

#[derive(Parser)]
#[command(
    name = "ecodrive",
    version,
    about = "Eco-driving planner for routes with signalized intersections"
)]
struct Cli {
    /// Worker threads for the solver and Monte-Carlo runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario with dynamic programming and write the trajectory.
    Solve(SolveArgs),
    /// Simulate the modified intelligent driver model.
    Idm(IdmArgs),
    /// Solve over a list of reliabilities.
    Sweep(SweepArgs),
    /// Monte-Carlo signal violation report.
    Evaluate(EvaluateArgs),
    /// Comparison table of saved trajectories.
    Table(TableArgs),
    /// List builtin scenarios.
    Scenarios(ScenariosArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Fuel,
    Time,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Fuel => Objective::Fuel,
            ObjectiveArg::Time => Objective::Time,
        }
    }
}

#[derive(Args)]
struct Reliability {
    /// Chance-constraint reliability in [0, 1].
    #[arg(long, conflicts_with = "deterministic")]
    eta: Option<f64>,
    /// Gate on the base red phase only (eta = 0).
    #[arg(long)]
    deterministic: bool,
}

impl Reliability {
    fn resolve(&self, s: &Scenario) -> ecodrive::Result<f64> {
        let eta = if self.deterministic {
            0.0
        } else {
            self.eta.or(s.solver.eta).unwrap_or(0.0)
        };
        check_eta(eta)?;
        Ok(eta)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Builtin scenario name or path to a scenario file.
    scenario: String,
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    #[command(flatten)]
    reliability: Reliability,
    /// Override the arrival deadline (s).
    #[arg(long)]
    tf: Option<f64>,
    /// Trajectory CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metrics CSV output.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Velocity profile as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct IdmArgs {
    scenario: String,
    /// Seed for the realized signal delays (signals without a delay law use none).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    scenario: String,
    #[arg(long, value_enum, default_value = "fuel")]
    objective: ObjectiveArg,
    /// Comma-separated reliabilities.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    etas: Vec<f64>,
    /// Deadline = minimum-time arrival at the same eta plus this slack (s).
    /// Without it the scenario deadline is used at every eta.
    #[arg(long)]
    slack: Option<f64>,
    /// Directory for sweep.csv and one trajectory per eta.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Controller {
    Idm,
    Fuel,
    Time,
}

#[derive(Args)]
struct EvaluateArgs {
    scenario: String,
    /// Evaluate a saved trajectory open-loop.
    #[arg(long, conflicts_with = "controller")]
    trajectory: Option<PathBuf>,
    /// Controller to plan or simulate when no trajectory is given.
    #[arg(long, value_enum, default_value = "fuel")]
    controller: Controller,
    #[command(flatten)]
    reliability: Reliability,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Per-signal report CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Arrival-time histogram CSV.
    #[arg(long)]
    histogram: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Trajectory CSV files.
    #[arg(required = true, num_args = 1..)]
    runs: Vec<PathBuf>,
    /// Index of the run the others are compared against.
    #[arg(long)]
    baseline: Option<usize>,
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct ScenariosArgs {
    /// Print the named scenario as a scenario file.
    #[arg(long)]
    dump: Option<String>,
}

fn check_eta(eta: f64) -> ecodrive::Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eta {eta} outside [0, 1]")))
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn emit(
    traj: &Trajectory,
    m: &RunMetrics,
    out: Option<&Path>,
    metrics_out: Option<&Path>,
    svg_out: Option<&Path>,
) -> anyhow::Result<()> {
    if let Some(p) = out {
        let mut w = create(p)?;
        traj.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(p) = metrics_out {
        write_metrics_csv(std::slice::from_ref(m), create(p)?)?;
    }
    if let Some(p) = svg_out {
        fs::write(p, svg::velocity_profile(traj))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{}", format_table(std::slice::from_ref(m), None)?);
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> anyhow::Result<()> {
    let mut s = load_scenario(&a.scenario)?;
    let eta = a.reliability.resolve(&s)?;
    if let Some(tf) = a.tf {
        s.route.deadline = tf;
    }
    let objective = a.objective.map_or(s.solver.objective, Objective::from);
    let sol = solve(&s.route, &s.vehicle, &s.grid, objective, eta)?;
    let mut traj = extract_trajectory(&sol, &s.route, &s.vehicle)?;
    traj.header.scenario_hash = s.hash();
    let m = metrics(&traj)?;
    emit(
        &traj,
        &m,
        a.out.as_deref(),
        a.metrics.as_deref(),
        a.svg.as_deref(),
    )
}

fn cmd_idm(a: IdmArgs) -> anyhow::Result<()> {
    let s = load_scenario(&a.scenario)?;
    let mut rng = replicate_rng(a.seed, 0);
    let alphas: Vec<f64> = s
        .route
        .signals
        .iter()
        .map(|sig| match (&sig.kind, &sig.delay) {
            (SignalKind::Signal, Some(d)) => d.sample(&mut rng),
            _ => 0.0,
        })
        .collect();
    let run = idm::simulate(&s.route, &s.vehicle, &s.idm, &alphas)?;
    let mut traj = run.trajectory;
    traj.header.scenario_hash = s.hash();
    let m = metrics(&traj)?;
    for c in run.crossings.iter().filter(|c| c.violated) {
        eprintln!(
            "warning: crossed signal {} at {:.1} s inside the realized red",
            c.signal + 1,
            c.time
        );
    }
    emit(
        &traj,
        &m,
        a.out.as_deref(),
        a.metrics.as_deref(),
        a.svg.as_deref(),
    )
}

fn cmd_sweep(a: SweepArgs) -> anyhow::Result<()> {
    let s = load_scenario(&a.scenario)?;
    for &e in &a.etas {
        check_eta(e)?;
    }
    let deadline = a
        .slack
        .map_or(SweepDeadline::Fixed, |slack| SweepDeadline::Paced { slack });
    let mut points = eta_sweep(
        &s.route,
        &s.vehicle,
        &s.grid,
        a.objective.into(),
        &a.etas,
        deadline,
    )?;
    let hash = s.hash();
    for t in points.iter_mut().filter_map(|p| p.trajectory.as_mut()) {
        t.header.scenario_hash = hash.clone();
    }
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_sweep_csv(&points, create(&dir.join("sweep.csv"))?)?;
        for p in &points {
            if let Some(t) = &p.trajectory {
                let mut w = create(&dir.join(format!("eta_{:.3}.csv", p.eta)))?;
                t.write_csv(&mut w)?;
                w.flush()?;
            }
        }
    }
    if let Some(p) = &a.svg {
        fs::write(p, svg::sweep_plot(&points))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{}", format_sweep(&points));
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> anyhow::Result<()> {
    let s = load_scenario(&a.scenario)?;
    let report = if let Some(path) = &a.trajectory {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let traj = Trajectory::read_csv(BufReader::new(f), &path.display().to_string())?;
        if !traj.header.scenario_hash.is_empty() && traj.header.scenario_hash != s.hash() {
            eprintln!(
                "warning: trajectory was produced for scenario {} but {} hashes to {}",
                traj.header.scenario_hash,
                s.name,
                s.hash()
            );
        }
        monte_carlo_plan(&traj, &s.route, a.samples, a.seed)?
    } else {
        match a.controller {
            Controller::Idm => monte_carlo_idm(&s.route, &s.vehicle, &s.idm, a.samples, a.seed)?,
            Controller::Fuel | Controller::Time => {
                let objective = if matches!(a.controller, Controller::Fuel) {
                    Objective::Fuel
                } else {
                    Objective::Time
                };
                let eta = a.reliability.resolve(&s)?;
                let sol = solve(&s.route, &s.vehicle, &s.grid, objective, eta)?;
                let traj = extract_trajectory(&sol, &s.route, &s.vehicle)?;
                monte_carlo_plan(&traj, &s.route, a.samples, a.seed)?
            }
        }
    };
    if let Some(p) = &a.out {
        report.write_csv(create(p)?)?;
    }
    if let Some(p) = &a.histogram {
        report.write_histogram_csv(create(p)?, 1.0)?;
    }
    print!("{}", report.to_text());
    Ok(())
}

fn cmd_table(a: TableArgs) -> anyhow::Result<()> {
    let mut runs = Vec::new();
    for path in &a.runs {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let traj = Trajectory::read_csv(BufReader::new(f), &path.display().to_string())?;
        runs.push(metrics(&traj)?);
    }
    if let Some(b) = a.baseline {
        if b >= runs.len() {
            return Err(Error::InvalidArgument(format!(
                "baseline {b} out of range for {} runs",
                runs.len()
            ))
            .into());
        }
    }
    let baseline = a.baseline.or(if runs.len() > 1 { Some(0) } else { None });
    print!("{}", format_table(&runs, baseline)?);
    if let Some(p) = &a.metrics {
        write_metrics_csv(&runs, create(p)?)?;
    }
    Ok(())
}

fn cmd_scenarios(a: ScenariosArgs) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    if let Some(name) = a.dump {
        let s = load_scenario(&name)?;
        write!(out, "{}", s.to_toml(None)?)?;
        return Ok(());
    }
    for name in builtin_names() {
        let s = load_scenario(name)?;
        writeln!(out, "{name:<26} {}  {}", s.hash(), s.description)?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Idm(a) => cmd_idm(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Table(a) => cmd_table(a),
        Command::Scenarios(a) => cmd_scenarios(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidArgument(_)
            | Error::Config { .. }
            | Error::Parse { .. }
            | Error::Constraint(_),
        ) => 2,
        Some(Error::Infeasible { .. }) => 3,
        Some(Error::Consistency(_) | Error::NonTermination(_)) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(anyhow::anyhow!(Error::InvalidArgument(
            "--threads must be at least 1".into()
        ))),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")
            .and_then(|pool| pool.install(|| run(cli))),
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

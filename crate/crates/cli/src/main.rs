use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aerocast_core::lcrt::build_lcrt_tree_with_leaves;
use aerocast_core::scenarios::small_group;
use aerocast_core::sim::{transition_request, SimError};
use aerocast_core::sweep::{parse_rate_sweep, run_sweep, sweep_points, to_csv};
use aerocast_core::{DroneId, MulticastTree, PlanError, Planner, Policy, Scenario, Trajectory, TrajectoryKind};
use clap::{Parser, Subcommand, ValueEnum};
use log::{debug, info};
use serde::Serialize;
use thiserror::Error;

mod file;

use file::ScenarioFile;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown drone: {0}")]
    UnknownDrone(String),
    #[error("planning failed: {0}")]
    Planning(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Invalid(_) => 2,
            CliError::Planning(_) => 3,
            CliError::Simulation(_) => 4,
            CliError::UnknownDrone(_) => 5,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidScenario(msg) => CliError::Invalid(msg),
            e @ SimError::PlanningFailure { .. } => CliError::Planning(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "aerocast", version, about = "Seamless mobile-drone transitions for aerial multicast")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a covered trajectory for one mobile drone.
    Plan {
        scenario: PathBuf,
        /// Id of the mobile drone.
        #[arg(long)]
        mobile: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the simulator and print one CSV row per (policy, rate).
    Simulate {
        scenario: PathBuf,
        /// Repeat to run several policies; defaults to the file's policy.
        #[arg(long)]
        policy: Vec<Policy>,
        /// Traffic rates as lo:hi:step in bits/s, inclusive.
        #[arg(long, value_name = "LO:HI:STEP")]
        rate_sweep: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        timestep: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the transmitter overlap graph as DOT.
    OverlapGraph {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario file and report each check.
    Validate { scenario: PathBuf },
    /// Write the built-in nine-drone scenario file.
    Example {
        #[arg(long, default_value_t = Policy::Etta)]
        policy: Policy,
        #[arg(long, default_value_t = 1_024_000.0)]
        rate: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Simulation(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Simulation(format!("cannot write output: {e}")))
        }
    }
}

fn tree_for(scenario: &Scenario) -> Result<MulticastTree, CliError> {
    scenario.validate().map_err(CliError::Invalid)?;
    build_lcrt_tree_with_leaves(&scenario.drones, scenario.radius, &scenario.mobile_ids())
        .map_err(|e| CliError::Invalid(e.to_string()))
}

fn kind_name(kind: TrajectoryKind) -> &'static str {
    match kind {
        TrajectoryKind::Straight => "straight",
        TrajectoryKind::TransitPoint => "transit-point",
        TrajectoryKind::Lens => "lens",
        TrajectoryKind::ForwarderChain => "forwarder-chain",
    }
}

#[derive(Serialize)]
struct PlanReport<'a> {
    mobile: DroneId,
    origin_forwarder: DroneId,
    destination_forwarder: DroneId,
    kind: &'static str,
    path: &'a [DroneId],
    waypoints: &'a [aerocast_core::Point3],
    legs: &'a [Vec<DroneId>],
    total_length: f64,
    extra_distance: f64,
}

impl PlanReport<'_> {
    fn text(&self) -> String {
        let ids = |v: &[DroneId]| v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = format!(
            "mobile {}: forwarder {} -> forwarder {} ({})\n",
            self.mobile, self.origin_forwarder, self.destination_forwarder, self.kind
        );
        if !self.path.is_empty() {
            out += &format!("path {}\n", ids(self.path));
        }
        for p in self.waypoints {
            out += &format!("waypoint {},{},{}\n", p.x, p.y, p.z);
        }
        for (i, cover) in self.legs.iter().enumerate() {
            out += &format!("leg {i}: {}\n", ids(cover));
        }
        out += &format!("total_length {}\nextra_distance {}\n", self.total_length, self.extra_distance);
        out
    }
}

fn plan_one(scenario: &Scenario, tree: &MulticastTree, planner: &Planner, mobile: DroneId) -> Result<(DroneId, Trajectory), CliError> {
    let spec = scenario
        .mobiles
        .iter()
        .find(|m| m.drone == mobile)
        .ok_or_else(|| CliError::UnknownDrone(format!("{mobile} is not a mobile drone of this scenario")))?;
    let failed = |e: PlanError| CliError::Planning(format!("mobile {mobile}: {e}"));
    let req = transition_request(tree, planner, spec).map_err(failed)?;
    let t = planner.plan(&req).map_err(failed)?;
    Ok((req.destination_forwarder, t))
}

fn cmd_plan(path: &Path, mobile: u32, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let file = ScenarioFile::load(path)?;
    let scenario = file.scenario();
    let mobile = DroneId(mobile);
    if !scenario.mobiles.iter().any(|m| m.drone == mobile) {
        return Err(CliError::UnknownDrone(format!("{mobile} is not a mobile drone of this scenario")));
    }
    let tree = tree_for(&scenario)?;
    let planner = Planner::new(&tree, &scenario.drones, scenario.radius);
    let (f_b, t) = plan_one(&scenario, &tree, &planner, mobile)?;
    info!("planned mobile {mobile}: {} waypoints, extra {:.3} m", t.waypoints.len(), t.extra_distance);
    let report = PlanReport {
        mobile,
        origin_forwarder: tree.parent[&mobile],
        destination_forwarder: f_b,
        kind: kind_name(t.kind),
        path: &t.path,
        waypoints: &t.waypoints,
        legs: &t.legs,
        total_length: t.total_length,
        extra_distance: t.extra_distance,
    };
    let text = match format {
        Format::Text => report.text(),
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    };
    emit(out, &text)
}

fn cmd_simulate(
    path: &Path,
    policies: Vec<Policy>,
    rate_sweep: Option<&str>,
    seed: Option<u64>,
    timestep: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let file = ScenarioFile::load(path)?;
    let mut scenario = file.scenario();
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if let Some(dt) = timestep {
        scenario.timestep = dt;
    }
    let rates = match rate_sweep {
        Some(spec) => parse_rate_sweep(spec).map_err(|e| CliError::Parse(format!("--rate-sweep: {e}")))?,
        None => vec![scenario.traffic_rate],
    };
    let policies = if policies.is_empty() { vec![scenario.policy] } else { policies };
    let points = sweep_points(&policies, &rates);
    info!("{}: {} runs", file.scenario_id, points.len());
    let rows = run_sweep(&file.scenario_id, &scenario, &points)?;
    let failed: Vec<String> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| format!("{} @ {}: {e}", r.point.policy, r.point.traffic_rate)))
        .collect();
    emit(out, &to_csv(&rows))?;
    match failed.first() {
        None => Ok(()),
        Some(first) => Err(CliError::Planning(format!("{} run(s) failed; first: {first}", failed.len()))),
    }
}

fn cmd_overlap_graph(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let scenario = ScenarioFile::load(path)?.scenario();
    let tree = tree_for(&scenario)?;
    let planner = Planner::new(&tree, &scenario.drones, scenario.radius);
    debug!("{} transmitters", tree.transmitters().len());
    emit(out, &planner.graph().to_dot())
}

fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let scenario = ScenarioFile::load(path)?.scenario();
    let mut lines = Vec::new();
    let mut failures = 0;
    for check in scenario.checks() {
        match check.result {
            Ok(()) => lines.push(format!("PASS {}", check.name)),
            Err(msg) => {
                failures += 1;
                lines.push(format!("FAIL {}: {msg}", check.name));
            }
        }
    }
    // plannability only makes sense once the tree exists
    if failures == 0 {
        let tree = tree_for(&scenario)?;
        let planner = Planner::new(&tree, &scenario.drones, scenario.radius);
        for spec in &scenario.mobiles {
            let name = format!("plan mobile {}", spec.drone);
            match plan_one(&scenario, &tree, &planner, spec.drone) {
                Ok(_) => lines.push(format!("PASS {name}")),
                Err(e) => {
                    failures += 1;
                    lines.push(format!("FAIL {name}: {e}"));
                }
            }
        }
    }
    emit(None, &(lines.join("\n") + "\n"))?;
    if failures > 0 {
        return Err(CliError::Invalid(format!("{failures} check(s) failed")));
    }
    Ok(())
}

fn cmd_example(policy: Policy, rate: f64, out: Option<&Path>) -> Result<(), CliError> {
    let file = ScenarioFile::from_scenario("small-group", &small_group(policy, rate));
    emit(out, &file.to_toml())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AEROCAST_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan { scenario, mobile, format, out } => cmd_plan(&scenario, mobile, format, out.as_deref()),
        Command::Simulate { scenario, policy, rate_sweep, seed, timestep, out } => {
            cmd_simulate(&scenario, policy, rate_sweep.as_deref(), seed, timestep, out.as_deref())
        }
        Command::OverlapGraph { scenario, out } => cmd_overlap_graph(&scenario, out.as_deref()),
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Example { policy, rate, out } => cmd_example(policy, rate, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aerocast: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

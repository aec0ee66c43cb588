use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use radiomap_wpt::cli_io::{
    parse_plan, parse_scenario, write_evaluation, write_plan, write_reports, write_results,
    write_trace,
};
use radiomap_wpt::{
    compare_designs, evaluate_plan, solve_p1, solve_p1_detailed, sweep, DesignPolicy, Error,
    RobustMode, Scenario, SweepAxis,
};

/// Robust UAV hover planning for wireless power transfer.
#[derive(Debug, Parser)]
#[command(name = "radiomap-wpt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario document (TOML).
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override the search grid resolution, meters.
    #[arg(long = "grid-res", value_name = "METERS")]
    grid_res: Option<f64>,
    /// Override the sampling seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Radiomap,
    Los,
    Plos,
}

impl From<PolicyArg> for DesignPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Radiomap => DesignPolicy::RadioMap,
            PolicyArg::Los => DesignPolicy::AssumeLos,
            PolicyArg::Plos => DesignPolicy::AssumeProbLos,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Closed,
    Sampled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    Separation,
    TxPower,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan hover locations and durations.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "radiomap")]
        policy: PolicyArg,
    },
    /// Score a plan under the true radio map.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Plan document produced by `solve`.
        #[arg(long, value_name = "PATH")]
        plan: PathBuf,
        #[arg(long, value_enum, default_value = "closed")]
        mode: ModeArg,
    },
    /// Plan with every policy and score each under the true radio map.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Compare policies across a range of separations or transmit powers.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated sweep values.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
        #[arg(long, value_enum, default_value = "closed")]
        mode: ModeArg,
        /// Record measured solve times; otherwise the column is zero so
        /// output is reproducible byte for byte.
        #[arg(long)]
        timing: bool,
    },
    /// Emit the dual iteration trace.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "radiomap")]
        policy: PolicyArg,
    },
}

enum Failure {
    Input(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) => Failure::Solver(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn load_scenario(common: &Common) -> Result<Scenario, Failure> {
    let text = read(&common.scenario)?;
    let mut scenario = parse_scenario(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", common.scenario.display())))?;
    if let Some(res) = common.grid_res {
        scenario.solver.grid_resolution = res;
        if let Some(g) = scenario.grid.as_mut() {
            g.resolution = res;
        }
    }
    if let Some(seed) = common.seed {
        scenario.solver.seed = seed;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn mode_for(scenario: &Scenario, mode: ModeArg) -> RobustMode {
    match mode {
        ModeArg::Closed => RobustMode::ClosedForm,
        ModeArg::Sampled => scenario.sampled_mode(),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { common, policy } => {
            let scenario = load_scenario(&common)?;
            let plan = solve_p1(&scenario, policy.into())?;
            emit(&common.out, &write_plan(&plan))
        }
        Command::Evaluate { common, plan, mode } => {
            let scenario = load_scenario(&common)?;
            let text = read(&plan)?;
            let plan = parse_plan(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", plan.display())))?;
            let eval = evaluate_plan(&scenario, &plan, mode_for(&scenario, mode))?;
            emit(&common.out, &write_evaluation(&eval))
        }
        Command::Compare { common } => {
            let scenario = load_scenario(&common)?;
            let reports = compare_designs(&scenario)?;
            emit(&common.out, &write_reports(&reports))
        }
        Command::Sweep {
            common,
            axis,
            values,
            mode,
            timing,
        } => {
            let scenario = load_scenario(&common)?;
            let axis = match axis {
                AxisArg::Separation => SweepAxis::Separation,
                AxisArg::TxPower => SweepAxis::TxPower,
            };
            let mut rows = sweep(&scenario, axis, &values, mode_for(&scenario, mode))?;
            if !timing {
                rows.iter_mut().for_each(|r| r.wall_time_s = 0.0);
            }
            emit(&common.out, &write_results(&rows))
        }
        Command::Trace { common, policy } => {
            let scenario = load_scenario(&common)?;
            let solution = solve_p1_detailed(&scenario, policy.into())?;
            emit(
                &common.out,
                &write_trace(&solution.state.trace, scenario.receivers.len()),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

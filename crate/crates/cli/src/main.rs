use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mobeq_cli::{
    cmd_assign, cmd_gen_grid, cmd_mi_geo, cmd_optimize, parse_weight, CliError, CliResult,
    Failure, OptimizeOptions, Overrides,
};
use mobeq_core::scenario::GridSpec;

/// Mobility equity under mixed compliant and non-compliant traffic.
#[derive(Parser)]
#[command(name = "mobeq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a grid scenario to <out>/scenario.toml
    GenGrid(GridArgs),
    /// Route one scenario and write edge and trip time tables
    Assign {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sweep mode weights and pick the most equitable feasible one
    Optimize {
        #[command(flatten)]
        run: RunArgs,
        /// Upper bound on the private-vehicle travel-time gap, seconds
        #[arg(long)]
        gamma: Option<f64>,
        /// Grid points per weight axis
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Mobility index from isochrone polygons and a POI table
    MiGeo {
        /// Scenario supplying modes, service types and node attributes
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        isochrones: PathBuf,
        #[arg(long)]
        pois: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Interaction rounds [default: scenario value, else 2]
    #[arg(long)]
    rounds: Option<usize>,
    /// Relative-gap stopping tolerance [default: scenario value, else 1e-4]
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads for sweeps; 0 uses every core
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Override the public-transit demand share
    #[arg(long)]
    public_share: Option<f64>,
    /// Override the non-compliance rate of private demand
    #[arg(long)]
    noncompliance: Option<f64>,
    /// Override a mode weight, e.g. --weight public=0.7
    #[arg(long = "weight", value_parser = parse_weight)]
    weights: Vec<(String, f64)>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            rounds: self.rounds,
            tol: self.tol,
            public_share: self.public_share,
            noncompliance: self.noncompliance,
            weights: self.weights.clone(),
        }
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    out: PathBuf,
    /// TOML file with grid parameters; flags below override it
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    no_diagonals: bool,
    /// Straight link length, meters
    #[arg(long)]
    edge_length: Option<f64>,
    /// Free-flow speed, meters per second
    #[arg(long)]
    speed: Option<f64>,
    /// Link capacity, vehicles per hour
    #[arg(long)]
    capacity: Option<f64>,
    /// Comma-separated origin node ids
    #[arg(long, value_delimiter = ',')]
    origins: Option<Vec<usize>>,
    /// Comma-separated destination node ids
    #[arg(long, value_delimiter = ',')]
    destinations: Option<Vec<usize>>,
    /// Total demand of every trip, passengers per hour
    #[arg(long)]
    demand: Option<f64>,
}

impl GridArgs {
    fn spec(&self) -> CliResult<GridSpec> {
        let mut spec = match &self.spec {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::new(Failure::Parse, format!("{}: {e}", path.display()))
                })?;
                toml::from_str(&text).map_err(|e| {
                    CliError::new(Failure::Parse, format!("{}: {e}", path.display()))
                })?
            }
            None => GridSpec::default(),
        };
        if let Some(v) = self.rows {
            spec.rows = v;
        }
        if let Some(v) = self.cols {
            spec.cols = v;
        }
        if self.no_diagonals {
            spec.diagonals = false;
        }
        if let Some(v) = self.edge_length {
            spec.edge_length = v;
        }
        if let Some(v) = self.speed {
            spec.speed = v;
        }
        if let Some(v) = self.capacity {
            spec.capacity = v;
        }
        if let Some(v) = &self.origins {
            let keep = spec.origins.len() == v.len();
            spec.origins = v.clone();
            if !keep {
                let n = v.len();
                let d = spec.origin_demand.first().copied().unwrap_or(0.0);
                spec.origin_demand = vec![d; n];
                spec.origin_population = vec![1000.0; n];
                spec.origin_price_sensitivity = vec![0.0; n];
            }
        }
        if let Some(v) = &self.destinations {
            if spec.destination_services.len() != v.len() {
                spec.destination_services.clear();
            }
            spec.destinations = v.clone();
        }
        if let Some(d) = self.demand {
            spec.origin_demand = vec![d; spec.origins.len()];
        }
        Ok(spec)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenGrid(args) => {
            let path = cmd_gen_grid(&args.spec()?, &args.out)?;
            println!("{}", path.display());
        }
        Command::Assign { run } => {
            cmd_assign(&run.scenario, &run.overrides(), &run.out)?;
        }
        Command::Optimize {
            run,
            gamma,
            resolution,
        } => {
            let options = OptimizeOptions {
                overrides: run.overrides(),
                gamma,
                resolution,
                jobs: run.jobs,
            };
            cmd_optimize(&run.scenario, &options, &run.out)?;
        }
        Command::MiGeo {
            scenario,
            isochrones,
            pois,
            out,
        } => {
            cmd_mi_geo(&scenario, &isochrones, &pois, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let err = CliError::new(Failure::Usage, e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(Failure::Usage.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.kind.exit_code() as u8)
        }
    }
}

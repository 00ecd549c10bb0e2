use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jape_harness::{
    crosscheck, emit_report, monte_carlo, run_scenario, simulate, write_simulation, Campaign, EstimatorChoice,
    HarnessError, Result, ScenarioConfig, DEFAULT_CONFIG,
};

/// Joint INS/GNSS attitude, sensor-bias and lever-arm estimation on
/// simulated data.
#[derive(Parser)]
#[command(name = "jape", version)]
struct Cli {
    /// Print the default scenario configuration and exit.
    #[arg(long)]
    print_default_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct Scenario {
    /// Scenario file (TOML). Overrides --preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario: default, velocity-noise, consumer, noise-free.
    #[arg(long, default_value = "default")]
    preset: String,
    /// Seed base; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Scenario length, s.
    #[arg(long)]
    duration: Option<f64>,
    /// Estimators to run: ra-jape, ba-jape, ekf or all. Repeatable.
    #[arg(long, value_enum)]
    estimator: Vec<EstimatorArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EstimatorArg {
    RaJape,
    BaJape,
    Ekf,
    All,
}

impl Scenario {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut c = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::preset(&self.preset)?,
        };
        if let Some(s) = self.seed {
            c.seed_base = s;
        }
        if let Some(d) = self.duration {
            c.duration_s = d;
        }
        if !self.estimator.is_empty() {
            c.estimators = self
                .estimator
                .iter()
                .map(|e| match e {
                    EstimatorArg::RaJape => EstimatorChoice::RaJape,
                    EstimatorArg::BaJape => EstimatorChoice::BaJape,
                    EstimatorArg::Ekf => EstimatorChoice::Ekf,
                    EstimatorArg::All => EstimatorChoice::All,
                })
                .collect();
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write simulated IMU, GNSS and truth logs of one run.
    Simulate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
    /// Run the selected estimators on one simulated run and write its report.
    Estimate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        run: usize,
    },
    /// Run a Monte Carlo campaign and write per-run series and the summary.
    Montecarlo {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Number of runs; defaults to the configured count.
        #[arg(long)]
        runs: Option<usize>,
        /// Worker threads. Results do not depend on this.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare recursive and batch estimates of one run; fails above 1e-8.
    Crosscheck {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value_t = 0)]
        run: usize,
        /// Compare every this many epochs.
        #[arg(long, default_value_t = 50)]
        every: usize,
    },
}

const CROSSCHECK_TOLERANCE: f64 = 1e-8;

fn list(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Simulate { scenario, out, run } => {
            let sim = simulate(&scenario.load()?, run)?;
            list(&write_simulation(&sim, &out)?);
        }
        Command::Estimate { scenario, out, run } => {
            let config = scenario.load()?;
            let report = run_scenario(&config, run)?;
            let campaign = Campaign {
                config,
                runs: vec![report],
            };
            list(&emit_report(&campaign, &out)?);
            print!("{}", jape_harness::render_table(&jape_harness::summarize(&campaign)?));
        }
        Command::Montecarlo {
            scenario,
            out,
            runs,
            jobs,
        } => {
            let mut config = scenario.load()?;
            if let Some(n) = runs {
                config.runs = n;
            }
            let campaign = monte_carlo(&config, jobs)?;
            list(&emit_report(&campaign, &out)?);
            print!("{}", jape_harness::render_table(&jape_harness::summarize(&campaign)?));
        }
        Command::Crosscheck { scenario, run, every } => {
            let r = crosscheck(&scenario.load()?, run, every)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            return Ok(r.epochs_compared > 0 && r.max_difference <= CROSSCHECK_TOLERANCE);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.print_default_config {
        print!("{DEFAULT_CONFIG}");
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no subcommand given; see --help");
        return ExitCode::from(2);
    };
    match execute(command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            report_error(&e);
            ExitCode::FAILURE
        }
    }
}

fn report_error(e: &HarnessError) {
    eprintln!("error: {e}");
}

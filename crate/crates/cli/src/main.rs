use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use riso_core::adhesion::AdhesiveParams;
use riso_core::characterize::{characterize, write_curve_csv, Sweep, SweepKind};
use riso_core::control::{ControllerKind, RationalityModel};
use riso_core::experiment::{run_trials_with, Execution, TrialConfig};
use riso_core::scenario::Scenario;
use riso_server::{Server, ServerConfig, DEFAULT_PORT};

#[derive(Parser, Debug)]
#[command(name = "riso-sim", version, about = "Rigid-soft gripper simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Force capacity against one surface property.
    Characterize(CharacterizeArgs),
    /// Batch of episodes; writes metrics.csv and summary.json.
    Run(RunArgs),
    /// Check a scenario file.
    Validate {
        #[arg(long)]
        scenario: String,
    },
    /// Serve live sessions over TCP.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct CharacterizeArgs {
    #[arg(long, value_parser = parse_sweep)]
    sweep: SweepKind,
    /// Evenly spaced points over the sweep range, ends included.
    #[arg(long, default_value_t = 21)]
    points: usize,
    /// Range start, SI units (m, 1/m or void fraction). Defaults per sweep.
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    stop: Option<f64>,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Bundled scenario name or path to a scenario JSON file.
    #[arg(long, default_value = "household15")]
    scenario: String,
    #[arg(long, value_parser = parse_controller)]
    controller: ControllerKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Rationality assumed by the intent model.
    #[arg(long, default_value_t = 5.0, value_parser = parse_beta)]
    beta: f64,
    /// Concentration of the simulated operator's commands; "inf" aims exactly.
    #[arg(long, default_value_t = 5.0, value_parser = parse_beta)]
    beta_human: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Run episodes one after another even when built with thread support.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// Extra scenario (name or path) offered next to the bundled ones.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5.0, value_parser = parse_beta)]
    beta: f64,
    /// Milliseconds between ticks.
    #[arg(long, default_value_t = 50)]
    tick_ms: u64,
    /// Episode log CSV, appended to.
    #[arg(long, default_value = "episodes.csv")]
    out: PathBuf,
}

fn parse_controller(s: &str) -> Result<ControllerKind, String> {
    s.parse().map_err(|e: riso_core::control::UnknownController| e.to_string())
}

fn parse_sweep(s: &str) -> Result<SweepKind, String> {
    s.parse()
}

fn parse_beta(s: &str) -> Result<f64, String> {
    let b: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if b.is_nan() || b < 0.0 {
        return Err(format!("must be >= 0, got {s}"));
    }
    Ok(b)
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RISO_SIM_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Characterize(a) => cmd_characterize(a),
        Command::Run(a) => cmd_run(a),
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Serve(a) => cmd_serve(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg)) => {
            eprintln!("riso-sim: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn load(scenario: &str) -> Result<Scenario, Failure> {
    Scenario::load(scenario).map_err(|e| Failure(format!("scenario {scenario}: {e}")))
}

fn cmd_characterize(a: CharacterizeArgs) -> Result<(), Failure> {
    let mut sweep = Sweep::new(a.sweep, a.points);
    sweep.start = a.start.unwrap_or(sweep.start);
    sweep.stop = a.stop.unwrap_or(sweep.stop);
    if !(sweep.start.is_finite() && sweep.stop.is_finite()) {
        return Err(Failure("sweep range must be finite".into()));
    }
    let rows = characterize(&sweep, &AdhesiveParams::calibrated(), Execution::default());
    match &a.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            write_curve_csv(&rows, BufWriter::new(file))?;
        }
        None => write_curve_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let scenario = load(&a.scenario)?;
    let mut config = TrialConfig::new(a.controller, a.trials, a.seed);
    config.model = RationalityModel::new(a.beta);
    config.profile.beta_h = a.beta_human;
    let exec = if a.sequential { Execution::Sequential } else { Execution::default() };
    let table = run_trials_with(&scenario, &config, exec);

    fs::create_dir_all(&a.out).map_err(|e| Failure(format!("{}: {e}", a.out.display())))?;
    write(&a.out.join("metrics.csv"), table.to_csv_string().as_bytes())?;
    let summary = table.summary_json();
    write(&a.out.join("summary.json"), summary.as_bytes())?;
    print!("{summary}");
    Ok(())
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let mut f = File::create(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    f.write_all(bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn cmd_validate(scenario: &str) -> Result<(), Failure> {
    let s = load(scenario)?;
    println!("{scenario}: ok, {} objects, {} pads", s.objects.len(), s.gripper.n_pads);
    Ok(())
}

fn cmd_serve(a: ServeArgs) -> Result<(), Failure> {
    let mut config = ServerConfig {
        addr: format!("{}:{}", a.host, a.port).parse().map_err(|e| Failure(format!("address {}:{}: {e}", a.host, a.port)))?,
        tick_interval: Duration::from_millis(a.tick_ms),
        seed: a.seed,
        model: RationalityModel::new(a.beta),
        log_path: Some(a.out),
        ..ServerConfig::default()
    };
    if let Some(name) = &a.scenario {
        let s = load(name)?;
        let key = Path::new(name).file_stem().map_or_else(|| name.clone(), |s| s.to_string_lossy().into_owned());
        config.scenarios.insert(key, s);
    }
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let server = Server::bind(config).await.map_err(|e| Failure(format!("bind {}:{}: {e}", a.host, a.port)))?;
        let addr = server.local_addr()?;
        eprintln!("riso-sim: serving on {addr}");
        tokio::select! {
            r = server.run() => r.map_err(Failure::from),
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    })
}

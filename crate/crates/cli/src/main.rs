use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zalmtwin_cli::params::SourceArgs;
use zalmtwin_cli::sweep::{run_sweep, write_csv, write_json, Format, Scale, SweepConfig, SweepMetric, SweptParameter};
use zalmtwin_cli::validate::{oracle_grid, run_validation};
use zalmtwin_service::{compute_metrics, compute_spin_dm, ApiError};

#[derive(Parser)]
#[command(name = "zalmtwin", version, about = "Cascaded entanglement source model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one parameter and tabulate metrics.
    Sweep(SweepArgs),
    /// All metrics at one parameter point, as JSON.
    Metrics(SourceArgs),
    /// Memory-loaded two-memory state, as JSON.
    SpinDm(SourceArgs),
    /// Compare the engine with the Fock-space oracle; exit code 2 on failure.
    Validate {
        /// Only the smallest mean photon number of the grid.
        #[arg(long)]
        quick: bool,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "mean_photon")]
    param: SweptParameter,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long, value_enum, default_value = "linear")]
    scale: Scale,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "pgen")]
    metrics: Vec<SweepMetric>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Add a wall-time column (not reproducible).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    source: SourceArgs,
}

fn sweep(args: SweepArgs) -> Result<(), String> {
    let config = SweepConfig {
        parameter: args.param,
        from: args.from,
        to: args.to,
        steps: args.steps,
        scale: args.scale,
        base: args.source.request(),
        metrics: args.metrics,
        timing: args.timing,
    };
    let rows = run_sweep(&config).map_err(|e| e.to_string())?;
    let out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(File::create(path).map_err(|e| format!("{}: {e}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let out = BufWriter::new(out);
    match args.format {
        Format::Csv => write_csv(&config, &rows, out).map_err(|e| e.to_string()),
        Format::Json => write_json(&config, &rows, out).map_err(|e| e.to_string()),
    }
}

fn print_json<T: serde::Serialize>(result: Result<T, ApiError>) -> Result<(), String> {
    match result {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("serialisable"));
            Ok(())
        }
        Err(e) => Err(serde_json::to_string(&e.body).expect("serialisable")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Metrics(source) => print_json(compute_metrics(&source.request())),
        Command::SpinDm(source) => print_json(compute_spin_dm(&source.request())),
        Command::Validate { quick } => {
            let mut grid = oracle_grid();
            if quick {
                grid.retain(|p| p.mean_photon == 0.01);
            }
            let report = run_validation(&grid);
            print!("{}", report.render());
            if !report.passed() {
                return ExitCode::from(2);
            }
            Ok(())
        }
        Command::Serve { bind, port } => {
            let addr = SocketAddr::new(bind, port);
            eprintln!("listening on http://{addr}");
            tokio::runtime::Runtime::new()
                .map_err(|e| e.to_string())
                .and_then(|rt| rt.block_on(zalmtwin_service::serve(addr)).map_err(|e| e.to_string()))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use reserve_spacing::cli::config::{MatrixFormat, ParamOverrides, Quantity, RunConfig, SimMode};
use reserve_spacing::cli::{load_config, run, CliError, Command, Preset, EXIT_IO};
use reserve_spacing::ModelVariant;

/// Optimal spacing of two marine reserves under colonisation and catastrophes.
#[derive(Parser)]
#[command(name = "reserve-spacing", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Print the stage matrices E, L, C, R and the composed matrix A.
    Matrix(Opts),
    /// Evaluate a quantity over a distance grid and emit `series,d,value` CSV.
    Sweep(Opts),
    /// Find the viability-maximising distance and emit JSON.
    Optimize(Opts),
    /// Monte Carlo estimate next to its analytic value, as JSON.
    Simulate(Opts),
}

#[derive(Args)]
struct Opts {
    /// JSON config file, or `-` for standard input.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter preset: fig3, fig5, fig6, fig8 or fig9.
    #[arg(long)]
    preset: Option<Preset>,
    /// Output path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    variant: Option<ModelVariant>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Inter-reserve distance (matrix, simulate).
    #[arg(long)]
    d: Option<f64>,

    /// quasi_extinction_rate, equilibrium_persistence, colonisation_probability
    /// or shared_catastrophe_probability.
    #[arg(long, value_parser = parse_quantity)]
    objective: Option<Quantity>,
    #[arg(long)]
    d_min: Option<f64>,
    #[arg(long)]
    d_max: Option<f64>,
    /// Sweep grid size.
    #[arg(long)]
    n_points: Option<usize>,
    /// Coarse grid size for the optimiser.
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    plateau_eps: Option<f64>,

    /// Comma-separated subset of E,L,C,R,A.
    #[arg(long, value_delimiter = ',')]
    matrices: Option<Vec<String>>,
    /// text or json.
    #[arg(long, value_parser = parse_format)]
    format: Option<MatrixFormat>,

    /// survival or stationary.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<SimMode>,
    #[arg(long)]
    n_reps: Option<u64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Initial distribution over 0, 1, 2 occupied reserves, e.g. `0,0,1`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    initial: Option<Vec<f64>>,
}

fn parse_enum<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_quantity(s: &str) -> Result<Quantity, String> {
    parse_enum(s)
}

fn parse_format(s: &str) -> Result<MatrixFormat, String> {
    parse_enum(s)
}

fn parse_mode(s: &str) -> Result<SimMode, String> {
    parse_enum(s)
}

impl Opts {
    fn overrides(&self) -> RunConfig {
        let params = ParamOverrides {
            r: self.r,
            mu: self.mu,
            alpha: self.alpha,
            a: self.a,
            b: self.b,
        };
        RunConfig {
            variant: self.variant,
            params: (params != ParamOverrides::default()).then_some(params),
            d: self.d,
            objective: self.objective,
            d_min: self.d_min,
            d_max: self.d_max,
            n_points: self.n_points,
            grid_points: self.grid_points,
            tol: self.tol,
            plateau_eps: self.plateau_eps,
            matrices: self.matrices.clone(),
            format: self.format,
            mode: self.mode,
            n_reps: self.n_reps,
            horizon: self.horizon,
            burn_in: self.burn_in,
            seed: self.seed,
            initial: self.initial.as_ref().map(|v| [v[0], v[1], v[2]]),
            ..RunConfig::default()
        }
    }
}

fn execute(command: Command, opts: &Opts) -> Result<(), CliError> {
    let cfg = load_config(opts.preset, opts.config.as_deref(), opts.overrides())?;
    let output = run(command, &cfg)?;
    match &opts.out {
        Some(path) => std::fs::write(path, output)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(output.as_bytes()).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() == ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match &cli.command {
        Sub::Matrix(o) => (Command::Matrix, o),
        Sub::Sweep(o) => (Command::Sweep, o),
        Sub::Optimize(o) => (Command::Optimize, o),
        Sub::Simulate(o) => (Command::Simulate, o),
    };
    match execute(command, opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = u8::try_from(e.exit_code()).unwrap_or(EXIT_IO as u8);
            ExitCode::from(code)
        }
    }
}

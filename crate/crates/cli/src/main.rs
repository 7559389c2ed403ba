//! `multidqi` experiment runner.

mod analysis;
mod config;
mod hamiltonian;
mod output;
mod simulation;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multidqi::field::DEFAULT_ENUMERATION_CAP;
use multidqi::ErrorClass;
use thiserror::Error;

use config::{ConfigError, ExperimentConfig, Params};
use output::RunOutput;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] multidqi::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => 1,
                ErrorClass::InvariantViolation => 2,
                ErrorClass::CapExceeded => 3,
            },
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Declares a parameter struct whose fields are string-valued `--key`
/// options, together with the list of `(key, value)` pairs it carries.
macro_rules! params {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident = $key:literal),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, Args)]
        pub struct $name {
            $($(#[$fmeta])* #[arg(long = $key)] pub $field: Option<String>,)*
        }

        impl $name {
            pub fn keys() -> Vec<String> {
                vec![$($key.to_string()),*]
            }

            pub fn pairs(&self) -> Vec<(String, Option<String>)> {
                vec![$(($key.to_string(), self.$field.clone())),*]
            }
        }
    };
}

params!(GammaParams {
    /// Block weights, comma-separated.
    weights = "g",
    /// Block densities; defaults to equal densities.
    densities = "theta",
    /// Skew κ.
    kappa = "kappa",
    /// Budget grid `start:stop:step` or a list.
    mu_grid = "mu-grid",
});

params!(RegimeParams {
    /// Second-block weights to classify.
    weights = "g",
    /// Two block densities.
    densities = "theta",
    kappa = "kappa",
    /// Degree ratio μ.
    mu = "mu",
    /// Problem size used for the error scale.
    constraints = "m",
});

params!(SpectrumParams {
    /// Block sizes.
    sizes = "sizes",
    /// Block weights.
    weights = "g",
    kappa = "kappa",
    /// Degree budgets to evaluate.
    budgets = "l",
    /// `auto`, `dense` or `power`.
    method = "method",
    /// Also write the sparse matrix at the largest budget.
    dump = "dump",
});

params!(SimulateParams {
    /// Field size.
    modulus = "p",
    /// Number of variables.
    variables = "n",
    /// Number of constraints.
    constraints = "m",
    /// Degree budget.
    budget = "l",
    /// Target set size.
    targets = "r",
    /// Block sizes; defaults to two halves of m.
    sizes = "sizes",
    /// Block weights.
    weights = "g",
});

params!(ConcentrationParams {
    /// Constraints (two equal blocks, square full-rank B).
    constraints = "m",
    weights = "g",
    /// Rectangle starting degrees per block.
    peaks = "peaks",
    /// Rectangle widths per block.
    widths = "widths",
    /// Window half-width ε.
    epsilon = "epsilon",
});

params!(DecodeParams {
    modulus = "p",
    variables = "n",
    constraints = "m",
    budget = "l",
    targets = "r",
    sizes = "sizes",
    weights = "g",
    /// Decoding radius; defaults to l.
    radius = "radius",
    /// File of failing error patterns, one per line.
    failures = "failures",
    /// Monte Carlo samples for the averaged expectation (0 skips).
    samples = "samples",
    /// Prange trials.
    trials = "trials",
    /// Syndrome to decode (Reed–Solomon).
    syndrome = "syndrome",
    /// Error to encode and decode (Reed–Solomon).
    error = "error",
});

params!(OpiParams {
    /// Prime p.
    modulus = "p",
    /// Polynomial dimension n (end-to-end).
    variables = "n",
    /// Weights g.
    weights = "g",
    /// Grid of x = n/p.
    x_grid = "x-grid",
    /// Prange trials.
    trials = "trials",
    /// `alternating` or `random`.
    assignment = "assignment",
});

params!(HamdqiParams {
    /// Hamiltonian file; a random commuting one is generated otherwise.
    hamiltonian = "hamiltonian",
    qubits = "qubits",
    sizes = "sizes",
    weights = "g",
    /// Use independent generators for the random Hamiltonian.
    independent = "independent",
    /// Polynomial coefficients a_0, a_1, ….
    poly = "poly",
    /// Inverse temperature values for the Gibbs check.
    beta = "beta",
    /// Trace-distance target δ.
    delta = "delta",
});

params!(FigureParams {
    /// Weight grid (figures 1 and 2).
    g_grid = "g-grid",
    /// Weights (figures 3 to 5).
    weights = "g",
    /// Budgets μ (figures 1 to 3).
    mu = "mu",
    /// x grid (figures 4 and 5).
    x_grid = "x-grid",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimulateAction {
    /// Direct and Fourier constructions side by side.
    CrossCheck,
    /// Exact expectation against the spectral formula.
    Expectation,
    /// Gram matrix of the block-symmetric states.
    Orthogonality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecodeAction {
    /// Failure profile and the imperfect-decoding bound.
    Profile,
    /// Weighted Prange trials.
    Prange,
    /// Reed–Solomon syndrome decoding.
    Rs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpiAction {
    /// DQI against Prange on the x grid.
    Dominance,
    /// Empirical weighted Prange at finite p.
    Prange,
    /// Small instance through the full Fourier pipeline.
    EndToEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HamdqiAction {
    /// Exact r coefficients per block degree.
    Coefficients,
    /// Dense reference state against the decoded protocol.
    Protocol,
    /// Chebyshev approximation of the Gibbs state.
    Gibbs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Γ functional on a budget grid.
    Gamma(GammaParams),
    /// Two-block scaling regimes.
    Regimes(RegimeParams),
    /// Top eigenvalue of the block-degree spectral matrix.
    Spectrum(SpectrumParams),
    /// Dense simulations of the DQI state.
    Simulate {
        #[arg(value_enum)]
        action: SimulateAction,
        #[command(flatten)]
        params: SimulateParams,
    },
    /// Concentration of rectangular states.
    Concentration(ConcentrationParams),
    /// Decoders: failure profiles, Prange, Reed–Solomon.
    Decode {
        #[arg(value_enum)]
        action: DecodeAction,
        #[command(flatten)]
        params: DecodeParams,
    },
    /// Weighted optimal polynomial intersection.
    Opi {
        #[arg(value_enum)]
        action: OpiAction,
        #[command(flatten)]
        params: OpiParams,
    },
    /// Block Hamiltonian DQI.
    Hamdqi {
        #[arg(value_enum)]
        action: HamdqiAction,
        #[command(flatten)]
        params: HamdqiParams,
    },
    /// Data and plotting script for one figure (1 to 5).
    ReproduceFigure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=5))]
        figure: u8,
        #[command(flatten)]
        params: FigureParams,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gamma(_) => "gamma",
            Command::Regimes(_) => "regimes",
            Command::Spectrum(_) => "spectrum",
            Command::Simulate { .. } => "simulate",
            Command::Concentration(_) => "concentration",
            Command::Decode { .. } => "decode",
            Command::Opi { .. } => "opi",
            Command::Hamdqi { .. } => "hamdqi",
            Command::ReproduceFigure { .. } => "reproduce-figure",
        }
    }

    fn keys_and_pairs(&self) -> (Vec<String>, Vec<(String, Option<String>)>) {
        match self {
            Command::Gamma(p) => (GammaParams::keys(), p.pairs()),
            Command::Regimes(p) => (RegimeParams::keys(), p.pairs()),
            Command::Spectrum(p) => (SpectrumParams::keys(), p.pairs()),
            Command::Simulate { params, .. } => (SimulateParams::keys(), params.pairs()),
            Command::Concentration(p) => (ConcentrationParams::keys(), p.pairs()),
            Command::Decode { params, .. } => (DecodeParams::keys(), params.pairs()),
            Command::Opi { params, .. } => (OpiParams::keys(), params.pairs()),
            Command::Hamdqi { params, .. } => (HamdqiParams::keys(), params.pairs()),
            Command::ReproduceFigure { params, .. } => (FigureParams::keys(), params.pairs()),
        }
    }
}

/// Exact desk-scale experiments for multivariate DQI.
///
/// Parameters may also come from a `key = value` file given with
/// `--config`; command-line values take precedence. Set MULTIDQI_THREADS to
/// cap the worker pool.
#[derive(Debug, Parser)]
#[command(name = "multidqi", version, args_override_self = true)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Enumeration cap for states, layers and decoder tables.
    #[arg(long, global = true)]
    cap: Option<u64>,
    /// Fail unless the dual-distance hypothesis holds.
    #[arg(long, global = true)]
    strict_distance: bool,
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn global_value<T: std::str::FromStr>(
    cli: Option<T>,
    file: &[(usize, String, String)],
    key: &str,
    default: T,
) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = cli {
        return Ok(v);
    }
    match file.iter().find(|(_, k, _)| k == key) {
        Some((_, _, text)) => text.parse().map_err(|e: T::Err| {
            CliError::Config(ConfigError::BadValue {
                key: key.to_string(),
                value: text.clone(),
                reason: e.to_string(),
            })
        }),
        None => Ok(default),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(text) = std::env::var("MULTIDQI_THREADS") else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("MULTIDQI_THREADS must be a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let subcommand = cli.command.name().to_string();
    let file = match &cli.config {
        Some(path) => config::read_config(path)?,
        None => Vec::new(),
    };
    if let Some((_, _, found)) = file.iter().find(|(_, k, _)| k == "subcommand") {
        if *found != subcommand {
            return Err(ConfigError::WrongSubcommand {
                found: found.clone(),
                expected: subcommand,
            }
            .into());
        }
    }
    let (keys, pairs) = cli.command.keys_and_pairs();
    let params = Params::merge(&subcommand, &keys, &file, &pairs)?;
    let strict_file = global_value(None, &file, "strict-distance", false)?;
    let mut config = ExperimentConfig {
        subcommand,
        seed: global_value(cli.seed, &file, "seed", 0)?,
        out: global_value(cli.out, &file, "out", PathBuf::from("multidqi-out"))?,
        cap: global_value(cli.cap, &file, "cap", DEFAULT_ENUMERATION_CAP)?,
        strict_distance: cli.strict_distance || strict_file,
        params,
    };
    let mut out = RunOutput::create(&config.out)?;
    match cli.command {
        Command::Gamma(_) => analysis::gamma(&mut config, &mut out)?,
        Command::Regimes(_) => analysis::regimes(&mut config, &mut out)?,
        Command::Spectrum(_) => analysis::spectrum(&mut config, &mut out)?,
        Command::Simulate { action, .. } => simulation::simulate(action, &mut config, &mut out)?,
        Command::Concentration(_) => simulation::concentration(&mut config, &mut out)?,
        Command::Decode { action, .. } => simulation::decode(action, &mut config, &mut out)?,
        Command::Opi { action, .. } => analysis::opi(action, &mut config, &mut out)?,
        Command::Hamdqi { action, .. } => hamiltonian::hamdqi(action, &mut config, &mut out)?,
        Command::ReproduceFigure { figure, .. } => analysis::reproduce_figure(figure, &mut config, &mut out)?,
    }
    out.finish(&config)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code())
        }
    }
}

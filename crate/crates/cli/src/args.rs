use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

/// Viscosities used by `sweep` when none are given.
pub const DEFAULT_SWEEP_EPS: [f64; 5] = [0.3, 0.25, 0.2, 0.15, 0.1];

const JOBS_ENV: &str = "BURGERS_JOBS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Composite profile, its derivatives and stationary residual.
    Profile,
    /// Newton steady state against the composite.
    Steady,
    /// Smallest eigenvalues of the linearized operator.
    Spectrum,
    /// Relaxation of a perturbed equilibrium.
    Evolve,
    /// Principal eigenvalues over a list of viscosities.
    Sweep,
    /// All checks at once, as a JSON bundle.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Equilibrium used as linearization point or deviation reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Composite,
    Steady,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsSpec {
    Single(f64),
    List(Vec<f64>),
}

impl EpsSpec {
    pub fn values(&self) -> &[f64] {
        match self {
            EpsSpec::Single(e) => std::slice::from_ref(e),
            EpsSpec::List(v) => v,
        }
    }

    pub fn single(&self) -> f64 {
        self.values()[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeSpec {
    Auto,
    Fixed(usize),
}

/// A validated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: f64,
    pub k: f64,
    pub eps: EpsSpec,
    pub n: NodeSpec,
    pub nu: f64,
    /// `None` means `3 / lambda_1`.
    pub t_end: Option<f64>,
    pub dt: f64,
    pub sample_every: usize,
    pub m: usize,
    pub out_path: Option<PathBuf>,
    pub format: Format,
    pub jobs: usize,
    pub allow_small_eps: bool,
    pub equilibrium: Base,
    pub reference: Base,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Parser)]
#[command(
    name = "burgers",
    version,
    about = "Shock-layer equilibria of the viscous Burgers equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Composite profile, its derivatives and stationary residual.
    Profile(Flags),
    /// Newton steady state against the composite.
    Steady(Flags),
    /// Smallest eigenvalues of the linearized operator.
    Spectrum(Flags),
    /// Relaxation of a perturbed equilibrium.
    Evolve(Flags),
    /// Principal eigenvalues over a list of viscosities.
    Sweep(Flags),
    /// All checks at once, as a JSON bundle.
    Report(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Left boundary value; the right one is -alpha.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    alpha: f64,
    /// Layer offset in inner units.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    k: f64,
    /// Viscosity.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "epsilons")]
    epsilon: Option<f64>,
    /// Comma-separated viscosities (sweep).
    #[arg(long, allow_hyphen_values = true)]
    epsilons: Option<String>,
    /// Node count, or "auto" for the resolution rule.
    #[arg(long, default_value = "auto")]
    n: String,
    /// Perturbation amplitude along the principal eigenfunction.
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    nu: f64,
    /// Final time; defaults to 3 / lambda_1.
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = burgers_core::evolution::DEFAULT_DT, allow_hyphen_values = true)]
    dt: f64,
    /// Record a deviation sample every this many steps.
    #[arg(long, default_value_t = burgers_core::evolution::DEFAULT_SAMPLE_EVERY)]
    sample_every: usize,
    /// Number of eigenvalues.
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; csv by default, json for report.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Concurrent sweep rows; BURGERS_JOBS overrides.
    #[arg(long)]
    jobs: Option<usize>,
    /// Compute spectra below the double-precision floor.
    #[arg(long)]
    allow_small_eps: bool,
    /// Linearization point for spectra.
    #[arg(long, value_enum, default_value_t = Base::Composite)]
    equilibrium: Base,
    /// Deviation reference for evolve.
    #[arg(long, value_enum, default_value_t = Base::Composite)]
    reference: Base,
    /// Newton residual tolerance (max norm).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
}

/// Parses `argv` (without the program name), reading `BURGERS_JOBS` from the
/// environment.
pub fn parse_args<S: AsRef<str>>(argv: &[S]) -> Result<RunConfig, CliError> {
    parse_args_with_jobs_env(argv, std::env::var(JOBS_ENV).ok())
}

/// [`parse_args`] with the `BURGERS_JOBS` value supplied explicitly.
pub fn parse_args_with_jobs_env<S: AsRef<str>>(
    argv: &[S],
    jobs_env: Option<String>,
) -> Result<RunConfig, CliError> {
    let cli =
        Cli::try_parse_from(std::iter::once("burgers").chain(argv.iter().map(|s| s.as_ref())))
            .map_err(|e| match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CliError::Info(e.to_string())
                }
                _ => CliError::Usage(e.render().to_string()),
            })?;

    let (command, f) = match cli.command {
        Sub::Profile(f) => (Command::Profile, f),
        Sub::Steady(f) => (Command::Steady, f),
        Sub::Spectrum(f) => (Command::Spectrum, f),
        Sub::Evolve(f) => (Command::Evolve, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Report(f) => (Command::Report, f),
    };

    let eps = match (command, f.epsilon, &f.epsilons) {
        (_, _, Some(list)) if command == Command::Sweep => EpsSpec::List(parse_list(list)?),
        (_, _, Some(_)) => {
            return Err(CliError::Usage(
                "--epsilons is only accepted by sweep; use --epsilon".into(),
            ))
        }
        (Command::Sweep, Some(e), None) => EpsSpec::List(vec![e]),
        (Command::Sweep, None, None) => EpsSpec::List(DEFAULT_SWEEP_EPS.to_vec()),
        (_, Some(e), None) => EpsSpec::Single(e),
        (_, None, None) => EpsSpec::Single(0.1),
    };
    for &e in eps.values() {
        if !(e > 0.0 && e.is_finite()) {
            return Err(CliError::Config(format!(
                "epsilon must be positive, got {e}"
            )));
        }
    }

    let n = match f.n.trim() {
        "auto" => NodeSpec::Auto,
        s => {
            let n: usize = s.parse().map_err(|_| {
                CliError::Usage(format!("--n expects an integer or \"auto\", got {s:?}"))
            })?;
            if n < 3 {
                return Err(CliError::Config(format!("--n must be at least 3, got {n}")));
            }
            NodeSpec::Fixed(n)
        }
    };

    let jobs = match jobs_env.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => s.parse::<usize>().map_err(|_| {
            CliError::Config(format!("{JOBS_ENV} must be a positive integer, got {s:?}"))
        })?,
        None => f.jobs.unwrap_or(1),
    };

    let checks: [(bool, String); 9] = [
        (
            f.alpha.is_finite(),
            format!("alpha must be finite, got {}", f.alpha),
        ),
        (f.k.is_finite(), format!("k must be finite, got {}", f.k)),
        (f.nu.is_finite(), format!("nu must be finite, got {}", f.nu)),
        (
            f.dt > 0.0 && f.dt.is_finite(),
            format!("dt must be positive, got {}", f.dt),
        ),
        (
            f.t_end.is_none_or(|t| t > 0.0 && t.is_finite()),
            format!("t-end must be positive, got {:?}", f.t_end),
        ),
        (
            f.sample_every >= 1,
            "sample-every must be at least 1".into(),
        ),
        (f.m >= 1, "m must be at least 1".into()),
        (jobs >= 1, "jobs must be at least 1".into()),
        (
            f.tol > 0.0 && f.tol.is_finite(),
            format!("tol must be positive, got {}", f.tol),
        ),
    ];
    if let Some((_, msg)) = checks.into_iter().find(|(ok, _)| !ok) {
        return Err(CliError::Config(msg));
    }

    Ok(RunConfig {
        command,
        alpha: f.alpha,
        k: f.k,
        eps,
        n,
        nu: f.nu,
        t_end: f.t_end,
        dt: f.dt,
        sample_every: f.sample_every,
        m: f.m,
        out_path: f.out,
        format: f.format.unwrap_or(match command {
            Command::Report => Format::Json,
            _ => Format::Csv,
        }),
        jobs,
        allow_small_eps: f.allow_small_eps,
        equilibrium: f.equilibrium,
        reference: f.reference,
        tol: f.tol,
        max_iter: f.max_iter,
    })
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse {p:?} in --epsilons")))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage("--epsilons is empty".into()));
    }
    Ok(values)
}
